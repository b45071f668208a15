use super::{Family, MilpInstance, Row, VarKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct RawVar {
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
    pub obj: f64,
}

impl RawVar {
    pub fn binary(obj: f64) -> Self {
        RawVar {
            kind: VarKind::Integer,
            lb: 0.0,
            ub: 1.0,
            obj,
        }
    }

    pub fn continuous(lb: f64, ub: f64, obj: f64) -> Self {
        RawVar {
            kind: VarKind::Continuous,
            lb,
            ub,
            obj,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RawRow {
    pub coefs: Vec<(usize, f64)>,
    pub sense: RawSense,
    pub rhs: f64,
}

impl RawRow {
    pub fn new(coefs: Vec<(usize, f64)>, sense: RawSense, rhs: f64) -> Self {
        RawRow { coefs, sense, rhs }
    }
}

/// Generator output before canonicalization.
#[derive(Debug, Clone)]
pub struct RawInstance {
    pub name: String,
    pub family: Family,
    pub sense: Sense,
    pub vars: Vec<RawVar>,
    pub rows: Vec<RawRow>,
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub instance: MilpInstance,
    /// `provenance[k]` is the raw row that canonical row `k` came from.
    pub provenance: Vec<usize>,
}

pub fn normalize(raw: &RawInstance) -> Result<Normalized> {
    let n = raw.vars.len();
    for (j, v) in raw.vars.iter().enumerate() {
        if v.lb != 0.0 {
            return Err(Error::Normalization(format!(
                "variable {j} has lower bound {} (only 0 is supported)",
                v.lb
            )));
        }
        if v.ub < v.lb {
            return Err(Error::Normalization(format!(
                "variable {j} has empty domain [{}, {}]",
                v.lb, v.ub
            )));
        }
    }
    let flip = if raw.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let obj: Vec<f64> = raw.vars.iter().map(|v| flip * v.obj + 0.0).collect();

    let mut rows = Vec::new();
    let mut provenance = Vec::new();
    for (r, raw_row) in raw.rows.iter().enumerate() {
        if let Some(&(j, _)) = raw_row.coefs.iter().find(|&&(j, _)| j >= n) {
            return Err(Error::Dimension(format!(
                "raw row {r} references variable {j} of {n}"
            )));
        }
        let le = Row::le(raw_row.coefs.clone(), raw_row.rhs);
        match raw_row.sense {
            RawSense::Le => {
                rows.push(le);
                provenance.push(r);
            }
            RawSense::Ge => {
                rows.push(le.negated());
                provenance.push(r);
            }
            RawSense::Eq => {
                let neg = le.negated();
                rows.push(le);
                rows.push(neg);
                provenance.push(r);
                provenance.push(r);
            }
        }
    }

    let instance = MilpInstance {
        name: raw.name.clone(),
        family: raw.family,
        obj,
        kinds: raw.vars.iter().map(|v| v.kind).collect(),
        lb: vec![0.0; n],
        ub: raw.vars.iter().map(|v| v.ub).collect(),
        rows,
    };
    instance.check_shape()?;
    Ok(Normalized {
        instance,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(rows: Vec<RawRow>, sense: Sense, obj: Vec<f64>) -> RawInstance {
        RawInstance {
            name: "t".into(),
            family: Family::Other,
            sense,
            vars: obj.into_iter().map(RawVar::binary).collect(),
            rows,
        }
    }

    #[test]
    fn ge_row_is_negated() {
        let r = raw(
            vec![RawRow::new(vec![(0, 1.0), (1, 1.0)], RawSense::Ge, 1.0)],
            Sense::Minimize,
            vec![1.0, 1.0],
        );
        let norm = normalize(&r).unwrap();
        assert_eq!(norm.instance.rows, vec![Row::le(vec![(0, -1.0), (1, -1.0)], -1.0)]);
        assert_eq!(norm.provenance, vec![0]);
    }

    #[test]
    fn equality_is_split_into_pair() {
        let r = raw(
            vec![
                RawRow::new(vec![(2, 3.0)], RawSense::Le, 2.0),
                RawRow::new(vec![(0, 1.0), (1, 1.0), (2, 1.0)], RawSense::Eq, 1.0),
            ],
            Sense::Minimize,
            vec![0.0; 3],
        );
        let norm = normalize(&r).unwrap();
        let inst = &norm.instance;
        assert_eq!(inst.num_cons(), 3);
        assert_eq!(inst.rows[1], Row::le(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 1.0));
        assert_eq!(inst.rows[2], Row::le(vec![(0, -1.0), (1, -1.0), (2, -1.0)], -1.0));
        assert_eq!(norm.provenance, vec![0, 1, 1]);
        assert!(inst.is_canonical());
    }

    #[test]
    fn maximization_is_negated() {
        let r = raw(vec![], Sense::Maximize, vec![3.0, 0.0, 7.0]);
        let norm = normalize(&r).unwrap();
        assert_eq!(norm.instance.obj, vec![-3.0, 0.0, -7.0]);
        assert!(norm.instance.obj[1].is_sign_positive());
    }

    #[test]
    fn family_tag_is_preserved() {
        let mut r = raw(vec![], Sense::Minimize, vec![1.0]);
        r.family = Family::Ss;
        assert_eq!(normalize(&r).unwrap().instance.family, Family::Ss);
    }

    #[test]
    fn negative_lower_bound_is_rejected() {
        let mut r = raw(vec![], Sense::Minimize, vec![1.0]);
        r.vars[0].lb = -1.0;
        assert!(matches!(normalize(&r), Err(Error::Normalization(_))));
    }

    #[test]
    fn explicit_zeros_and_duplicates_are_merged() {
        let r = raw(
            vec![RawRow::new(vec![(1, 2.0), (0, 0.0), (1, 1.0)], RawSense::Le, 4.0)],
            Sense::Minimize,
            vec![0.0; 2],
        );
        let norm = normalize(&r).unwrap();
        assert_eq!(norm.instance.rows[0].coefs, vec![(1, 3.0)]);
    }
}
