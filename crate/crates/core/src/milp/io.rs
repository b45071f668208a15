use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Family, MilpInstance, Row, VarKind};
use crate::{Error, Result};

pub const INSTANCE_SCHEMA: &str = "cgscreen.instance/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VarDoc {
    id: usize,
    kind: VarKind,
    lb: f64,
    /// `null` for an infinite upper bound.
    ub: Option<f64>,
    obj: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConDoc {
    id: usize,
    coefs: Vec<(usize, f64)>,
    rhs: f64,
}

/// Serialized form of a canonical instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDoc {
    schema: String,
    name: String,
    family: Family,
    vars: Vec<VarDoc>,
    cons: Vec<ConDoc>,
}

impl InstanceDoc {
    pub fn from_instance(inst: &MilpInstance) -> Result<Self> {
        if !inst.is_canonical() {
            return Err(Error::Schema(format!(
                "{} is not in canonical <= form",
                inst.name
            )));
        }
        Ok(InstanceDoc {
            schema: INSTANCE_SCHEMA.into(),
            name: inst.name.clone(),
            family: inst.family,
            vars: (0..inst.num_vars())
                .map(|j| VarDoc {
                    id: j,
                    kind: inst.kinds[j],
                    lb: inst.lb[j],
                    ub: inst.ub[j].is_finite().then_some(inst.ub[j]),
                    obj: inst.obj[j],
                })
                .collect(),
            cons: inst
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| ConDoc {
                    id: i,
                    coefs: r.coefs.clone(),
                    rhs: r.rhs,
                })
                .collect(),
        })
    }

    pub fn into_instance(self) -> Result<MilpInstance> {
        if self.schema != INSTANCE_SCHEMA {
            return Err(Error::Schema(format!(
                "expected {INSTANCE_SCHEMA}, found {}",
                self.schema
            )));
        }
        let n = self.vars.len();
        let mut obj = vec![0.0; n];
        let mut kinds = vec![VarKind::Continuous; n];
        let mut lb = vec![0.0; n];
        let mut ub = vec![f64::INFINITY; n];
        for v in &self.vars {
            if v.id >= n {
                return Err(Error::Dimension(format!("variable id {} out of range", v.id)));
            }
            obj[v.id] = v.obj;
            kinds[v.id] = v.kind;
            lb[v.id] = v.lb;
            ub[v.id] = v.ub.unwrap_or(f64::INFINITY);
        }
        let mut cons = self.cons;
        cons.sort_by_key(|c| c.id);
        let rows = cons
            .into_iter()
            .map(|c| Row::le(c.coefs, c.rhs))
            .collect();
        let inst = MilpInstance {
            name: self.name,
            family: self.family,
            obj,
            kinds,
            lb,
            ub,
            rows,
        };
        inst.check_shape()?;
        if !inst.is_canonical() {
            return Err(Error::Schema(format!("{} is not canonical", inst.name)));
        }
        Ok(inst)
    }
}

pub fn write_instance(inst: &MilpInstance, path: &Path) -> Result<()> {
    let doc = InstanceDoc::from_instance(inst)?;
    let mut text = serde_json::to_string(&doc)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<MilpInstance> {
    let text = std::fs::read_to_string(path)?;
    let doc: InstanceDoc = serde_json::from_str(&text)?;
    doc.into_instance()
}
