//! Canonicalization keeps the set of feasible binary points and the objective order.

use cgscreen::milp::{normalize, Family, RawInstance, RawRow, RawSense, RawVar, RowSense, Sense};
use proptest::prelude::*;

fn raw_feasible(raw: &RawInstance, x: &[f64]) -> bool {
    raw.rows.iter().all(|r| {
        let a: f64 = r.coefs.iter().map(|&(j, c)| c * x[j]).sum();
        match r.sense {
            RawSense::Le => a <= r.rhs + 1e-9,
            RawSense::Ge => a >= r.rhs - 1e-9,
            RawSense::Eq => (a - r.rhs).abs() <= 1e-9,
        }
    })
}

fn sense_strategy() -> impl Strategy<Value = RawSense> {
    prop_oneof![Just(RawSense::Le), Just(RawSense::Ge), Just(RawSense::Eq)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn point_set_is_preserved(
        n in 2usize..6,
        rows in prop::collection::vec((prop::collection::vec(-3i32..=3, 6), sense_strategy(), -3i32..=5), 1..5),
        obj in prop::collection::vec(-4i32..=4, 6),
        maximize in any::<bool>(),
    ) {
        let raw = RawInstance {
            name: "p".into(),
            family: Family::Other,
            sense: if maximize { Sense::Maximize } else { Sense::Minimize },
            vars: (0..n).map(|j| RawVar::binary(obj[j] as f64)).collect(),
            rows: rows
                .iter()
                .map(|(c, s, b)| RawRow::new((0..n).map(|j| (j, c[j] as f64)).filter(|&(_, a)| a != 0.0).collect(), *s, *b as f64))
                .collect(),
        };
        let norm = normalize(&raw).unwrap();
        let inst = &norm.instance;
        prop_assert!(norm.provenance.iter().all(|&k| k < raw.rows.len()));
        for bits in 0u32..(1 << n) {
            let x: Vec<f64> = (0..n).map(|j| ((bits >> j) & 1) as f64).collect();
            let canon = inst.rows.iter().all(|r| {
                let a = r.activity(&x);
                match r.sense {
                    RowSense::Le => a <= r.rhs + 1e-9,
                    RowSense::Eq => (a - r.rhs).abs() <= 1e-9,
                }
            });
            prop_assert_eq!(canon, raw_feasible(&raw, &x));
            let raw_obj: f64 = raw.vars.iter().zip(&x).map(|(v, xi)| v.obj * xi).sum();
            let z: f64 = inst.obj.iter().zip(&x).map(|(c, xi)| c * xi).sum();
            prop_assert_eq!(z, if maximize { -raw_obj } else { raw_obj });
        }
    }
}
