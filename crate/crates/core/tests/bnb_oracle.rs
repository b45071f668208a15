//! Branch and bound against exhaustive enumeration on generated instances.

mod common;

use cgscreen::bnb::{solve_milp, MilpStatus, SolveLimits};
use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::milp::Family;
use common::Hull;

#[test]
fn optimum_matches_enumeration_on_every_family() {
    for fam in Family::ALL {
        for seed in 0..100 {
            let inst = gen_instance(&GenSpec::tiny(fam, 1000 + seed)).unwrap();
            let res = solve_milp(&inst, &SolveLimits::default()).unwrap();
            match Hull::new(&inst).z_ip() {
                Some(z) => {
                    assert_eq!(res.status, MilpStatus::Optimal, "{}", inst.name);
                    let got = res.incumbent.as_ref().unwrap().obj;
                    assert!((got - z).abs() <= 1e-6 * (1.0 + z.abs()), "{}: {got} vs {z}", inst.name);
                    assert!(res.pool.windows(2).all(|w| w[0].obj <= w[1].obj));
                }
                None => assert_eq!(res.status, MilpStatus::Infeasible, "{}", inst.name),
            }
        }
    }
}

#[test]
fn pool_entries_are_feasible() {
    for fam in Family::ALL {
        let inst = gen_instance(&GenSpec::tiny(fam, 5)).unwrap();
        let res = solve_milp(&inst, &SolveLimits::default()).unwrap();
        for e in &res.pool {
            for r in &inst.rows {
                let a = r.activity(&e.x);
                assert!(a <= r.rhs + 1e-6, "{}: row activity {a} > {}", inst.name, r.rhs);
            }
            for j in 0..inst.num_vars() {
                if inst.is_integer(j) {
                    assert_eq!(e.x[j], e.x[j].round());
                }
            }
        }
    }
}
