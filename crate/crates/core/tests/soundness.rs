mod common;

use cgscreen::cutloop::Termination;
use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::milp::Family;
use cgscreen::separators::{CutSource, SeparatorConfig};
use common::{trace_full, Hull};

#[test]
fn every_cut_is_valid_and_meets_the_separation_contract() {
    let cfg = SeparatorConfig::deterministic(100);
    for fam in Family::ALL {
        let mut cg = 0;
        for seed in 0..15 {
            let inst = gen_instance(&GenSpec::tiny(fam, seed)).unwrap();
            let hull = Hull::new(&inst);
            let tr = trace_full(&inst, &cfg);
            for c in &tr.gmi {
                assert!(hull.valid(c), "{}: invalid GMI cut {c:?}", inst.name);
            }
            for r in &tr.rounds {
                for c in &r.cuts {
                    assert_eq!(c.source, CutSource::Cgmip);
                    assert!(hull.valid(c), "{}: invalid CG cut {c:?}", inst.name);
                    assert!(c.violation_at(&r.x) >= cfg.min_violation - 1e-9);
                    assert!(c.u.iter().chain(&c.v).all(|&(_, w)| (0.0..=0.99 + 1e-6).contains(&w)));
                    cg += 1;
                }
            }
            let h = &tr.report.igc_history;
            assert!(h.windows(2).all(|w| w[1] >= w[0] - 1e-6), "{}: {h:?}", inst.name);
            if tr.report.termination == Termination::Integral {
                assert_eq!(tr.report.final_igc, 100.0);
            }
        }
        eprintln!("{fam:?}: {cg} CG cuts checked");
    }
}

#[test]
fn loop_optimum_matches_enumeration() {
    for fam in Family::ALL {
        for seed in 0..5 {
            let inst = gen_instance(&GenSpec::tiny(fam, seed)).unwrap();
            let zip = cgscreen::bnb::compute_zip(&inst, &Default::default()).unwrap();
            let z = Hull::new(&inst).z_ip().unwrap();
            assert!((zip - z).abs() <= 1e-6 * (1.0 + z.abs()), "{}: {zip} vs {z}", inst.name);
        }
    }
}
