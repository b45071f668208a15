//! A cut found over a row subset stays feasible in the model over any superset.

use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::lp::solve_lp;
use cgscreen::milp::{Family, MilpInstance, RowSense};
use cgscreen::separators::{build_cgmip, run_cgmip, CgMipModel, Cut, SeparatorConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rebuilds the model assignment that encodes `cut`.
fn encode(inst: &MilpInstance, model: &CgMipModel, cut: &Cut) -> Vec<f64> {
    let mut sol = vec![0.0; model.milp.num_vars()];
    let m = inst.num_cons();
    let u = cut.dense_u(m);
    for (k, &i) in model.rows.iter().enumerate() {
        sol[k] = u[i];
    }
    for (k, &j) in model.bounds.iter().enumerate() {
        sol[model.v_index(k)] = cut.v.iter().find(|&&(c, _)| c == j).map_or(0.0, |&(_, w)| w);
    }
    let cols = inst.columns();
    let alpha = |j: usize| cut.alpha.iter().find(|&&(c, _)| c == j).map_or(0.0, |&(_, a)| a);
    for (k, &j) in model.support.iter().enumerate() {
        let mut agg: f64 = cols[j].iter().map(|&(i, a)| u[i] * a).sum();
        agg += cut.v.iter().filter(|&&(c, _)| c == j).map(|&(_, w)| w).sum::<f64>();
        sol[model.alpha_index(k)] = alpha(j);
        sol[model.f_index(k)] = agg - alpha(j);
    }
    let mut rhs: f64 = inst.rows.iter().enumerate().map(|(i, r)| u[i] * r.rhs).sum();
    rhs += cut.v.iter().map(|&(j, w)| w * inst.ub[j]).sum::<f64>();
    sol[model.alpha0_index()] = cut.alpha0;
    sol[model.f0_index()] = rhs - cut.alpha0;
    sol
}

fn feasible(model: &CgMipModel, sol: &[f64]) -> bool {
    let p = &model.milp;
    let tol = 1e-6;
    let bounds = (0..p.num_vars()).all(|j| sol[j] >= p.lb[j] - tol && sol[j] <= p.ub[j] + tol);
    let rows = p.rows.iter().all(|r| {
        let a = r.activity(sol);
        match r.sense {
            RowSense::Le => a <= r.rhs + tol,
            RowSense::Eq => (a - r.rhs).abs() <= tol,
        }
    });
    bounds && rows
}

#[test]
fn subset_cuts_are_feasible_for_supersets() {
    let cfg = SeparatorConfig::deterministic(200);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for fam in Family::ALL {
        for seed in 0..8 {
            let inst = gen_instance(&GenSpec::tiny(fam, seed)).unwrap();
            let x = solve_lp(&inst, &[]).unwrap().x;
            let m = inst.num_cons();
            let small: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.6)).collect();
            if !small.iter().any(|&b| b) {
                continue;
            }
            let run = run_cgmip(&inst, &x, &small, &cfg).unwrap();
            let large: Vec<bool> = small.iter().map(|&b| b || rng.gen_bool(0.5)).collect();
            let model = build_cgmip(&inst, &x, &large, &cfg).unwrap();
            for cut in &run.cuts {
                assert!(cut.u.iter().all(|&(i, _)| small[i]));
                assert!(feasible(&model, &encode(&inst, &model, cut)), "{}: {cut:?}", inst.name);
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}
