//! Simplex optimum against brute-force vertex enumeration, plus strong duality.

use cgscreen::lp::{solve_lp, LpStatus};
use cgscreen::milp::{Family, MilpInstance, Row, RowSense, VarKind};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_lp(rng: &mut ChaCha8Rng) -> MilpInstance {
    let n = rng.gen_range(2..=3);
    let m = rng.gen_range(1..=4);
    let rows = (0..m)
        .map(|_| {
            let coefs = (0..n)
                .map(|j| (j, rng.gen_range(-3i32..=3) as f64))
                .filter(|&(_, a)| a != 0.0)
                .collect();
            let rhs = rng.gen_range(-2i32..=6) as f64;
            if rng.gen_bool(0.15) {
                Row::eq(coefs, rhs)
            } else {
                Row::le(coefs, rhs)
            }
        })
        .collect();
    MilpInstance {
        name: "lp".into(),
        family: Family::Other,
        obj: (0..n).map(|_| rng.gen_range(-5i32..=5) as f64).collect(),
        kinds: vec![VarKind::Continuous; n],
        lb: vec![0.0; n],
        ub: (0..n).map(|_| rng.gen_range(1i32..=4) as f64).collect(),
        rows,
    }
}

/// Every constraint as `(a, b, is_equality)` including the variable box.
fn all_constraints(inst: &MilpInstance) -> Vec<(Vec<f64>, f64, bool)> {
    let n = inst.num_vars();
    let mut out = Vec::new();
    for r in &inst.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &r.coefs {
            a[j] += v;
        }
        out.push((a, r.rhs, r.sense == RowSense::Eq));
    }
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = -1.0;
        out.push((a.clone(), 0.0, false));
        a[j] = 1.0;
        out.push((a, inst.ub[j], false));
    }
    out
}

fn combinations(k: usize, n: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut with: Vec<Vec<usize>> = combinations(k - 1, n - 1)
        .into_iter()
        .map(|mut c| {
            c.push(n - 1);
            c
        })
        .collect();
    with.extend(combinations(k, n - 1));
    with
}

/// Best objective over all basic feasible points, `None` if there are none.
fn vertex_optimum(inst: &MilpInstance) -> Option<f64> {
    let n = inst.num_vars();
    let cons = all_constraints(inst);
    let mut best: Option<f64> = None;
    for combo in combinations(n, cons.len()) {
        let a = DMatrix::from_fn(n, n, |r, c| cons[combo[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| cons[combo[r]].1);
        let Some(x) = a.lu().solve(&b) else { continue };
        if !x.iter().all(|v| v.is_finite()) {
            continue;
        }
        let ok = cons.iter().all(|(ai, bi, eq)| {
            let lhs: f64 = ai.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
            if *eq {
                (lhs - bi).abs() <= 1e-9
            } else {
                lhs <= bi + 1e-9
            }
        });
        if ok {
            let z: f64 = inst.obj.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
            best = Some(best.map_or(z, |b: f64| b.min(z)));
        }
    }
    best
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut optimal = 0;
    for k in 0..200 {
        let inst = random_lp(&mut rng);
        let sol = solve_lp(&inst, &[]).unwrap();
        match vertex_optimum(&inst) {
            Some(z) => {
                assert_eq!(sol.status, LpStatus::Optimal, "lp {k}: {inst:?}");
                assert!((sol.obj - z).abs() <= 1e-7 * (1.0 + z.abs()), "lp {k}: {} vs {z}", sol.obj);
                optimal += 1;
            }
            None => assert_eq!(sol.status, LpStatus::Infeasible, "lp {k}: {inst:?}"),
        }
    }
    assert!(optimal > 100);
}

#[test]
fn strong_duality_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let inst = random_lp(&mut rng);
        let sol = solve_lp(&inst, &[]).unwrap();
        if sol.status != LpStatus::Optimal {
            continue;
        }
        let n = inst.num_vars();
        let y = &sol.duals;
        let mut d = inst.obj.clone();
        for (i, r) in inst.rows.iter().enumerate() {
            if r.sense == RowSense::Le {
                assert!(y[i] <= 1e-9, "dual of a <= row must be nonpositive: {}", y[i]);
            }
            for &(j, a) in &r.coefs {
                d[j] -= y[i] * a;
            }
        }
        let dual: f64 = inst.rows.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum::<f64>()
            + (0..n).map(|j| inst.ub[j] * d[j].min(0.0)).sum::<f64>();
        assert!((dual - sol.obj).abs() <= 1e-7 * (1.0 + sol.obj.abs()), "{dual} vs {}", sol.obj);
    }
}
