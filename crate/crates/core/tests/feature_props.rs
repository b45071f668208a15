//! Row and column permutations of an instance act on the graph sample by relabelling.

use cgscreen::features::{build_vcg_from, LpSnapshot, VcgSample};
use cgscreen::instgen::{gen_instance, shuffled, GenSpec};
use cgscreen::lp::solve_lp;
use cgscreen::milp::{Family, MilpInstance, Row};

fn snapshot(inst: &MilpInstance) -> LpSnapshot {
    let sol = solve_lp(inst, &[]).unwrap();
    LpSnapshot::from_solution(&sol, inst.num_cons()).unwrap()
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()))
}

fn edge_set(s: &VcgSample, rmap: &[usize], cmap: &[usize]) -> Vec<(usize, usize, i64)> {
    let mut e: Vec<_> = s
        .edges
        .iter()
        .map(|e| (rmap[e.row], cmap[e.col], (e.coef * 1e9).round() as i64))
        .collect();
    e.sort();
    e
}

#[test]
fn constraint_permutation_permutes_rows() {
    for fam in Family::ALL {
        let inst = gen_instance(&GenSpec::tiny(fam, 3)).unwrap();
        let snap = snapshot(&inst);
        let m = inst.num_cons();
        let perm = shuffled(&(0..m).collect::<Vec<_>>(), 5);
        let mut p_inst = inst.clone();
        p_inst.rows = perm.iter().map(|&i| inst.rows[i].clone()).collect();
        let mut p_snap = snap.clone();
        p_snap.duals = perm.iter().map(|&i| snap.duals[i]).collect();
        p_snap.slack = perm.iter().map(|&i| snap.slack[i]).collect();
        let a = build_vcg_from(&inst, &snap, 0, None).unwrap();
        let b = build_vcg_from(&p_inst, &p_snap, 0, None).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert!(close(b.cons_feats.row(k), a.cons_feats.row(i)), "{fam:?} row {i}");
        }
        assert_eq!(a.var_feats, b.var_feats);
        let ident: Vec<usize> = (0..inst.num_vars()).collect();
        let mut inv = vec![0; m];
        for (k, &i) in perm.iter().enumerate() {
            inv[k] = i;
        }
        assert_eq!(edge_set(&b, &inv, &ident), edge_set(&a, &(0..m).collect::<Vec<_>>(), &ident));
    }
}

#[test]
fn variable_permutation_permutes_columns() {
    for fam in Family::ALL {
        let inst = gen_instance(&GenSpec::tiny(fam, 4)).unwrap();
        let snap = snapshot(&inst);
        let n = inst.num_vars();
        let perm = shuffled(&(0..n).collect::<Vec<_>>(), 6);
        // new column k is old column perm[k]
        let mut pos = vec![0; n];
        for (k, &j) in perm.iter().enumerate() {
            pos[j] = k;
        }
        let pick = |v: &[f64]| perm.iter().map(|&j| v[j]).collect::<Vec<f64>>();
        let p_inst = MilpInstance {
            obj: pick(&inst.obj),
            kinds: perm.iter().map(|&j| inst.kinds[j]).collect(),
            lb: pick(&inst.lb),
            ub: pick(&inst.ub),
            rows: inst
                .rows
                .iter()
                .map(|r| Row {
                    coefs: {
                        let mut c: Vec<(usize, f64)> = r.coefs.iter().map(|&(j, a)| (pos[j], a)).collect();
                        c.sort_by_key(|&(j, _)| j);
                        c
                    },
                    ..r.clone()
                })
                .collect(),
            ..inst.clone()
        };
        let p_snap = LpSnapshot {
            x: pick(&snap.x),
            basis_status: perm.iter().map(|&j| snap.basis_status[j]).collect(),
            reduced_costs: pick(&snap.reduced_costs),
            ..snap.clone()
        };
        let a = build_vcg_from(&inst, &snap, 0, None).unwrap();
        let b = build_vcg_from(&p_inst, &p_snap, 0, None).unwrap();
        for (k, &j) in perm.iter().enumerate() {
            assert!(close(b.var_feats.row(k), a.var_feats.row(j)), "{fam:?} col {j}");
        }
        for i in 0..inst.num_cons() {
            assert!(close(b.cons_feats.row(i), a.cons_feats.row(i)), "{fam:?} row {i}");
        }
        let ident: Vec<usize> = (0..inst.num_cons()).collect();
        assert_eq!(edge_set(&b, &ident, &perm), edge_set(&a, &ident, &(0..n).collect::<Vec<_>>()));
    }
}
