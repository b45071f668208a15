//! Solve an LP relaxation and read a tableau row of a fractional basic variable.
use cgscreen::lp::{solve_lp, tableau_row, BasisStatus};
use cgscreen::milp::{Family, MilpInstance, Row, VarKind};

fn main() -> cgscreen::Result<()> {
    // max x0 + x1  s.t.  2x0 + x1 <= 2,  x0 + 2x1 <= 2,  binary
    let inst = MilpInstance {
        name: "triangle".into(),
        family: Family::Other,
        obj: vec![-1.0, -1.0],
        kinds: vec![VarKind::Integer; 2],
        lb: vec![0.0; 2],
        ub: vec![1.0; 2],
        rows: vec![
            Row::le(vec![(0, 2.0), (1, 1.0)], 2.0),
            Row::le(vec![(0, 1.0), (1, 2.0)], 2.0),
        ],
    };
    let sol = solve_lp(&inst, &[])?;
    println!("status {:?}, obj {:.4}, x {:?}", sol.status, sol.obj, sol.x);
    println!("duals {:?}", sol.duals);
    for j in 0..inst.num_vars() {
        if sol.basis_status[j] == BasisStatus::Basic {
            let row = tableau_row(&sol, j)?;
            println!("row of x{j}: coefs over (x, slacks) {:?}, rhs {:.4}", row.coefs, row.rhs);
        }
    }
    Ok(())
}
