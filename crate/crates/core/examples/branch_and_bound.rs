//! Solve a generated instance exactly and inspect the solution pool.
use cgscreen::bnb::{compute_zip, solve_milp, SolveLimits, ZipBudget};
use cgscreen::instgen::{gen_instance, GenSpec};

fn main() -> cgscreen::Result<()> {
    let inst = gen_instance(&GenSpec::bp(12, 6, 3))?;
    let res = solve_milp(&inst, &SolveLimits::default())?;
    println!(
        "{}: {:?}, incumbent {:?}, {} nodes, {} pool entries",
        inst.name,
        res.status,
        res.incumbent.as_ref().map(|e| e.obj),
        res.stats.nodes,
        res.pool.len()
    );
    for e in res.pool.iter().take(3) {
        println!("  obj {:.3}", e.obj);
    }
    let zip = compute_zip(&inst, &ZipBudget::default())?;
    println!("integer optimum {zip:.3}");

    let limited = SolveLimits {
        node_limit: Some(5),
        ..SolveLimits::default()
    };
    let res = solve_milp(&inst, &limited)?;
    println!("with 5 nodes: {:?}, bound {:.3}", res.status, res.bound);
    Ok(())
}
