//! Exact CG separation at a fractional point, over all rows and over a subset.
use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::lp::solve_lp;
use cgscreen::separators::{run_cgmip, SeparatorConfig};

fn main() -> cgscreen::Result<()> {
    let inst = gen_instance(&GenSpec::bp(10, 5, 11))?;
    let sol = solve_lp(&inst, &[])?;
    let cfg = SeparatorConfig::deterministic(500);
    let m = inst.num_cons();
    let run = run_cgmip(&inst, &sol.x, &vec![true; m], &cfg)?;
    println!(
        "all rows: {} cuts, {} nodes, {} attempts, proved empty {}",
        run.cuts.len(),
        run.nodes,
        run.attempts,
        run.proved_empty
    );
    for c in run.cuts.iter().take(5) {
        let rows: Vec<usize> = c.u.iter().map(|&(i, _)| i).collect();
        println!("  violation {:.4}, rows {:?}, bound rows {}", c.violation, rows, c.v.len());
    }
    let mut half = vec![false; m];
    for i in (0..m).step_by(2) {
        half[i] = true;
    }
    let run = run_cgmip(&inst, &sol.x, &half, &cfg)?;
    println!("even rows only: {} cuts", run.cuts.len());
    Ok(())
}
