//! GMI cuts from the root relaxation, checked against the enumerated points.
use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::lp::solve_lp;
use cgscreen::milp::{check_cut_valid, enumerate_integer_points, Family};
use cgscreen::separators::gmi_cuts;

fn main() -> cgscreen::Result<()> {
    let inst = gen_instance(&GenSpec::tiny(Family::Sc, 4))?;
    let sol = solve_lp(&inst, &[])?;
    let cuts = gmi_cuts(&inst, &sol)?;
    let points = enumerate_integer_points(&inst, 1 << 20)?;
    println!("{}: root obj {:.4}, {} GMI cuts", inst.name, sol.obj, cuts.len());
    for c in &cuts {
        println!(
            "  support {:>2}, violation {:.4}, valid {}",
            c.support_size(),
            c.violation,
            check_cut_valid(&inst, c, &points)?
        );
    }
    Ok(())
}
