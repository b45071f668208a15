//! Pure cutting-plane loop with the full CG separator.
use cgscreen::cutloop::{run_cutting_plane, CgSeparator, LoopConfig};
use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::separators::SeparatorConfig;

fn main() -> cgscreen::Result<()> {
    let inst = gen_instance(&GenSpec::pm(4, 2, 5))?;
    let mut sep = CgSeparator::full(SeparatorConfig::deterministic(200));
    let rep = run_cutting_plane(&inst, &mut sep, &LoopConfig::default(), None)?;
    println!("{}: {:?} after {} rounds", rep.instance, rep.termination, rep.num_rounds());
    println!("z0 {:.3}, zip {:?}", rep.z0, rep.zip);
    for r in &rep.rounds {
        println!(
            "  round {:>2}: igc {:6.2}, cuts {:>2}, nodes {:>5}, tight {:?}",
            r.round, r.igc, r.n_cuts_added, r.cgmip_nodes, r.tight_cut_indices
        );
    }
    println!("final igc {:.2}", rep.final_igc);
    Ok(())
}
