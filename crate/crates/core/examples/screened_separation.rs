//! Compare the full separator with one restricted to ground-truth rows.
use cgscreen::cutloop::{run_cutting_plane, CgSeparator, FixedMask, LoopConfig, RoundEvent};
use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::milp::Family;
use cgscreen::separators::{run_cgmip, SeparatorConfig};

fn main() -> cgscreen::Result<()> {
    let cfg = SeparatorConfig::deterministic(200);
    for family in Family::ALL {
        let inst = gen_instance(&GenSpec::tiny(family, 1))?;
        let mut first = None;
        let mut cb = |ev: &RoundEvent| {
            if ev.round == 1 {
                let mut mask = vec![false; ev.inst.num_cons()];
                for c in ev.cuts {
                    for &(i, _) in &c.u {
                        mask[i] = true;
                    }
                }
                first = Some((ev.sol.x.clone(), mask, ev.cuts.len()));
            }
        };
        let full = run_cutting_plane(&inst, &mut CgSeparator::full(cfg.clone()), &LoopConfig::default(), Some(&mut cb))?;
        let Some((x, mask, n_full)) = first else {
            println!("{:<22} no separation round ({:?})", inst.name, full.termination);
            continue;
        };
        let kept = mask.iter().filter(|&&b| b).count();
        let reduced = run_cgmip(&inst, &x, &mask, &cfg)?;
        println!(
            "{:<22} round 1: full {} cuts, {} of {} rows kept -> {} cuts",
            inst.name,
            n_full,
            kept,
            mask.len(),
            reduced.cuts.len()
        );
        let mut sep = CgSeparator {
            policy: FixedMask(mask),
            cfg: cfg.clone(),
        };
        let rep = run_cutting_plane(&inst, &mut sep, &LoopConfig::default(), None)?;
        println!("{:<22} final igc full {:.2}, fixed mask {:.2}", "", full.final_igc, rep.final_igc);
    }
    Ok(())
}
