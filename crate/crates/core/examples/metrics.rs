//! Shifted geometric means and win/loss tallies.
use std::collections::BTreeMap;

use cgscreen::harness::metrics::{absolute_outcome, igc_outcome, sgm, time_outcome, winloss, RunScore};

fn main() -> cgscreen::Result<()> {
    println!("sgm({{1, 2}}, 0.5) = {:.12}", sgm(&[1.0, 2.0], 0.5)?);
    println!("sgm({{5, 5, 5}}, 5) = {}", sgm(&[5.0; 3], 5.0)?);
    for (tr, tf, gr, gf) in [(8.0, 10.0, 51.0, 50.0), (10.0, 10.0, 50.0, 50.0), (12.0, 10.0, 48.0, 50.0)] {
        let t = time_outcome(tr, tf);
        let g = igc_outcome(gr, gf);
        println!("time {tr} vs {tf}, igc {gr} vs {gf}: {t:?} / {g:?} / absolute {:?}", absolute_outcome(t, g));
    }
    let red: BTreeMap<String, RunScore> = [("a", 8.0, 51.0), ("b", 12.0, 48.0)]
        .into_iter()
        .map(|(k, cost, igc)| (k.to_string(), RunScore { cost, igc }))
        .collect();
    let full: BTreeMap<String, RunScore> = ["a", "b"]
        .into_iter()
        .map(|k| (k.to_string(), RunScore { cost: 10.0, igc: 50.0 }))
        .collect();
    println!("{:?}", winloss(&red, &full)?);
    Ok(())
}
