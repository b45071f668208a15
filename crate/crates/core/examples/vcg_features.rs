//! Build the variable-constraint graph sample of a relaxation and round-trip a shard.
use cgscreen::features::{build_vcg, cons_feature_names, read_shard, var_feature_names, write_shard};
use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::lp::solve_lp;
use cgscreen::milp::Family;

fn main() -> cgscreen::Result<()> {
    let inst = gen_instance(&GenSpec::tiny(Family::Fl, 2))?;
    let sol = solve_lp(&inst, &[])?;
    let s = build_vcg(&inst, &sol, 0, None)?;
    println!("{} constraint nodes, {} variable nodes, {} edges", s.num_cons(), s.num_vars(), s.edges.len());
    let names = cons_feature_names();
    for (name, v) in names.iter().zip(s.cons_feats.row(0)).take(16) {
        println!("  c0.{name} = {v:.4}");
    }
    for (name, v) in var_feature_names().iter().zip(s.var_feats.row(0)) {
        println!("  v0.{name} = {v:.4}");
    }
    let path = std::env::temp_dir().join("cgscreen-example.jsonl");
    write_shard(&path, std::slice::from_ref(&s))?;
    assert_eq!(read_shard(&path)?[0], s);
    println!("shard written to {}", path.display());
    Ok(())
}
