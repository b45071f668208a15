//! Generate one small instance per family and save it as JSON.
use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::milp::{read_instance, write_instance, Family};

fn main() -> cgscreen::Result<()> {
    let dir = std::env::temp_dir().join("cgscreen-instances");
    std::fs::create_dir_all(&dir)?;
    for family in Family::ALL {
        let inst = gen_instance(&GenSpec::tiny(family, 7))?;
        let path = dir.join(format!("{}.json", inst.name));
        write_instance(&inst, &path)?;
        let back = read_instance(&path)?;
        assert_eq!(back.num_vars(), inst.num_vars());
        let integer = (0..inst.num_vars()).filter(|&j| inst.is_integer(j)).count();
        println!(
            "{:<24} {} vars ({} integer), {} rows -> {}",
            inst.name,
            inst.num_vars(),
            integer,
            inst.num_cons(),
            path.display()
        );
    }
    Ok(())
}
