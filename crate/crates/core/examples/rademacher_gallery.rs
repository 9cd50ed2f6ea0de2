//! The counterexample gallery, starting with Rademacher measures:
//! setwise convergent on a coarse algebra while staying at total
//! variation distance one.

use varmeas::harness::{gallery, GALLERY_IDS};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for id in GALLERY_IDS {
        let level = (id == "rem2_weak_not_tv").then_some(8);
        let g = gallery(id, level)?;
        println!("{}: reproduced: {}", g.id, g.reproduced);
        println!("  {}", g.description);
        for c in &g.checks {
            println!("  {:<22} {:?} ({})", c.label, c.verdict, c.value);
        }
        assert!(g.reproduced);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
