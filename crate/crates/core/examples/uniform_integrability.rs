//! Uniform integrability, uniform absolute continuity and bounded
//! integrals on three families, including one where u.a.c. holds only
//! because no nonempty set is small.

use varmeas::families::{mass_escape_family, templates, vacuous_uac_family};
use varmeas::integrability::{check_p4_equivalence, check_uac, check_ui, EPSILON_GRID};
use varmeas::measure::AtomSpace;
use rand::SeedableRng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let space = AtomSpace::new(5)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let (bounded_f, bounded_m) = templates::bounded_pair(&mut rng, &space);
    let (escape_m, escape_f) = mass_escape_family(&space, 1.0)?;
    let (vac_m, vac_f) = vacuous_uac_family(&space, 1.0, 0.2)?;

    for (name, ff, mf) in [
        ("bounded", &bounded_f, &bounded_m),
        ("mass escape", &escape_f, &escape_m),
        ("vacuous u.a.c.", &vac_f, &vac_m),
    ] {
        let ui = check_ui(ff, mf, 256)?;
        let uac = check_uac(ff, mf, 1e-2, 256)?;
        let p4 = check_p4_equivalence(ff, mf, &EPSILON_GRID, 256)?;
        let line: Vec<String> = p4.auxiliary.iter().map(|a| format!("{} {:?}", a.label, a.verdict)).collect();
        println!("{name:>15}: ui {:?}, uac(1e-2) {:?} δ = {:e}; {}", ui.verdict, uac.verdict, uac.delta, line.join(", "));
        if let Some(w) = &uac.witness {
            println!("{:>15}  witness at n = {}: m(A) = {:e}, ∫_A |f| = {}", "", w.n, w.measure, w.integral);
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
