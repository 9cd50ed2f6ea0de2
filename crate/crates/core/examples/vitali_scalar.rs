//! The scalar limit theorem under setwise convergence, its signed
//! corollary, and what happens when a hypothesis is dropped.

use varmeas::certificate::Decay;
use varmeas::families::{mass_escape_family, FunctionFamily, MeasureFamily};
use varmeas::integrability::{signed_vitali, vitali_limit};
use varmeas::measure::{AtomFunction, AtomSpace, MeasurableSet, SignedMeasure};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let space = AtomSpace::new(4)?;
    let f = AtomFunction::scalar(vec![1.0, -2.0, 0.5, 3.0])?;
    let g = AtomFunction::scalar(vec![1.0, 1.0, -1.0, 0.0])?;
    let m = SignedMeasure::on(&space, vec![0.1, 0.4, 0.3, 0.2])?;
    let mu = SignedMeasure::on(&space, vec![0.25; 4])?;
    let rate = Decay::power(1.0, 1.0)?;
    let ff = FunctionFamily::perturbed(&f, &g, rate)?;
    let mf = MeasureFamily::convex_mix(&m, &mu, rate)?;
    let set = MeasurableSet::from_indices(4, &[1, 3])?;

    let r = vitali_limit(&ff, &mf, &set, 1e-2, 512)?;
    for h in &r.hypotheses {
        println!("  {:<14} {:?}", h.label, h.verdict);
    }
    println!("th1: {:?}, gap {:e}, tail bound {:?}", r.verdict, r.final_gap.unwrap_or(f64::NAN), r.tail_bound);

    let signed = MeasureFamily::perturbed(&m, &SignedMeasure::on(&space, vec![0.5, -0.5, 0.5, -0.5])?, Decay::power(0.5, 1.0)?)?;
    let r = signed_vitali(&ff, &signed, &set, 1e-2, 512)?;
    println!("th1s on a signed family: {:?}, gap {:e}", r.verdict, r.final_gap.unwrap_or(f64::NAN));

    let (mf, ff) = mass_escape_family(&space, 1.0)?;
    let r = vitali_limit(&ff, &mf, &space.full(), 1e-2, 512)?;
    let failed: Vec<&str> = r.hypotheses.iter().filter(|h| !h.verdict.holds()).map(|h| h.label.as_str()).collect();
    println!("mass escape: {:?} (failed: {failed:?}), gap stays at {}", r.verdict, r.final_gap.unwrap_or(f64::NAN));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
