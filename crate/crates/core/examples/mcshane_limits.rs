//! McShane integration of step functions: gauges, tagged partitions,
//! equi-integrability and the limit theorem on [0, 1].

use rand::SeedableRng;
use varmeas::certificate::Decay;
use varmeas::mcshane::{
    check_equi_integrable, check_thmcsequi, ms_integral, random_subordinate_partition, riemann_sum, ConvergenceMode,
    DensityFamily, DensityMeasure, IntervalSet, StepFamily, StepFn,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let f = StepFn::scalar(vec![0.0, 0.25, 0.75, 1.0], vec![1.0, -2.0, 0.5])?;
    let m = DensityMeasure::new(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])?;
    let ms = ms_integral(&f, &m);
    println!("∫ f dm = {:?}", ms.value);

    let gauge = ms.gauge_for(1e-4)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = random_subordinate_partition(&mut rng, &gauge);
        p.verify(&gauge)?;
        worst = worst.max((riemann_sum(&f, &m, &p)?[0] - ms.value[0]).abs());
    }
    println!("200 subordinate partitions, largest error {worst:e} (ε = 1e-4)");

    let g = StepFn::scalar(vec![0.0, 0.5, 1.0], vec![1.0, -1.0])?;
    let ff = StepFamily::perturbed(&f, &g, Decay::harmonic())?;
    let mf = DensityFamily::convex_mix(&m, &DensityMeasure::lebesgue(), Decay::harmonic())?;
    let sets = [IntervalSet::interval(0.0, 0.5)?];
    for mode in [ConvergenceMode::Setwise, ConvergenceMode::Tv] {
        let r = check_thmcsequi(&ff, &mf, &sets, 1e-2, 256, mode)?;
        println!("thmcsequi ({mode:?}): {:?}, gap {:.3e}", r.verdict, r.final_gap.unwrap_or(f64::NAN));
    }

    let spike = StepFamily::spike(&StepFn::constant(&[0.0])?, 0.5, &[1.0])?;
    let e = check_equi_integrable(&spike, &DensityFamily::constant(&DensityMeasure::lebesgue()), 1e-2, 256)?;
    println!("spikes: equi-integrability {:?}: {}", e.verdict, e.detail);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
