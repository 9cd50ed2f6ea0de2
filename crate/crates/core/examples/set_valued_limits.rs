//! Set-valued integrals through support functions and the two
//! multivalued limit theorems.

use varmeas::certificate::Decay;
use varmeas::convex::{DirectionGrid, Polytope};
use varmeas::families::{MeasureFamily, MultiFamily};
use varmeas::measure::{AtomSpace, MeasurableSet, SignedMeasure};
use varmeas::setvalued::{check_thmulti, check_thmulti2, pettis_integral, MultiMap};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let space = AtomSpace::new(3)?;
    let bodies = vec![
        Polytope::cuboid(&[0.0, 0.0], &[1.0, 1.0])?,
        Polytope::cross(2, 0.5)?,
        Polytope::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]])?,
    ];
    let gamma = MultiMap::new(&space, 2, bodies)?;
    let m = SignedMeasure::on(&space, vec![0.5, 0.25, 0.25])?;
    let grid = DirectionGrid::default_for(2)?;

    let entry = pettis_integral(&gamma, &m, &space.full(), &grid)?;
    if let Some(body) = &entry.body {
        println!("∫ Γ dm has {} vertices, radius {:.4}", body.n_vertices(), body.radius());
    }
    println!("sublinearity defect {:e}", entry.sublinearity_defect);

    let mu = SignedMeasure::on(&space, vec![0.2, 0.3, 0.5])?;
    let multi = MultiFamily::scaled(&gamma, Decay::harmonic())?;
    let mf = MeasureFamily::convex_mix(&m, &mu, Decay::power(1.0, 1.0)?)?;

    let sets = [space.full(), MeasurableSet::from_indices(3, &[0, 2])?];
    let r = check_thmulti(&multi, &mf, &sets, 2e-2, 256)?;
    println!("thmulti: {:?}, final gap {:.3e}", r.verdict, r.final_gap.unwrap_or(f64::NAN));

    let r = check_thmulti2(&multi, &mf, 2e-2, 256)?;
    let upper = r.curves.iter().find(|c| c.label == "hausdorff upper").and_then(|c| c.points.last());
    println!("thmulti2: {:?}, sup_A gap {:.3e}, Hausdorff upper {:?}", r.verdict, r.final_gap.unwrap_or(f64::NAN), upper);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
