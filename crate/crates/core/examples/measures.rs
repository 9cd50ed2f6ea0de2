//! Signed measures on a finite space: Jordan and Hahn decompositions and
//! the two distances between measures.

use varmeas::measure::{sup_set_gap, total_variation_distance, AtomSpace, MeasurableSet, SignedMeasure};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let space = AtomSpace::with_labels(vec!["a".into(), "b".into(), "c".into(), "d".into()])?;
    let m = SignedMeasure::on(&space, vec![0.5, -0.25, 0.125, -0.375])?;

    let j = m.jordan();
    println!("m⁺ = {:?}", j.pos.weights());
    println!("m⁻ = {:?}", j.neg.weights());
    println!("|m|(Ω) = {}", m.total_variation());
    assert_eq!(j.reconstruct(), m);

    let h = m.hahn();
    println!("P = {:?}, N = {:?}", h.positive.indices(), h.negative.indices());
    println!("m(P) = {}, m(N) = {}", m.eval(&h.positive)?, m.eval(&h.negative)?);

    let mu = SignedMeasure::on(&space, vec![0.25; 4])?;
    let tv = total_variation_distance(&m, &mu)?;
    let gap = sup_set_gap(&m, &mu)?;
    println!("|m - μ|(Ω) = {tv}, sup_A |m(A) - μ(A)| = {gap}");
    assert!(gap <= tv && tv <= 2.0 * gap);

    let ab = MeasurableSet::from_indices(4, &[0, 1])?;
    println!("m({{a, b}}) = {}", m.eval(&ab)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
