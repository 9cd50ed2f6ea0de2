//! Support functions, Hausdorff bounds from a direction grid, and the
//! embedding of convex bodies into support vectors.

use varmeas::convex::{hausdorff, minkowski_combine, radstrom_embed, DirectionGrid, Polytope};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let square = Polytope::cuboid(&[-1.0, -1.0], &[1.0, 1.0])?;
    let diamond = Polytope::cross(2, 1.0)?;
    let grid = DirectionGrid::default_for(2)?;

    println!("s((1, 1)/√2, square) = {}", square.support(&[0.5f64.sqrt(), 0.5f64.sqrt()]));
    let b = hausdorff(&square, &diamond, &grid)?;
    println!("d_H(square, diamond) ∈ [{:.6}, {:.6}] on {} directions (exact {:.6})", b.lower, b.upper, grid.len(), 0.5f64.sqrt());

    let sum = minkowski_combine(&[1.0, 0.5], &[square.clone(), diamond.clone()])?;
    let lhs = radstrom_embed(&sum, &grid)?;
    let rhs = radstrom_embed(&square, &grid)?.add(&radstrom_embed(&diamond, &grid)?.scale(0.5))?;
    println!("embedding additivity defect: {:e}", lhs.distance(&rhs)?);
    println!("sum has {} vertices, radius {}", sum.n_vertices(), sum.radius());

    let a = Polytope::interval(0.0, 2.0)?;
    let c = Polytope::interval(0.5, 3.0)?;
    println!("d_H([0, 2], [0.5, 3]) = {}", hausdorff(&a, &c, &DirectionGrid::line())?.lower);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
