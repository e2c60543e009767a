//! Number of seeded sublevel components of |H - H(x0)| as the level r grows.
use isocrit::components::counting_curve;
use isocrit::geometry::linspace;
use isocrit::{AxisBox, VectorField};

fn main() -> isocrit::Result<()> {
    let field = VectorField::parse("x1^2 - x2^2 - 0.25 ; 2*x1*x2", 2, 2)?;
    let bx = AxisBox::uniform(2, -1.0, 1.0)?;
    let seeds = vec![vec![0.5, 0.0], vec![-0.5, 0.0]];
    let curve = counting_curve(
        &field,
        &[0.0, 0.0],
        &seeds,
        &bx,
        512,
        &linspace(0.05, 0.5, 10),
    )?;
    for (r, x) in curve.r_values.iter().zip(&curve.x_values) {
        println!("r = {r:.3}  X = {x}");
    }
    Ok(())
}
