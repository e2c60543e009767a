//! Discreteness radius at an isolated zero, and the high wall test on a curve.
use isocrit::components::{discreteness_certificate, high_wall_check};
use isocrit::gallery::builtin;
use isocrit::AxisBox;

fn main() -> isocrit::Result<()> {
    let field = builtin("z_pow_n:3")?.field;
    let cert = discreteness_certificate(&field, &[0.0, 0.0], &[0.8, 0.4, 0.2], 128)?;
    println!(
        "isolated preimage within rho = {}, margin {:.4e}",
        cert.rho, cert.margin
    );

    let square = builtin("z_pow_n:2")?.field;
    let curve = vec![vec![0.5, 0.0], vec![0.0, 0.5], vec![-0.5, 0.0]];
    let rep = high_wall_check(&square, &AxisBox::uniform(2, -1.0, 1.0)?, &curve)?;
    println!(
        "wall {:.4}, curve max {:.4}, verdict {:?}",
        rep.wall_height, rep.curve_max, rep.verdict
    );
    Ok(())
}
