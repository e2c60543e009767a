//! Sampled global diffeomorphism check on a proper map without critical points, and on z^2.
use isocrit::gallery::builtin;
use isocrit::hadamard::hadamard_check;
use isocrit::AxisBox;

fn main() -> isocrit::Result<()> {
    let bx = AxisBox::uniform(2, -6.0, 6.0)?;
    for id in ["hadamard_demo", "z_pow_n:2"] {
        let field = builtin(id)?.field;
        let rep = hadamard_check(&field, &bx, 64, &[1.0, 2.0, 4.0, 6.0], 2000, 0)?;
        println!(
            "{id}: {:?}, min |det J| = {:.4e} at {:?}",
            rep.verdict, rep.min_abs_det, rep.min_det_at
        );
        for s in &rep.properness_samples {
            println!(
                "  min |H| on sphere of radius {}: {:.4}",
                s.radius, s.min_modulus
            );
        }
    }
    Ok(())
}
