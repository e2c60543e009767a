//! Degree over a box by signed preimage count, checked against the boundary winding,
//! and a certified zero of a 3D field.
use isocrit::degree::{boundary_winding, certify_zero, preimage_degree};
use isocrit::gallery::builtin;
use isocrit::{AxisBox, VectorField};

fn main() -> isocrit::Result<()> {
    let square = builtin("z_pow_n:2")?.field;
    let bx = AxisBox::uniform(2, -2.0, 2.0)?;
    let cert = preimage_degree(&square, &[1.0, 0.5], &bx, 16)?;
    println!(
        "z^2 at (1, 0.5): degree {} from {} preimages",
        cert.degree,
        cert.preimages.len()
    );
    println!(
        "boundary winding {}",
        boundary_winding(&square, &[1.0, 0.5], &bx)?
    );

    let field = VectorField::parse("x1 - x2*x3 ; x2^3 + x1 ; x3 + x1^2 - 0.5", 3, 3)?;
    let verdict = certify_zero(&field, &AxisBox::uniform(3, -1.0, 1.0)?, 12)?;
    let c = verdict.certificate();
    println!(
        "3D field: certified {}, degree {}, margin {:.3e}",
        verdict.is_certified(),
        c.degree,
        c.boundary_margin
    );
    for p in &c.preimages {
        println!("  zero at {:?} sign {:+}", p.x, p.sign);
    }
    Ok(())
}
