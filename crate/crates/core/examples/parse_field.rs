//! Parse a field, print its canonical form and compare the AD Jacobian with finite differences.
use isocrit::{parse_field, VectorField};

fn main() -> isocrit::Result<()> {
    let src = "sin(x1)*x2^2 - 3 ; exp(-x1) + x2/2";
    let ast = parse_field(src, 2, 2)?;
    println!("canonical: {ast}");
    let reparsed = parse_field(&ast.to_string(), 2, 2)?;
    println!(
        "round trip stable: {}",
        reparsed.to_string() == ast.to_string()
    );

    let field = VectorField::parse(src, 2, 2)?;
    let x = [0.3, -1.2];
    let ad = field.jacobian(&x)?;
    let fd = field.jacobian_fd(&x)?;
    println!("F(x) = {:?}", field.eval(&x)?);
    println!("|J_ad - J_fd| = {:.2e}", (ad - fd).abs().max());
    Ok(())
}
