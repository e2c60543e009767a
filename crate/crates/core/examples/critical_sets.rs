//! A planar field whose critical set is {0} x E for a finite set E.
use isocrit::gallery::{finite_zero_bump, planar_critical_line};

fn main() -> isocrit::Result<()> {
    let e = [-1.0, 0.25, 1.5];
    let g = finite_zero_bump(1, &e.iter().map(|&p| vec![p]).collect::<Vec<_>>())?;
    let h = planar_critical_line(&g)?;
    for z in [-1.0, 0.0, 0.25, 1.0, 1.5] {
        let on_axis = h.jacobian_det(&[0.0, z])?.value;
        let off_axis = h.jacobian_det(&[0.1, z])?.value;
        println!("z = {z:>5}: det J(0, z) = {on_axis:.3e}, det J(0.1, z) = {off_axis:.3e}");
    }
    Ok(())
}
