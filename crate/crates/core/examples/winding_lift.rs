//! Angle lift of a circle map and its winding number.
use isocrit::gallery::builtin;
use isocrit::winding::{angle_lift, sample_circle_map};

fn main() -> isocrit::Result<()> {
    let field = builtin("z_pow_n:3")?.field;
    for samples in [16, 64, 256] {
        let lp = sample_circle_map(&field, &[0.0, 0.0], 0.5, samples)?;
        let lift = angle_lift(&lp)?;
        println!(
            "samples {samples:>3}: base {:.4}, lift end {:.6}, winding {}",
            lift.base,
            lift.lift_values.last().copied().unwrap_or(0.0),
            lift.winding
        );
    }
    Ok(())
}
