//! Implicit solutions of z^2 = w^4 near the origin, where no unique branch exists.
use isocrit::gallery::builtin;
use isocrit::implicit::{
    continuity_profile, ring_samples, solve_implicit, ImplicitOptions, UniquenessMode,
};

fn main() -> isocrit::Result<()> {
    let field = builtin("z2_minus_w4")?.field;
    let xs = ring_samples(&[0.0, 0.0], &[0.1, 0.05, 0.01], 4);
    let opts = ImplicitOptions {
        mode: UniquenessMode::ExistenceOnly,
        ..ImplicitOptions::default()
    };
    let report = solve_implicit(&field, &[0.0, 0.0], &[0.0, 0.0], &xs, &opts)?;
    for s in &report.samples {
        println!(
            "z = ({:>6.3}, {:>6.3})  w = ({:>8.5}, {:>8.5})  residual {:.1e}",
            s.x[0], s.x[1], s.y[0], s.y[1], s.residual
        );
    }
    for p in continuity_profile(&report, &[0.1, 0.05, 0.01])? {
        println!(
            "delta {:.2}: sup |g - g(0)| = {:.4}",
            p.delta, p.sup_deviation
        );
    }
    Ok(())
}
