//! Local index of the gallery fields at the origin.
use isocrit::gallery::builtin;
use isocrit::winding::{homeomorphism_verdict, local_index};

fn main() -> isocrit::Result<()> {
    for id in ["z_pow_n:1", "z_pow_n:2", "z_pow_n:5", "z_abs2"] {
        let field = builtin(id)?.field;
        let r = local_index(&field, &[0.0, 0.0], 0.5)?;
        println!(
            "{id:<10} index {:>2}  samples {:>4}  local homeomorphism {}",
            r.winding(),
            r.samples_used,
            homeomorphism_verdict(&r)?
        );
    }
    Ok(())
}
