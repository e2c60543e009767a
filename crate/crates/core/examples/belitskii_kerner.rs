//! Homotopy scan for the Belitskii-Kerner map and certified zeros on its slices.
use isocrit::degree::{certify_zero, homotopy_boundary_scan, ScanBoundary};
use isocrit::gallery::{belitskii_kerner_homotopy, builtin};
use isocrit::AxisBox;

fn main() -> isocrit::Result<()> {
    let family = belitskii_kerner_homotopy()?;
    let map = builtin("belitskii_kerner")?.field;
    for x in [0.05, 0.02] {
        let boundary = ScanBoundary::Sphere {
            center: vec![0.0, 0.0],
            radius: 2.0 * x * x,
            samples: 256,
        };
        let scan = homotopy_boundary_scan(
            |t, y| family.eval(&[t, x, y[0], y[1]]),
            &boundary,
            32,
            "dilation to map",
        )?;
        println!(
            "x = {x}: min |F_t| on circle {:.3e} (x^3/10 = {:.3e}), certified {}",
            scan.min_modulus_over_boundary,
            x.powi(3) / 10.0,
            scan.certified
        );

        let slice = map.slice(&[x])?;
        let verdict = certify_zero(&slice, &AxisBox::cube(&[0.0, 0.0], 2.0 * x * x)?, 16)?;
        if let Some(p) = verdict.certificate().preimages.first() {
            println!(
                "  zero at y = {:?}, degree {}",
                p.x,
                verdict.certificate().degree
            );
        }
    }
    Ok(())
}
