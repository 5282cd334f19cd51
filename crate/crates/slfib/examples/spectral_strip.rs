//! Spectral strip solve and the special Lagrangian residuals of its fibers.

use std::f64::consts::PI;

use slfib::calibration_core::{sl_check, FiberChartPoint};
use slfib::elliptic_engine::{solve_strip_spectral, BoundarySpec, SpectralSpec};

fn main() -> slfib::Result<()> {
    let spec = SpectralSpec::new(1.0, 2.0 * PI, 49, 32);
    let top = BoundarySpec::strip_cosine(0.3, 1.0);
    let bottom = BoundarySpec::strip_cosine(0.3, -0.5);
    let f = solve_strip_spectral(&top, &bottom, 0.5, &spec)?;
    println!("residual {:.2e}, {} Newton steps, periodicity defect {:.2e}", f.residual_norm, f.newton_iterations, f.periodicity_defect);

    let mut worst = (0.0f64, 0.0f64);
    for k in 0..100 {
        let s = k as f64 / 100.0;
        let chart = FiberChartPoint::new(2.0 * PI * s, 0.9 * (7.0 * s).sin(), 13.0 * s, 0.5);
        if let Some(r) = sl_check(&f, &chart, 1e-4)? {
            worst = (worst.0.max(r.omega), worst.1.max(r.imomega));
        }
    }
    println!("100 frames: max |ω| = {:.2e}, max |Im Ω| = {:.2e}", worst.0, worst.1);
    Ok(())
}
