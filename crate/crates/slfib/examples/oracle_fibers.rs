//! The closed-form `N_a` family: axis slices, points of a fiber, and the
//! special Lagrangian residuals of finite-difference frames.

use num_complex::Complex64 as C64;
use slfib::calibration_core::{sl_check, FiberChartPoint};
use slfib::explicit_models::{na_oracle, na_point, na_slice_formulas, Axis, NaModel};

fn main() -> slfib::Result<()> {
    for a in [0.0, 0.5, 1.0, 2.0] {
        let mut worst = 0.0f64;
        for i in 0..100 {
            let s = -2.0 + 4.0 * i as f64 / 99.0;
            let (u, _) = na_oracle(a, 0.0, s)?;
            let (_, v) = na_oracle(a, s, 0.0)?;
            worst = worst.max((u - na_slice_formulas(a, s, Axis::U)).abs());
            worst = worst.max((v - na_slice_formulas(a, s, Axis::V)).abs());
        }
        println!("a = {a}: max slice error {worst:.2e}");
    }

    let model = NaModel::new(0.5, C64::new(0.2, -0.1));
    let p = na_point(&model, 0.3, -0.4, 1.0)?;
    println!("a point of N(0.5, 0.2-0.1i): {p:?}");

    let mut worst = (0.0f64, 0.0f64);
    for k in 0..50 {
        let t = k as f64 / 50.0;
        let chart = FiberChartPoint::new(-1.0 + 2.0 * t, 0.8 - 1.6 * t * t, 6.0 * t, model.a);
        if let Some(s) = sl_check(&model, &chart, 1e-4)? {
            worst = (worst.0.max(s.omega), worst.1.max(s.imomega));
        }
    }
    println!("50 frames: max |ω| = {:.2e}, max |Im Ω| = {:.2e}", worst.0, worst.1);
    Ok(())
}
