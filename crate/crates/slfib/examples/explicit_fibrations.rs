//! The explicit fibrations `F` and `F′` recover the fiber coordinates of
//! the points they were built from; the Harvey–Lawson map for comparison.

use num_complex::Complex64 as C64;
use slfib::calibration_core::ComplexPoint3;
use slfib::explicit_models::{explicit_f, explicit_fprime, hl_discriminant_contains, hl_map, holo_disc_area, na_point, NaModel};

fn main() -> slfib::Result<()> {
    let (a, c) = (0.7, C64::new(-0.3, 0.4));
    let mut worst = 0.0f64;
    for (x, y, phase) in [(0.1, 0.2, 0.0), (-1.0, 0.5, 2.0), (0.6, -0.9, 4.0)] {
        let p = na_point(&NaModel::new(a, c), x, y, phase)?;
        let q = na_point(&NaModel::primed(a, c), x, y, phase)?;
        let (f, g) = (explicit_f(&p), explicit_fprime(&q));
        worst = worst.max((f.a - a).abs() + (f.c - c).norm());
        worst = worst.max((g.a - a).abs() + (g.c - c).norm());
    }
    println!("F and F' roundtrip error: {worst:.2e}");
    println!("area of the vanishing disc at a = {a}: {:.6}", holo_disc_area(a));

    let b = hl_map(&ComplexPoint3::real(1.0, 1.0, 0.0));
    println!("Harvey-Lawson image of (1,1,0): {b:?}, singular fiber: {}", hl_discriminant_contains(&b, 1e-12));
    Ok(())
}
