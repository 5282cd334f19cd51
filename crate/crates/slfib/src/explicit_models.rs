//! Closed-form models: the Harvey–Lawson fibration, the family `N_a` with its
//! algebraic oracle, and the piecewise-smooth fibrations `F` and `F′`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::calibration_core::{fiber_point_from_uv, ComplexPoint3, UvSource};
use crate::elliptic_engine::BoundarySpec;
use crate::error::{Result, SlError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseCoordHL {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseCoordF {
    pub a: f64,
    pub c: C64,
}

/// `(|z₁|² − |z₂|², |z₁|² − |z₃|², Im z₁z₂z₃)`.
pub fn hl_map(p: &ComplexPoint3) -> BaseCoordHL {
    let n1 = p.z1.norm_sqr();
    BaseCoordHL {
        t1: n1 - p.z2.norm_sqr(),
        t2: n1 - p.z3.norm_sqr(),
        t3: (p.z1 * p.z2 * p.z3).im,
    }
}

/// Distance test against the trivalent graph `{(α,α,0)} ∪ {(0,−α,0)} ∪ {(0,0,−α)}`, α ≥ 0.
pub fn hl_discriminant_contains(b: &BaseCoordHL, tol: f64) -> bool {
    let p = [b.t1, b.t2, b.t3];
    let rays: [[f64; 3]; 3] = [[1.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    rays.iter().any(|d| {
        let dd: f64 = d.iter().map(|x| x * x).sum();
        let s = (p.iter().zip(d).map(|(x, y)| x * y).sum::<f64>() / dd).max(0.0);
        let dist2: f64 = p.iter().zip(d).map(|(x, y)| (x - s * y).powi(2)).sum();
        dist2.sqrt() <= tol
    })
}

/// Axis selector for [`na_slice_formulas`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// `u_a(0, s)`.
    U,
    /// `v_a(s, 0)`.
    V,
}

/// `u_a(0,s) = −s(|a| + √(s² + a²))^{-1/2}` or `v_a(s,0) = s(s² + 2|a|)^{1/2}`.
pub fn na_slice_formulas(a: f64, s: f64, which: Axis) -> f64 {
    let a = a.abs();
    match which {
        Axis::U => {
            let den = a + (s * s + a * a).sqrt();
            if den == 0.0 {
                0.0
            } else {
                -s / den.sqrt()
            }
        }
        Axis::V => s * (s * s + 2.0 * a).sqrt(),
    }
}

const ORACLE_MAX_ITER: usize = 4000;

/// The unique `(u, v)` with `v² + y² = (x² + u² + |a|)² − a²`, `uv = −xy`,
/// `sign v = sign x`, `sign u = −sign y`.
pub fn na_oracle(a: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    if !(a.is_finite() && x.is_finite() && y.is_finite()) {
        return Err(SlError::OracleDiverged);
    }
    let a = a.abs();
    if x == 0.0 {
        return Ok((na_slice_formulas(a, y, Axis::U), 0.0));
    }
    if y == 0.0 {
        return Ok((0.0, na_slice_formulas(a, x, Axis::V)));
    }
    let (x2, y2) = (x * x, y * y);
    // g(U) = (x²+U)(x²+U+2|a|) − y² − x²y²/U, increasing on U > 0
    let g = |uu: f64| (x2 + uu) * (x2 + uu + 2.0 * a) - y2 - x2 * y2 / uu;
    let mut lo = 0.0f64;
    let mut hi = y2.abs().max(1e-300);
    let mut it = 0;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 4.0;
        it += 1;
        if it > ORACLE_MAX_ITER || !hi.is_finite() {
            return Err(SlError::OracleDiverged);
        }
    }
    for _ in 0..ORACLE_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let uu = if lo > 0.0 && -g(lo) < g(hi) { lo } else { hi };
    if !(uu > 0.0 && uu.is_finite()) {
        return Err(SlError::OracleDiverged);
    }
    let u = -y.signum() * uu.sqrt();
    Ok((u, -x * y / u))
}

/// Potential data `f(cos θ, sin θ)` of `N_a` on the unit circle, with
/// `f(1, 0) = 0`, from `∂_θ f = −v sin θ + u cos θ` sampled at `samples` angles.
pub fn na_disc_boundary(a: f64, samples: usize) -> Result<BoundarySpec> {
    let mut d = Vec::with_capacity(samples);
    for m in 0..samples {
        let th = 2.0 * PI * m as f64 / samples as f64;
        let (u, v) = na_oracle(a, th.cos(), th.sin())?;
        d.push(-v * th.sin() + u * th.cos());
    }
    Ok(BoundarySpec::integrate_derivative(|th| d[(th / (2.0 * PI) * samples as f64).round() as usize % samples], samples, 0.0, 1e-15))
}

/// `N_{a,c}` (or its primed partner) as a `(u, v)` source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NaModel {
    pub a: f64,
    pub c: C64,
    pub primed: bool,
}

impl NaModel {
    pub fn new(a: f64, c: C64) -> Self {
        NaModel { a, c, primed: false }
    }

    pub fn primed(a: f64, c: C64) -> Self {
        NaModel { a, c, primed: true }
    }
}

impl UvSource for NaModel {
    fn level(&self) -> f64 {
        self.a
    }

    fn uv(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (u, v) = na_oracle(self.a, x - self.c.re, y)?;
        let s = if self.primed { -1.0 } else { 1.0 };
        Ok((s * u + self.c.im, s * v))
    }

    fn near_singular(&self, x: f64, y: f64, radius: f64) -> bool {
        self.a == 0.0 && (x - self.c.re).hypot(y) < radius
    }
}

fn explicit(p: &ComplexPoint3, sign: f64) -> BaseCoordF {
    let (n1, n2) = (p.z1.norm_sqr(), p.z2.norm_sqr());
    let a = 0.5 * (n1 - n2);
    let zero = C64::new(0.0, 0.0);
    let prod = p.z1.conj() * p.z2.conj();
    let c = if a == 0.0 && p.z1 == zero && p.z2 == zero {
        p.z3
    } else if a >= 0.0 && p.z1 != zero {
        p.z3 - sign * prod / p.z1.norm()
    } else if a < 0.0 {
        p.z3 - sign * prod / p.z2.norm()
    } else {
        p.z3
    };
    BaseCoordF { a, c }
}

/// `F(z) = (a, b)` with `b = z₃ − z̄₁z̄₂/|z₁|` (a ≥ 0) or `z₃ − z̄₁z̄₂/|z₂|` (a < 0).
pub fn explicit_f(p: &ComplexPoint3) -> BaseCoordF {
    explicit(p, 1.0)
}

/// `F′`: as [`explicit_f`] with `+` in place of `−`.
pub fn explicit_fprime(p: &ComplexPoint3) -> BaseCoordF {
    explicit(p, -1.0)
}

/// Area `2π|a|` of the holomorphic disc bounded by the vanishing circle.
pub fn holo_disc_area(a: f64) -> f64 {
    2.0 * PI * a.abs()
}

/// A point of `N_{a,c}` (or `N′_{a,c}`) over the chart `(x, y, phase)`.
pub fn na_point(model: &NaModel, x: f64, y: f64, phase: f64) -> Result<ComplexPoint3> {
    let (u, v) = model.uv(x, y)?;
    Ok(fiber_point_from_uv(x, y, phase, model.a, u, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hl_examples() {
        let b = hl_map(&ComplexPoint3::real(1.0, 1.0, 1.0));
        assert_eq!((b.t1, b.t2, b.t3), (0.0, 0.0, 0.0));
        let b = hl_map(&ComplexPoint3::real(1.0, 0.0, 0.0));
        assert_eq!((b.t1, b.t2, b.t3), (1.0, 1.0, 0.0));
        let o = C64::new(0.0, 0.0);
        let b = hl_map(&ComplexPoint3::new(o, o, C64::new(0.0, 1.0)));
        assert_eq!((b.t1, b.t2, b.t3), (0.0, -1.0, 0.0));
        assert!(hl_discriminant_contains(&b, 1e-12));
    }

    #[test]
    fn discriminant_examples() {
        let at = |t1, t2, t3| BaseCoordHL { t1, t2, t3 };
        assert!(hl_discriminant_contains(&at(2.0, 2.0, 0.0), 1e-12));
        assert!(hl_discriminant_contains(&at(0.0, 0.0, 0.0), 1e-12));
        assert!(!hl_discriminant_contains(&at(1.0, 0.0, 0.0), 1e-9));
        assert!(!hl_discriminant_contains(&at(-1.0, -1.0, 0.0), 1e-9));
        assert!(hl_discriminant_contains(&at(0.0, 0.0, -3.0), 1e-12));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(na_oracle(0.0, 1.0, 0.0).unwrap(), (0.0, 1.0));
        let (u, v) = na_oracle(1.0, 0.0, 1.0).unwrap();
        assert!((u + 0.643_594_252_905_582_6).abs() < 1e-12);
        assert_eq!(v, 0.0);
        assert_eq!(na_oracle(0.0, 0.0, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn slice_examples() {
        assert!((na_slice_formulas(1.0, 1.0, Axis::V) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(na_slice_formulas(0.0, 1.0, Axis::U), -1.0);
        assert_eq!(na_slice_formulas(0.7, 0.0, Axis::V), 0.0);
    }

    #[test]
    fn oracle_off_axis_solves_system() {
        for &(a, x, y) in &[(0.3, 0.5, -0.2), (-1.0, -1.5, 2.0), (0.0, 1e-3, 1e-3), (2.0, 1e-9, 3.0)] {
            let (u, v) = na_oracle(a, x, y).unwrap();
            let lhs = v * v + y * y;
            let rhs = (x * x + u * u + a.abs()).powi(2) - a * a;
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
            assert!((u * v + x * y).abs() < 1e-12);
            assert!(v.signum() == x.signum() && u.signum() == -y.signum());
        }
    }

    #[test]
    fn f_examples() {
        let o = C64::new(0.0, 0.0);
        let b = explicit_f(&ComplexPoint3::new(o, o, C64::new(0.0, 0.5)));
        assert_eq!((b.a, b.c), (0.0, C64::new(0.0, 0.5)));
        let b = explicit_f(&ComplexPoint3::real(1.0, 0.0, 0.0));
        assert_eq!((b.a, b.c), (0.5, o));
    }

    #[test]
    fn disc_area() {
        assert!((holo_disc_area(0.5) - PI).abs() < 1e-15);
        assert_eq!(holo_disc_area(0.0), 0.0);
        assert!((holo_disc_area(-1.0) - 2.0 * PI).abs() < 1e-15);
    }
}
