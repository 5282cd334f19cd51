//! Flat structure of C³, special Lagrangian residuals and the fiber chart
//! `z₁z₂ = v + iy`, `z₃ = x + iu`, `|z₁|² − |z₂|² = 2a`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::elliptic_engine::{DomainKind, SolutionField};
use crate::error::{Result, SlError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint3 {
    pub z1: C64,
    pub z2: C64,
    pub z3: C64,
}

impl ComplexPoint3 {
    pub fn new(z1: C64, z2: C64, z3: C64) -> Self {
        ComplexPoint3 { z1, z2, z3 }
    }

    pub fn real(x1: f64, x2: f64, x3: f64) -> Self {
        ComplexPoint3::new(C64::new(x1, 0.0), C64::new(x2, 0.0), C64::new(x3, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.z1.is_finite() && self.z2.is_finite() && self.z3.is_finite()
    }

    pub fn coords(&self) -> [C64; 3] {
        [self.z1, self.z2, self.z3]
    }

    pub fn sub(&self, o: &ComplexPoint3) -> [C64; 3] {
        [self.z1 - o.z1, self.z2 - o.z2, self.z3 - o.z3]
    }

    pub fn dist(&self, o: &ComplexPoint3) -> f64 {
        self.sub(o).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Three real tangent vectors of R⁶ ≅ C³ at `base`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentFrame {
    pub base: ComplexPoint3,
    pub e: [[C64; 3]; 3],
}

fn herm(a: &[C64; 3], b: &[C64; 3]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64; 3]) -> f64 {
    herm(a, a).re.sqrt()
}

/// `ω(X, Y) = Σ Im(X̄_k Y_k)`.
pub fn omega(a: &[C64; 3], b: &[C64; 3]) -> f64 {
    herm(a, b).im
}

/// `Ω(X, Y, Z) = det[X Y Z]` for `Ω = dz₁∧dz₂∧dz₃`.
pub fn big_omega(a: &[C64; 3], b: &[C64; 3], c: &[C64; 3]) -> C64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

impl TangentFrame {
    pub fn new(base: ComplexPoint3, e1: [C64; 3], e2: [C64; 3], e3: [C64; 3]) -> Self {
        TangentFrame { base, e: [e1, e2, e3] }
    }

    /// Real Gram determinant normalized by the squared lengths.
    pub fn normalized_gram(&self) -> f64 {
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = herm(&self.e[i], &self.e[j]).re;
            }
        }
        let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
        let scale = g[0][0] * g[1][1] * g[2][2];
        if scale > 0.0 {
            det / scale
        } else {
            0.0
        }
    }

    fn check(&self) -> Result<()> {
        let finite = self.e.iter().flatten().all(|z| z.is_finite());
        if !finite || self.normalized_gram() <= 1e-12 {
            Err(SlError::DegenerateFrame)
        } else {
            Ok(())
        }
    }
}

/// Largest normalized `|ω(e_i, e_j)|` over the three pairs.
pub fn omega_residual(frame: &TangentFrame) -> Result<f64> {
    frame.check()?;
    let e = &frame.e;
    let mut m = 0.0f64;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        m = m.max(omega(&e[i], &e[j]).abs() / (norm(&e[i]) * norm(&e[j])));
    }
    Ok(m)
}

/// `|Im Ω(e₁, e₂, e₃)| / (|e₁||e₂||e₃|)`.
pub fn imomega_residual(frame: &TangentFrame) -> Result<f64> {
    frame.check()?;
    let e = &frame.e;
    Ok(big_omega(&e[0], &e[1], &e[2]).im.abs() / (norm(&e[0]) * norm(&e[1]) * norm(&e[2])))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberChartPoint {
    pub x: f64,
    pub y: f64,
    pub phase: f64,
    pub a: f64,
}

impl FiberChartPoint {
    pub fn new(x: f64, y: f64, phase: f64, a: f64) -> Self {
        FiberChartPoint { x, y, phase, a }
    }
}

/// Anything that supplies `(u, v)` at `(x, y)` for one level `a`.
pub trait UvSource {
    fn level(&self) -> f64;
    fn uv(&self, x: f64, y: f64) -> Result<(f64, f64)>;
    /// Points where the chart itself is singular: `a = 0`, `v = y = 0`.
    fn near_singular(&self, x: f64, y: f64, radius: f64) -> bool {
        let _ = (x, y, radius);
        false
    }
}

impl UvSource for SolutionField {
    fn level(&self) -> f64 {
        self.a
    }

    fn uv(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        if self.domain.kind == DomainKind::PeriodicStrip && y.abs() > self.domain.r {
            return Err(SlError::OutOfDomain { x, y });
        }
        self.eval_uv(x, y)
    }

    fn near_singular(&self, x: f64, y: f64, radius: f64) -> bool {
        self.diagnostics.limit_proxy
            && y.abs() < radius
            && self.eval_v(x, 0.0).map(|v| v.abs() < 1e-3).unwrap_or(false)
    }
}

/// `z₁ = r e^{iψ}`, `r² = a + √(a² + v² + y²)`, `z₂ = (v + iy)/z₁`,
/// `z₃ = x + iu`.
pub fn fiber_point_from_uv(x: f64, y: f64, phase: f64, a: f64, u: f64, v: f64) -> ComplexPoint3 {
    let w = v * v + y * y;
    let s = (a * a + w).sqrt();
    // the two forms agree; pick the one without cancellation
    let r2 = if a >= 0.0 { a + s } else if w > 0.0 { w / (s - a) } else { 0.0 };
    let z3 = C64::new(x, u);
    if r2 <= 0.0 {
        return ComplexPoint3::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), z3);
    }
    let r = r2.sqrt();
    let rot = C64::from_polar(1.0, phase);
    let z1 = rot * r;
    let z2 = C64::new(v, y) * rot.conj() / r;
    ComplexPoint3::new(z1, z2, z3)
}

/// Point of the fiber over the chart coordinates.
pub fn fiber_points<S: UvSource + ?Sized>(field: &S, chart: &FiberChartPoint) -> Result<ComplexPoint3> {
    if (chart.a.abs() - field.level().abs()).abs() > 1e-12 * (1.0 + chart.a.abs()) {
        return Err(SlError::InvalidInput(format!(
            "chart level {} does not match field level {}",
            chart.a,
            field.level()
        )));
    }
    let (u, v) = field.uv(chart.x, chart.y)?;
    Ok(fiber_point_from_uv(chart.x, chart.y, chart.phase, chart.a, u, v))
}

/// Tangent frame from central differences of [`fiber_points`] in
/// `(x, y, phase)` with step `h`.
pub fn fd_frame<S: UvSource + ?Sized>(field: &S, chart: &FiberChartPoint, h: f64) -> Result<TangentFrame> {
    let base = fiber_points(field, chart)?;
    let mut e = [[C64::new(0.0, 0.0); 3]; 3];
    for (m, em) in e.iter_mut().enumerate() {
        let mut p = *chart;
        let mut q = *chart;
        match m {
            0 => {
                p.x += h;
                q.x -= h;
            }
            1 => {
                p.y += h;
                q.y -= h;
            }
            _ => {
                p.phase += h;
                q.phase -= h;
            }
        }
        let d = fiber_points(field, &p)?.sub(&fiber_points(field, &q)?);
        for k in 0..3 {
            em[k] = d[k] / (2.0 * h);
        }
    }
    Ok(TangentFrame { base, e })
}

/// One SL check. `None` inside the exclusion ball `4h` around a singular
/// point of an `a = 0` proxy field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlSample {
    pub omega: f64,
    pub imomega: f64,
}

pub fn sl_check<S: UvSource + ?Sized>(field: &S, chart: &FiberChartPoint, h: f64) -> Result<Option<SlSample>> {
    if field.near_singular(chart.x, chart.y, 4.0 * h) {
        return Ok(None);
    }
    let fr = fd_frame(field, chart, h)?;
    Ok(Some(SlSample {
        omega: omega_residual(&fr)?,
        imomega: imomega_residual(&fr)?,
    }))
}

/// Max over interior nodes of `|u_x − v_y|` and
/// `|v_x + 2√(v² + y² + a²) u_y|` by central differences. For `a = 0` proxy
/// fields, nodes within one cell of a singular point are skipped.
pub fn field_equation_residual(field: &SolutionField) -> f64 {
    let d = field.domain;
    let cell = match d.kind {
        DomainKind::Disc => d.dr().max(d.dtheta()),
        DomainKind::PeriodicStrip => d.hx().max(d.hy()),
    };
    let zeros: Vec<f64> = if field.a.abs() < 1e-3 {
        let prof = field.axis_profile();
        (0..prof.len()).filter(|&i| prof.vs[i].abs() < 1e-3).map(|i| prof.xs[i]).collect()
    } else {
        Vec::new()
    };
    let mut m = 0.0f64;
    for k in 0..d.node_count() {
        let Some([ux, uy, vx, vy]) = field.node_derivatives(k) else {
            continue;
        };
        let (x, y) = d.node_xy(k);
        if zeros.iter().any(|&z| (x - z).hypot(y) <= 1.5 * cell) {
            continue;
        }
        let v = field.v[k];
        let r1 = (ux - vy).abs();
        let r2 = (vx + 2.0 * (v * v + y * y + field.a * field.a).sqrt() * uy).abs();
        m = m.max(r1).max(r2);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real_frame() -> TangentFrame {
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        TangentFrame::new(ComplexPoint3::real(0.0, 0.0, 0.0), [l, o, o], [o, l, o], [o, o, l])
    }

    #[test]
    fn real_locus_is_special_lagrangian() {
        let f = real_frame();
        assert_eq!(omega_residual(&f).unwrap(), 0.0);
        assert_eq!(imomega_residual(&f).unwrap(), 0.0);
    }

    #[test]
    fn complex_line_is_not_lagrangian() {
        let o = c(0.0, 0.0);
        let f = TangentFrame::new(
            ComplexPoint3::real(0.0, 0.0, 0.0),
            [c(1.0, 0.0), o, o],
            [c(0.0, 1.0), o, o],
            [o, o, c(1.0, 0.0)],
        );
        assert!((omega_residual(&f).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tilted_plane_phase() {
        let o = c(0.0, 0.0);
        let f = TangentFrame::new(
            ComplexPoint3::real(0.0, 0.0, 0.0),
            [C64::from_polar(1.0, PI / 6.0), o, o],
            [o, c(1.0, 0.0), o],
            [o, o, c(1.0, 0.0)],
        );
        assert!((imomega_residual(&f).unwrap() - 0.5).abs() < 1e-15);
        assert!(omega_residual(&f).unwrap() < 1e-15);
    }

    #[test]
    fn degenerate_frame_is_rejected() {
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        let f = TangentFrame::new(ComplexPoint3::real(0.0, 0.0, 0.0), [l, o, o], [l, o, o], [o, o, l]);
        assert_eq!(omega_residual(&f).unwrap_err(), SlError::DegenerateFrame);
        assert_eq!(imomega_residual(&f).unwrap_err(), SlError::DegenerateFrame);
    }

    #[test]
    fn chart_examples() {
        let p = fiber_point_from_uv(1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!(p.dist(&ComplexPoint3::real(1.0, 1.0, 1.0)) < 1e-15);
        let q = fiber_point_from_uv(0.0, 0.0, 1.3, 0.0, 0.0, 0.0);
        assert!(q.dist(&ComplexPoint3::real(0.0, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn chart_constraints_hold() {
        for &(a, u, v, y) in &[(0.3, 0.1, -0.4, 0.7), (-2.0, 0.5, 1e-3, 0.2), (-5.0, 0.0, 3.0, -1.0)] {
            let p = fiber_point_from_uv(0.2, y, 0.9, a, u, v);
            let z12 = p.z1 * p.z2;
            assert!((p.z1.norm_sqr() - p.z2.norm_sqr() - 2.0 * a).abs() < 1e-12);
            assert!((z12.im - y).abs() < 1e-12);
            assert!((z12.re - v).abs() < 1e-12);
            assert!((p.z3.im - u).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_field_has_zero_equation_residual() {
        let d = crate::elliptic_engine::DomainSpec::disc(16);
        let f = SolutionField::from_fn(d, 1.0, |_, _| (0.0, 0.8)).unwrap();
        assert!(field_equation_residual(&f) < 1e-12);
        let g = SolutionField::from_fn(d, 1.0, |x, y| (y, x)).unwrap();
        assert!(field_equation_residual(&g) >= 1.0);
    }
}
