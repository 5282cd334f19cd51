//! Fourier–Chebyshev collocation for the strip `v` equation at `a ≠ 0`.
//!
//! The field is stored as a tensor of Chebyshev (in `y/R`) by Fourier (in
//! `2πx/P`) coefficients, so `u`, `v` and all their derivatives can be
//! evaluated anywhere in the closed strip without a grid interpolant.

use std::f64::consts::PI;

use faer::sparse::Triplet;
use serde::{Deserialize, Serialize};

use super::boundary::BoundarySpec;
use super::field::{DomainKind, DomainSpec, FieldBoundary, SolutionField, Diagnostics};
use super::newton::{newton, NewtonOptions, NonlinearSystem};
use super::{coefficient, coefficient_slope};
use crate::calibration_core::UvSource;
use crate::error::{Result, SlError};

/// Collocation resolution: `n_x` Fourier nodes (odd) and `n_y + 1`
/// Chebyshev–Gauss–Lobatto nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSpec {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub n_x: usize,
    pub n_y: usize,
}

impl SpectralSpec {
    pub fn new(r: f64, p: f64, n_x: usize, n_y: usize) -> Self {
        SpectralSpec { r, p, n_x, n_y }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.p > 0.0 && self.r.is_finite() && self.p.is_finite()) {
            return Err(SlError::InvalidInput("R and P must be positive".into()));
        }
        if self.n_x < 5 || self.n_x % 2 == 0 {
            return Err(SlError::InvalidInput("spectral n_x must be odd and at least 5".into()));
        }
        if self.n_y < 4 {
            return Err(SlError::InvalidInput("spectral n_y must be at least 4".into()));
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.p * i as f64 / self.n_x as f64
    }

    /// `y_j = R cos(πj/n_y)`, so `j = 0` is the top edge.
    pub fn y(&self, j: usize) -> f64 {
        self.r * (PI * j as f64 / self.n_y as f64).cos()
    }
}

impl Default for SpectralSpec {
    fn default() -> Self {
        SpectralSpec::new(1.0, 2.0 * PI, 47, 32)
    }
}

/// Fourier differentiation matrix on `n` (odd) equispaced nodes of period `p`.
fn fourier_diff(n: usize, p: f64) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let scale = 2.0 * PI / p;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..n {
            if i != l {
                let k = i as i64 - l as i64;
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                d[i * n + l] = scale * 0.5 * sign / (0.5 * k as f64 * h).sin();
            }
        }
    }
    d
}

/// Chebyshev differentiation matrix on `cos(πj/n)`, `j = 0..=n`, for `y = R s`.
fn cheb_diff(n: usize, r: f64) -> Vec<f64> {
    let m = n + 1;
    let s: Vec<f64> = (0..m).map(|j| (PI * j as f64 / n as f64).cos()).collect();
    let c = |j: usize| {
        let e = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j % 2 == 0 { e } else { -e }
    };
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        let mut row = 0.0;
        for j in 0..m {
            if i != j {
                let v = c(i) / c(j) / (s[i] - s[j]);
                d[i * m + j] = v / r;
                row += v;
            }
        }
        d[i * m + i] = -row / r;
    }
    d
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for j in 0..n {
                    c[i * n + j] += aik * b[k * n + j];
                }
            }
        }
    }
    c
}

struct Operators {
    spec: SpectralSpec,
    dx: Vec<f64>,
    dy: Vec<f64>,
    dyy: Vec<f64>,
    y: Vec<f64>,
}

impl Operators {
    fn new(spec: SpectralSpec) -> Self {
        let dy = cheb_diff(spec.n_y, spec.r);
        let dyy = matmul(&dy, &dy, spec.n_y + 1);
        Operators {
            spec,
            dx: fourier_diff(spec.n_x, spec.p),
            dy,
            dyy,
            y: (0..=spec.n_y).map(|j| spec.y(j)).collect(),
        }
    }

    /// Row-wise `x` derivative of a full grid laid out as `j * n_x + i`.
    fn ddx(&self, f: &[f64]) -> Vec<f64> {
        let nx = self.spec.n_x;
        let mut out = vec![0.0; f.len()];
        for (row_in, row_out) in f.chunks(nx).zip(out.chunks_mut(nx)) {
            for i in 0..nx {
                row_out[i] = (0..nx).map(|l| self.dx[i * nx + l] * row_in[l]).sum();
            }
        }
        out
    }

    fn ddy(&self, f: &[f64]) -> Vec<f64> {
        let (nx, m) = (self.spec.n_x, self.spec.n_y + 1);
        let mut out = vec![0.0; f.len()];
        for j in 0..m {
            for jj in 0..m {
                let w = self.dy[j * m + jj];
                for i in 0..nx {
                    out[j * nx + i] += w * f[jj * nx + i];
                }
            }
        }
        out
    }
}

struct SpectralSystem<'a> {
    ops: &'a Operators,
    top: Vec<f64>,
    bottom: Vec<f64>,
    a: f64,
    dx2_diag: f64,
}

impl SpectralSystem<'_> {
    fn full_grid(&self, x: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(x.len() + 2 * self.top.len());
        v.extend_from_slice(&self.top);
        v.extend_from_slice(x);
        v.extend_from_slice(&self.bottom);
        v
    }
}

impl NonlinearSystem for SpectralSystem<'_> {
    fn dim(&self) -> usize {
        self.ops.spec.n_x * (self.ops.spec.n_y - 1)
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.ops.spec.n_x, self.ops.spec.n_y);
        let m = ny + 1;
        let v = self.full_grid(x);
        let vx = self.ops.ddx(&v);
        let flux: Vec<f64> = (0..v.len()).map(|k| coefficient(v[k], self.ops.y[k / nx], self.a) * vx[k]).collect();
        let fx = self.ops.ddx(&flux);
        for j in 1..ny {
            for i in 0..nx {
                let vyy: f64 = (0..m).map(|jj| self.ops.dyy[j * m + jj] * v[jj * nx + i]).sum();
                out[(j - 1) * nx + i] = fx[j * nx + i] + 2.0 * vyy;
            }
        }
    }

    fn jacobian(&self, x: &[f64]) -> Vec<Triplet<usize, usize, f64>> {
        let (nx, ny) = (self.ops.spec.n_x, self.ops.spec.n_y);
        let m = ny + 1;
        let v = self.full_grid(x);
        let vx = self.ops.ddx(&v);
        let dx = &self.ops.dx;
        let mut trip = Vec::with_capacity(self.dim() * (nx + ny));
        let mut inner = vec![0.0; nx * nx];
        for j in 1..ny {
            let y = self.ops.y[j];
            for l in 0..nx {
                let k = j * nx + l;
                let kap = coefficient(v[k], y, self.a);
                let slope = coefficient_slope(v[k], y, self.a) * vx[k];
                for mm in 0..nx {
                    inner[l * nx + mm] = kap * dx[l * nx + mm] + if l == mm { slope } else { 0.0 };
                }
            }
            for i in 0..nx {
                let row = (j - 1) * nx + i;
                for mm in 0..nx {
                    let mut s: f64 = (0..nx).map(|l| dx[i * nx + l] * inner[l * nx + mm]).sum();
                    if mm == i {
                        s += 2.0 * self.ops.dyy[j * m + j];
                    }
                    trip.push(Triplet::new(row, (j - 1) * nx + mm, s));
                }
                for jj in 1..ny {
                    if jj != j {
                        trip.push(Triplet::new(row, (jj - 1) * nx + i, 2.0 * self.ops.dyy[j * m + jj]));
                    }
                }
            }
        }
        trip
    }

    fn scaled_norm(&self, x: &[f64], r: &[f64]) -> f64 {
        let (nx, ny) = (self.ops.spec.n_x, self.ops.spec.n_y);
        let m = ny + 1;
        let mut worst = 0.0f64;
        for j in 1..ny {
            let y = self.ops.y[j];
            let wy = 2.0 * self.ops.dyy[j * m + j].abs();
            for i in 0..nx {
                let k = (j - 1) * nx + i;
                let w = coefficient(x[k], y, self.a) * self.dx2_diag + wy;
                worst = worst.max(r[k].abs() / w);
            }
        }
        worst
    }

    fn pattern_key(&self) -> Option<String> {
        let s = self.ops.spec;
        Some(format!("spectral:{}:{}", s.n_x, s.n_y))
    }
}

/// Spectrally represented strip solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralStripField {
    pub spec: SpectralSpec,
    pub a: f64,
    pub top: BoundarySpec,
    pub bottom: BoundarySpec,
    /// Nodal values, `j * n_x + i`, `j = 0` on the top edge.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub periodicity_defect: f64,
    u_coef: Vec<f64>,
    v_coef: Vec<f64>,
}

/// Tensor coefficients `[m][c]` with `c = 0` the mean, `c = 2k−1` the
/// `cos kθ` and `c = 2k` the `sin kθ` coefficient of `T_m`.
fn to_coefficients(spec: &SpectralSpec, f: &[f64]) -> Vec<f64> {
    let (nx, ny) = (spec.n_x, spec.n_y);
    let m = ny + 1;
    let mut cheb = vec![0.0; m * nx];
    for mm in 0..m {
        for i in 0..nx {
            let mut s = 0.0;
            for j in 0..m {
                let w = if j == 0 || j == ny { 0.5 } else { 1.0 };
                s += w * f[j * nx + i] * (PI * (j * mm) as f64 / ny as f64).cos();
            }
            let norm = if mm == 0 || mm == ny { 1.0 } else { 2.0 };
            cheb[mm * nx + i] = norm * s / ny as f64;
        }
    }
    let kmax = (nx - 1) / 2;
    let mut out = vec![0.0; m * nx];
    for mm in 0..m {
        let row = &cheb[mm * nx..(mm + 1) * nx];
        out[mm * nx] = row.iter().sum::<f64>() / nx as f64;
        for k in 1..=kmax {
            let (mut c, mut s) = (0.0, 0.0);
            for (i, val) in row.iter().enumerate() {
                let th = 2.0 * PI * (k * i) as f64 / nx as f64;
                c += val * th.cos();
                s += val * th.sin();
            }
            out[mm * nx + 2 * k - 1] = 2.0 * c / nx as f64;
            out[mm * nx + 2 * k] = 2.0 * s / nx as f64;
        }
    }
    out
}

fn eval_coefficients(spec: &SpectralSpec, coef: &[f64], x: f64, y: f64) -> f64 {
    let nx = spec.n_x;
    let kmax = (nx - 1) / 2;
    let th = 2.0 * PI * x / spec.p;
    let (c1, s1) = (th.cos(), th.sin());
    let mut trig = vec![0.0; nx];
    trig[0] = 1.0;
    let (mut ck, mut sk) = (1.0, 0.0);
    for k in 1..=kmax {
        let nc = ck * c1 - sk * s1;
        sk = sk * c1 + ck * s1;
        ck = nc;
        trig[2 * k - 1] = ck;
        trig[2 * k] = sk;
    }
    let s = (y / spec.r).clamp(-1.0, 1.0);
    let (mut t0, mut t1) = (1.0, s);
    let mut acc = 0.0;
    for mm in 0..=spec.n_y {
        let t = match mm {
            0 => 1.0,
            1 => s,
            _ => {
                let t2 = 2.0 * s * t1 - t0;
                t0 = t1;
                t1 = t2;
                t2
            }
        };
        let row = &coef[mm * nx..(mm + 1) * nx];
        acc += t * row.iter().zip(&trig).map(|(a, b)| a * b).sum::<f64>();
    }
    acc
}

/// Antiderivative in `s ∈ [−1, 1]` of a Chebyshev series, vanishing at `s = 0`.
fn cheb_integrate(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n + 1];
    let at = |k: usize| if k < n { c[k] } else { 0.0 };
    for k in 1..=n {
        let lo = if k == 1 { 2.0 * at(0) } else { at(k - 1) };
        out[k] = (lo - at(k + 1)) / (2.0 * k as f64);
    }
    let mut at0 = 0.0;
    for (k, ck) in out.iter().enumerate().skip(1) {
        at0 += ck * match k % 4 {
            0 => 1.0,
            2 => -1.0,
            _ => 0.0,
        };
    }
    out[0] = -at0;
    out
}

fn cheb_eval(c: &[f64], s: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * s * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    s * b1 - b2 + c[0]
}

fn nodal_to_cheb(col: &[f64]) -> Vec<f64> {
    let ny = col.len() - 1;
    (0..=ny)
        .map(|mm| {
            let s: f64 = col
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    let w = if j == 0 || j == ny { 0.5 } else { 1.0 };
                    w * f * (PI * (j * mm) as f64 / ny as f64).cos()
                })
                .sum();
            let norm = if mm == 0 || mm == ny { 1.0 } else { 2.0 };
            norm * s / ny as f64
        })
        .collect()
}

/// Collocation solve of the strip `v` equation with `v(x, ±R) = φ±(x)` at
/// level `a ≠ 0`, followed by spectral reconstruction of `u` with `u(0,0) = 0`.
pub fn solve_strip_spectral(
    top: &BoundarySpec,
    bottom: &BoundarySpec,
    a: f64,
    spec: &SpectralSpec,
) -> Result<SpectralStripField> {
    spec.validate()?;
    if !(top.is_finite() && bottom.is_finite() && a.is_finite()) {
        return Err(SlError::InvalidInput("non-finite input".into()));
    }
    let scale = 1.0 + top.constant.abs().max(bottom.constant.abs());
    if (top.constant - bottom.constant).abs() > 1e-12 * scale {
        return Err(SlError::IncompatibleBoundary);
    }
    if a == 0.0 {
        return Err(SlError::InvalidInput("the spectral strip solver needs a ≠ 0".into()));
    }
    let a = a.abs();
    let (nx, ny) = (spec.n_x, spec.n_y);
    let ops = Operators::new(*spec);
    let edge = |b: &BoundarySpec| -> Vec<f64> { (0..nx).map(|i| b.eval(2.0 * PI * spec.x(i) / spec.p)).collect() };
    let dx2_diag = (0..nx).map(|l| ops.dx[l] * ops.dx[l * nx]).sum::<f64>().abs();
    let sys = SpectralSystem {
        ops: &ops,
        top: edge(top),
        bottom: edge(bottom),
        a,
        dx2_diag,
    };
    let mut x0 = Vec::with_capacity(sys.dim());
    for j in 1..ny {
        let s = 0.5 * (1.0 + (PI * j as f64 / ny as f64).cos());
        for i in 0..nx {
            x0.push(s * sys.top[i] + (1.0 - s) * sys.bottom[i]);
        }
    }
    let out = newton(&sys, x0, NewtonOptions::default());
    if !out.converged {
        return Err(SlError::SolverDiverged { residual: out.norm });
    }
    let v = sys.full_grid(&out.x);
    let vx = ops.ddx(&v);
    let vy = ops.ddy(&v);

    // Periodic antiderivative in x of v_y, row by row.
    let kmax = (nx - 1) / 2;
    let omega = 2.0 * PI / spec.p;
    let mut anti = vec![0.0; v.len()];
    let mut defect = 0.0f64;
    for j in 0..=ny {
        let row = &vy[j * nx..(j + 1) * nx];
        let mean = row.iter().sum::<f64>() / nx as f64;
        defect = defect.max((mean * spec.p).abs());
        for k in 1..=kmax {
            let (mut c, mut s) = (0.0, 0.0);
            for (i, val) in row.iter().enumerate() {
                let th = 2.0 * PI * (k * i) as f64 / nx as f64;
                c += val * th.cos();
                s += val * th.sin();
            }
            let (c, s) = (2.0 * c / nx as f64, 2.0 * s / nx as f64);
            let kw = k as f64 * omega;
            for i in 0..nx {
                let th = 2.0 * PI * (k * i) as f64 / nx as f64;
                anti[j * nx + i] += (c * th.sin() - s * th.cos()) / kw;
            }
        }
    }
    if defect > 1e-6 {
        return Err(SlError::MonodromyDefect { defect });
    }
    let anti_y = ops.ddy(&anti);
    let gprime: Vec<f64> = (0..=ny)
        .map(|j| {
            let k = j * nx;
            -0.5 * coefficient(v[k], ops.y[j], a) * vx[k] - anti_y[k]
        })
        .collect();
    let g_coef: Vec<f64> = cheb_integrate(&nodal_to_cheb(&gprime)).into_iter().map(|c| c * spec.r).collect();
    let anti_col: Vec<f64> = (0..=ny).map(|j| anti[j * nx]).collect();
    let shift = cheb_eval(&g_coef, 0.0) + cheb_eval(&nodal_to_cheb(&anti_col), 0.0);
    let mut u = anti;
    for j in 0..=ny {
        let g = cheb_eval(&g_coef, ops.y[j] / spec.r) - shift;
        for i in 0..nx {
            u[j * nx + i] += g;
        }
    }
    Ok(SpectralStripField {
        spec: *spec,
        a,
        top: top.clone(),
        bottom: bottom.clone(),
        u_coef: to_coefficients(spec, &u),
        v_coef: to_coefficients(spec, &v),
        u,
        v,
        residual_norm: out.norm,
        newton_iterations: out.iterations,
        periodicity_defect: defect,
    })
}

impl SpectralStripField {
    pub fn eval_uv(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        if !(x.is_finite() && y.is_finite()) || y.abs() > self.spec.r * (1.0 + 1e-12) {
            return Err(SlError::OutOfDomain { x, y });
        }
        Ok((
            eval_coefficients(&self.spec, &self.u_coef, x, y),
            eval_coefficients(&self.spec, &self.v_coef, x, y),
        ))
    }

    /// Samples onto a uniform strip grid with the same `R` and `P`.
    pub fn to_solution_field(&self, domain: &DomainSpec) -> Result<SolutionField> {
        if domain.kind != DomainKind::PeriodicStrip
            || (domain.r - self.spec.r).abs() > 1e-12
            || (domain.p - self.spec.p).abs() > 1e-12
        {
            return Err(SlError::InvalidInput("domain does not match the spectral strip".into()));
        }
        let mut fld = SolutionField::from_fn(*domain, self.a, |x, y| self.eval_uv(x, y).unwrap_or((f64::NAN, f64::NAN)))?;
        fld.boundary = FieldBoundary::Strip {
            top: self.top.clone(),
            bottom: self.bottom.clone(),
        };
        fld.residual_norm = self.residual_norm;
        fld.diagnostics = Diagnostics {
            newton_iterations: self.newton_iterations,
            periodicity_defect: self.periodicity_defect,
            ..Default::default()
        };
        Ok(fld)
    }
}

impl UvSource for SpectralStripField {
    fn level(&self) -> f64 {
        self.a
    }

    fn uv(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        self.eval_uv(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiation_matrices_are_exact_on_low_modes() {
        let spec = SpectralSpec::new(0.7, 3.0, 9, 6);
        let dx = fourier_diff(spec.n_x, spec.p);
        let w = 2.0 * PI / spec.p;
        for i in 0..spec.n_x {
            let d: f64 = (0..spec.n_x).map(|l| dx[i * spec.n_x + l] * (2.0 * w * spec.x(l)).sin()).sum();
            assert!((d - 2.0 * w * (2.0 * w * spec.x(i)).cos()).abs() < 1e-12);
        }
        let dy = cheb_diff(spec.n_y, spec.r);
        for j in 0..=spec.n_y {
            let d: f64 = (0..=spec.n_y).map(|l| dy[j * (spec.n_y + 1) + l] * spec.y(l).powi(3)).sum();
            assert!((d - 3.0 * spec.y(j).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_antiderivative_vanishes_at_zero() {
        let c = vec![1.0, 2.0, 0.5, -0.25];
        let i = cheb_integrate(&c);
        assert!(cheb_eval(&i, 0.0).abs() < 1e-15);
        let f = |s: f64| cheb_eval(&c, s);
        let h = 1e-5;
        for s in [-0.8, -0.1, 0.4, 0.9] {
            let d = (cheb_eval(&i, s + h) - cheb_eval(&i, s - h)) / (2.0 * h);
            assert!((d - f(s)).abs() < 1e-8);
        }
    }

    #[test]
    fn affine_in_y_is_exact() {
        let spec = SpectralSpec::new(1.0, 2.0 * PI, 9, 8);
        let b = BoundarySpec::constant(0.4);
        let fld = solve_strip_spectral(&b, &b, 0.3, &spec).unwrap();
        let (u, v) = fld.eval_uv(1.3, 0.2).unwrap();
        assert!(u.abs() < 1e-13 && (v - 0.4).abs() < 1e-13);
    }

    #[test]
    fn cosine_data_keeps_axis_u_zero() {
        let spec = SpectralSpec::new(1.0, 2.0 * PI, 31, 24);
        let b = BoundarySpec::strip_cosine(0.2, 1.0);
        let fld = solve_strip_spectral(&b, &b, 0.5, &spec).unwrap();
        for k in 0..10 {
            let (u, _) = fld.eval_uv(0.6 * k as f64, 0.0).unwrap();
            assert!(u.abs() < 1e-10, "u = {u}");
        }
        assert!(fld.periodicity_defect < 1e-10);
    }
}
