use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::boundary::BoundarySpec;
use crate::error::{Result, SlError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Disc,
    PeriodicStrip,
}

/// Grid description.
///
/// Disc: `n_x` radial nodes strictly inside the unit circle plus the boundary
/// ring, `n_y` angular nodes (a multiple of 4). Radii are `(i+½)Δr` with
/// `Δr = 1/(n_x+½)`, so ring `n_x` sits on `r = 1` and the x-axis is a uniform
/// 1-D grid.
///
/// Strip: `n_x` periodic nodes on `[0,P)`, `n_y` (odd) nodes on `[−R,R]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub n_x: usize,
    pub n_y: usize,
}

impl DomainSpec {
    /// Disc with `n` radial and `2n` angular nodes.
    pub fn disc(n: usize) -> Self {
        DomainSpec::disc_with(n, 2 * n)
    }

    pub fn disc_with(n_r: usize, n_theta: usize) -> Self {
        DomainSpec {
            kind: DomainKind::Disc,
            r: 1.0,
            p: 2.0 * PI,
            n_x: n_r,
            n_y: n_theta,
        }
    }

    pub fn strip(r: f64, p: f64, n_x: usize, n_y: usize) -> Self {
        DomainSpec {
            kind: DomainKind::PeriodicStrip,
            r,
            p,
            n_x,
            n_y,
        }
    }

    pub fn default_disc() -> Self {
        DomainSpec::disc(128)
    }

    pub fn default_strip() -> Self {
        DomainSpec::strip(1.0, 2.0 * PI, 256, 129)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SlError::InvalidInput(m.to_string()));
        if self.n_x < 16 || self.n_y < 16 {
            return bad("resolutions must be at least 16");
        }
        if !(self.r.is_finite() && self.r > 0.0 && self.p.is_finite() && self.p > 0.0) {
            return bad("R and P must be finite and positive");
        }
        match self.kind {
            DomainKind::Disc if self.n_y % 4 != 0 => bad("disc angular count must be a multiple of 4"),
            DomainKind::PeriodicStrip if self.n_y % 2 == 0 => {
                bad("strip y count must be odd so that y=0 is a node")
            }
            _ => Ok(()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self.kind {
            DomainKind::Disc => (self.n_x + 1) * self.n_y,
            DomainKind::PeriodicStrip => self.n_x * self.n_y,
        }
    }

    pub fn dr(&self) -> f64 {
        1.0 / (self.n_x as f64 + 0.5)
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_y as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        if i == self.n_x {
            1.0
        } else {
            (i as f64 + 0.5) * self.dr()
        }
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    pub fn hx(&self) -> f64 {
        self.p / self.n_x as f64
    }

    pub fn hy(&self) -> f64 {
        2.0 * self.r / (self.n_y - 1) as f64
    }

    pub fn strip_x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn strip_y(&self, j: usize) -> f64 {
        -self.r + j as f64 * self.hy()
    }

    /// Cartesian position of a node index.
    pub fn node_xy(&self, k: usize) -> (f64, f64) {
        match self.kind {
            DomainKind::Disc => {
                let (i, j) = (k / self.n_y, k % self.n_y);
                let (r, t) = (self.radius(i), self.theta(j));
                (r * t.cos(), r * t.sin())
            }
            DomainKind::PeriodicStrip => {
                let (i, j) = (k % self.n_x, k / self.n_x);
                (self.strip_x(i), self.strip_y(j))
            }
        }
    }

    /// Index of the node mirrored across `y = 0`.
    pub fn reflect_index(&self, k: usize) -> usize {
        match self.kind {
            DomainKind::Disc => {
                let (i, j) = (k / self.n_y, k % self.n_y);
                i * self.n_y + (self.n_y - j) % self.n_y
            }
            DomainKind::PeriodicStrip => {
                let (i, j) = (k % self.n_x, k / self.n_x);
                (self.n_y - 1 - j) * self.n_x + i
            }
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self.kind {
            DomainKind::Disc => x * x + y * y <= 1.0 + 1e-12,
            DomainKind::PeriodicStrip => y.abs() <= self.r * (1.0 + 1e-12),
        }
    }

    /// Whether `k` lies on the Dirichlet boundary.
    pub fn is_boundary(&self, k: usize) -> bool {
        match self.kind {
            DomainKind::Disc => k / self.n_y == self.n_x,
            DomainKind::PeriodicStrip => {
                let j = k / self.n_x;
                j == 0 || j == self.n_y - 1
            }
        }
    }

    pub fn key(&self) -> String {
        format!(
            "{:?}:{:e}:{:e}:{}x{}",
            self.kind, self.r, self.p, self.n_x, self.n_y
        )
    }
}

/// Dirichlet data carried by a field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldBoundary {
    /// Potential `f` on the unit circle.
    Disc { phi: BoundarySpec },
    /// `v` on `y = +R` and `y = −R`, in the variable `2πx/P`.
    Strip { top: BoundarySpec, bottom: BoundarySpec },
    /// Built from an explicit function; no Dirichlet problem behind it.
    Synthetic,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub newton_iterations: usize,
    /// `(a_k, max|v_k − v_{k−1}|)` along a continuation run.
    pub cauchy_increments: Vec<(f64, f64)>,
    pub coefficient_guard_active: bool,
    pub periodicity_defect: f64,
    pub limit_proxy: bool,
}

/// Discretized `(f, u, v)` on a disc or periodic strip at level `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub domain: DomainSpec,
    pub a: f64,
    pub f: Option<Vec<f64>>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub boundary: FieldBoundary,
    pub converged: bool,
    pub residual_norm: f64,
    pub diagnostics: Diagnostics,
}

impl SolutionField {
    /// Field sampled from a closed-form `(u, v)`.
    pub fn from_fn(domain: DomainSpec, a: f64, g: impl Fn(f64, f64) -> (f64, f64)) -> Result<Self> {
        domain.validate()?;
        let n = domain.node_count();
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            let (x, y) = domain.node_xy(k);
            let (uu, vv) = g(x, y);
            u.push(uu);
            v.push(vv);
        }
        Ok(SolutionField {
            domain,
            a,
            f: None,
            u,
            v,
            boundary: FieldBoundary::Synthetic,
            converged: true,
            residual_norm: 0.0,
            diagnostics: Diagnostics::default(),
        })
    }

    /// The reflected field `(u′, v′)(x, y) = (u(x,−y), −v(x,−y))`, by index.
    pub fn reflected(&self) -> SolutionField {
        let mut out = self.clone();
        for k in 0..self.u.len() {
            let m = self.domain.reflect_index(k);
            out.u[k] = self.u[m];
            out.v[k] = -self.v[m];
        }
        out.f = None;
        out.boundary = FieldBoundary::Synthetic;
        out
    }

    /// `(1 − s)·self + s·other` node by node, boundary data blended alike.
    pub fn blend(&self, other: &SolutionField, s: f64) -> Result<SolutionField> {
        if self.domain != other.domain {
            return Err(SlError::InvalidInput("fields live on different grids".into()));
        }
        let mix = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(a, b)| a + s * (b - a)).collect() };
        let lerp = |p: &BoundarySpec, q: &BoundarySpec| p.add_scaled(&q.add_scaled(p, -1.0), s);
        let boundary = match (&self.boundary, &other.boundary) {
            (FieldBoundary::Disc { phi: p }, FieldBoundary::Disc { phi: q }) => FieldBoundary::Disc { phi: lerp(p, q) },
            (FieldBoundary::Strip { top: t1, bottom: b1 }, FieldBoundary::Strip { top: t2, bottom: b2 }) => {
                FieldBoundary::Strip {
                    top: lerp(t1, t2),
                    bottom: lerp(b1, b2),
                }
            }
            _ => FieldBoundary::Synthetic,
        };
        let mut out = self.clone();
        out.f = match (&self.f, &other.f) {
            (Some(p), Some(q)) => Some(mix(p, q)),
            _ => None,
        };
        out.u = mix(&self.u, &other.u);
        out.v = mix(&self.v, &other.v);
        out.a = self.a + s * (other.a - self.a);
        out.boundary = boundary;
        out.diagnostics = Diagnostics::default();
        Ok(out)
    }

    /// Pointwise `self − other` as a synthetic field on the same grid.
    pub fn difference(&self, other: &SolutionField) -> Result<SolutionField> {
        if self.domain != other.domain {
            return Err(SlError::InvalidInput("fields live on different grids".into()));
        }
        let mut out = self.clone();
        for k in 0..self.u.len() {
            out.u[k] -= other.u[k];
            out.v[k] -= other.v[k];
        }
        out.f = None;
        out.boundary = FieldBoundary::Synthetic;
        Ok(out)
    }

    pub fn eval_u(&self, x: f64, y: f64) -> Result<f64> {
        self.eval_grid(&self.u, x, y)
    }

    pub fn eval_v(&self, x: f64, y: f64) -> Result<f64> {
        self.eval_grid(&self.v, x, y)
    }

    pub fn eval_uv(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        Ok((self.eval_u(x, y)?, self.eval_v(x, y)?))
    }

    /// Piecewise-bicubic interpolation of a node array.
    pub fn eval_grid(&self, data: &[f64], x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && y.is_finite()) || !self.domain.contains(x, y) {
            return Err(SlError::OutOfDomain { x, y });
        }
        let d = &self.domain;
        Ok(match d.kind {
            DomainKind::Disc => {
                let r = (x * x + y * y).sqrt().min(1.0);
                let t = y.atan2(x).rem_euclid(2.0 * PI);
                disc_interp(d, data, r, t)
            }
            DomainKind::PeriodicStrip => {
                let xs = x.rem_euclid(d.p) / d.hx();
                let ys = ((y.clamp(-d.r, d.r) + d.r) / d.hy()).min((d.n_y - 1) as f64);
                let (j0, wy) = clamped_stencil(ys, d.n_y - 1);
                let i0 = xs.floor() as isize - 1;
                let wx = cubic_weights(xs - (i0 as f64));
                let mut s = 0.0;
                for (b, wyb) in wy.iter().enumerate() {
                    let row = (j0 + b) * d.n_x;
                    let mut rs = 0.0;
                    for (a, wxa) in wx.iter().enumerate() {
                        let i = (i0 + a as isize).rem_euclid(d.n_x as isize) as usize;
                        rs += wxa * data[row + i];
                    }
                    s += wyb * rs;
                }
                s
            }
        })
    }

    /// `v(·, 0)` sampled at the x-axis nodes, ordered by `x`.
    pub fn axis_profile(&self) -> AxisProfile {
        let d = &self.domain;
        match d.kind {
            DomainKind::Disc => {
                let half = d.n_y / 2;
                let mut xs = Vec::with_capacity(2 * d.n_x + 2);
                let mut vs = Vec::with_capacity(2 * d.n_x + 2);
                for i in (0..=d.n_x).rev() {
                    xs.push(-d.radius(i));
                    vs.push(self.v[i * d.n_y + half]);
                }
                for i in 0..=d.n_x {
                    xs.push(d.radius(i));
                    vs.push(self.v[i * d.n_y]);
                }
                // The innermost ring is where the polar stencil degrades first when
                // the limit field has a singular point at the origin. Its two axis
                // samples are rebuilt from rings 1 and 2 by cubic interpolation.
                let m = d.n_x + 1;
                if d.n_x >= 3 {
                    let (l2, l1, r1, r2) = (vs[m - 3], vs[m - 2], vs[m + 1], vs[m + 2]);
                    vs[m] = -0.2 * l2 + 0.5 * l1 + r1 - 0.3 * r2;
                    vs[m - 1] = -0.2 * r2 + 0.5 * r1 + l1 - 0.3 * l2;
                }
                AxisProfile { xs, vs, periodic: None }
            }
            DomainKind::PeriodicStrip => {
                let j0 = d.n_y / 2;
                let xs = (0..d.n_x).map(|i| d.strip_x(i)).collect();
                let vs = self.v[j0 * d.n_x..(j0 + 1) * d.n_x].to_vec();
                AxisProfile { xs, vs, periodic: Some(d.p) }
            }
        }
    }

    pub fn v_max_abs(&self) -> f64 {
        self.v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Max-norm difference in `(u, v)` against another field on the same grid.
    pub fn c0_distance(&self, other: &SolutionField) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Cartesian first derivatives `(u_x, u_y, v_x, v_y)` at an interior
    /// node by second-order central differences.
    pub fn node_derivatives(&self, k: usize) -> Option<[f64; 4]> {
        let d = &self.domain;
        if d.is_boundary(k) {
            return None;
        }
        match d.kind {
            DomainKind::Disc => {
                let (i, j) = (k / d.n_y, k % d.n_y);
                let nt = d.n_y;
                let r = d.radius(i);
                let t = d.theta(j);
                let (s, c) = t.sin_cos();
                let at = |g: &[f64], ii: isize, jj: usize| -> f64 {
                    if ii < 0 {
                        g[(jj + nt / 2) % nt]
                    } else {
                        g[ii as usize * nt + jj % nt]
                    }
                };
                let jp = (j + 1) % nt;
                let jm = (j + nt - 1) % nt;
                let dr = d.dr();
                let dt = d.dtheta();
                let mut out = [0.0; 4];
                for (n, g) in [&self.u, &self.v].into_iter().enumerate() {
                    let gr = (at(g, i as isize + 1, j) - at(g, i as isize - 1, j)) / (2.0 * dr);
                    let gt = (at(g, i as isize, jp) - at(g, i as isize, jm)) / (2.0 * dt.sin());
                    out[2 * n] = c * gr - s * gt / r;
                    out[2 * n + 1] = s * gr + c * gt / r;
                }
                Some(out)
            }
            DomainKind::PeriodicStrip => {
                let (i, j) = (k % d.n_x, k / d.n_x);
                let ip = j * d.n_x + (i + 1) % d.n_x;
                let im = j * d.n_x + (i + d.n_x - 1) % d.n_x;
                let jp = k + d.n_x;
                let jm = k - d.n_x;
                let (hx, hy) = (d.hx(), d.hy());
                Some([
                    (self.u[ip] - self.u[im]) / (2.0 * hx),
                    (self.u[jp] - self.u[jm]) / (2.0 * hy),
                    (self.v[ip] - self.v[im]) / (2.0 * hx),
                    (self.v[jp] - self.v[jm]) / (2.0 * hy),
                ])
            }
        }
    }
}

/// Samples of `v` along the x-axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisProfile {
    pub xs: Vec<f64>,
    pub vs: Vec<f64>,
    /// Period when the axis wraps.
    pub periodic: Option<f64>,
}

impl AxisProfile {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        match self.periodic {
            Some(p) => self.xs[0] + p,
            None => self.xs[self.xs.len() - 1],
        }
    }

    /// Local cubic interpolation. Nodes are uniformly spaced.
    pub fn eval(&self, x: f64) -> f64 {
        let h = self.spacing();
        let n = self.xs.len();
        match self.periodic {
            Some(p) => {
                let s = (x - self.xs[0]).rem_euclid(p) / h;
                let i0 = s.floor() as isize - 1;
                let w = cubic_weights(s - i0 as f64);
                (0..4)
                    .map(|a| w[a] * self.vs[(i0 + a as isize).rem_euclid(n as isize) as usize])
                    .sum()
            }
            None => {
                let s = ((x - self.xs[0]) / h).clamp(0.0, (n - 1) as f64);
                let (i0, w) = clamped_stencil(s, n - 1);
                (0..4).map(|a| w[a] * self.vs[i0 + a]).sum()
            }
        }
    }

    /// Composite Simpson integral over the full axis (3/8 rule on the last
    /// panel when the interval count is odd).
    pub fn integral(&self) -> f64 {
        let h = self.spacing();
        let mut vs = self.vs.clone();
        if let Some(_) = self.periodic {
            vs.push(vs[0]);
        }
        let m = vs.len() - 1;
        let simpson = |v: &[f64]| -> f64 {
            let k = v.len() - 1;
            let mut s = v[0] + v[k];
            for (i, x) in v.iter().enumerate().take(k).skip(1) {
                s += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
            }
            s * h / 3.0
        };
        if m % 2 == 0 {
            simpson(&vs)
        } else {
            let head = simpson(&vs[..m - 2]);
            let t = &vs[m - 3..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

/// Lagrange weights for nodes at 0,1,2,3 evaluated at `s`.
pub(crate) fn cubic_weights(s: f64) -> [f64; 4] {
    let (a, b, c, d) = (s, s - 1.0, s - 2.0, s - 3.0);
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

/// Four-node stencil start and weights on `0..=last`, shifted inward at the
/// ends.
pub(crate) fn clamped_stencil(s: f64, last: usize) -> (usize, [f64; 4]) {
    let i0 = (s.floor() as isize - 1).clamp(0, last as isize - 3) as usize;
    (i0, cubic_weights(s - i0 as f64))
}

fn disc_interp(d: &DomainSpec, data: &[f64], r: f64, t: f64) -> f64 {
    let nt = d.n_y;
    let dr = d.dr();
    let dt = d.dtheta();
    // radial node i sits at s = i in units of Δr after the half shift
    let s = r / dr - 0.5;
    let i0 = (s.floor() as isize - 1).min(d.n_x as isize - 3);
    let wr = cubic_weights(s - i0 as f64);
    let ts = t / dt;
    let j0 = ts.floor() as isize - 1;
    let wt = cubic_weights(ts - j0 as f64);
    let mut acc = 0.0;
    for (a, wra) in wr.iter().enumerate() {
        let i = i0 + a as isize;
        let (ii, shift) = if i < 0 { ((-1 - i) as usize, nt / 2) } else { (i as usize, 0) };
        let row = ii * nt;
        let mut rs = 0.0;
        for (b, wtb) in wt.iter().enumerate() {
            let j = ((j0 + b as isize).rem_euclid(nt as isize) as usize + shift) % nt;
            rs += wtb * data[row + j];
        }
        acc += wra * rs;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_weights_reproduce_cubics() {
        for &s in &[0.0, 0.3, 1.5, 2.9] {
            let w = cubic_weights(s);
            let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
            let got: f64 = (0..4).map(|i| w[i] * p(i as f64)).sum();
            assert!((got - p(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_interp_accuracy() {
        let d = DomainSpec::disc(32);
        let fld = SolutionField::from_fn(d, 1.0, |x, y| (2.0 * x - y + 0.5, 3.0 * y)).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.01, -0.02), (0.7, 0.1), (-0.3, 0.9), (1.0, 0.0), (0.0, -1.0)] {
            let (u, v) = fld.eval_uv(x, y).unwrap();
            assert!((u - (2.0 * x - y + 0.5)).abs() < 1e-5, "{x} {y} {u}");
            assert!((v - 3.0 * y).abs() < 1e-5);
        }
        // on the x-axis the stencil is a straight line through the pole
        for &x in &[0.0, 0.013, -0.4] {
            assert!((fld.eval_u(x, 0.0).unwrap() - (2.0 * x + 0.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn strip_interp_periodic() {
        let d = DomainSpec::strip(1.0, 2.0 * PI, 64, 33);
        let fld = SolutionField::from_fn(d, 0.5, |x, y| (x.cos() * y, x.sin())).unwrap();
        let (u, v) = fld.eval_uv(2.0 * PI - 0.01, 0.37).unwrap();
        assert!((u - (2.0 * PI - 0.01f64).cos() * 0.37).abs() < 1e-5);
        assert!((v - (-0.01f64).sin()).abs() < 1e-5);
        assert!(fld.eval_uv(0.0, 1.5).is_err());
    }

    #[test]
    fn reflection_is_an_involution() {
        let d = DomainSpec::disc(16);
        let fld = SolutionField::from_fn(d, 1.0, |x, y| (x + 2.0 * y, x * y)).unwrap();
        let back = fld.reflected().reflected();
        assert_eq!(back.u, fld.u);
        assert_eq!(back.v, fld.v);
    }

    #[test]
    fn axis_integral_simpson() {
        let d = DomainSpec::disc(20);
        let fld = SolutionField::from_fn(d, 1.0, |x, _| (0.0, x * x)).unwrap();
        let prof = fld.axis_profile();
        assert!((prof.integral() - 2.0 / 3.0).abs() < 1e-12);
    }
}
