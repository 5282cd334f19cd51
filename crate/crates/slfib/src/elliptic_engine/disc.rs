use faer::sparse::Triplet;

use super::boundary::BoundarySpec;
use super::field::{Diagnostics, DomainKind, DomainSpec, FieldBoundary, SolutionField};
use super::newton::{newton, NewtonOptions, NonlinearSystem};
use super::{coefficient, coefficient_slope, EPS_COEFF};
use crate::error::{Result, SlError};

/// Stencil target: unknown index, or boundary node `j` encoded as `-1 - j`.
type Target = i64;

/// The 3×3 polar stencil of `f_xx`, `f_yy` and `f_x` at every interior node.
struct DiscStencil {
    n_unknown: usize,
    targets: Vec<[Target; 9]>,
    cxx: Vec<[f64; 9]>,
    cyy: Vec<[f64; 9]>,
    cp: Vec<[f64; 9]>,
    y: Vec<f64>,
}

impl DiscStencil {
    fn new(d: &DomainSpec) -> Self {
        let nr = d.n_x;
        let nt = d.n_y;
        let n_unknown = nr * nt;
        let dr = d.dr();
        let dt = d.dtheta();
        let st = 2.0 * dt.sin();
        let ct = 2.0 * (1.0 - dt.cos());
        let mut targets = Vec::with_capacity(n_unknown);
        let mut cxx = Vec::with_capacity(n_unknown);
        let mut cyy = Vec::with_capacity(n_unknown);
        let mut cp = Vec::with_capacity(n_unknown);
        let mut y = Vec::with_capacity(n_unknown);
        for i in 0..nr {
            let r = d.radius(i);
            for j in 0..nt {
                let th = d.theta(j);
                let (s, c) = th.sin_cos();
                y.push(r * s);
                let mut tg = [0i64; 9];
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let slot = ((di + 1) * 3 + dj + 1) as usize;
                        let ii = i as i64 + di;
                        let jj = (j as i64 + dj).rem_euclid(nt as i64);
                        tg[slot] = if ii < 0 {
                            ((jj + nt as i64 / 2) % nt as i64) as i64
                        } else if ii as usize == nr {
                            -1 - jj
                        } else {
                            ii * nt as i64 + jj
                        };
                    }
                }
                // elementary polar stencils on the 3×3 block
                let mut d_r = [0.0; 9];
                d_r[7] = 1.0 / (2.0 * dr);
                d_r[1] = -1.0 / (2.0 * dr);
                let mut d_rr = [0.0; 9];
                d_rr[7] = 1.0 / (dr * dr);
                d_rr[4] = -2.0 / (dr * dr);
                d_rr[1] = 1.0 / (dr * dr);
                let mut d_t = [0.0; 9];
                d_t[5] = 1.0 / st;
                d_t[3] = -1.0 / st;
                let mut d_tt = [0.0; 9];
                d_tt[5] = 1.0 / ct;
                d_tt[3] = 1.0 / ct;
                d_tt[4] = -2.0 / ct;
                let mut d_rt = [0.0; 9];
                let q = 1.0 / (2.0 * dr * st);
                d_rt[8] = q;
                d_rt[6] = -q;
                d_rt[2] = -q;
                d_rt[0] = q;
                let mut xx = [0.0; 9];
                let mut yy = [0.0; 9];
                let mut p = [0.0; 9];
                for m in 0..9 {
                    xx[m] = c * c * d_rr[m] - 2.0 * s * c / r * d_rt[m] + s * s / r * d_r[m]
                        + 2.0 * s * c / (r * r) * d_t[m]
                        + s * s / (r * r) * d_tt[m];
                    yy[m] = s * s * d_rr[m] + 2.0 * s * c / r * d_rt[m] + c * c / r * d_r[m]
                        - 2.0 * s * c / (r * r) * d_t[m]
                        + c * c / (r * r) * d_tt[m];
                    p[m] = c * d_r[m] - s / r * d_t[m];
                }
                targets.push(tg);
                cxx.push(xx);
                cyy.push(yy);
                cp.push(p);
            }
        }
        DiscStencil {
            n_unknown,
            targets,
            cxx,
            cyy,
            cp,
            y,
        }
    }
}

struct DiscSystem<'a> {
    st: &'a DiscStencil,
    bvals: Vec<f64>,
    a: f64,
}

impl DiscSystem<'_> {
    #[inline]
    fn value(&self, x: &[f64], t: Target) -> f64 {
        if t >= 0 {
            x[t as usize]
        } else {
            self.bvals[(-1 - t) as usize]
        }
    }

    /// `(f_xx, f_yy, f_x)` at unknown `k`.
    #[inline]
    fn ops(&self, x: &[f64], k: usize) -> (f64, f64, f64) {
        let tg = &self.st.targets[k];
        let (cxx, cyy, cp) = (&self.st.cxx[k], &self.st.cyy[k], &self.st.cp[k]);
        let mut fxx = 0.0;
        let mut fyy = 0.0;
        let mut p = 0.0;
        for m in 0..9 {
            let f = self.value(x, tg[m]);
            fxx += cxx[m] * f;
            fyy += cyy[m] * f;
            p += cp[m] * f;
        }
        (fxx, fyy, p)
    }

    fn guard_active(&self, x: &[f64]) -> bool {
        (0..self.st.n_unknown).any(|k| {
            let (_, _, p) = self.ops(x, k);
            let y = self.st.y[k];
            p * p + y * y + self.a * self.a <= EPS_COEFF
        })
    }
}

impl NonlinearSystem for DiscSystem<'_> {
    fn dim(&self) -> usize {
        self.st.n_unknown
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let (fxx, fyy, p) = self.ops(x, k);
            *o = coefficient(p, self.st.y[k], self.a) * fxx + 2.0 * fyy;
        }
    }

    fn jacobian(&self, x: &[f64]) -> Vec<Triplet<usize, usize, f64>> {
        let mut trip = Vec::with_capacity(self.st.n_unknown * 9);
        for k in 0..self.st.n_unknown {
            let (fxx, _, p) = self.ops(x, k);
            let y = self.st.y[k];
            let kap = coefficient(p, y, self.a);
            let dk = coefficient_slope(p, y, self.a) * fxx;
            let tg = &self.st.targets[k];
            for m in 0..9 {
                if tg[m] >= 0 {
                    let val = kap * self.st.cxx[k][m] + 2.0 * self.st.cyy[k][m] + dk * self.st.cp[k][m];
                    trip.push(Triplet::new(k, tg[m] as usize, val));
                }
            }
        }
        trip
    }

    fn scaled_norm(&self, x: &[f64], r: &[f64]) -> f64 {
        let mut m = 0.0f64;
        for k in 0..self.st.n_unknown {
            let (_, _, p) = self.ops(x, k);
            let kap = coefficient(p, self.st.y[k], self.a);
            let d = kap * self.st.cxx[k][4].abs() + 2.0 * self.st.cyy[k][4].abs();
            m = m.max((r[k] / d).abs());
        }
        m
    }

    fn pattern_key(&self) -> Option<String> {
        Some(format!("disc:{}x{}", self.st.n_unknown, self.st.targets.len()))
    }
}

/// Harmonic extension `c₀ + Σ r^k (a_k cos kθ + b_k sin kθ)` at the unknowns.
fn harmonic_guess(d: &DomainSpec, phi: &BoundarySpec) -> Vec<f64> {
    let mut x = Vec::with_capacity(d.n_x * d.n_y);
    for i in 0..d.n_x {
        let r = d.radius(i);
        for j in 0..d.n_y {
            let t = d.theta(j);
            let mut s = phi.constant;
            for (&k, &c) in &phi.cos_coeffs {
                s += c * r.powi(k as i32) * (k as f64 * t).cos();
            }
            for (&k, &c) in &phi.sin_coeffs {
                s += c * r.powi(k as i32) * (k as f64 * t).sin();
            }
            x.push(s);
        }
    }
    x
}

/// Dirichlet solve of `((f_x)² + y² + a²)^{-1/2} f_xx + 2 f_yy = 0` on the
/// unit disc with `f = φ` on the circle.
pub fn solve_disc(boundary: &BoundarySpec, a: f64, domain: &DomainSpec) -> Result<SolutionField> {
    solve_disc_warm(boundary, a, domain, None)
}

/// As [`solve_disc`], starting Newton from `warm` when it lives on the same grid.
pub fn solve_disc_warm(
    boundary: &BoundarySpec,
    a: f64,
    domain: &DomainSpec,
    warm: Option<&SolutionField>,
) -> Result<SolutionField> {
    solve_disc_with(boundary, a, domain, warm, NewtonOptions::default())
}

pub(crate) fn solve_disc_with(
    boundary: &BoundarySpec,
    a: f64,
    domain: &DomainSpec,
    warm: Option<&SolutionField>,
    opts: NewtonOptions,
) -> Result<SolutionField> {
    domain.validate()?;
    if domain.kind != DomainKind::Disc {
        return Err(SlError::InvalidInput("solve_disc needs a disc domain".into()));
    }
    if !boundary.is_finite() || !a.is_finite() {
        return Err(SlError::InvalidInput("non-finite input".into()));
    }
    if a == 0.0 {
        return Err(SlError::InvalidInput("a = 0 goes through solve_disc_limit".into()));
    }
    let a = a.abs();
    let st = DiscStencil::new(domain);
    let bvals: Vec<f64> = (0..domain.n_y).map(|j| boundary.eval(domain.theta(j))).collect();
    let sys = DiscSystem {
        st: &st,
        bvals,
        a,
    };
    let x0 = match warm.and_then(|w| w.f.as_ref().filter(|_| w.domain == *domain)) {
        Some(f) => f[..st.n_unknown].to_vec(),
        None => harmonic_guess(domain, boundary),
    };
    let out = newton(&sys, x0, opts);
    if !out.converged {
        return Err(SlError::SolverDiverged { residual: out.norm });
    }
    let guard = sys.guard_active(&out.x);
    let mut f = out.x;
    f.extend_from_slice(&sys.bvals);
    let (u, v) = derive_uv(domain, &f, boundary);
    Ok(SolutionField {
        domain: *domain,
        a,
        f: Some(f),
        u,
        v,
        boundary: FieldBoundary::Disc { phi: boundary.clone() },
        converged: true,
        residual_norm: out.norm,
        diagnostics: Diagnostics {
            newton_iterations: out.iterations,
            coefficient_guard_active: guard,
            ..Default::default()
        },
    })
}

/// `u = f_y`, `v = f_x` by polar chain rule; one-sided radial stencil on the
/// circle, where the tangential derivative comes from the boundary data.
fn derive_uv(d: &DomainSpec, f: &[f64], phi: &BoundarySpec) -> (Vec<f64>, Vec<f64>) {
    let nr = d.n_x;
    let nt = d.n_y;
    let dr = d.dr();
    let st = 2.0 * d.dtheta().sin();
    let at = |i: isize, j: usize| -> f64 {
        if i < 0 {
            f[(j + nt / 2) % nt]
        } else {
            f[i as usize * nt + j % nt]
        }
    };
    let mut u = vec![0.0; (nr + 1) * nt];
    let mut v = vec![0.0; (nr + 1) * nt];
    for i in 0..=nr {
        let r = d.radius(i);
        for j in 0..nt {
            let th = d.theta(j);
            let (s, c) = th.sin_cos();
            let ii = i as isize;
            let (fr, ft) = if i == nr {
                (
                    (4.0 * (at(ii, j) - at(ii - 1, j)) - (at(ii, j) - at(ii - 2, j))) / (2.0 * dr),
                    phi.derivative(th),
                )
            } else {
                (
                    (at(ii + 1, j) - at(ii - 1, j)) / (2.0 * dr),
                    (at(ii, j + 1) - at(ii, j + nt - 1)) / st,
                )
            };
            v[i * nt + j] = c * fr - s * ft / r;
            u[i * nt + j] = s * fr + c * ft / r;
        }
    }
    (u, v)
}

/// `v` at the origin, read off the axis profile so that it agrees with
/// zero detection along the x-axis.
pub fn disc_center_v(field: &SolutionField) -> f64 {
    field.axis_profile().eval(0.0)
}
