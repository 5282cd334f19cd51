use std::f64::consts::PI;

use faer::sparse::Triplet;

use super::boundary::BoundarySpec;
use super::field::{Diagnostics, DomainKind, DomainSpec, FieldBoundary, SolutionField};
use super::newton::{newton, NewtonOptions, NonlinearSystem};
use super::{coefficient, coefficient_slope, EPS_COEFF};
use crate::error::{Result, SlError};

/// Conservative five-point form of
/// `∂x[(v²+y²+a²)^{-1/2} v_x] + 2 v_yy = 0`, coefficient at half nodes.
struct StripSystem {
    nx: usize,
    ny: usize,
    hx2: f64,
    hy2: f64,
    y: Vec<f64>,
    bottom: Vec<f64>,
    top: Vec<f64>,
    a: f64,
}

impl StripSystem {
    #[inline]
    fn at(&self, x: &[f64], i: usize, j: usize) -> f64 {
        if j == 0 {
            self.bottom[i]
        } else if j == self.ny - 1 {
            self.top[i]
        } else {
            x[(j - 1) * self.nx + i]
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        if j == 0 || j == self.ny - 1 {
            None
        } else {
            Some((j - 1) * self.nx + i)
        }
    }

    fn full_grid(&self, x: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.nx * self.ny);
        v.extend_from_slice(&self.bottom);
        v.extend_from_slice(x);
        v.extend_from_slice(&self.top);
        v
    }
}

impl NonlinearSystem for StripSystem {
    fn dim(&self) -> usize {
        self.nx * (self.ny - 2)
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let nx = self.nx;
        for j in 1..self.ny - 1 {
            let y = self.y[j];
            for i in 0..nx {
                let v0 = self.at(x, i, j);
                let vp = self.at(x, (i + 1) % nx, j);
                let vm = self.at(x, (i + nx - 1) % nx, j);
                let kp = coefficient(0.5 * (v0 + vp), y, self.a);
                let km = coefficient(0.5 * (v0 + vm), y, self.a);
                let vn = self.at(x, i, j + 1);
                let vs = self.at(x, i, j - 1);
                out[(j - 1) * nx + i] =
                    (kp * (vp - v0) - km * (v0 - vm)) / self.hx2 + 2.0 * (vn - 2.0 * v0 + vs) / self.hy2;
            }
        }
    }

    fn jacobian(&self, x: &[f64]) -> Vec<Triplet<usize, usize, f64>> {
        let nx = self.nx;
        let mut trip = Vec::with_capacity(self.dim() * 5);
        for j in 1..self.ny - 1 {
            let y = self.y[j];
            for i in 0..nx {
                let k = (j - 1) * nx + i;
                let ip = (i + 1) % nx;
                let im = (i + nx - 1) % nx;
                let v0 = self.at(x, i, j);
                let vp = self.at(x, ip, j);
                let vm = self.at(x, im, j);
                let (mp, mm) = (0.5 * (v0 + vp), 0.5 * (v0 + vm));
                let kp = coefficient(mp, y, self.a);
                let km = coefficient(mm, y, self.a);
                let sp = 0.5 * coefficient_slope(mp, y, self.a) * (vp - v0);
                let sm = 0.5 * coefficient_slope(mm, y, self.a) * (v0 - vm);
                trip.push(Triplet::new(k, (j - 1) * nx + ip, (kp + sp) / self.hx2));
                trip.push(Triplet::new(k, (j - 1) * nx + im, (km - sm) / self.hx2));
                trip.push(Triplet::new(k, k, (-kp + sp - km - sm) / self.hx2 - 4.0 / self.hy2));
                if let Some(n) = self.idx(i, j + 1) {
                    trip.push(Triplet::new(k, n, 2.0 / self.hy2));
                }
                if let Some(s) = self.idx(i, j - 1) {
                    trip.push(Triplet::new(k, s, 2.0 / self.hy2));
                }
            }
        }
        trip
    }

    fn scaled_norm(&self, x: &[f64], r: &[f64]) -> f64 {
        let nx = self.nx;
        let mut m = 0.0f64;
        for j in 1..self.ny - 1 {
            let y = self.y[j];
            for i in 0..nx {
                let v0 = self.at(x, i, j);
                let kp = coefficient(0.5 * (v0 + self.at(x, (i + 1) % nx, j)), y, self.a);
                let km = coefficient(0.5 * (v0 + self.at(x, (i + nx - 1) % nx, j)), y, self.a);
                let d = (kp + km) / self.hx2 + 4.0 / self.hy2;
                m = m.max((r[(j - 1) * nx + i] / d).abs());
            }
        }
        m
    }

    fn pattern_key(&self) -> Option<String> {
        Some(format!("strip:{}x{}", self.nx, self.ny))
    }
}

fn edge_samples(d: &DomainSpec, b: &BoundarySpec) -> Vec<f64> {
    (0..d.n_x).map(|i| b.eval(2.0 * PI * d.strip_x(i) / d.p)).collect()
}

/// Dirichlet solve for `v` on the periodic strip with `v(x, ±R) = φ±(x)`,
/// followed by [`reconstruct_u`].
pub fn solve_strip(top: &BoundarySpec, bottom: &BoundarySpec, a: f64, domain: &DomainSpec) -> Result<SolutionField> {
    solve_strip_warm(top, bottom, a, domain, None)
}

pub fn solve_strip_warm(
    top: &BoundarySpec,
    bottom: &BoundarySpec,
    a: f64,
    domain: &DomainSpec,
    warm: Option<&SolutionField>,
) -> Result<SolutionField> {
    solve_strip_with(top, bottom, a, domain, warm, NewtonOptions::default())
}

pub(crate) fn solve_strip_with(
    top: &BoundarySpec,
    bottom: &BoundarySpec,
    a: f64,
    domain: &DomainSpec,
    warm: Option<&SolutionField>,
    opts: NewtonOptions,
) -> Result<SolutionField> {
    domain.validate()?;
    if domain.kind != DomainKind::PeriodicStrip {
        return Err(SlError::InvalidInput("solve_strip needs a strip domain".into()));
    }
    if !(top.is_finite() && bottom.is_finite() && a.is_finite()) {
        return Err(SlError::InvalidInput("non-finite input".into()));
    }
    let scale = 1.0 + top.constant.abs().max(bottom.constant.abs());
    if (top.constant - bottom.constant).abs() > 1e-12 * scale {
        return Err(SlError::IncompatibleBoundary);
    }
    if a == 0.0 {
        return Err(SlError::InvalidInput("a = 0 goes through solve_strip_limit".into()));
    }
    let a = a.abs();
    let (nx, ny) = (domain.n_x, domain.n_y);
    let sys = StripSystem {
        nx,
        ny,
        hx2: domain.hx() * domain.hx(),
        hy2: domain.hy() * domain.hy(),
        y: (0..ny).map(|j| domain.strip_y(j)).collect(),
        bottom: edge_samples(domain, bottom),
        top: edge_samples(domain, top),
        a,
    };
    let x0: Vec<f64> = match warm.filter(|w| w.domain == *domain) {
        Some(w) => w.v[nx..nx * (ny - 1)].to_vec(),
        None => {
            let mut x = Vec::with_capacity(sys.dim());
            for j in 1..ny - 1 {
                let s = j as f64 / (ny - 1) as f64;
                for i in 0..nx {
                    x.push((1.0 - s) * sys.bottom[i] + s * sys.top[i]);
                }
            }
            x
        }
    };
    let out = newton(&sys, x0, opts);
    if !out.converged {
        return Err(SlError::SolverDiverged { residual: out.norm });
    }
    let v = sys.full_grid(&out.x);
    let guard = (0..nx * ny).any(|k| {
        let y = sys.y[k / nx];
        v[k] * v[k] + y * y + a * a <= EPS_COEFF
    });
    let field = SolutionField {
        domain: *domain,
        a,
        f: None,
        u: vec![0.0; nx * ny],
        v,
        boundary: FieldBoundary::Strip {
            top: top.clone(),
            bottom: bottom.clone(),
        },
        converged: true,
        residual_norm: out.norm,
        diagnostics: Diagnostics {
            newton_iterations: out.iterations,
            coefficient_guard_active: guard,
            ..Default::default()
        },
    };
    reconstruct_u(&field)
}

/// Recover `u` from a strip `v` with `u(0,0) = 0`: integrate
/// `u_y = −½(v²+y²+a²)^{-1/2} v_x` up the column `x = 0`, then `u_x = v_y`
/// along each row. The closing error of each row around the period is
/// recorded as the periodicity defect. Disc fields already carry `u`.
pub fn reconstruct_u(field: &SolutionField) -> Result<SolutionField> {
    let d = field.domain;
    if d.kind == DomainKind::Disc {
        return Ok(field.clone());
    }
    let (nx, ny) = (d.n_x, d.n_y);
    let (hx, hy) = (d.hx(), d.hy());
    let v = &field.v;
    let at = |i: usize, j: usize| v[j * nx + i];
    let mut vy = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            vy[j * nx + i] = if j == 0 {
                (4.0 * (at(i, 1) - at(i, 0)) - (at(i, 2) - at(i, 0))) / (2.0 * hy)
            } else if j == ny - 1 {
                (4.0 * (at(i, j) - at(i, j - 1)) - (at(i, j) - at(i, j - 2))) / (2.0 * hy)
            } else {
                (at(i, j + 1) - at(i, j - 1)) / (2.0 * hy)
            };
        }
    }
    let g: Vec<f64> = (0..ny)
        .map(|j| {
            let vx = (at(1, j) - at(nx - 1, j)) / (2.0 * hx);
            -0.5 * coefficient(at(0, j), d.strip_y(j), field.a) * vx
        })
        .collect();
    let j0 = ny / 2;
    let mut col = vec![0.0; ny];
    for j in j0 + 1..ny {
        col[j] = col[j - 1] + 0.5 * hy * (g[j - 1] + g[j]);
    }
    for j in (0..j0).rev() {
        col[j] = col[j + 1] - 0.5 * hy * (g[j + 1] + g[j]);
    }
    let mut u = vec![0.0; nx * ny];
    let mut defect = 0.0f64;
    for j in 0..ny {
        let row = &vy[j * nx..(j + 1) * nx];
        let mut acc = col[j];
        u[j * nx] = acc;
        for i in 1..nx {
            acc += 0.5 * hx * (row[i - 1] + row[i]);
            u[j * nx + i] = acc;
        }
        let closing: f64 = hx * row.iter().sum::<f64>();
        defect = defect.max(closing.abs());
    }
    if defect > 1e-6 {
        return Err(SlError::MonodromyDefect { defect });
    }
    let mut out = field.clone();
    out.u = u;
    out.diagnostics.periodicity_defect = defect;
    Ok(out)
}

/// Periodic trapezoidal mean of `v` along row `row`.
pub fn mean_flux(field: &SolutionField, row: usize) -> Result<f64> {
    let d = field.domain;
    if d.kind != DomainKind::PeriodicStrip {
        return Err(SlError::InvalidInput("mean_flux needs a strip field".into()));
    }
    if row >= d.n_y {
        return Err(SlError::InvalidInput(format!("row {row} out of range")));
    }
    let s: f64 = field.v[row * d.n_x..(row + 1) * d.n_x].iter().sum();
    Ok(s / d.n_x as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_gives_constant_field() {
        let d = DomainSpec::strip(1.0, 2.0 * PI, 32, 17);
        let b = BoundarySpec::constant(0.7);
        let fld = solve_strip(&b, &b, 0.3, &d).unwrap();
        assert!(fld.v.iter().all(|v| (v - 0.7).abs() < 1e-14));
        assert!(fld.u.iter().all(|u| u.abs() < 1e-14));
    }

    #[test]
    fn incompatible_means_are_rejected() {
        let d = DomainSpec::strip(1.0, 2.0 * PI, 32, 17);
        let err = solve_strip(&BoundarySpec::constant(1.0), &BoundarySpec::constant(0.0), 1.0, &d).unwrap_err();
        assert_eq!(err, SlError::IncompatibleBoundary);
    }

    #[test]
    fn row_means_are_conserved() {
        let d = DomainSpec::strip(1.0, 2.0 * PI, 64, 33);
        let top = BoundarySpec::strip_cosine(1.0, 1.0);
        let bottom = BoundarySpec::strip_cosine(1.0, -1.0);
        let fld = solve_strip(&top, &bottom, 0.5, &d).unwrap();
        for j in 0..d.n_y {
            assert!((mean_flux(&fld, j).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn corrupted_field_means_drift() {
        let d = DomainSpec::strip(1.0, 2.0 * PI, 32, 17);
        let fld = SolutionField::from_fn(d, 1.0, |_, y| (0.0, 2.0 + y)).unwrap();
        let drift = mean_flux(&fld, d.n_y - 1).unwrap() - mean_flux(&fld, 0).unwrap();
        assert!((drift - 2.0).abs() < 1e-12);
    }
}
