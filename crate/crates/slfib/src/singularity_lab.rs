//! Singular points of `a = 0` fields: zeros of `v(·, 0)`, their type from
//! the sign pattern of `v` on the axis, and their multiplicity as the winding
//! number of the field minus its reflection.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::elliptic_engine::{AxisProfile, BoundarySpec, DomainKind, FieldBoundary, SolutionField};
use crate::error::{Result, SlError};

/// Below this, `|v(·,0)|` counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-6;
/// Bisection tolerance for zero locations.
pub const LOCATION_TOL: f64 = 1e-8;
/// Probe values below this leave the sign pattern ambiguous.
pub const PROBE_FLOOR: f64 = 1e-9;

const MAX_SAMPLES: usize = 1 << 16;
const MIN_NORM: f64 = 1e-7;
const ROUNDING_DEFECT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularType {
    Increasing,
    Decreasing,
    Maximum,
    Minimum,
}

impl SingularType {
    /// Label seen after negating `v` and reflecting `x`.
    pub fn mirrored(self) -> Self {
        match self {
            SingularType::Increasing => SingularType::Decreasing,
            SingularType::Decreasing => SingularType::Increasing,
            SingularType::Maximum => SingularType::Minimum,
            SingularType::Minimum => SingularType::Maximum,
        }
    }

    pub fn odd_multiplicity(self) -> bool {
        matches!(self, SingularType::Increasing | SingularType::Decreasing)
    }
}

/// Winding multiplicity, or the marker for zeros on the domain boundary
/// where the winding circle does not fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplicity {
    Interior(u32),
    UndefinedAtBoundary,
}

impl Multiplicity {
    pub fn value(self) -> Option<u32> {
        match self {
            Multiplicity::Interior(k) => Some(k),
            Multiplicity::UndefinedAtBoundary => None,
        }
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Multiplicity::Interior(k) => s.serialize_u32(*k),
            Multiplicity::UndefinedAtBoundary => s.serialize_str("undefined-at-boundary"),
        }
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(k) if k >= 1 => Ok(Multiplicity::Interior(k)),
            Raw::N(_) => Err(serde::de::Error::custom("multiplicity must be positive")),
            Raw::S(s) if s == "undefined-at-boundary" => Ok(Multiplicity::UndefinedAtBoundary),
            Raw::S(s) => Err(serde::de::Error::custom(format!("unknown multiplicity {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPointRecord {
    pub x_location: f64,
    /// `None` only for boundary zeros, which have one side.
    #[serde(rename = "type")]
    pub singular_type: Option<SingularType>,
    pub multiplicity: Multiplicity,
    pub winding_samples: usize,
    pub radius_used: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub records: Vec<SingularPointRecord>,
    /// Local maxima of `φ − φ′` on the boundary circle; disc fields only.
    pub l: Option<usize>,
    pub bound_ok: Option<bool>,
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo);
    while hi - lo > LOCATION_TOL {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut gc, mut gd) = (g(c), g(d));
    while hi - lo > LOCATION_TOL {
        if gc < gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - r * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + r * (hi - lo);
            gd = g(d);
        }
    }
    0.5 * (lo + hi)
}

fn wrap(x: f64, prof: &AxisProfile) -> f64 {
    match prof.periodic {
        Some(p) => (x - prof.lo()).rem_euclid(p) + prof.lo(),
        None => x,
    }
}

/// Zeros of the cubic interpolant of `v(·, 0)`: sign changes refined by
/// bisection and tangential zeros at local minima of `|v|` under
/// [`ZERO_THRESHOLD`]. Zeros closer than one cell with `|v|` under the
/// threshold between them are merged into a single tangential zero.
pub fn detect_axis_zeros(field: &SolutionField) -> Result<Vec<f64>> {
    let prof = field.axis_profile();
    zeros_of_profile(&prof)
}

pub fn zeros_of_profile(prof: &AxisProfile) -> Result<Vec<f64>> {
    let n = prof.len();
    if n < 4 {
        return Err(SlError::InvalidInput("axis profile too short".into()));
    }
    if prof.vs.iter().all(|v| v.abs() < ZERO_THRESHOLD) {
        return Err(SlError::NonisolatedSingularities);
    }
    let h = prof.spacing();
    let periodic = prof.periodic.is_some();
    let cells = if periodic { n } else { n - 1 };
    let x_at = |i: usize| if i < n { prof.xs[i] } else { prof.xs[i - n] + prof.periodic.unwrap_or(0.0) };
    let v_at = |i: usize| prof.vs[i % n];
    let g = |x: f64| prof.eval(x);

    let mut found: Vec<f64> = Vec::new();
    for c in 0..cells {
        let (v0, v1) = (v_at(c), v_at(c + 1));
        if v0 == 0.0 {
            found.push(x_at(c));
        } else if v0 * v1 < 0.0 {
            found.push(bisect(g, x_at(c), x_at(c + 1)));
        }
    }
    if !periodic && v_at(n - 1) == 0.0 {
        found.push(x_at(n - 1));
    }
    // tangential zeros: local minima of |v| between same-sign neighbours whose
    // interpolated minimum falls below threshold
    for i in 0..n {
        let (prev, next) = if periodic {
            ((i + n - 1) % n, (i + 1) % n)
        } else if i == 0 || i == n - 1 {
            continue;
        } else {
            (i - 1, i + 1)
        };
        let (a, b, c) = (prof.vs[prev].abs(), prof.vs[i].abs(), prof.vs[next].abs());
        if b > a || b > c || b == 0.0 {
            continue;
        }
        let same_sign = prof.vs[prev] * prof.vs[i] > 0.0 && prof.vs[next] * prof.vs[i] > 0.0;
        if !same_sign {
            continue;
        }
        let xi = prof.xs[i];
        let x = golden_min(|x| g(x).abs(), xi - h, xi + h);
        if g(x).abs() < ZERO_THRESHOLD {
            found.push(x);
        }
    }
    // boundary endpoints of a non-periodic axis
    if !periodic {
        for i in [0, n - 1] {
            if prof.vs[i].abs() < ZERO_THRESHOLD && prof.vs[i] != 0.0 {
                found.push(prof.xs[i]);
            }
        }
    }
    let mut zs: Vec<f64> = found.into_iter().map(|x| wrap(x, prof)).collect();
    zs.sort_by(f64::total_cmp);
    zs.dedup_by(|b, a| (*b - *a).abs() < LOCATION_TOL);
    merge_close(&mut zs, prof, h);
    Ok(zs)
}

fn merge_close(zs: &mut Vec<f64>, prof: &AxisProfile, h: f64) {
    let flat_between = |a: f64, b: f64| {
        (0..=8).all(|k| prof.eval(a + (b - a) * k as f64 / 8.0).abs() < ZERO_THRESHOLD)
    };
    let mut k = 0;
    while k + 1 < zs.len() {
        let (a, b) = (zs[k], zs[k + 1]);
        if b - a < h && flat_between(a, b) {
            zs[k] = 0.5 * (a + b);
            zs.remove(k + 1);
        } else {
            k += 1;
        }
    }
    if let Some(p) = prof.periodic {
        if zs.len() >= 2 {
            let (a, b) = (zs[zs.len() - 1], zs[0] + p);
            if b - a < h && flat_between(a, b) {
                zs.pop();
                zs[0] = wrap(0.5 * (a + b), prof);
                zs.sort_by(f64::total_cmp);
            }
        }
    }
}

fn gap_to_others(zs: &[f64], x: f64, period: Option<f64>) -> f64 {
    zs.iter()
        .map(|&z| {
            let mut d = (z - x).abs();
            if let Some(p) = period {
                d = d.rem_euclid(p);
                d = d.min(p - d);
            }
            d
        })
        .filter(|&d| d > LOCATION_TOL * 10.0)
        .fold(f64::INFINITY, f64::min)
}

fn on_boundary(field: &SolutionField, x: f64) -> bool {
    field.domain.kind == DomainKind::Disc && x.abs() >= 1.0 - 0.5 * field.domain.dr()
}

/// Sign pattern of `v(·,0)` at `x ± ε` with `ε` below half the gap to the
/// nearest other zero.
pub fn classify_type(field: &SolutionField, x_location: f64) -> Result<SingularType> {
    let prof = field.axis_profile();
    let zs = zeros_of_profile(&prof)?;
    classify_on_profile(&prof, &zs, x_location, on_boundary(field, x_location))
}

fn classify_on_profile(prof: &AxisProfile, zs: &[f64], x: f64, boundary: bool) -> Result<SingularType> {
    if boundary {
        return Err(SlError::InvalidInput("boundary zeros have one side only".into()));
    }
    let h = prof.spacing();
    let gap = gap_to_others(zs, x, prof.periodic);
    let mut eps = (2.0 * h).min(0.5 * gap);
    if prof.periodic.is_none() {
        eps = eps.min(0.5 * (prof.hi() - x)).min(0.5 * (x - prof.lo()));
    }
    let (left, right) = (prof.eval(x - eps), prof.eval(x + eps));
    if left.abs() < PROBE_FLOOR || right.abs() < PROBE_FLOOR {
        return Err(SlError::ProbeTooClose);
    }
    Ok(match (left < 0.0, right < 0.0) {
        (true, false) => SingularType::Increasing,
        (false, true) => SingularType::Decreasing,
        (true, true) => SingularType::Maximum,
        (false, false) => SingularType::Minimum,
    })
}

/// Winding outcome: multiplicity, samples on the accepted circle, radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winding {
    pub multiplicity: u32,
    pub samples: usize,
    pub radius: f64,
}

/// Winding number of `(u − u′, v − v′)` around `(x_location, 0)` on a circle
/// of the given radius, where `(u′, v′)` is the reflected field.
pub fn winding_multiplicity(field: &SolutionField, x_location: f64, radius: f64) -> Result<Winding> {
    let diff = field.difference(&field.reflected())?;
    let limit = match field.domain.kind {
        DomainKind::Disc => 0.95 * (1.0 - x_location.abs()),
        DomainKind::PeriodicStrip => 0.95 * field.domain.r,
    };
    if !(radius > 0.0) || limit <= 0.0 {
        return Err(SlError::InvalidInput("winding circle does not fit in the domain".into()));
    }
    winding_on(|x, y| diff.eval_uv(x, y), x_location, radius.min(limit))
}

/// Winding of a planar map around `(x0, 0)`. Doubles the sample count while
/// increments are large, and halves the radius when samples get too small.
pub fn winding_on(g: impl Fn(f64, f64) -> Result<(f64, f64)>, x0: f64, radius: f64) -> Result<Winding> {
    let mut r = radius;
    let mut hit_zero = false;
    for _ in 0..8 {
        let mut m = 256usize;
        let mut small = false;
        while m <= MAX_SAMPLES {
            let mut total = 0.0;
            let mut min_norm = f64::INFINITY;
            let mut max_step = 0.0f64;
            let mut prev: Option<f64> = None;
            for k in 0..=m {
                let th = 2.0 * std::f64::consts::PI * (k % m) as f64 / m as f64;
                let (p, q) = g(x0 + r * th.cos(), r * th.sin())?;
                min_norm = min_norm.min(p.hypot(q));
                let ang = q.atan2(p);
                match prev {
                    None => {}
                    Some(a0) => {
                        let mut d = ang - a0;
                        d -= (d / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI;
                        total += d;
                        max_step = max_step.max(d.abs());
                    }
                }
                prev = Some(ang);
            }
            if min_norm <= MIN_NORM {
                small = true;
                break;
            }
            let w = total / (2.0 * std::f64::consts::PI);
            let k = w.round();
            if max_step < 0.5 && (w - k).abs() < ROUNDING_DEFECT {
                if k < 1.0 {
                    return Err(SlError::WindingUnresolved);
                }
                return Ok(Winding {
                    multiplicity: k as u32,
                    samples: m,
                    radius: r,
                });
            }
            m *= 2;
        }
        hit_zero |= small;
        r *= 0.5;
    }
    if hit_zero {
        Err(SlError::CircleHitsZero)
    } else {
        Err(SlError::WindingUnresolved)
    }
}

/// Number of isolated zeros of `(u₁ − u₂, v₁ − v₂)` in the open domain, by
/// summing the degree of the difference around every grid cell. Returns
/// the count and a refined location per zero cell.
pub fn count_zeros_between(field1: &SolutionField, field2: &SolutionField) -> Result<(usize, Vec<(f64, f64)>)> {
    if field1.domain != field2.domain || (field1.a - field2.a).abs() > 1e-14 {
        return Err(SlError::InvalidInput("fields must share grid and level".into()));
    }
    let diff = field1.difference(field2)?;
    let scale = 1.0 + field1.v_max_abs().max(field2.v_max_abs());
    if diff.u.iter().chain(&diff.v).all(|w| w.abs() <= 1e-12 * scale) {
        return Err(SlError::IdenticalFields);
    }
    let d = field1.domain;
    let node = |k: usize| (diff.u[k], diff.v[k]);
    let mut cells: Vec<Vec<usize>> = Vec::new();
    match d.kind {
        DomainKind::Disc => {
            let nt = d.n_y;
            cells.push((0..nt).collect());
            for i in 0..d.n_x {
                for j in 0..nt {
                    let jn = (j + 1) % nt;
                    cells.push(vec![i * nt + j, (i + 1) * nt + j, (i + 1) * nt + jn, i * nt + jn]);
                }
            }
        }
        DomainKind::PeriodicStrip => {
            let nx = d.n_x;
            for j in 0..d.n_y - 1 {
                for i in 0..nx {
                    let inx = (i + 1) % nx;
                    cells.push(vec![j * nx + i, j * nx + inx, (j + 1) * nx + inx, (j + 1) * nx + i]);
                }
            }
        }
    }
    let mut locations = Vec::new();
    let mut count = 0usize;
    for cell in &cells {
        let pts: Vec<(f64, f64)> = cell.iter().map(|&k| node(k)).collect();
        let deg = polygon_degree(&pts);
        if deg != 0 {
            count += deg.unsigned_abs() as usize;
            let xy: Vec<(f64, f64)> = cell.iter().map(|&k| d.node_xy(k)).collect();
            locations.push(refine_cell(&diff, &xy));
        }
    }
    Ok((count, locations))
}

fn polygon_degree(pts: &[(f64, f64)]) -> i64 {
    let n = pts.len();
    let mut total = 0.0;
    for k in 0..n {
        let (p0, q0) = pts[k];
        let (p1, q1) = pts[(k + 1) % n];
        if p0.hypot(q0) == 0.0 || p1.hypot(q1) == 0.0 {
            return 0;
        }
        let mut dth = q1.atan2(p1) - q0.atan2(p0);
        dth -= (dth / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI;
        total += dth;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// Shrink a zero-degree-free polygon towards its zero by repeated
/// quartering on the interpolated difference field.
fn refine_cell(diff: &SolutionField, corners: &[(f64, f64)]) -> (f64, f64) {
    let cx = corners.iter().map(|c| c.0).sum::<f64>() / corners.len() as f64;
    let cy = corners.iter().map(|c| c.1).sum::<f64>() / corners.len() as f64;
    let half = corners
        .iter()
        .map(|c| (c.0 - cx).abs().max((c.1 - cy).abs()))
        .fold(0.0f64, f64::max);
    let (mut x0, mut y0, mut hw) = (cx, cy, half);
    let deg = |x: f64, y: f64, w: f64| -> i64 {
        let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
        let pts: Vec<(f64, f64)> = (0..16)
            .map(|k| {
                let (a, b) = (corners[k / 4], corners[(k / 4 + 1) % 4]);
                let t = (k % 4) as f64 / 4.0;
                let (ex, ey) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
                diff.eval_uv(x + w * ex, y + w * ey).unwrap_or((0.0, 0.0))
            })
            .collect();
        polygon_degree(&pts)
    };
    if deg(x0, y0, hw) == 0 {
        return (cx, cy);
    }
    for _ in 0..30 {
        hw *= 0.5;
        let mut moved = false;
        for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
            let (nx, ny) = (x0 + sx * hw, y0 + sy * hw);
            if deg(nx, ny, hw) != 0 {
                x0 = nx;
                y0 = ny;
                moved = true;
                break;
            }
        }
        if !moved || hw < LOCATION_TOL {
            break;
        }
    }
    (x0, y0)
}

/// Sum of interior multiplicities is at most `l − 1`.
pub fn bound_check(records: &[SingularPointRecord], l: usize) -> bool {
    let total: u64 = records.iter().filter_map(|r| r.multiplicity.value()).map(u64::from).sum();
    total + 1 <= l as u64
}

/// `φ − φ′` for disc data, where `φ′(θ) = −φ(−θ)` is the boundary value of
/// the reflected potential.
pub fn reflection_gap(phi: &BoundarySpec) -> BoundarySpec {
    phi.add_scaled(&phi.reflected(), 1.0)
}

/// Local maxima of `φ − φ′` on the circle.
pub fn boundary_l(phi: &BoundarySpec) -> usize {
    reflection_gap(phi).local_maxima_count(4096)
}

/// Data equal to its own reflection makes the whole axis singular.
pub fn is_reflection_symmetric(boundary: &FieldBoundary) -> bool {
    let tol = 1e-14;
    match boundary {
        FieldBoundary::Disc { phi } => {
            let g = reflection_gap(phi);
            g.constant.abs() <= tol && g.cos_coeffs.values().all(|c| c.abs() <= tol)
        }
        FieldBoundary::Strip { top, bottom } => {
            let g = top.add_scaled(bottom, 1.0);
            g.constant.abs() <= tol
                && g.cos_coeffs.values().all(|c| c.abs() <= tol)
                && g.sin_coeffs.values().all(|c| c.abs() <= tol)
        }
        FieldBoundary::Synthetic => false,
    }
}

/// Detection, classification and winding for every axis zero of a field,
/// plus the multiplicity bound for disc data.
pub fn analyze(field: &SolutionField, radius: f64) -> Result<SingularityReport> {
    if is_reflection_symmetric(&field.boundary) {
        return Err(SlError::NonisolatedSingularities);
    }
    let prof = field.axis_profile();
    let zs = zeros_of_profile(&prof)?;
    let mut records = Vec::with_capacity(zs.len());
    for &x in &zs {
        if on_boundary(field, x) {
            records.push(SingularPointRecord {
                x_location: x,
                singular_type: None,
                multiplicity: Multiplicity::UndefinedAtBoundary,
                winding_samples: 0,
                radius_used: 0.0,
            });
            continue;
        }
        let ty = classify_on_profile(&prof, &zs, x, false)?;
        let gap = gap_to_others(&zs, x, prof.periodic);
        let w = winding_multiplicity(field, x, radius.min(0.5 * gap))?;
        records.push(SingularPointRecord {
            x_location: x,
            singular_type: Some(ty),
            multiplicity: Multiplicity::Interior(w.multiplicity),
            winding_samples: w.samples,
            radius_used: w.radius,
        });
    }
    let l = match &field.boundary {
        FieldBoundary::Disc { phi } => Some(boundary_l(phi)),
        _ => None,
    };
    Ok(SingularityReport {
        bound_ok: l.map(|l| bound_check(&records, l)),
        records,
        l,
    })
}
