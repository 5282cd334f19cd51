//! The two concrete fibration families: the disc family with boundary data
//! `α cos θ − cos 3θ` and the periodic strip family with `b + t cos x` on
//! both edges. Root searches for the discriminant edges, ribbon summaries,
//! and projection of points of `C³` to base coordinates.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::calibration_core::ComplexPoint3;
use crate::elliptic_engine::{
    solve_disc_limit_predicted, solve_disc_limit_warm, solve_disc_warm, solve_strip_limit_predicted, solve_strip_limit_warm, solve_strip_warm, BoundarySpec,
    ContinuationSchedule, DomainKind, DomainSpec, SolutionField,
};
use crate::error::{Result, SlError};
use crate::singularity_lab::detect_axis_zeros;

/// Bracket for the disc-family root searches.
pub const ALPHA_BRACKET: (f64, f64) = (-20.0, 20.0);
/// Default bisection tolerance in the family parameter.
pub const ROOT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberCoordinates {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointKind {
    /// Two singular points merge into one of multiplicity two.
    FoldBoundary,
    /// Singular points leave through the domain boundary.
    DomainBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CRange {
    AllReals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantRibbon {
    pub a_plane: f64,
    pub b_interval: [f64; 2],
    pub c_range: CRange,
    pub endpoint_kind: [EndpointKind; 2],
    /// Whether `b_hi` itself is excluded from the ribbon.
    pub hi_open: bool,
    /// Singular points on a fiber strictly inside the ribbon.
    pub interior_count: usize,
    /// Singular points on a fiber over a fold edge.
    pub fold_count: usize,
    pub exterior_count: usize,
    /// Zero width: the ribbon has collapsed to a line.
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    DiscSweep,
    StripSweep,
}

/// One of the two families, with the grid and continuation schedule used to
/// build its fields. `t` is only read by the strip family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub t: f64,
    pub domain: DomainSpec,
    pub schedule: ContinuationSchedule,
}

impl FamilySpec {
    pub fn disc(domain: DomainSpec, schedule: ContinuationSchedule) -> Self {
        FamilySpec {
            kind: FamilyKind::DiscSweep,
            t: 0.0,
            domain,
            schedule,
        }
    }

    pub fn strip(t: f64, domain: DomainSpec, schedule: ContinuationSchedule) -> Self {
        FamilySpec {
            kind: FamilyKind::StripSweep,
            t,
            domain,
            schedule,
        }
    }

    pub fn default_disc() -> Self {
        FamilySpec::disc(DomainSpec::default_disc(), ContinuationSchedule::default())
    }

    pub fn default_strip(t: f64) -> Self {
        FamilySpec::strip(t, DomainSpec::default_strip(), ContinuationSchedule::default())
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.schedule.validate()?;
        match self.kind {
            FamilyKind::DiscSweep if self.domain.kind != DomainKind::Disc => {
                Err(SlError::InvalidInput("disc family needs a disc domain".into()))
            }
            FamilyKind::StripSweep if self.domain.kind != DomainKind::PeriodicStrip => {
                Err(SlError::InvalidInput("strip family needs a strip domain".into()))
            }
            FamilyKind::StripSweep if (self.domain.p - 2.0 * PI).abs() > 1e-12 => {
                Err(SlError::InvalidInput("strip family has period 2π".into()))
            }
            FamilyKind::StripSweep if !(0.0..=1.0).contains(&self.t) => {
                Err(SlError::InvalidInput("t must lie in [0, 1]".into()))
            }
            _ => Ok(()),
        }
    }

    /// Boundary data at parameter `b` (`α` for the disc family).
    pub fn boundary(&self, b: f64) -> BoundarySpec {
        match self.kind {
            FamilyKind::DiscSweep => BoundarySpec::vhat(b),
            FamilyKind::StripSweep => BoundarySpec::strip_cosine(b, self.t),
        }
    }

    fn key(&self, a: f64, b: f64) -> String {
        let level = if a == 0.0 {
            format!("limit{:e}/{}", self.schedule.a_min(), self.schedule.levels.len())
        } else {
            format!("{:e}", a.abs())
        };
        format!("{:?}|{}|a={}|{}", self.kind, self.domain.key(), level, self.boundary(b).key())
    }

    fn solve(&self, a: f64, b: f64, warm: Option<&SolutionField>) -> Result<SolutionField> {
        let phi = self.boundary(b);
        match (self.kind, a == 0.0) {
            (FamilyKind::DiscSweep, true) => solve_disc_limit_warm(&phi, &self.domain, &self.schedule, warm),
            (FamilyKind::DiscSweep, false) => solve_disc_warm(&phi, a, &self.domain, warm),
            (FamilyKind::StripSweep, true) => solve_strip_limit_warm(&phi, &phi, &self.domain, &self.schedule, warm),
            (FamilyKind::StripSweep, false) => solve_strip_warm(&phi, &phi, a, &self.domain, warm),
        }
    }

    fn solve_predicted(&self, a: f64, b: f64, predictor: &SolutionField) -> Result<SolutionField> {
        let phi = self.boundary(b);
        match (self.kind, a == 0.0) {
            (FamilyKind::DiscSweep, true) => solve_disc_limit_predicted(&phi, &self.domain, &self.schedule, predictor),
            (FamilyKind::StripSweep, true) => {
                solve_strip_limit_predicted(&phi, &phi, &self.domain, &self.schedule, predictor)
            }
            _ => self.solve(a, b, Some(predictor)),
        }
    }
}

fn fnv64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Serialize, Deserialize)]
struct DiskEntry {
    key: String,
    field: SolutionField,
}

struct CacheInner {
    map: HashMap<String, (u64, Arc<SolutionField>)>,
    tick: u64,
}

/// Least-recently-used field cache, optionally mirrored to a directory.
pub struct SolverCache {
    inner: Mutex<CacheInner>,
    capacity: usize,
    disk: Option<PathBuf>,
}

impl SolverCache {
    pub fn new(capacity: usize, disk: Option<PathBuf>) -> Self {
        SolverCache {
            inner: Mutex::new(CacheInner {
                map: HashMap::new(),
                tick: 0,
            }),
            capacity: capacity.max(1),
            disk,
        }
    }

    /// Memory cache mirrored to `$SLFIB_CACHE_DIR` when that is set.
    pub fn from_env(capacity: usize) -> Self {
        let disk = std::env::var_os("SLFIB_CACHE_DIR").filter(|d| !d.is_empty()).map(PathBuf::from);
        SolverCache::new(capacity, disk)
    }

    pub fn global() -> &'static SolverCache {
        static CACHE: OnceLock<SolverCache> = OnceLock::new();
        CACHE.get_or_init(|| SolverCache::from_env(48))
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn disk_path(&self, key: &str) -> Option<PathBuf> {
        self.disk.as_ref().map(|d| d.join(format!("{:016x}.json", fnv64(key))))
    }

    pub fn get(&self, key: &str) -> Option<Arc<SolutionField>> {
        {
            let mut g = self.inner.lock().unwrap();
            g.tick += 1;
            let tick = g.tick;
            if let Some(e) = g.map.get_mut(key) {
                e.0 = tick;
                return Some(e.1.clone());
            }
        }
        let path = self.disk_path(key)?;
        let text = fs::read_to_string(path).ok()?;
        let entry: DiskEntry = serde_json::from_str(&text).ok()?;
        if entry.key != key {
            return None;
        }
        Some(self.insert_memory(key, Arc::new(entry.field)))
    }

    fn insert_memory(&self, key: &str, field: Arc<SolutionField>) -> Arc<SolutionField> {
        let mut g = self.inner.lock().unwrap();
        g.tick += 1;
        let tick = g.tick;
        g.map.insert(key.to_string(), (tick, field.clone()));
        while g.map.len() > self.capacity {
            let oldest = g.map.iter().min_by_key(|(_, e)| e.0).map(|(k, _)| k.clone()).unwrap();
            g.map.remove(&oldest);
        }
        field
    }

    pub fn insert(&self, key: &str, field: SolutionField) -> Arc<SolutionField> {
        let field = Arc::new(field);
        if let Some(path) = self.disk_path(key) {
            let entry = DiskEntry {
                key: key.to_string(),
                field: (*field).clone(),
            };
            if let Ok(text) = serde_json::to_string(&entry) {
                if let Some(dir) = path.parent() {
                    let _ = fs::create_dir_all(dir);
                }
                let tmp = path.with_extension("tmp");
                if fs::write(&tmp, text).is_ok() {
                    let _ = fs::rename(&tmp, &path);
                }
            }
        }
        self.insert_memory(key, field)
    }
}

/// Sequence of solves in one family at one level `a`. Each new parameter
/// is warm-started from the nearest parameter already solved in the chain,
/// so the result depends only on the order of requests.
pub struct FamilyChain<'c> {
    family: FamilySpec,
    cache: &'c SolverCache,
    a: f64,
    solved: Vec<(f64, Arc<SolutionField>)>,
}

impl<'c> FamilyChain<'c> {
    pub fn new(family: FamilySpec, cache: &'c SolverCache, a: f64) -> Result<Self> {
        family.validate()?;
        if !a.is_finite() {
            return Err(SlError::InvalidInput("non-finite a".into()));
        }
        Ok(FamilyChain {
            family,
            cache,
            a,
            solved: Vec::new(),
        })
    }

    pub fn family(&self) -> &FamilySpec {
        &self.family
    }

    pub fn field(&mut self, b: f64) -> Result<Arc<SolutionField>> {
        if !b.is_finite() {
            return Err(SlError::InvalidInput("non-finite family parameter".into()));
        }
        if let Some((_, f)) = self.solved.iter().find(|(p, _)| *p == b) {
            return Ok(f.clone());
        }
        let key = self.family.key(self.a, b);
        let f = match self.cache.get(&key) {
            Some(f) => f,
            None => {
                let below = self.solved.iter().filter(|(p, _)| *p < b).max_by(|x, y| x.0.total_cmp(&y.0));
                let above = self.solved.iter().filter(|(p, _)| *p > b).min_by(|x, y| x.0.total_cmp(&y.0));
                let fresh = match (below, above) {
                    (Some((pl, fl)), Some((pr, fr))) => {
                        let predictor = fl.blend(fr, (b - pl) / (pr - pl))?;
                        self.family.solve_predicted(self.a, b, &predictor)?
                    }
                    _ => {
                        let warm = below.or(above).map(|(_, f)| f.clone());
                        self.family.solve(self.a, b, warm.as_deref())?
                    }
                };
                self.cache.insert(&key, fresh)
            }
        };
        self.solved.push((b, f.clone()));
        Ok(f)
    }
}

/// Root of an increasing function by bisection; the bracket ends are
/// evaluated first and must straddle zero.
pub fn bisect_increasing(mut g: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let glo = g(lo)?;
    if glo == 0.0 {
        return Ok(lo);
    }
    let ghi = g(hi)?;
    if ghi == 0.0 {
        return Ok(hi);
    }
    if !(glo < 0.0 && ghi > 0.0) {
        return Err(SlError::BracketFailed);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `v̂_{a,α}` at a point of the closed disc on the default grid.
pub fn vhat_probe(a: f64, alpha: f64, point: (f64, f64)) -> Result<f64> {
    let mut chain = FamilyChain::new(FamilySpec::default_disc(), SolverCache::global(), a)?;
    vhat_probe_in(&mut chain, alpha, point)
}

pub fn vhat_probe_in(chain: &mut FamilyChain, alpha: f64, point: (f64, f64)) -> Result<f64> {
    chain.field(alpha)?.eval_v(point.0, point.1)
}

/// `α₀`, the root of `α ↦ v̂_{0,α}(0,0)`, and `α₁`, the root of
/// `α ↦ v̂_{0,α}(1,0)`, both by bisection on [`ALPHA_BRACKET`].
pub fn find_alpha0_alpha1(family: &FamilySpec, cache: &SolverCache, tol: f64) -> Result<(f64, f64)> {
    if family.kind != FamilyKind::DiscSweep {
        return Err(SlError::InvalidInput("α₀, α₁ belong to the disc family".into()));
    }
    let mut chain = FamilyChain::new(family.clone(), cache, 0.0)?;
    let (lo, hi) = ALPHA_BRACKET;
    let a0 = bisect_increasing(|al| Ok(chain.field(al)?.axis_profile().eval(0.0)), lo, hi, tol)?;
    let a1 = bisect_increasing(|al| chain.field(al)?.eval_v(1.0, 0.0), lo, hi, tol)?;
    if a0 >= a1 {
        return Err(SlError::InvalidInput(format!("expected α₀ < α₁, found {a0} ≥ {a1}")));
    }
    Ok((a0, a1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Strip bracket from the maximum principle: `v` lies between the extreme
/// boundary values `b ± t`.
fn strip_bracket(target: f64, t: f64) -> (f64, f64) {
    (target - t.abs() - 0.5, target + t.abs() + 0.5)
}

/// `α(t)`: root of `b ↦ v^t_{0,b}(0,0)`; `β(t)`: root of `b ↦ v^t_{0,b}(π,0)`.
pub fn alpha_beta_at(t: f64, domain: &DomainSpec, schedule: &ContinuationSchedule, cache: &SolverCache, tol: f64) -> Result<AlphaBeta> {
    let family = FamilySpec::strip(t, *domain, schedule.clone());
    let mut chain = FamilyChain::new(family, cache, 0.0)?;
    let (lo, hi) = strip_bracket(0.0, t);
    let alpha = bisect_increasing(|b| Ok(chain.field(b)?.axis_profile().eval(0.0)), lo, hi, tol)?;
    let beta = bisect_increasing(|b| Ok(chain.field(b)?.axis_profile().eval(PI)), lo, hi, tol)?;
    Ok(AlphaBeta { t, alpha, beta })
}

pub fn alpha_beta_curves(
    t_grid: &[f64],
    domain: &DomainSpec,
    schedule: &ContinuationSchedule,
    cache: &SolverCache,
    tol: f64,
) -> Result<Vec<AlphaBeta>> {
    t_grid.iter().map(|&t| alpha_beta_at(t, domain, schedule, cache, tol)).collect()
}

/// Ribbon for the disc family from `(α₀, α₁)` or for the strip family from
/// `(α(t), β(t))`.
pub fn ribbon_report(family: &FamilySpec, lo: f64, hi: f64) -> Result<DiscriminantRibbon> {
    if !(lo <= hi) {
        return Err(SlError::InvalidInput("ribbon needs b_lo ≤ b_hi".into()));
    }
    let degenerate = hi - lo <= 1e-12 * (1.0 + lo.abs());
    Ok(match family.kind {
        FamilyKind::DiscSweep => DiscriminantRibbon {
            a_plane: 0.0,
            b_interval: [lo, hi],
            c_range: CRange::AllReals,
            endpoint_kind: [EndpointKind::FoldBoundary, EndpointKind::DomainBoundary],
            hi_open: true,
            interior_count: 2,
            fold_count: 1,
            exterior_count: 0,
            degenerate,
        },
        FamilyKind::StripSweep => DiscriminantRibbon {
            a_plane: 0.0,
            b_interval: [lo, hi],
            c_range: CRange::AllReals,
            endpoint_kind: [EndpointKind::FoldBoundary, EndpointKind::FoldBoundary],
            hi_open: false,
            interior_count: 2,
            fold_count: 1,
            exterior_count: 0,
            degenerate,
        },
    })
}

/// Axis-zero counts over one period of the strip limit field for each `b`.
pub fn singular_count_profile(family: &FamilySpec, cache: &SolverCache, b_samples: &[f64]) -> Result<Vec<(f64, usize)>> {
    if family.kind != FamilyKind::StripSweep || !(family.t > 0.0) {
        return Err(SlError::InvalidInput("count profile needs the strip family with t > 0".into()));
    }
    let mut chain = FamilyChain::new(family.clone(), cache, 0.0)?;
    b_samples
        .iter()
        .map(|&b| Ok((b, detect_axis_zeros(&*chain.field(b)?)?.len())))
        .collect()
}

/// Interior axis zeros of disc limit fields along an `α` grid.
pub fn disc_zero_counts(family: &FamilySpec, cache: &SolverCache, alphas: &[f64]) -> Result<Vec<(f64, usize)>> {
    let mut chain = FamilyChain::new(family.clone(), cache, 0.0)?;
    alphas
        .iter()
        .map(|&al| {
            let f = chain.field(al)?;
            let edge = 1.0 - 0.5 * f.domain.dr();
            let n = detect_axis_zeros(&f)?.into_iter().filter(|x| x.abs() < edge).count();
            Ok((al, n))
        })
        .collect()
}

/// Base coordinates of a point of `C³`: `a` from the moment map, `b` by
/// bisection on `b ↦ v_{a,b}(x,y) − Re z₁z₂`, and `c = Im z₃ − u_{a,b}(x,y)`.
pub fn project_to_base(p: &ComplexPoint3, family: &FamilySpec, cache: &SolverCache, tol: f64) -> Result<FiberCoordinates> {
    family.validate()?;
    if !p.is_finite() {
        return Err(SlError::InvalidInput("non-finite point".into()));
    }
    let a = 0.5 * (p.z1.norm_sqr() - p.z2.norm_sqr());
    let w: C64 = p.z1 * p.z2;
    let (x, y, target) = (p.z3.re, w.im, w.re);
    let (lo, hi) = match family.kind {
        FamilyKind::DiscSweep => {
            if x * x + y * y >= 1.0 {
                return Err(SlError::OutsideTotalSpace);
            }
            ALPHA_BRACKET
        }
        FamilyKind::StripSweep => {
            if y.abs() >= family.domain.r {
                return Err(SlError::OutsideTotalSpace);
            }
            strip_bracket(target, family.t)
        }
    };
    let mut chain = FamilyChain::new(family.clone(), cache, a)?;
    let b = bisect_increasing(|b| Ok(chain.field(b)?.eval_v(x, y)? - target), lo, hi, tol)?;
    let u = chain.field(b)?.eval_u(x, y)?;
    Ok(FiberCoordinates { a, b, c: p.z3.im - u })
}

/// Nodes where `v` fails to increase strictly from `lower` to `upper`.
pub fn monotone_violations(lower: &SolutionField, upper: &SolutionField) -> Result<usize> {
    if lower.domain != upper.domain {
        return Err(SlError::InvalidInput("fields live on different grids".into()));
    }
    let d = lower.domain;
    Ok((0..d.node_count())
        .filter(|&k| !d.is_boundary(k) && lower.v[k] >= upper.v[k])
        .count())
}

/// Counts of grid violations of the strip-family shape: `x ↦ v` strictly
/// decreasing on `[0, π]` and increasing on `[π, 2π]` on every row, and the
/// sign of `u` on the four half-period half-strips.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeViolations {
    pub monotone: usize,
    pub sign: usize,
}

pub fn strip_shape_violations(field: &SolutionField) -> Result<ShapeViolations> {
    let d = field.domain;
    if d.kind != DomainKind::PeriodicStrip || d.n_x % 2 != 0 {
        return Err(SlError::InvalidInput("needs a strip field with even n_x".into()));
    }
    let (nx, ny) = (d.n_x, d.n_y);
    let half = nx / 2;
    let mut out = ShapeViolations::default();
    for j in 0..ny {
        let row = &field.v[j * nx..(j + 1) * nx];
        for i in 0..nx {
            let next = row[(i + 1) % nx];
            let ok = if i < half { next < row[i] } else { next > row[i] };
            if !ok {
                out.monotone += 1;
            }
        }
    }
    let mid = ny / 2;
    for j in 0..ny {
        if j == mid {
            continue;
        }
        let upper = j > mid;
        for i in 1..nx {
            if i == half {
                continue;
            }
            let u = field.u[j * nx + i];
            let want_pos = (i < half) == upper;
            if (want_pos && u <= 0.0) || (!want_pos && u >= 0.0) {
                out.sign += 1;
            }
        }
    }
    Ok(out)
}

/// Largest defect of `û` odd and `v̂` even under `x ↦ −x` and `y ↦ −y`,
/// by grid index reflection.
pub fn disc_symmetry_defect(field: &SolutionField) -> Result<f64> {
    let d = field.domain;
    if d.kind != DomainKind::Disc {
        return Err(SlError::InvalidInput("needs a disc field".into()));
    }
    let nt = d.n_y;
    let mut worst = 0.0f64;
    for i in 0..=d.n_x {
        for j in 0..nt {
            let k = i * nt + j;
            let ky = i * nt + (nt - j) % nt;
            let kx = i * nt + (nt + nt / 2 - j) % nt;
            worst = worst
                .max((field.u[k] + field.u[ky]).abs())
                .max((field.u[k] + field.u[kx]).abs())
                .max((field.v[k] - field.v[ky]).abs())
                .max((field.v[k] - field.v[kx]).abs());
        }
    }
    Ok(worst)
}

/// A point of `N_{a,b,c}` from a family field at chart coordinates.
pub fn family_point(field: &SolutionField, c: f64, x: f64, y: f64, phase: f64) -> Result<ComplexPoint3> {
    let (u, v) = field.eval_uv(x, y)?;
    let mut p = crate::calibration_core::fiber_point_from_uv(x, y, phase, field.a, u, v);
    p.z3 += C64::new(0.0, c);
    Ok(p)
}
