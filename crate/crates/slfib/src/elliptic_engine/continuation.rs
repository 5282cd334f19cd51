use serde::{Deserialize, Serialize};

use super::boundary::BoundarySpec;
use super::disc::solve_disc_with;
use super::field::{DomainSpec, FieldBoundary, SolutionField};
use super::newton::NewtonOptions;
use super::strip::solve_strip_with;
use crate::error::{Result, SlError};

/// Decreasing positive levels `a_k`; the last one is the `a = 0` proxy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSchedule {
    pub levels: Vec<f64>,
}

impl ContinuationSchedule {
    /// `a_start·2^{−k}` until it drops below `a_min`, then `a_min` itself.
    pub fn geometric(a_start: f64, a_min: f64) -> Self {
        let mut levels = Vec::new();
        let mut a = a_start;
        while a > a_min * (1.0 + 1e-12) {
            levels.push(a);
            a *= 0.5;
        }
        levels.push(a_min);
        ContinuationSchedule { levels }
    }

    pub fn a_min(&self) -> f64 {
        *self.levels.last().expect("empty schedule")
    }

    pub fn validate(&self) -> Result<()> {
        let ok = !self.levels.is_empty()
            && self.levels.iter().all(|a| a.is_finite() && *a > 0.0)
            && self.levels.windows(2).all(|w| w[1] < w[0]);
        if ok {
            Ok(())
        } else {
            Err(SlError::InvalidInput("schedule must be a decreasing positive sequence".into()))
        }
    }
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        ContinuationSchedule::geometric(1.0, 1e-4)
    }
}

const MAX_SPLITS: usize = 6;
const MAX_DATA_SPLITS: usize = 4;

fn quick() -> NewtonOptions {
    NewtonOptions {
        max_iter: 12,
        min_lambda: 0.1,
        ..NewtonOptions::default()
    }
}

/// Walk the schedule with warm starts. A failing step is retried through
/// geometric midpoints before giving up.
fn run_schedule<F>(schedule: &ContinuationSchedule, solve: F) -> Result<SolutionField>
where
    F: Fn(f64, Option<&SolutionField>, NewtonOptions) -> Result<SolutionField>,
{
    let mut increments = Vec::new();
    let mut prev: Option<SolutionField> = None;
    let mut newton_total = 0;
    for &a in &schedule.levels {
        let next = level_step(&solve, prev.as_ref(), a, 0)?;
        newton_total += next.diagnostics.newton_iterations;
        if let Some(p) = &prev {
            increments.push((a, next.c0_distance(p)));
        }
        prev = Some(next);
    }
    let mut f = prev.expect("non-empty schedule");
    f.diagnostics.cauchy_increments = increments;
    f.diagnostics.newton_iterations = newton_total;
    f.diagnostics.limit_proxy = true;
    Ok(f)
}

fn level_step<F>(solve: &F, prev: Option<&SolutionField>, a: f64, depth: usize) -> Result<SolutionField>
where
    F: Fn(f64, Option<&SolutionField>, NewtonOptions) -> Result<SolutionField>,
{
    let opts = if prev.is_some() { quick() } else { NewtonOptions::default() };
    match solve(a, prev, opts) {
        Ok(f) => Ok(f),
        Err(_) if depth < MAX_SPLITS && prev.is_some() => {
            let p = prev.unwrap();
            let mid = (p.a * a).sqrt();
            let m = level_step(solve, Some(p), mid, depth + 1)?;
            level_step(solve, Some(&m), a, depth + 1)
        }
        Err(_) => Err(SlError::ContinuationFailed { a }),
    }
}

/// Move the boundary data from `from` to `to` at fixed `a`, halving the
/// data step whenever Newton fails.
fn data_homotopy<B, L, F>(lerp: &L, solve: &F, from: &B, to: &B, warm: &SolutionField, depth: usize) -> Option<SolutionField>
where
    L: Fn(&B, &B, f64) -> B,
    F: Fn(&B, &SolutionField) -> Result<SolutionField>,
{
    if let Ok(f) = solve(to, warm) {
        return Some(f);
    }
    if depth >= MAX_DATA_SPLITS {
        return None;
    }
    let mid = lerp(from, to, 0.5);
    let m = data_homotopy(lerp, solve, from, &mid, warm, depth + 1)?;
    data_homotopy(lerp, solve, &mid, to, &m, depth + 1)
}

fn finish_warm(mut f: SolutionField, warm: &SolutionField) -> SolutionField {
    f.diagnostics.limit_proxy = true;
    f.diagnostics.cauchy_increments = vec![(f.a, f.c0_distance(warm))];
    f
}

/// The `a → 0` disc proxy: warm-started Newton along the schedule.
pub fn solve_disc_limit(boundary: &BoundarySpec, domain: &DomainSpec, schedule: &ContinuationSchedule) -> Result<SolutionField> {
    solve_disc_limit_warm(boundary, domain, schedule, None)
}

/// As [`solve_disc_limit`]. When `warm` is an `a_min` disc field on the same
/// grid, its boundary data are first deformed into `boundary` at `a_min`;
/// the full schedule is the fallback.
pub fn solve_disc_limit_warm(
    boundary: &BoundarySpec,
    domain: &DomainSpec,
    schedule: &ContinuationSchedule,
    warm: Option<&SolutionField>,
) -> Result<SolutionField> {
    schedule.validate()?;
    let a_min = schedule.a_min();
    if let Some(w) = warm.filter(|w| w.domain == *domain && (w.a - a_min).abs() <= 1e-15 * a_min.max(1.0)) {
        if let FieldBoundary::Disc { phi } = &w.boundary {
            let lerp = |p: &BoundarySpec, q: &BoundarySpec, s: f64| p.add_scaled(&q.add_scaled(p, -1.0), s);
            let solve = |b: &BoundarySpec, wf: &SolutionField| solve_disc_with(b, a_min, domain, Some(wf), quick());
            if let Some(f) = data_homotopy(&lerp, &solve, phi, boundary, w, 0) {
                return Ok(finish_warm(f, w));
            }
        }
    }
    run_schedule(schedule, |a, w, o| solve_disc_with(boundary, a, domain, w, o))
}

pub fn solve_strip_limit(
    top: &BoundarySpec,
    bottom: &BoundarySpec,
    domain: &DomainSpec,
    schedule: &ContinuationSchedule,
) -> Result<SolutionField> {
    solve_strip_limit_warm(top, bottom, domain, schedule, None)
}

/// Strip analogue of [`solve_disc_limit_warm`].
pub fn solve_strip_limit_warm(
    top: &BoundarySpec,
    bottom: &BoundarySpec,
    domain: &DomainSpec,
    schedule: &ContinuationSchedule,
    warm: Option<&SolutionField>,
) -> Result<SolutionField> {
    schedule.validate()?;
    let a_min = schedule.a_min();
    if let Some(w) = warm.filter(|w| w.domain == *domain && (w.a - a_min).abs() <= 1e-15 * a_min.max(1.0)) {
        if let FieldBoundary::Strip { top: t0, bottom: b0 } = &w.boundary {
            type Pair = (BoundarySpec, BoundarySpec);
            let lerp = |p: &Pair, q: &Pair, s: f64| {
                (
                    p.0.add_scaled(&q.0.add_scaled(&p.0, -1.0), s),
                    p.1.add_scaled(&q.1.add_scaled(&p.1, -1.0), s),
                )
            };
            let solve = |b: &Pair, wf: &SolutionField| solve_strip_with(&b.0, &b.1, a_min, domain, Some(wf), quick());
            let from = (t0.clone(), b0.clone());
            let to = (top.clone(), bottom.clone());
            if let Some(f) = data_homotopy(&lerp, &solve, &from, &to, w, 0) {
                return Ok(finish_warm(f, w));
            }
        }
    }
    run_schedule(schedule, |a, w, o| solve_strip_with(top, bottom, a, domain, w, o))
}

/// The `a → 0` disc proxy started from a predicted `a_min` field, typically
/// a blend of two neighbouring solutions. Falls back to the full schedule.
pub fn solve_disc_limit_predicted(
    boundary: &BoundarySpec,
    domain: &DomainSpec,
    schedule: &ContinuationSchedule,
    predictor: &SolutionField,
) -> Result<SolutionField> {
    schedule.validate()?;
    let a_min = schedule.a_min();
    if predictor.domain == *domain {
        if let Ok(f) = solve_disc_with(boundary, a_min, domain, Some(predictor), quick()) {
            return Ok(finish_warm(f, predictor));
        }
    }
    run_schedule(schedule, |a, w, o| solve_disc_with(boundary, a, domain, w, o))
}

/// Strip analogue of [`solve_disc_limit_predicted`].
pub fn solve_strip_limit_predicted(
    top: &BoundarySpec,
    bottom: &BoundarySpec,
    domain: &DomainSpec,
    schedule: &ContinuationSchedule,
    predictor: &SolutionField,
) -> Result<SolutionField> {
    schedule.validate()?;
    let a_min = schedule.a_min();
    if predictor.domain == *domain {
        if let Ok(f) = solve_strip_with(top, bottom, a_min, domain, Some(predictor), quick()) {
            return Ok(finish_warm(f, predictor));
        }
    }
    run_schedule(schedule, |a, w, o| solve_strip_with(top, bottom, a, domain, w, o))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_schedule_ends_at_a_min() {
        let s = ContinuationSchedule::geometric(1.0, 1e-4);
        assert_eq!(s.levels[0], 1.0);
        assert_eq!(s.a_min(), 1e-4);
        assert_eq!(s.levels.len(), 15);
        assert!(s.validate().is_ok());
        assert!(ContinuationSchedule { levels: vec![1.0, 2.0] }.validate().is_err());
    }

    #[test]
    fn affine_limit_is_exact() {
        let d = DomainSpec::disc(16);
        let f = solve_disc_limit(&BoundarySpec::affine(1.5, 0.0, 0.0), &d, &ContinuationSchedule::default()).unwrap();
        assert!(f.v.iter().all(|v| (v - 1.5).abs() < 1e-10));
        assert!(f.diagnostics.limit_proxy);
        assert!(f.diagnostics.cauchy_increments.iter().all(|&(_, c)| c < 1e-10));
    }
}
