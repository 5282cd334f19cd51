//! The periodic strip family on a coarse grid: `α(t) ≤ β(t)` and the number
//! of singular points as `b` crosses the ribbon.

use std::f64::consts::PI;

use slfib::elliptic_engine::{mean_flux, ContinuationSchedule, DomainSpec};
use slfib::fibration_factory::{alpha_beta_at, singular_count_profile, strip_shape_violations, FamilySpec, FamilyChain, SolverCache};

fn main() -> slfib::Result<()> {
    let d = DomainSpec::strip(1.0, 2.0 * PI, 64, 33);
    let sched = ContinuationSchedule::default();
    let cache = SolverCache::new(512, None);

    for t in [0.0, 0.5, 1.0] {
        let ab = alpha_beta_at(t, &d, &sched, &cache, 1e-6)?;
        println!("t = {t}: alpha = {:+.5}, beta = {:+.5}", ab.alpha, ab.beta);
    }

    let t = 1.0;
    let ab = alpha_beta_at(t, &d, &sched, &cache, 1e-6)?;
    let mid = 0.5 * (ab.alpha + ab.beta);
    let bs = [ab.alpha - 0.2, ab.alpha, mid, ab.beta, ab.beta + 0.2];
    let family = FamilySpec::strip(t, d, sched);
    let counts: Vec<usize> = singular_count_profile(&family, &cache, &bs)?.into_iter().map(|(_, k)| k).collect();
    println!("singular counts across b: {counts:?}");

    let mut chain = FamilyChain::new(family, &cache, 0.5)?;
    let f = chain.field(mid)?;
    let fluxes: Vec<f64> = [0, d.n_y / 2, d.n_y - 1].iter().map(|&j| mean_flux(&f, j)).collect::<slfib::Result<_>>()?;
    println!("row means at a = 0.5: {fluxes:?}");
    println!("shape violations: {:?}", strip_shape_violations(&f)?);
    Ok(())
}
