//! The disc family `v̂_α`: the two critical parameters, zero counts around
//! them, and the ribbon they bound in the discriminant.
//!
//! `cargo run --release --example disc_bifurcation -- [n]` (n = 64 takes about a minute).

use slfib::elliptic_engine::{ContinuationSchedule, DomainSpec};
use slfib::fibration_factory::{disc_zero_counts, find_alpha0_alpha1, ribbon_report, FamilySpec, SolverCache, ROOT_TOL};

fn main() -> slfib::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let family = FamilySpec::disc(DomainSpec::disc(n), ContinuationSchedule::default());
    let cache = SolverCache::new(256, None);

    let (a0, a1) = find_alpha0_alpha1(&family, &cache, ROOT_TOL)?;
    println!("alpha0 = {a0:.6}, alpha1 = {a1:.6}");

    let probes = [a0 - 0.01, a0, 0.5 * (a0 + a1), a1 + 0.1];
    for (al, k) in disc_zero_counts(&family, &cache, &probes)? {
        println!("  alpha = {al:.4}: {k} singular point(s)");
    }
    println!("{:#?}", ribbon_report(&family, a0, a1)?);
    Ok(())
}
