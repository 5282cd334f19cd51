//! Build a point on a fiber of the disc family and project it back to the base.

use slfib::elliptic_engine::{ContinuationSchedule, DomainSpec};
use slfib::fibration_factory::{family_point, project_to_base, FamilyChain, FamilySpec, SolverCache};

fn main() -> slfib::Result<()> {
    let family = FamilySpec::disc(DomainSpec::disc(32), ContinuationSchedule::default());
    let cache = SolverCache::new(128, None);
    let (a, b, c) = (0.4, 1.5, -0.25);

    let f = FamilyChain::new(family.clone(), &cache, a)?.field(b)?;
    let p = family_point(&f, c, 0.2, -0.3, 1.0)?;
    let q = project_to_base(&p, &family, &cache, 1e-10)?;
    println!("base point ({a}, {b}, {c}) -> {p:?}");
    println!("projected back: a = {:.8}, b = {:.8}, c = {:.8}", q.a, q.b, q.c);
    Ok(())
}
