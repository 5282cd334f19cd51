//! Fibers over data differing by a nontrivial linear function never meet:
//! the difference of the two fields has no zeros.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slfib::elliptic_engine::{solve_disc, BoundarySpec, DomainSpec};
use slfib::singularity_lab::count_zeros_between;

fn main() -> slfib::Result<()> {
    let d = DomainSpec::disc(24);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let base = BoundarySpec::vhat(rng.random_range(-1.0..1.0)).with_sin(2, rng.random_range(-0.5..0.5));
        let (p, q) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let shifted = base.add_scaled(&BoundarySpec::affine(p, q, 0.0), 1.0);
        let f1 = solve_disc(&base, 0.3, &d)?;
        let f2 = solve_disc(&shifted, 0.3, &d)?;
        let (k, _) = count_zeros_between(&f1, &f2)?;
        println!("shift ({p:+.3}) x + ({q:+.3}) y: {k} common point(s)");
    }
    Ok(())
}
