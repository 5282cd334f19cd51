//! Dirichlet problem on the unit disc: a regular level, the `a → 0` limit,
//! the convergence order against the closed-form field, and a dump.
//!
//! `cargo run --release --example disc_solve -- [n]`

use slfib::elliptic_engine::dump::write_dump;
use slfib::elliptic_engine::{solve_disc, solve_disc_limit, BoundarySpec, ContinuationSchedule, DomainSpec, SolutionField};
use slfib::explicit_models::{na_disc_boundary, na_oracle};

fn oracle_error(n: usize) -> slfib::Result<f64> {
    let d = DomainSpec::disc(n);
    let exact = SolutionField::from_fn(d.clone(), 0.5, |x, y| na_oracle(0.5, x, y).unwrap())?;
    let f = solve_disc(&na_disc_boundary(0.5, 1024)?, 0.5, &d)?;
    Ok(f.c0_distance(&exact))
}

fn main() -> slfib::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let d = DomainSpec::disc(n);
    let phi = BoundarySpec::vhat(1.0);

    let f = solve_disc(&phi, 0.5, &d)?;
    println!("a = 0.5: residual {:.2e} after {} Newton steps", f.residual_norm, f.diagnostics.newton_iterations);
    println!("  v(0, 1) = {:.5}, integral of v(x, 0) = {:.5}", f.eval_v(0.0, 1.0)?, f.axis_profile().integral());

    let g = solve_disc_limit(&phi, &d, &ContinuationSchedule::default())?;
    println!("a -> 0: {} Newton steps along the schedule", g.diagnostics.newton_iterations);
    for (a, inc) in g.diagnostics.cauchy_increments.iter().rev().take(3) {
        println!("  level {a:.1e}: change {inc:.2e}");
    }

    let (e1, e2) = (oracle_error(32)?, oracle_error(64)?);
    println!("oracle errors n=32: {e1:.3e}, n=64: {e2:.3e}, ratio {:.2}", e1 / e2);

    let path = std::env::temp_dir().join("slfib_disc.dump");
    write_dump(&g, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    println!("limit field written to {}", path.display());
    Ok(())
}
