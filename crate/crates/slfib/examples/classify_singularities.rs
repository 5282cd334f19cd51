//! Type and multiplicity of the singular points of an `a → 0` disc field.

use slfib::elliptic_engine::{solve_disc_limit, BoundarySpec, ContinuationSchedule, DomainSpec};
use slfib::singularity_lab::analyze;

fn main() -> slfib::Result<()> {
    let d = DomainSpec::disc(48);
    for alpha in [1.0, 2.0] {
        let phi = BoundarySpec::vhat(alpha);
        let f = solve_disc_limit(&phi, &d, &ContinuationSchedule::default())?;
        let report = analyze(&f, 0.3)?;
        println!("alpha = {alpha}:");
        for r in &report.records {
            println!("  x = {:+.5}  {:?}  {:?}", r.x_location, r.singular_type, r.multiplicity);
        }
        println!("  l = {:?}, bound holds: {:?}", report.l, report.bound_ok);
    }
    Ok(())
}
