//! Dirichlet solvers for the potential equation on the unit disc and for the
//! `v` equation on the periodic strip, plus the `a → 0` continuation.

mod boundary;
mod continuation;
mod disc;
pub mod dump;
mod field;
mod newton;
mod spectral;
mod strip;

pub use boundary::BoundarySpec;
pub use continuation::{
    solve_disc_limit, solve_disc_limit_predicted, solve_disc_limit_warm, solve_strip_limit, solve_strip_limit_predicted,
    solve_strip_limit_warm, ContinuationSchedule,
};
pub use disc::{disc_center_v, solve_disc, solve_disc_warm};
pub use field::{AxisProfile, Diagnostics, DomainKind, DomainSpec, FieldBoundary, SolutionField};
pub use spectral::{solve_strip_spectral, SpectralSpec, SpectralStripField};
pub use strip::{mean_flux, reconstruct_u, solve_strip, solve_strip_warm};

/// Floor under `v² + y² + a²` before the inverse square root.
pub const EPS_COEFF: f64 = 1e-16;

/// `(max(p² + y² + a², ε))^{-1/2}`.
#[inline]
pub fn coefficient(p: f64, y: f64, a: f64) -> f64 {
    1.0 / (p * p + y * y + a * a).max(EPS_COEFF).sqrt()
}

/// Derivative of [`coefficient`] in `p`; zero where the floor is active.
#[inline]
pub(crate) fn coefficient_slope(p: f64, y: f64, a: f64) -> f64 {
    let q = p * p + y * y + a * a;
    if q <= EPS_COEFF {
        0.0
    } else {
        -p / (q * q.sqrt())
    }
}
