//! Branching α-stable Lévy processes with positive jumps.
//!
//! Particles move as independent strictly α-stable processes, live for an
//! Exp(1) time and are replaced by a random number of children at their death
//! position. The crate samples the all-time maximum `M` of the system, solves
//! the integral equation satisfied by `u(x) = P(M ≥ x)` and checks the power
//! law tails of `u` in the subcritical and critical regimes.
//!
//! Numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! the double precision instantiation used by the command-line tools.

pub mod asymptotics;
pub mod branching;
pub mod error;
pub mod io;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod stable;
pub mod stats;
pub mod supremum;
pub mod tabulated;

pub use asymptotics::{
    apriori_bound_check, eta_alpha, fit_tail, kolmogorov_ratio, laplace_numeric, theoretical_tail,
    FitResult, LaplaceValue, TailTarget,
};
pub use branching::{
    make_offspring_law, simulate_batch, simulate_run, survival_estimate, OffspringLaw, Regime,
    RunBatch, RunResult, SimCaps,
};
pub use error::{Error, Result};
pub use rng::StreamKey;
pub use scalar::Scalar;
pub use solver::{phi0_of, residual_check, solve_u, ResidualReport, Solution};
pub use stable::{kappa_constant, validate_params, StableParams};
pub use supremum::{empirical_survival, sample_cloud, sample_pair, ExpPairCloud, ExpPairSample};
pub use tabulated::{geometric_grid, TabulatedFn};

pub type Real = f64;
pub type StableParams64 = StableParams<f64>;
pub type OffspringLaw64 = OffspringLaw<f64>;
pub type ExpPairCloud64 = ExpPairCloud<f64>;
pub type TabulatedFn64 = TabulatedFn<f64>;
pub type RunResult64 = RunResult<f64>;
pub type SimCaps64 = SimCaps<f64>;
pub type Solution64 = Solution<f64>;
