//! Spectral simulator for the damped wave equation
//!
//! ```text
//! u_tt + gamma (-Delta + 1)^{1/2} u_t - Delta u + lambda0 u + f(u) = g,   u = 0 on the boundary,
//! ```
//!
//! on a Dirichlet box, together with the machinery used to check its
//! weighted energy, regularity and commutator estimates numerically.
//!
//! All numerics are generic over the scalar type ([`Real`]); the aliases at
//! the crate root fix it to `f64`, which is what the harness uses.

pub mod commutators;
pub mod dynamics;
pub mod error;
pub mod fracops;
pub mod functionals;
pub mod grid;
pub mod gronwall;
pub mod scalar;
pub mod simulate;
pub mod special;
pub mod weights;

pub use commutators::{
    bound_constant, bump_study, commutator_apply, commutator_apply_reversed, log_log_slope, scaling_study, CommutatorReport,
};
pub use dynamics::{
    linear_halfstep, nonlinear_kick, oscillator_exponential, pde_residual, random_initial_state, step, Integrator, LinearPropagator,
    Nonlinearity, Physics, State,
};
pub use error::{Error, Result};
pub use fracops::{apply_quadrature, apply_spectral, gamma_reciprocal, heat_semigroup, FractionalPower, QuadratureSpec};
pub use functionals::{
    appendix_energy, big_psi_n, dissipation_rate, energy_constant, integrate_trapezoid, lyapunov_psi, psi_n, twin_factor_at,
    unweighted_energy, window_integrals, EnergyLedger, LedgerManifest, LedgerRow, Monitor, MonitorConfig, Quantity, Truncation,
    UnweightedEnergy, WindowIntegrals,
};
pub use gronwall::{
    build_trace, decay_bound, extinction_exponent, extinction_time, measure_windows, ode_extinction_time, verify_against_ode,
    BoundSample, GronwallParams, GronwallTrace, OdeVerification,
};
pub use grid::{AxisClosedGrid, BoxDomain, GridField, SpectralField};
pub use scalar::{lit, Real};
pub use simulate::{simulate, Schedule};
pub use weights::{
    ball_averaged_norm_sq, ball_lp_norm, center_lattice, check_growth_axiom, energy_norm, uniformly_local_norm, weighted_lp_norm,
    EnergyNorms, GrowthReport, SampledWeight, WeightKind, WeightSpec,
};

pub type Domain = grid::BoxDomain<f64>;
pub type Field = grid::SpectralField<f64>;
pub type Grid = grid::GridField<f64>;
