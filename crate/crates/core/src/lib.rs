//! Social optimum of two public facilities on the unit interval.
//!
//! Individuals are spread uniformly over `[0, 1]`. Two facilities sit at
//! `a <= b` and split one unit of quality: the facility at `a` gets `q`, the
//! one at `b` gets `1 - q`. An individual at `i` using the facility at `x`
//! receives `theta * g(q_x) - (i - x)^2` with `g(q) = q^gamma`, and picks the
//! better of the two. This crate evaluates aggregate welfare, enumerates the
//! analytic stationary configurations, searches the configuration space with
//! an independent lattice oracle and derivative-free refinement, and checks
//! the closed-form optima for `gamma = 1` and `gamma = 1/2`.
//!
//! The crate is `no_std` (it needs `alloc`). Enable `parallel` to spread the
//! lattice search and theta sweeps over a rayon pool.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod error;
pub mod model;
pub mod optimize;
pub mod theorems;
pub mod welfare;

mod math;

pub use error::{Error, Result};
pub use model::{
    assign, indifferent_point, utility, Facility, FacilityConfig, IndifferencePoint, Preferences,
};
pub use optimize::{
    candidate_stationary, classify, grid_search, refine, solve, Candidate, Family, Refinement,
    Regime, SolveOptions, SolveReport, ThetaRange,
};
pub use theorems::{
    detect_threshold, sweep_theta, verify_lemma_boundary, verify_remark, verify_remark_grid,
    verify_theorem1, verify_theorem2, Check, Claim, SweepRow, Threshold, VerificationResult,
};
pub use welfare::{
    welfare, welfare_closed_form, welfare_gradient, welfare_quadrature, GradientMethod,
    WelfareBranch, WelfareGradient, WelfareValue,
};
