//! Critical-point toolkit for `M`-periodic solutions of the second-order
//! discrete Hamiltonian system
//!
//! ```text
//! Δ²u_{n−1} + ∂_{u_n} F(n, u_{n−1}, u_n, u_{n+1}) = 0,   u_{n+M} = u_n.
//! ```
//!
//! The crate builds the variational functional `I` attached to a
//! distinguished index `n0`, checks the spectral facts and inequalities its
//! existence argument relies on, and searches for its critical points:
//!
//! * [`sequence`]: periodic sequences, difference operators, norms.
//! * [`spectral`]: the circulant matrix `A`, the cross matrix `L`, and the
//!   splitting `ℝ^M = Y ⊕ Z`.
//! * [`potential`]: potentials `F`, the shipped negative-power family, a term
//!   grammar, and sampled hypothesis checks.
//! * [`functional`]: `I`, its gradient and Hessian, bounds and residuals.
//! * [`solver`]: maximization, multistart Newton with deflation, Morse
//!   indices, orbit grouping, linking geometry, and the two-solution
//!   certificate.
//! * [`io`]: the sequence text format.

// `!(x > 0.0)` is how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod error;
pub mod functional;
pub mod io;
pub mod potential;
pub mod rng;
pub mod sequence;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use functional::{
    coercivity_probe, system_residual, CoercivityReport, FunctionalContext, FunctionalParams,
    HessianReport, ResidualConvention, ResidualReport,
};
pub use potential::{
    check_hypotheses, HypothesisConstants, HypothesisId, HypothesisReport, Potential,
    PotentialSpec, Sampling, Symmetry, TableDefinition, Verdict,
};
pub use sequence::{forward_difference, norms, second_difference, NormPair, PeriodicSequence};
pub use solver::{
    dedupe_orbits, find_critical_points, maximize_i, morse_index, two_solution_certificate,
    two_solution_certificate_with, verify_linking_geometry, Certificate, Classification,
    CriticalPointRecord, LinkingReport, SolverConfig,
};
pub use spectral::{build_a, build_l, decompose, spectrum_a, SpectralData};
