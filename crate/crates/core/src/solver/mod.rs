//! Critical-point search for `I` and the evidence bundle for the
//! two-solution claim.

mod ascent;
mod certificate;
mod linking;
mod morse;
mod newton;
mod orbits;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::functional::{FunctionalContext, ResidualConvention, ResidualReport};
use crate::sequence::PeriodicSequence;

pub use ascent::{ascend, maximize_i, AscentOutcome, AscentStatus};
pub use certificate::{
    two_solution_certificate, two_solution_certificate_with, Certificate, CertificateVerdict,
    Component, ProofCase, LINKING_SAMPLES,
};
pub use linking::{
    linking_direction, sample_z_values, verify_linking_geometry, verify_linking_geometry_at,
    LinkingReport, LinkingSide,
};
pub use morse::{count_negative, morse_index, MorseInfo};
pub use newton::{find_critical_points, newton_solve};
pub use orbits::{dedupe_orbits, orbit_representatives, RESIDUAL_CERTIFIED};

/// `‖u‖` at or below this is the trivial solution.
pub const TRIVIAL_TOL: f64 = 1e-6;
/// `max_s |u_s − mean(u)|` above this is nonconstant.
pub const CONSTANT_TOL: f64 = 1e-6;
/// Iterates beyond this norm are treated as escaping to infinity.
pub const DIVERGENCE_NORM: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub seed: u64,
    pub grad_tol: f64,
    pub max_iters: usize,
    pub merge_tol: f64,
    /// Radius of the ball holding random ascent starts; `None` means `2ρ`.
    pub init_radius: Option<f64>,
    pub shrink: f64,
    pub sufficient_increase: f64,
    /// Random directions `e ∈ Y` used for the `±ρe` Newton seeds.
    pub y_seeds: usize,
    /// Random points of `Z` used as Newton seeds.
    pub z_seeds: usize,
    pub deflation_rounds: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 42,
            grad_tol: 1e-8,
            max_iters: 500,
            merge_tol: 1e-4,
            init_radius: None,
            shrink: 0.5,
            sufficient_increase: 1e-4,
            y_seeds: 8,
            z_seeds: 8,
            deflation_rounds: 2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 2 {
            return Err(invalid("restarts", "must be ≥ 2"));
        }
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("merge_tol", self.merge_tol),
            ("sufficient_increase", self.sufficient_increase),
        ] {
            if !(v > 0.0) {
                return Err(invalid(name, "must be > 0"));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(invalid("shrink", "must lie in (0, 1)"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be > 0"));
        }
        if let Some(r) = self.init_radius {
            if !(r > 0.0) {
                return Err(invalid("init_radius", "must be > 0"));
            }
        }
        Ok(())
    }

    pub fn init_radius_for(&self, ctx: &FunctionalContext) -> f64 {
        self.init_radius.unwrap_or(2.0 * ctx.rho())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Trivial,
    ConstantNonzero,
    Nonconstant,
}

impl Classification {
    pub fn of(u: &PeriodicSequence) -> Self {
        if u.norm() <= TRIVIAL_TOL {
            Self::Trivial
        } else if u.spread() > CONSTANT_TOL {
            Self::Nonconstant
        } else {
            Self::ConstantNonzero
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointRecord {
    pub point: PeriodicSequence,
    pub value: f64,
    pub grad_norm: f64,
    pub morse: MorseInfo,
    /// Lattice-equation residual, pointwise convention.
    pub residual: ResidualReport,
    /// Lattice-equation residual, summed-action convention.
    pub residual_summed: ResidualReport,
    pub classification: Classification,
    pub orbit_id: usize,
}

impl CriticalPointRecord {
    /// Evaluate everything about `point` from scratch. `orbit_id` is
    /// provisional until [`dedupe_orbits`] runs.
    pub fn evaluate(ctx: &FunctionalContext, point: PeriodicSequence) -> Self {
        let grad_norm = ctx.i_gradient(&point).norm();
        Self {
            value: ctx.i_value(&point),
            grad_norm,
            morse: morse_index(&point, ctx),
            residual: ctx.residual(&point, ResidualConvention::Pointwise),
            residual_summed: ctx.residual(&point, ResidualConvention::SummedAction),
            classification: Classification::of(&point),
            orbit_id: 0,
            point,
        }
    }

    pub fn morse_index(&self) -> usize {
        self.morse.index
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            restarts: 1,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            grad_tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            shrink: 1.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn classification_thresholds() {
        let z = PeriodicSequence::zeros(5).unwrap();
        assert_eq!(Classification::of(&z), Classification::Trivial);
        let c = PeriodicSequence::constant(5, 0.3).unwrap();
        assert_eq!(Classification::of(&c), Classification::ConstantNonzero);
        let u = PeriodicSequence::new(vec![0.3, 0.3, 0.3 + 2e-6, 0.3, 0.3]).unwrap();
        assert_eq!(Classification::of(&u), Classification::Nonconstant);
    }
}
