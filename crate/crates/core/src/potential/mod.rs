//! Potentials `F(n, x, y, z)` coupling a site to its two neighbours, the
//! shipped negative-power family, a small term grammar for user potentials,
//! and sampled checks of the standing hypotheses.

pub(crate) mod hypotheses;
mod table;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::sequence::MIN_PERIOD;
use crate::spectral::lambda_min;

pub use hypotheses::{
    check_hypotheses, HypothesisConstants, HypothesisId, HypothesisReport, Sampling, Verdict,
    Violation,
};
pub use table::{Modulation, TableDefinition, Term, TermArg, TermKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Symmetry {
    /// No dependence on `n`.
    pub autonomous: bool,
    /// `F(n, −x, −y, −z) = F(n, x, y, z)`.
    pub even: bool,
    /// The lattice system commutes with index shifts.
    pub shift_invariant: bool,
}

/// A potential evaluated at `(n, u_{n−1}, u_n, u_{n+1})`.
pub trait Potential: fmt::Debug + Send + Sync {
    fn period(&self) -> usize;
    fn eval(&self, n: i64, x: f64, y: f64, z: f64) -> f64;
    /// `(∂F/∂x, ∂F/∂y, ∂F/∂z)`.
    fn grad(&self, n: i64, x: f64, y: f64, z: f64) -> [f64; 3];
    fn symmetry(&self) -> Symmetry;
    /// Short human-readable label used in reports.
    fn describe(&self) -> String;
}

/// Shared handle to a [`Potential`].
#[derive(Debug, Clone)]
pub struct PotentialSpec(Arc<dyn Potential>);

impl PotentialSpec {
    pub fn new(p: impl Potential + 'static) -> Self {
        Self(Arc::new(p))
    }

    /// `F = −2b(1 − cos(2π/M)) (|x|^β + |y|^β + |z|^β)`.
    pub fn example31(b: f64, beta: f64, m: usize) -> Result<Self> {
        Ok(Self::new(Example31::new(b, beta, m)?))
    }

    pub fn table(definition: TableDefinition) -> Result<Self> {
        Ok(Self::new(table::TablePotential::new(definition)?))
    }

    /// `F ≡ 0` with the given period.
    pub fn zero(m: usize) -> Result<Self> {
        Self::table(TableDefinition {
            period: m,
            terms: Vec::new(),
        })
    }

    pub fn period(&self) -> usize {
        self.0.period()
    }

    pub fn eval(&self, n: i64, x: f64, y: f64, z: f64) -> f64 {
        self.0.eval(n, x, y, z)
    }

    pub fn grad(&self, n: i64, x: f64, y: f64, z: f64) -> [f64; 3] {
        self.0.grad(n, x, y, z)
    }

    pub fn symmetry(&self) -> Symmetry {
        self.0.symmetry()
    }

    pub fn describe(&self) -> String {
        self.0.describe()
    }
}

/// `c·|t|^p` and its derivative `c·p·|t|^{p−1}·sign(t)`.
pub(crate) fn abs_pow(t: f64, p: f64) -> f64 {
    t.abs().powf(p)
}

pub(crate) fn abs_pow_deriv(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        p * t.abs().powf(p - 1.0) * t.signum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example31 {
    pub b: f64,
    pub beta: f64,
    pub m: usize,
    coeff: f64,
}

impl Example31 {
    pub fn new(b: f64, beta: f64, m: usize) -> Result<Self> {
        if !(b > 0.0) {
            return Err(invalid("b", "must be > 0"));
        }
        if !(beta > 2.0) {
            return Err(invalid("beta", "must be > 2"));
        }
        if m < MIN_PERIOD {
            return Err(crate::Error::PeriodTooSmall(m));
        }
        Ok(Self {
            b,
            beta,
            m,
            coeff: -b * lambda_min(m),
        })
    }

    /// `−b·λ_min`, the common factor in front of the power sum.
    pub fn coefficient(&self) -> f64 {
        self.coeff
    }
}

impl Potential for Example31 {
    fn period(&self) -> usize {
        self.m
    }

    fn eval(&self, _n: i64, x: f64, y: f64, z: f64) -> f64 {
        self.coeff * (abs_pow(x, self.beta) + abs_pow(y, self.beta) + abs_pow(z, self.beta))
    }

    fn grad(&self, _n: i64, x: f64, y: f64, z: f64) -> [f64; 3] {
        [
            self.coeff * abs_pow_deriv(x, self.beta),
            self.coeff * abs_pow_deriv(y, self.beta),
            self.coeff * abs_pow_deriv(z, self.beta),
        ]
    }

    fn symmetry(&self) -> Symmetry {
        Symmetry {
            autonomous: true,
            even: true,
            shift_invariant: true,
        }
    }

    fn describe(&self) -> String {
        format!("example31(b={}, beta={}, m={})", self.b, self.beta, self.m)
    }
}
