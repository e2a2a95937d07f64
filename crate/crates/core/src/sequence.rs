//! Elements of the space of `M`-periodic real sequences.
//!
//! A [`PeriodicSequence`] stores one period `u_1, ..., u_M`; every index
//! `n ∈ ℤ` is reduced modulo `M`. All public indexing is 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Smallest admissible period.
pub const MIN_PERIOD: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSequence {
    values: Vec<f64>,
}

impl PeriodicSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_PERIOD {
            return Err(Error::PeriodTooSmall(values.len()));
        }
        Ok(Self { values })
    }

    pub fn zeros(period: usize) -> Result<Self> {
        Self::new(vec![0.0; period])
    }

    pub fn constant(period: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; period])
    }

    /// Unit vector `e_k` (1-based `k`).
    pub fn unit(period: usize, k: usize) -> Result<Self> {
        let mut seq = Self::zeros(period)?;
        if k == 0 || k > period {
            return Err(invalid("k", format!("must lie in [1, {period}]")));
        }
        seq.values[k - 1] = 1.0;
        Ok(seq)
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    /// `u_n` for any integer `n`, with `u_{n+M} = u_n`.
    pub fn at(&self, n: i64) -> f64 {
        self.values[self.slot(n)]
    }

    /// Storage slot (0-based) of the 1-based index `n`.
    pub fn slot(&self, n: i64) -> usize {
        let m = self.values.len() as i64;
        (n - 1).rem_euclid(m) as usize
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Largest deviation `max_s |u_s − mean(u)|`.
    pub fn spread(&self) -> f64 {
        let mean = self.mean();
        self.values
            .iter()
            .map(|v| (v - mean).abs())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `(shift_k u)_n = u_{n+k}`.
    pub fn shifted(&self, k: i64) -> Self {
        let m = self.period() as i64;
        Self {
            values: (1..=m).map(|n| self.at(n + k)).collect(),
        }
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= MIN_PERIOD);
        Self { values }
    }
}

/// Sharp equivalence constants between `‖·‖` and `‖·‖_β` on `ℝ^M`, `β ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormPair {
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
}

impl NormPair {
    /// `C₁ = M^{1/β − 1/2}` (attained by constants), `C₂ = 1` (attained by spikes).
    pub fn sharp(period: usize, beta: f64) -> Result<Self> {
        if !(beta >= 2.0) {
            return Err(invalid("beta", "sharp constants need beta >= 2"));
        }
        Ok(Self {
            c1: (period as f64).powf(1.0 / beta - 0.5),
            c2: 1.0,
            beta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub norm2: f64,
    pub norm_beta: f64,
    /// Equivalence constants; only defined for `β ≥ 2`.
    pub pair: Option<NormPair>,
}

/// `(Δu)_n = u_{n+1} − u_n`.
pub fn forward_difference(u: &PeriodicSequence) -> PeriodicSequence {
    let m = u.period() as i64;
    PeriodicSequence::from_vec_unchecked((1..=m).map(|n| u.at(n + 1) - u.at(n)).collect())
}

/// Entry `n` is `Δ²u_{n−1} = u_{n+1} − 2u_n + u_{n−1}`.
pub fn second_difference(u: &PeriodicSequence) -> PeriodicSequence {
    let m = u.period() as i64;
    PeriodicSequence::from_vec_unchecked(
        (1..=m)
            .map(|n| u.at(n + 1) - 2.0 * u.at(n) + u.at(n - 1))
            .collect(),
    )
}

pub fn beta_norm(u: &PeriodicSequence, beta: f64) -> f64 {
    if beta.is_infinite() {
        return u.as_slice().iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    u.as_slice()
        .iter()
        .map(|v| v.abs().powf(beta))
        .sum::<f64>()
        .powf(1.0 / beta)
}

pub fn norms(u: &PeriodicSequence, beta: f64) -> Result<Norms> {
    if !(beta >= 1.0) {
        return Err(invalid("beta", "must be ≥ 1"));
    }
    let pair = if beta >= 2.0 && beta.is_finite() {
        Some(NormPair::sharp(u.period(), beta)?)
    } else {
        None
    };
    Ok(Norms {
        norm2: u.norm(),
        norm_beta: beta_norm(u, beta),
        pair,
    })
}
