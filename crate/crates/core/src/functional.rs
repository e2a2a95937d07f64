//! The functional
//!
//! ```text
//! I(u) = a Σ_s (Δu_s)² + (2a + 1) Δu_{n0−1} Δu_{n0} + F(n0, u_{n0−1}, u_{n0}, u_{n0+1}) − G(u),
//! G(u) = b λ_min ( Σ_{s=1}^{n0−2} |u_s|^β + Σ_{s=n0+2}^{M} |u_s|^β ),
//! ```
//!
//! with `a = (b + 1)/γ_min`, together with its gradient, a finite-difference
//! Hessian, the a-priori upper bound, a coercivity probe, and residuals of
//! the lattice equation `Δ²u_{n−1} + ∂_{u_n} F(n, u_{n−1}, u_n, u_{n+1}) = 0`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::potential::hypotheses::{run as run_hypothesis, wide_points};
use crate::potential::{
    abs_pow, abs_pow_deriv, HypothesisConstants, HypothesisId, PotentialSpec, Sampling,
};
use crate::rng::{stream, unit_vec, Purpose};
use crate::sequence::{forward_difference, second_difference, PeriodicSequence};
use crate::spectral::{check_distinguished_index, decompose, SpectralData};

/// Step of the central differences used for Hessians.
pub const HESSIAN_STEP: f64 = 1e-5;
/// Eigenvalues in `[−NULL_BAND, NULL_BAND]` count as zero.
pub const NULL_BAND: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalParams {
    pub m: usize,
    pub n0: usize,
    pub b: f64,
    pub beta: f64,
    pub d1: f64,
    pub d2: f64,
    pub delta: f64,
}

impl FunctionalParams {
    pub fn validate(&self) -> Result<()> {
        if self.m < crate::sequence::MIN_PERIOD {
            return Err(invalid("m", "must be ≥ 5"));
        }
        check_distinguished_index(self.m, self.n0)
            .map_err(|_| invalid("n0", format!("must lie in [3, {}]", self.m - 2)))?;
        let positive = [("b", self.b), ("d1", self.d1), ("d2", self.d2)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be > 0"));
            }
        }
        if !(self.beta > 2.0 && self.beta.is_finite()) {
            return Err(invalid("beta", "must be > 2"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid("delta", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn hypothesis_constants(&self) -> HypothesisConstants {
        HypothesisConstants {
            b: self.b,
            delta: self.delta,
            d1: self.d1,
            d2: self.d2,
            beta: self.beta,
        }
    }
}

/// Everything needed to evaluate `I`; immutable once built.
#[derive(Debug, Clone)]
pub struct FunctionalContext {
    params: FunctionalParams,
    potential: PotentialSpec,
    spectral: SpectralData,
    coeff_a: f64,
    cross_coeff: f64,
    c1: f64,
}

impl FunctionalContext {
    pub fn new(params: FunctionalParams, potential: PotentialSpec) -> Result<Self> {
        params.validate()?;
        if potential.period() != params.m {
            return Err(Error::PeriodMismatch {
                potential: potential.period(),
                functional: params.m,
            });
        }
        let spectral = decompose(params.m, params.n0)?;
        let coeff_a = (params.b + 1.0) / spectral.gamma_min;
        Ok(Self {
            params,
            potential,
            coeff_a,
            cross_coeff: 2.0 * coeff_a + 1.0,
            c1: (params.m as f64).powf(1.0 / params.beta - 0.5),
            spectral,
        })
    }

    /// The shipped negative-power potential with `d1 = b·λ_min`.
    pub fn example31(m: usize, n0: usize, b: f64, beta: f64, d2: f64, delta: f64) -> Result<Self> {
        let potential = PotentialSpec::example31(b, beta, m)?;
        let params = FunctionalParams {
            m,
            n0,
            b,
            beta,
            d1: b * crate::spectral::lambda_min(m),
            d2,
            delta,
        };
        Self::new(params, potential)
    }

    pub fn params(&self) -> &FunctionalParams {
        &self.params
    }
    pub fn m(&self) -> usize {
        self.params.m
    }
    pub fn n0(&self) -> usize {
        self.params.n0
    }
    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }
    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }
    pub fn coeff_a(&self) -> f64 {
        self.coeff_a
    }
    pub fn cross_coeff(&self) -> f64 {
        self.cross_coeff
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Radius of the small sphere in `Y`: `min(√δ, δ)`.
    pub fn rho(&self) -> f64 {
        self.params.delta.sqrt().min(self.params.delta)
    }

    /// `½ λ_min ρ²` for the given radius.
    pub fn sigma_for(&self, rho: f64) -> f64 {
        0.5 * self.spectral.lambda_min * rho * rho
    }

    fn g_weight(&self) -> f64 {
        self.params.b * self.spectral.lambda_min
    }

    /// Whether the 1-based index `s` carries a `G` term.
    fn in_tail(&self, s: usize) -> bool {
        let n0 = self.params.n0;
        s + 2 <= n0 || s >= n0 + 2
    }

    fn check_len(&self, u: &PeriodicSequence) {
        assert_eq!(
            u.period(),
            self.params.m,
            "sequence period differs from context"
        );
    }

    pub fn g_value(&self, u: &PeriodicSequence) -> f64 {
        self.check_len(u);
        let beta = self.params.beta;
        let tail: f64 = u
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.in_tail(i + 1))
            .map(|(_, &v)| abs_pow(v, beta))
            .sum();
        self.g_weight() * tail
    }

    pub fn i_value(&self, u: &PeriodicSequence) -> f64 {
        self.check_len(u);
        let n0 = self.params.n0 as i64;
        let d = forward_difference(u);
        let energy: f64 = d.as_slice().iter().map(|v| v * v).sum();
        let cross = d.at(n0 - 1) * d.at(n0);
        let f = self
            .potential
            .eval(n0, u.at(n0 - 1), u.at(n0), u.at(n0 + 1));
        self.coeff_a * energy + self.cross_coeff * cross + f - self.g_value(u)
    }

    pub fn i_gradient(&self, u: &PeriodicSequence) -> PeriodicSequence {
        self.check_len(u);
        let m = self.params.m;
        let n0 = self.params.n0 as i64;
        let a = self.coeff_a;
        let c = self.cross_coeff;
        let beta = self.params.beta;
        let w = self.g_weight();
        let dd = second_difference(u);

        let mut g: Vec<f64> = dd.as_slice().iter().map(|v| -2.0 * a * v).collect();

        let d_prev = u.at(n0) - u.at(n0 - 1);
        let d_here = u.at(n0 + 1) - u.at(n0);
        g[u.slot(n0 - 1)] += -c * d_here;
        g[u.slot(n0)] += c * (d_here - d_prev);
        g[u.slot(n0 + 1)] += c * d_prev;

        let pf = self
            .potential
            .grad(n0, u.at(n0 - 1), u.at(n0), u.at(n0 + 1));
        g[u.slot(n0 - 1)] += pf[0];
        g[u.slot(n0)] += pf[1];
        g[u.slot(n0 + 1)] += pf[2];

        for s in 1..=m {
            if self.in_tail(s) {
                g[s - 1] -= w * abs_pow_deriv(u.as_slice()[s - 1], beta);
            }
        }
        PeriodicSequence::from_vec_unchecked(g)
    }

    /// Central-difference Hessian of [`Self::i_gradient`], symmetrized.
    pub fn i_hessian(&self, u: &PeriodicSequence) -> HessianReport {
        let h = HESSIAN_STEP;
        let coarse = self.fd_hessian(u, h);
        let beta = self.params.beta;
        let smooth_powers = beta.fract() == 0.0 && (beta as i64) % 2 == 0;
        let flagged: Vec<usize> = if smooth_powers {
            Vec::new()
        } else {
            u.as_slice()
                .iter()
                .enumerate()
                .filter(|(_, v)| v.abs() < h)
                .map(|(i, _)| i + 1)
                .collect()
        };
        // Near |t| = 0 the stencil error of |t|^β terms is O(h^{β−2});
        // estimate it by halving the step.
        let error_estimate = if flagged.is_empty() {
            0.0
        } else {
            let fine = self.fd_hessian(u, h / 2.0);
            let diff = (&coarse - &fine).amax();
            diff / (1.0 - 2f64.powf(2.0 - beta))
        };
        HessianReport {
            matrix: coarse,
            flagged_coords: flagged,
            error_estimate,
        }
    }

    fn fd_hessian(&self, u: &PeriodicSequence, h: f64) -> DMatrix<f64> {
        let m = self.params.m;
        let mut hess = DMatrix::zeros(m, m);
        let mut work = u.as_slice().to_vec();
        for j in 0..m {
            let orig = work[j];
            work[j] = orig + h;
            let gp = self.i_gradient(&PeriodicSequence::from_vec_unchecked(work.clone()));
            work[j] = orig - h;
            let gm = self.i_gradient(&PeriodicSequence::from_vec_unchecked(work.clone()));
            work[j] = orig;
            for i in 0..m {
                hess[(i, j)] = (gp.as_slice()[i] - gm.as_slice()[i]) / (2.0 * h);
            }
        }
        (&hess + hess.transpose()) * 0.5
    }

    /// `[2(b+1)/γ_min + 1 + d2] λ_max ‖u‖² − min{d1, bλ_min} C1^β ‖u‖^β`.
    pub fn lemma21_bound(&self, u: &PeriodicSequence) -> f64 {
        self.bound_at_norm(u.norm())
    }

    pub fn bound_at_norm(&self, r: f64) -> f64 {
        let p = &self.params;
        let sd = &self.spectral;
        let lead = 2.0 * (p.b + 1.0) / sd.gamma_min + 1.0 + p.d2;
        let decay = p.d1.min(p.b * sd.lambda_min) * self.c1.powf(p.beta);
        lead * sd.lambda_max * r * r - decay * r.powf(p.beta)
    }

    /// Whether the potential satisfies `F ≤ −d1 Σ|t|^β` on a sample, the
    /// shape under which [`Self::lemma21_bound`] is a guaranteed upper bound.
    pub fn bound_applies(&self) -> bool {
        let sampling = Sampling {
            random: 500,
            ..Sampling::default()
        };
        let pts = wide_points(&sampling, 0xB0);
        run_hypothesis(
            HypothesisId::D4,
            &self.potential,
            &self.params.hypothesis_constants(),
            &pts,
        )
        .passed()
    }

    pub fn residual(&self, u: &PeriodicSequence, convention: ResidualConvention) -> ResidualReport {
        system_residual(u, &self.potential, self.params.n0, convention)
    }
}

#[derive(Debug, Clone)]
pub struct HessianReport {
    pub matrix: DMatrix<f64>,
    /// 1-based coordinates sitting within one stencil step of a `|t|^β` kink.
    pub flagged_coords: Vec<usize>,
    /// Estimated entrywise error of `matrix` at flagged coordinates.
    pub error_estimate: f64,
}

impl HessianReport {
    pub fn accurate(&self) -> bool {
        self.flagged_coords.is_empty()
    }

    /// Half-width of the band of eigenvalues treated as zero.
    pub fn null_band(&self) -> f64 {
        NULL_BAND.max(2.0 * self.error_estimate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualConvention {
    /// `Δ²u_{n−1} + ∂_y F(n, u_{n−1}, u_n, u_{n+1})`.
    Pointwise,
    /// Adds the neighbour partials `∂_z F(n−1, ·)` and `∂_x F(n+1, ·)`.
    SummedAction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub per_index: Vec<f64>,
    pub max_abs: f64,
    pub at_n0: f64,
    pub convention: ResidualConvention,
}

pub fn system_residual(
    u: &PeriodicSequence,
    f: &PotentialSpec,
    n0: usize,
    convention: ResidualConvention,
) -> ResidualReport {
    let m = u.period() as i64;
    let triple = |n: i64| (u.at(n - 1), u.at(n), u.at(n + 1));
    let per_index: Vec<f64> = (1..=m)
        .map(|n| {
            let (x, y, z) = triple(n);
            let mut r = z - 2.0 * y + x + f.grad(n, x, y, z)[1];
            if convention == ResidualConvention::SummedAction {
                let (px, py, pz) = triple(n - 1);
                r += f.grad(n - 1, px, py, pz)[2];
                let (nx, ny, nz) = triple(n + 1);
                r += f.grad(n + 1, nx, ny, nz)[0];
            }
            r
        })
        .collect();
    ResidualReport {
        max_abs: per_index.iter().map(|v| v.abs()).fold(0.0, f64::max),
        at_n0: per_index[n0 - 1],
        per_index,
        convention,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSample {
    pub direction: usize,
    pub radius: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub samples: Vec<ProbeSample>,
    /// Largest sampled value: an empirical stand-in for `sup I`.
    pub empirical_sup: f64,
    /// Every direction ends below where it started.
    pub decay_ok: bool,
    /// Whether the potential has the shape under which the bound must hold.
    pub bound_asserted: bool,
    pub bound_violations: Vec<ProbeSample>,
}

/// Evaluate `I(r·d)` along random unit directions `d`.
pub fn coercivity_probe(
    ctx: &FunctionalContext,
    directions: usize,
    radii: &[f64],
    seed: u64,
) -> Result<CoercivityReport> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("radii", "must be nonempty and strictly increasing"));
    }
    let m = ctx.m();
    let samples: Vec<ProbeSample> = (0..directions)
        .into_par_iter()
        .flat_map_iter(|k| {
            let d = unit_vec(&mut stream(seed, Purpose::Probe, k as u64), m);
            radii
                .iter()
                .map(|&r| {
                    let u = PeriodicSequence::from_vec_unchecked(d.iter().map(|x| x * r).collect());
                    ProbeSample {
                        direction: k,
                        radius: r,
                        value: ctx.i_value(&u),
                        bound: ctx.lemma21_bound(&u),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let per_dir = radii.len();
    let decay_ok = samples
        .chunks(per_dir)
        .all(|c| c[per_dir - 1].value < c[0].value);
    let bound_violations = samples
        .iter()
        .filter(|s| s.value > s.bound + 1e-9 * (1.0 + s.value.abs()))
        .copied()
        .collect();
    Ok(CoercivityReport {
        empirical_sup: samples
            .iter()
            .map(|s| s.value)
            .fold(f64::NEG_INFINITY, f64::max),
        decay_ok,
        bound_asserted: ctx.bound_applies(),
        bound_violations,
        samples,
    })
}
