//! Monotone ascent on `I`: gradient steps with backtracking, upgraded to
//! Newton steps wherever the Hessian is negative definite.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use super::linking::linking_direction;
use super::newton::newton_solve;
use super::{CriticalPointRecord, SolverConfig, DIVERGENCE_NORM};
use crate::error::{Error, Result};
use crate::functional::FunctionalContext;
use crate::rng::{stream, unit_vec, Purpose};
use crate::sequence::PeriodicSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AscentStatus {
    Converged,
    /// Line search could not make progress above the gradient tolerance.
    Stalled,
    Diverged,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct AscentOutcome {
    pub start: PeriodicSequence,
    pub point: PeriodicSequence,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: AscentStatus,
    /// `I` at every accepted iterate, starting with the initial point.
    pub trace: Vec<f64>,
}

fn to_seq(v: &DVector<f64>) -> PeriodicSequence {
    PeriodicSequence::new(v.as_slice().to_vec()).expect("length preserved")
}

/// Newton ascent direction `−H⁻¹g` when `−H` is positive definite.
fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let neg = -hess;
    neg.cholesky().map(|c| c.solve(grad))
}

/// Run one ascent from `start`.
pub fn ascend(
    ctx: &FunctionalContext,
    cfg: &SolverConfig,
    start: PeriodicSequence,
) -> AscentOutcome {
    let mut u = DVector::from_column_slice(start.as_slice());
    let mut value = ctx.i_value(&start);
    let mut grad = DVector::from_column_slice(ctx.i_gradient(&start).as_slice());
    let mut trace = vec![value];
    let mut grad_step = 1.0_f64;
    let mut status = AscentStatus::IterationLimit;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if grad.norm() <= cfg.grad_tol {
            status = AscentStatus::Converged;
            break;
        }
        if u.norm() > DIVERGENCE_NORM || !value.is_finite() {
            status = AscentStatus::Diverged;
            break;
        }
        iterations += 1;

        let hess = ctx.i_hessian(&to_seq(&u)).matrix;
        let newton = newton_direction(&hess, &grad);
        let mut candidates = Vec::with_capacity(2);
        if let Some(p) = newton {
            candidates.push((p, 1.0, true));
        }
        candidates.push((grad.clone(), grad_step, false));

        let mut accepted = None;
        'dirs: for (dir, t0, is_newton) in candidates {
            let slope = grad.dot(&dir);
            if slope <= 0.0 {
                continue;
            }
            let mut t = t0;
            while t > 1e-20 {
                let trial = &u + &dir * t;
                let trial_seq = to_seq(&trial);
                let trial_val = ctx.i_value(&trial_seq);
                let armijo = trial_val >= value + cfg.sufficient_increase * t * slope;
                // below the rounding floor of I, accept any non-decreasing
                // step that shrinks the gradient
                let floor = trial_val >= value && {
                    let g = ctx.i_gradient(&trial_seq);
                    g.norm() < grad.norm()
                };
                if trial_val.is_finite() && (armijo || floor) {
                    accepted = Some((trial, trial_val, t, is_newton));
                    break 'dirs;
                }
                t *= cfg.shrink;
            }
        }

        let Some((next, next_val, t, is_newton)) = accepted else {
            status = AscentStatus::Stalled;
            break;
        };
        assert!(
            next_val >= value,
            "ascent decreased I: {value} -> {next_val}"
        );
        if !is_newton {
            grad_step = (t * 2.0).min(1e6);
        }
        u = next;
        value = next_val;
        grad = DVector::from_column_slice(ctx.i_gradient(&to_seq(&u)).as_slice());
        trace.push(value);
    }
    if status == AscentStatus::IterationLimit && grad.norm() <= cfg.grad_tol {
        status = AscentStatus::Converged;
    }

    AscentOutcome {
        start,
        point: to_seq(&u),
        value,
        grad_norm: grad.norm(),
        iterations,
        status,
        trace,
    }
}

/// Starting points: `0`, `±ρe`, then `restarts` uniform draws from the ball
/// of radius `init_radius`.
pub(crate) fn ascent_starts(ctx: &FunctionalContext, cfg: &SolverConfig) -> Vec<PeriodicSequence> {
    let m = ctx.m();
    let rho = ctx.rho();
    let e = linking_direction(ctx, cfg.seed);
    let radius = cfg.init_radius_for(ctx);
    let mut starts = vec![
        PeriodicSequence::zeros(m).expect("valid period"),
        e.scaled(rho),
        e.scaled(-rho),
    ];
    starts.extend((0..cfg.restarts).map(|k| {
        let mut rng = stream(cfg.seed, Purpose::AscentStart, k as u64);
        let d = unit_vec(&mut rng, m);
        let r = radius * rng.random::<f64>().powf(1.0 / m as f64);
        PeriodicSequence::new(d.into_iter().map(|x| x * r).collect()).expect("valid period")
    }));
    starts
}

/// Run every ascent, in start order. Stalled runs close to a critical point
/// are finished with a Newton polish.
pub(crate) fn ascend_all(ctx: &FunctionalContext, cfg: &SolverConfig) -> Vec<AscentOutcome> {
    ascent_starts(ctx, cfg)
        .into_par_iter()
        .map(|s| {
            let mut out = ascend(ctx, cfg, s);
            if out.status == AscentStatus::Stalled || out.status == AscentStatus::IterationLimit {
                if let Some(p) = newton_solve(ctx, cfg, &out.point, &[]) {
                    let v = ctx.i_value(&p);
                    if p.distance(&out.point) < 1e-3 && v >= out.value - 1e-9 * (1.0 + v.abs()) {
                        out.grad_norm = ctx.i_gradient(&p).norm();
                        out.value = v;
                        out.point = p;
                        out.status = AscentStatus::Converged;
                    }
                }
            }
            out
        })
        .collect()
}

/// Largest critical value found by multistart ascent: the empirical `sup I`.
pub fn maximize_i(ctx: &FunctionalContext, cfg: &SolverConfig) -> Result<CriticalPointRecord> {
    cfg.validate()?;
    let runs = ascend_all(ctx, cfg);
    let best = runs
        .iter()
        .filter(|r| r.status == AscentStatus::Converged && r.grad_norm <= cfg.grad_tol)
        .max_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then_with(|| lex_cmp(b.point.as_slice(), a.point.as_slice()))
        });
    let escaped = runs
        .iter()
        .filter(|r| r.status == AscentStatus::Diverged)
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max);
    if escaped > best.map_or(f64::NEG_INFINITY, |b| b.value) {
        return Err(Error::UnboundedAbove { value: escaped });
    }
    match best {
        Some(r) => Ok(CriticalPointRecord::evaluate(ctx, r.point.clone())),
        None => Err(Error::NoConvergence {
            max_iters: cfg.max_iters,
            best_grad_norm: runs
                .iter()
                .map(|r| r.grad_norm)
                .filter(|g| g.is_finite())
                .fold(f64::INFINITY, f64::min),
        }),
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;
    use crate::solver::Classification;
    use crate::FunctionalParams;

    fn ctx6() -> FunctionalContext {
        FunctionalContext::example31(6, 3, 1.0, 3.0, 0.01, 0.25).unwrap()
    }

    #[test]
    fn ascent_is_monotone() {
        let ctx = ctx6();
        let cfg = SolverConfig::default();
        for s in ascent_starts(&ctx, &cfg).into_iter().take(12) {
            let out = ascend(&ctx, &cfg, s);
            assert!(out.trace.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn maximizer_is_positive_and_nonconstant() {
        let ctx = ctx6();
        let rec = maximize_i(&ctx, &SolverConfig::default()).unwrap();
        assert!(rec.value > 0.0);
        assert_eq!(rec.classification, Classification::Nonconstant);
        assert!(rec.grad_norm <= 1e-8);
        assert_eq!(rec.morse.index + rec.morse.near_null, ctx.m());
    }

    #[test]
    fn zero_potential_escapes_to_infinity() {
        let params = FunctionalParams {
            m: 6,
            n0: 3,
            b: 0.01,
            beta: 3.0,
            d1: 0.01,
            d2: 1e-3,
            delta: 0.25,
        };
        let ctx = FunctionalContext::new(params, PotentialSpec::zero(6).unwrap()).unwrap();
        let cfg = SolverConfig {
            restarts: 4,
            ..SolverConfig::default()
        };
        // I is positive and unbounded on the window {n0−1, n0, n0+1}
        let e2 = PeriodicSequence::unit(6, 2).unwrap();
        assert!(ctx.i_value(&e2.scaled(1e3)) > 1e6);
        match maximize_i(&ctx, &cfg) {
            Err(Error::UnboundedAbove { value }) => assert!(value > 1e6),
            Ok(r) => panic!("unexpected maximizer with value {}", r.value),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
