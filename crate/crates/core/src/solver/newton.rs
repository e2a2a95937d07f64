//! Damped Newton on `∇I = 0`, optionally deflated away from known roots.
//!
//! Deflation multiplies the gradient by `Π_i (‖u − r_i‖^{−p} + α)`, so known
//! roots stop attracting the iteration. The deflated Newton step is the
//! plain step scaled by `τ = 1 / (1 − ∇log(μ)·δ)`, which avoids forming the
//! deflated Jacobian.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use super::ascent::{ascend_all, lex_cmp, AscentStatus};
use super::linking::linking_direction;
use super::orbits::dedupe_orbits;
use super::{CriticalPointRecord, SolverConfig, DIVERGENCE_NORM};
use crate::error::Result;
use crate::functional::FunctionalContext;
use crate::rng::{stream, unit_vec, Purpose};
use crate::sequence::PeriodicSequence;

const DEFLATION_POWER: f64 = 2.0;
const DEFLATION_SHIFT: f64 = 1.0;
/// Pivot ratio below which the Newton system counts as near-singular.
const PIVOT_RATIO: f64 = 1e-12;

fn seq(v: &DVector<f64>) -> PeriodicSequence {
    PeriodicSequence::new(v.as_slice().to_vec()).expect("length preserved")
}

fn well_conditioned(m: &DMatrix<f64>) -> Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let lu = m.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    (max > 0.0 && min.is_finite() && min >= PIVOT_RATIO * max).then_some(lu)
}

/// Solve `(H + μI) p = −g`, doubling `μ` from `1e−8` while the system is
/// near-singular.
fn damped_step(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let n = hess.nrows();
    let mut mu = 0.0;
    for _ in 0..200 {
        let shifted = hess + DMatrix::identity(n, n) * mu;
        if let Some(lu) = well_conditioned(&shifted) {
            let p = lu.solve(&(-grad))?;
            if p.iter().all(|x| x.is_finite()) {
                return Some(p);
            }
        }
        mu = if mu == 0.0 { 1e-8 } else { mu * 2.0 };
    }
    None
}

/// `log Π_i (‖u − r_i‖^{−p} + α)` and its gradient.
fn deflation(u: &DVector<f64>, roots: &[DVector<f64>]) -> (f64, DVector<f64>) {
    let mut log_m = 0.0;
    let mut grad = DVector::zeros(u.len());
    for r in roots {
        let diff = u - r;
        let d2 = diff.norm_squared().max(1e-300);
        let d_neg_p = d2.powf(-DEFLATION_POWER / 2.0);
        let factor = d_neg_p + DEFLATION_SHIFT;
        log_m += factor.ln();
        grad.axpy(-DEFLATION_POWER * d_neg_p / (d2 * factor), &diff, 1.0);
    }
    (log_m, grad)
}

/// Damped Newton from `start`. Returns a point with `‖∇I‖ ≤ grad_tol`, or
/// `None` on divergence or stagnation. Roots in `deflate` are repelled.
pub fn newton_solve(
    ctx: &FunctionalContext,
    cfg: &SolverConfig,
    start: &PeriodicSequence,
    deflate: &[PeriodicSequence],
) -> Option<PeriodicSequence> {
    let roots: Vec<DVector<f64>> = deflate
        .iter()
        .map(|r| DVector::from_column_slice(r.as_slice()))
        .collect();
    // iterate past the acceptance tolerance while progress is cheap
    let target = 1e-2 * cfg.grad_tol;
    let mut u = DVector::from_column_slice(start.as_slice());
    let mut g = DVector::from_column_slice(ctx.i_gradient(start).as_slice());
    let merit = |u: &DVector<f64>, g: &DVector<f64>| {
        let (log_m, _) = deflation(u, &roots);
        g.norm().ln() + log_m
    };

    for _ in 0..cfg.max_iters {
        if g.norm() <= target {
            break;
        }
        if u.norm() > DIVERGENCE_NORM {
            return None;
        }
        let hess = ctx.i_hessian(&seq(&u)).matrix;
        let Some(mut p) = damped_step(&hess, &g) else {
            break;
        };
        if !roots.is_empty() {
            let (_, grad_log_m) = deflation(&u, &roots);
            let denom = 1.0 - grad_log_m.dot(&p);
            if denom.abs() > 1e-12 {
                p /= denom;
            }
        }

        let current = merit(&u, &g);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-10 {
            let trial = &u + &p * t;
            let tg = DVector::from_column_slice(ctx.i_gradient(&seq(&trial)).as_slice());
            let tm = merit(&trial, &tg);
            if !tm.is_nan() && tm < current + (1.0 - 1e-4 * t).ln() {
                accepted = Some((trial, tg));
                break;
            }
            t *= cfg.shrink;
        }
        match accepted {
            Some((nu, ng)) => {
                u = nu;
                g = ng;
            }
            None => break,
        }
    }

    (g.norm() <= cfg.grad_tol && u.norm() <= DIVERGENCE_NORM).then(|| seq(&u))
}

/// Newton seeds besides the ascent endpoints: `0`, `±ρe` for random unit
/// `e ∈ Y`, and random points of `Z`.
fn newton_seeds(ctx: &FunctionalContext, cfg: &SolverConfig) -> Vec<PeriodicSequence> {
    let sd = ctx.spectral();
    let rho = ctx.rho();
    let mut seeds = vec![PeriodicSequence::zeros(ctx.m()).expect("valid period")];
    let e0 = linking_direction(ctx, cfg.seed);
    seeds.push(e0.scaled(rho));
    seeds.push(e0.scaled(-rho));
    for k in 0..cfg.y_seeds {
        let mut rng = stream(cfg.seed, Purpose::NewtonSeed, k as u64);
        let e = sd.combine_y(&unit_vec(&mut rng, sd.basis_y.len()));
        seeds.push(e.scaled(rho));
        seeds.push(e.scaled(-rho));
    }
    let radius = cfg.init_radius_for(ctx);
    for k in 0..cfg.z_seeds {
        let mut rng = stream(cfg.seed, Purpose::NewtonSeed, (1 << 32) + k as u64);
        let dir = unit_vec(&mut rng, 2);
        let r = radius * rng.random::<f64>().sqrt();
        seeds.push(sd.combine_z(&[r * dir[0], r * dir[1]]));
    }
    seeds
}

fn merge_into(found: &mut Vec<PeriodicSequence>, candidates: Vec<PeriodicSequence>, tol: f64) {
    for c in candidates {
        if found.iter().all(|f| f.distance(&c) >= tol) {
            found.push(c);
        }
    }
}

/// Multistart search for critical points of `I`.
///
/// Seeds: every ascent endpoint, `0`, `±ρe` for random `e ∈ Y`, and random
/// points of `Z`. After the undeflated pass, `deflation_rounds` passes rerun
/// the fixed seeds with every known root deflated. Roots closer than
/// `merge_tol` are merged, keeping the earliest. Each emitted record has
/// `‖∇I‖ ≤ grad_tol` on recomputation; the list is sorted by descending `I`.
pub fn find_critical_points(
    ctx: &FunctionalContext,
    cfg: &SolverConfig,
) -> Result<Vec<CriticalPointRecord>> {
    cfg.validate()?;
    let fixed = newton_seeds(ctx, cfg);
    let mut seeds = fixed.clone();
    seeds.extend(
        ascend_all(ctx, cfg)
            .into_iter()
            .filter(|r| r.status != AscentStatus::Diverged)
            .map(|r| r.point),
    );

    let solved: Vec<PeriodicSequence> = seeds
        .par_iter()
        .filter_map(|s| newton_solve(ctx, cfg, s, &[]))
        .collect();
    let mut found = Vec::new();
    merge_into(&mut found, solved, cfg.merge_tol);

    for _ in 0..cfg.deflation_rounds {
        let known = found.clone();
        let fresh: Vec<PeriodicSequence> = fixed
            .par_iter()
            .filter_map(|s| newton_solve(ctx, cfg, s, &known))
            .collect();
        let before = found.len();
        merge_into(&mut found, fresh, cfg.merge_tol);
        if found.len() == before {
            break;
        }
    }

    let mut records: Vec<CriticalPointRecord> = found
        .into_par_iter()
        .map(|p| CriticalPointRecord::evaluate(ctx, p))
        .collect();
    records.retain(|r| r.grad_norm <= cfg.grad_tol);
    records.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then_with(|| lex_cmp(a.point.as_slice(), b.point.as_slice()))
    });
    Ok(dedupe_orbits(
        records,
        ctx.potential().symmetry(),
        cfg.merge_tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{maximize_i, Classification};

    fn ctx6() -> FunctionalContext {
        FunctionalContext::example31(6, 3, 1.0, 3.0, 0.01, 0.25).unwrap()
    }

    #[test]
    fn damping_handles_singular_systems() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let g = DVector::from_vec(vec![1.0, 1.0]);
        let p = damped_step(&h, &g).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
        assert!((p[0] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn deflation_gradient_matches_finite_differences() {
        let roots = vec![
            DVector::from_vec(vec![1.0, 0.0, 2.0]),
            DVector::from_vec(vec![-1.0, 1.0, 0.5]),
        ];
        let u = DVector::from_vec(vec![0.3, -0.2, 0.9]);
        let (_, g) = deflation(&u, &roots);
        for k in 0..3 {
            let mut hi = u.clone();
            let mut lo = u.clone();
            hi[k] += 1e-6;
            lo[k] -= 1e-6;
            let fd = (deflation(&hi, &roots).0 - deflation(&lo, &roots).0) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn origin_is_always_found() {
        let ctx = ctx6();
        let cfg = SolverConfig {
            restarts: 4,
            ..SolverConfig::default()
        };
        let recs = find_critical_points(&ctx, &cfg).unwrap();
        let trivial: Vec<_> = recs
            .iter()
            .filter(|r| r.classification == Classification::Trivial)
            .collect();
        assert_eq!(trivial.len(), 1);
        assert_eq!(trivial[0].value, 0.0);
    }

    #[test]
    fn deflation_finds_a_new_root() {
        let ctx = ctx6();
        let cfg = SolverConfig::default();
        let first = maximize_i(&ctx, &SolverConfig { restarts: 8, ..cfg })
            .unwrap()
            .point;
        let start = first.scaled(0.9);
        if let Some(second) = newton_solve(&ctx, &cfg, &start, std::slice::from_ref(&first)) {
            assert!(second.distance(&first) > 1e-4);
            assert!(ctx.i_gradient(&second).norm() <= cfg.grad_tol);
        }
    }
}
