//! Sampled check of the linking geometry with `X₂ = Y`, `X₁ = Z`:
//!
//! * (A1) `I ≥ σ = ½ λ_min ρ²` on the sphere `∂B_ρ ∩ Y`;
//! * (A2) `I ≤ 0` on the boundary of `Q = (B̄_R ∩ Z) ⊕ {re : 0 < r < R}`,
//!   for a unit `e ∈ Y` and for `−e`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::SolverConfig;
use crate::error::{invalid, Result};
use crate::functional::FunctionalContext;
use crate::rng::{stream, unit_vec, Purpose};
use crate::sequence::PeriodicSequence;

/// Sampled values within this of the threshold still pass.
pub const LINKING_SLACK: f64 = 1e-9;
/// Doublings of `R` tried before giving up (`R ≤ 2^16 ρ`).
const MAX_DOUBLINGS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkingSide {
    /// `+1` for `e`, `−1` for `−e`.
    pub sign: f64,
    /// Radius at which the boundary check passed, or the last one tried.
    pub r_outer: f64,
    pub a2_max_on_boundary: f64,
    /// `I` on the sampled faces of `∂Q` at `r_outer`: disk in `Z`, cap, side.
    pub boundary_values: Vec<f64>,
    pub a2_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkingReport {
    pub rho: f64,
    pub sigma: f64,
    pub a1_min_on_sphere: f64,
    pub sphere_values: Vec<f64>,
    pub e_direction: Vec<f64>,
    pub sides: Vec<LinkingSide>,
    /// Largest `r_outer` over both sides.
    pub r_outer: f64,
    pub a2_max_on_boundary: f64,
    pub a1_ok: bool,
    pub a2_ok: bool,
}

impl LinkingReport {
    /// Recompute both verdicts from the stored samples.
    pub fn recheck(&self) -> (bool, bool) {
        let a1 = self
            .sphere_values
            .iter()
            .all(|&v| v >= self.sigma - LINKING_SLACK);
        let a2 = self
            .sides
            .iter()
            .all(|s| s.boundary_values.iter().all(|&v| v <= LINKING_SLACK));
        (a1, a2)
    }
}

/// The unit vector `e ∈ Y` shared by the linking check and the solver seeds.
pub fn linking_direction(ctx: &FunctionalContext, seed: u64) -> PeriodicSequence {
    let sd = ctx.spectral();
    let mut rng = stream(seed, Purpose::Linking, 0);
    sd.combine_y(&unit_vec(&mut rng, sd.basis_y.len()))
}

fn sphere_in_y(ctx: &FunctionalContext, rho: f64, samples: usize, seed: u64) -> Vec<f64> {
    let sd = ctx.spectral();
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, Purpose::Linking, 1 + k as u64);
            let u = sd
                .combine_y(&unit_vec(&mut rng, sd.basis_y.len()))
                .scaled(rho);
            ctx.i_value(&u)
        })
        .collect()
}

fn z_point(ctx: &FunctionalContext, radius: f64, angle: f64) -> PeriodicSequence {
    ctx.spectral()
        .combine_z(&[radius * angle.cos(), radius * angle.sin()])
}

fn add(a: &PeriodicSequence, b: &PeriodicSequence, scale: f64) -> PeriodicSequence {
    PeriodicSequence::new(
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| x + scale * y)
            .collect(),
    )
    .expect("same period")
}

/// `I` on `samples` points of each face of `∂Q` for radius `r`.
fn boundary_values(
    ctx: &FunctionalContext,
    e: &PeriodicSequence,
    sign: f64,
    r: f64,
    samples: usize,
    seed: u64,
    salt: u64,
) -> Vec<f64> {
    (0..3 * samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, Purpose::Linking, salt + k as u64);
            let angle = rng.random_range(0.0..2.0 * PI);
            let u = match k / samples {
                // r = 0 face: the disk B̄_R ∩ Z
                0 => z_point(ctx, r * rng.random::<f64>().sqrt(), angle),
                // cap: disk shifted by R·(±e)
                1 => add(
                    &z_point(ctx, r * rng.random::<f64>().sqrt(), angle),
                    e,
                    sign * r,
                ),
                // side: ‖z‖ = R, 0 ≤ t ≤ R
                _ => add(&z_point(ctx, r, angle), e, sign * r * rng.random::<f64>()),
            };
            ctx.i_value(&u)
        })
        .collect()
}

/// Sample `I` at `count` points of the disk `B̄_radius ∩ Z`.
pub fn sample_z_values(ctx: &FunctionalContext, count: usize, radius: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, Purpose::Sampling, 0x2);
    (0..count)
        .map(|_| {
            let angle = rng.random_range(0.0..2.0 * PI);
            let r = radius * rng.random::<f64>().sqrt();
            ctx.i_value(&z_point(ctx, r, angle))
        })
        .collect()
}

/// Run the check at `ρ = min(√δ, δ)`.
pub fn verify_linking_geometry(
    ctx: &FunctionalContext,
    cfg: &SolverConfig,
    samples: usize,
) -> Result<LinkingReport> {
    verify_linking_geometry_at(ctx, cfg, samples, ctx.rho())
}

pub fn verify_linking_geometry_at(
    ctx: &FunctionalContext,
    cfg: &SolverConfig,
    samples: usize,
    rho: f64,
) -> Result<LinkingReport> {
    if samples < 1000 {
        return Err(invalid("samples", "must be ≥ 1000"));
    }
    if !(rho > 0.0) {
        return Err(invalid("rho", "must be > 0"));
    }
    let sigma = ctx.sigma_for(rho);
    let sphere_values = sphere_in_y(ctx, rho, samples, cfg.seed);
    let a1_min = sphere_values.iter().copied().fold(f64::INFINITY, f64::min);
    let e = linking_direction(ctx, cfg.seed);

    let sides: Vec<LinkingSide> = [1.0, -1.0]
        .iter()
        .enumerate()
        .map(|(i, &sign)| {
            let mut r = 2.0 * rho;
            let mut doublings = 1;
            loop {
                let salt = (1 << 40) * (i as u64 + 1) + (doublings as u64) * (1 << 24);
                let values = boundary_values(ctx, &e, sign, r, samples, cfg.seed, salt);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let ok = max <= LINKING_SLACK;
                if ok || doublings >= MAX_DOUBLINGS {
                    return LinkingSide {
                        sign,
                        r_outer: r,
                        a2_max_on_boundary: max,
                        boundary_values: values,
                        a2_ok: ok,
                    };
                }
                r *= 2.0;
                doublings += 1;
            }
        })
        .collect();

    Ok(LinkingReport {
        rho,
        sigma,
        a1_min_on_sphere: a1_min,
        sphere_values,
        e_direction: e.into_vec(),
        r_outer: sides.iter().map(|s| s.r_outer).fold(0.0, f64::max),
        a2_max_on_boundary: sides
            .iter()
            .map(|s| s.a2_max_on_boundary)
            .fold(f64::NEG_INFINITY, f64::max),
        a1_ok: a1_min >= sigma - LINKING_SLACK,
        a2_ok: sides.iter().all(|s| s.a2_ok),
        sides,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx6() -> FunctionalContext {
        FunctionalContext::example31(6, 3, 1.0, 3.0, 0.01, 0.25).unwrap()
    }

    #[test]
    fn direction_lies_in_y() {
        let ctx = ctx6();
        let e = linking_direction(&ctx, 42);
        assert!((e.norm() - 1.0).abs() < 1e-14);
        assert!(ctx.spectral().project_z(&e).norm() < 1e-14);
    }

    #[test]
    fn geometry_holds_for_example31() {
        let ctx = ctx6();
        let cfg = SolverConfig::default();
        for rho in [ctx.rho(), 0.5] {
            let rep = verify_linking_geometry_at(&ctx, &cfg, 1000, rho).unwrap();
            assert!(
                rep.a1_ok,
                "rho={rho}: {} < {}",
                rep.a1_min_on_sphere, rep.sigma
            );
            assert!(rep.a2_ok, "rho={rho}: {}", rep.a2_max_on_boundary);
            assert_eq!(rep.recheck(), (true, true));
            assert_eq!(rep.sides.len(), 2);
        }
        let rep = verify_linking_geometry_at(&ctx, &cfg, 1000, 0.5).unwrap();
        assert!((rep.sigma - 0.125).abs() < 1e-15);
    }

    #[test]
    fn i_is_nonpositive_on_z() {
        let ctx = ctx6();
        for radius in [0.1, 1.0, 50.0] {
            assert!(sample_z_values(&ctx, 1000, radius, 3)
                .iter()
                .all(|&v| v <= 0.0));
        }
    }

    #[test]
    fn too_few_samples_is_rejected() {
        let ctx = ctx6();
        assert!(verify_linking_geometry(&ctx, &SolverConfig::default(), 10).is_err());
    }
}
