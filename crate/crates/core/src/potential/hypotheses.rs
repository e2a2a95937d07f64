//! Sampled certification of the standing hypotheses on `F`.
//!
//! * D1: `F(n + M, ·) = F(n, ·)`.
//! * D2: `F(n, x, y, z) ≥ −b·λ_min·(x² + y² + z²)` on `x² + y² + z² ≤ δ`.
//! * D3: `F(n, x, y, z) ≤ Σ_k (−d1|t_k|^β + d2|t_k|²)`.
//! * D4: `F(n, x, y, z) ≤ −d1 Σ_k |t_k|^β`.
//!
//! Conditions are checked pointwise on every residue class `n = 1..M`.
//! A pass is a statement about the sample, not a proof.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::PotentialSpec;
use crate::rng::{stream, unit_vec, Purpose};
use crate::spectral::lambda_min;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum HypothesisId {
    D1,
    D2,
    D3,
    D4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisConstants {
    pub b: f64,
    pub delta: f64,
    pub d1: f64,
    pub d2: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sampling {
    /// Points per axis of the cube grid covering the D2 region.
    pub grid: usize,
    /// Random points per residue class (D1, D3, D4) and on the D2 sphere.
    pub random: usize,
    /// Radius range for D3/D4, sampled log-uniformly.
    pub radius_min: f64,
    pub radius_max: f64,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            grid: 21,
            random: 2000,
            radius_min: 1e-3,
            radius_max: 1e3,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub sample: usize,
    pub n: i64,
    pub point: [f64; 3],
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub id: HypothesisId,
    pub constants: HypothesisConstants,
    pub samples: usize,
    pub violations: Vec<Violation>,
    pub verdict: Verdict,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Re-evaluate every stored witness and confirm it still violates.
    pub fn replay(&self, f: &PotentialSpec) -> bool {
        self.violations.iter().all(|v| {
            let (lhs, rhs) = sides(self.id, f, &self.constants, v.n, v.point);
            lhs == v.lhs && rhs == v.rhs && violates(self.id, lhs, rhs)
        })
    }
}

fn sides(
    id: HypothesisId,
    f: &PotentialSpec,
    c: &HypothesisConstants,
    n: i64,
    p: [f64; 3],
) -> (f64, f64) {
    let m = f.period() as i64;
    let fv = f.eval(n, p[0], p[1], p[2]);
    match id {
        HypothesisId::D1 => (f.eval(n + m, p[0], p[1], p[2]), fv),
        HypothesisId::D2 => {
            let sq: f64 = p.iter().map(|t| t * t).sum();
            (fv, -c.b * lambda_min(f.period()) * sq)
        }
        HypothesisId::D3 => (
            fv,
            p.iter()
                .map(|t| -c.d1 * t.abs().powf(c.beta) + c.d2 * t * t)
                .sum(),
        ),
        HypothesisId::D4 => (fv, p.iter().map(|t| -c.d1 * t.abs().powf(c.beta)).sum()),
    }
}

fn violates(id: HypothesisId, lhs: f64, rhs: f64) -> bool {
    let slack = 1e-12 * (1.0 + lhs.abs() + rhs.abs());
    match id {
        HypothesisId::D1 => (lhs - rhs).abs() > 1e-12 * (1.0 + rhs.abs()),
        HypothesisId::D2 => lhs < rhs - slack,
        HypothesisId::D3 | HypothesisId::D4 => lhs > rhs + slack,
    }
}

fn residues(f: &PotentialSpec) -> std::ops::RangeInclusive<i64> {
    1..=f.period() as i64
}

/// Points on rays through the origin with log-uniform radius, plus the
/// coordinate axes on a log grid so single-argument growth is always probed.
pub(crate) fn wide_points(s: &Sampling, salt: u64) -> Vec<[f64; 3]> {
    let mut rng = stream(s.seed, Purpose::Hypothesis, salt);
    let (lo, hi) = (s.radius_min.ln(), s.radius_max.ln());
    let mut pts: Vec<[f64; 3]> = (0..s.random)
        .map(|_| {
            let d = unit_vec(&mut rng, 3);
            let r = rng.random_range(lo..=hi).exp();
            [r * d[0], r * d[1], r * d[2]]
        })
        .collect();
    let steps = 13;
    for i in 0..steps {
        let r = (lo + (hi - lo) * i as f64 / (steps - 1) as f64).exp();
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let mut p = [0.0; 3];
                p[axis] = sign * r;
                pts.push(p);
            }
        }
    }
    pts
}

/// Cube grid clipped to the ball `x² + y² + z² ≤ δ`, plus random points on
/// its boundary sphere.
fn ball_points(s: &Sampling, delta: f64) -> Vec<[f64; 3]> {
    let radius = delta.sqrt();
    let g = s.grid.max(2);
    let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (g - 1) as f64;
    let mut pts = Vec::new();
    for i in 0..g {
        for j in 0..g {
            for k in 0..g {
                let p = [coord(i), coord(j), coord(k)];
                if p.iter().map(|t| t * t).sum::<f64>() <= delta {
                    pts.push(p);
                }
            }
        }
    }
    let mut rng = stream(s.seed, Purpose::Hypothesis, 0xD2);
    for _ in 0..s.random {
        let d = unit_vec(&mut rng, 3);
        // shrink by one ulp-scale factor so the point stays inside the region
        let r = radius * (1.0 - 1e-15);
        pts.push([r * d[0], r * d[1], r * d[2]]);
    }
    pts
}

pub(crate) fn run(
    id: HypothesisId,
    f: &PotentialSpec,
    c: &HypothesisConstants,
    points: &[[f64; 3]],
) -> HypothesisReport {
    let cases: Vec<(i64, [f64; 3])> = residues(f)
        .flat_map(|n| points.iter().map(move |&p| (n, p)))
        .collect();
    let violations: Vec<Violation> = cases
        .par_iter()
        .enumerate()
        .filter_map(|(sample, &(n, point))| {
            let (lhs, rhs) = sides(id, f, c, n, point);
            violates(id, lhs, rhs).then_some(Violation {
                sample,
                n,
                point,
                lhs,
                rhs,
            })
        })
        .collect();
    HypothesisReport {
        id,
        constants: *c,
        samples: cases.len(),
        verdict: if violations.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        violations,
    }
}

/// Check D1–D4 for `f`, in that order.
pub fn check_hypotheses(
    f: &PotentialSpec,
    constants: &HypothesisConstants,
    sampling: &Sampling,
) -> Vec<HypothesisReport> {
    let wide = wide_points(sampling, 0xD3);
    let ball = ball_points(sampling, constants.delta);
    vec![
        run(HypothesisId::D1, f, constants, &wide),
        run(HypothesisId::D2, f, constants, &ball),
        run(HypothesisId::D3, f, constants, &wide),
        run(HypothesisId::D4, f, constants, &wide),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Modulation, TableDefinition, Term, TermArg, TermKind};

    fn constants(m: usize) -> HypothesisConstants {
        HypothesisConstants {
            b: 1.0,
            delta: 0.25,
            d1: lambda_min(m),
            d2: 0.01,
            beta: 3.0,
        }
    }

    fn small() -> Sampling {
        Sampling {
            grid: 9,
            random: 300,
            ..Sampling::default()
        }
    }

    #[test]
    fn example31_passes_everything() {
        let f = PotentialSpec::example31(1.0, 3.0, 6).unwrap();
        let reports = check_hypotheses(&f, &constants(6), &small());
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert!(r.passed(), "{:?}: {:?}", r.id, r.violations.first());
        }
    }

    #[test]
    fn example31_d2_holds_for_any_delta_up_to_one() {
        for delta in [1e-4, 0.1, 0.5, 1.0] {
            for b in [0.1, 1.0, 7.0] {
                let f = PotentialSpec::example31(b, 3.0, 6).unwrap();
                let c = HypothesisConstants {
                    b,
                    delta,
                    ..constants(6)
                };
                let r = &check_hypotheses(&f, &c, &small())[1];
                assert!(r.passed(), "delta={delta} b={b}");
            }
        }
    }

    #[test]
    fn zero_potential_fails_d3_at_large_radius() {
        let f = PotentialSpec::zero(6).unwrap();
        let reports = check_hypotheses(&f, &constants(6), &small());
        assert!(reports[0].passed());
        assert!(reports[1].passed());
        assert!(!reports[2].passed());
        let w = &reports[2].violations[0];
        let norm = w.point.iter().map(|t| t * t).sum::<f64>().sqrt();
        assert!(norm > (0.01 / lambda_min(6)) * 0.5, "witness norm {norm}");
        assert!(reports[2].replay(&f));
    }

    #[test]
    fn positive_cubic_fails_d3_with_large_y() {
        let def = TableDefinition {
            period: 6,
            terms: vec![Term {
                arg: TermArg::Y,
                kind: TermKind::Abspow,
                coeff: 1.0,
                power: Some(3.0),
                modulation: Modulation::None,
                harmonic: 1,
                residues: None,
            }],
        };
        let f = PotentialSpec::table(def).unwrap();
        let reports = check_hypotheses(&f, &constants(6), &small());
        let d3 = &reports[2];
        assert_eq!(d3.verdict, Verdict::Fail);
        assert!(d3.replay(&f));
        let biggest_y = d3
            .violations
            .iter()
            .map(|v| v.point[1].abs())
            .fold(0.0, f64::max);
        assert!(biggest_y >= 100.0);
    }

    #[test]
    fn d1_catches_aperiodic_potential() {
        #[derive(Debug)]
        struct Drift;
        impl crate::potential::Potential for Drift {
            fn period(&self) -> usize {
                5
            }
            fn eval(&self, n: i64, x: f64, _: f64, _: f64) -> f64 {
                n as f64 * x
            }
            fn grad(&self, n: i64, _: f64, _: f64, _: f64) -> [f64; 3] {
                [n as f64, 0.0, 0.0]
            }
            fn symmetry(&self) -> crate::potential::Symmetry {
                crate::potential::Symmetry {
                    autonomous: false,
                    even: false,
                    shift_invariant: false,
                }
            }
            fn describe(&self) -> String {
                "drift".into()
            }
        }
        let f = PotentialSpec::new(Drift);
        let d1 = &check_hypotheses(&f, &constants(5), &small())[0];
        assert!(!d1.passed());
        assert!(d1.replay(&f));
    }

    #[test]
    fn reports_are_deterministic() {
        let f = PotentialSpec::zero(6).unwrap();
        let a = check_hypotheses(&f, &constants(6), &small());
        let b = check_hypotheses(&f, &constants(6), &small());
        assert_eq!(a, b);
    }
}
