//! Potentials assembled from a fixed grammar of terms.
//!
//! Each term is `coeff · m(n) · φ(x, y, z)` where `φ` is one of `|t|^p`
//! (`p > 2`), `t²`, or a neighbour product `xy` / `yz`, and the modulation
//! `m(n)` is `1`, `cos(2πkn/M)` or `sin(2πkn/M)`. A term may be restricted
//! to a set of residue classes `n mod M` (1-based).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{abs_pow, abs_pow_deriv, Potential, Symmetry};
use crate::error::{Error, Result};
use crate::sequence::MIN_PERIOD;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDefinition {
    pub period: usize,
    #[serde(default)]
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermArg {
    X,
    Y,
    Z,
    Xy,
    Yz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Abspow,
    Square,
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    #[default]
    None,
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub arg: TermArg,
    pub kind: TermKind,
    pub coeff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default)]
    pub modulation: Modulation,
    #[serde(default = "default_harmonic")]
    pub harmonic: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residues: Option<Vec<usize>>,
}

fn default_harmonic() -> i64 {
    1
}

impl Term {
    fn validate(&self, period: usize, index: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedPotential(format!("term {index}: {msg}")));
        if !self.coeff.is_finite() {
            return bad("coeff must be finite".into());
        }
        match (self.kind, self.arg) {
            (TermKind::Abspow | TermKind::Square, TermArg::X | TermArg::Y | TermArg::Z) => {}
            (TermKind::Cross, TermArg::Xy | TermArg::Yz) => {}
            (kind, arg) => return bad(format!("kind {kind:?} cannot take arg {arg:?}")),
        }
        match self.kind {
            TermKind::Abspow => match self.power {
                Some(p) if p > 2.0 && p.is_finite() => {}
                Some(p) => return bad(format!("abspow power must be > 2, got {p}")),
                None => return bad("abspow requires a power".into()),
            },
            _ => {
                if let Some(p) = self.power {
                    if p != 2.0 {
                        return bad(format!("{:?} has fixed power 2, got {p}", self.kind));
                    }
                }
            }
        }
        if let Some(res) = &self.residues {
            if let Some(r) = res.iter().find(|&&r| r == 0 || r > period) {
                return bad(format!("residue {r} outside [1, {period}]"));
            }
        }
        Ok(())
    }

    fn weight(&self, n: i64, period: usize) -> f64 {
        let m = period as i64;
        if let Some(res) = &self.residues {
            let r = ((n - 1).rem_euclid(m) + 1) as usize;
            if !res.contains(&r) {
                return 0.0;
            }
        }
        // reduce n first so that n and n+M give bitwise-identical angles
        let k = (self.harmonic * (n.rem_euclid(m))).rem_euclid(m);
        let angle = 2.0 * PI * k as f64 / period as f64;
        let mods = match self.modulation {
            Modulation::None => 1.0,
            Modulation::Cos => angle.cos(),
            Modulation::Sin => angle.sin(),
        };
        self.coeff * mods
    }

    fn phi(&self, v: [f64; 3]) -> f64 {
        match (self.kind, self.arg) {
            (TermKind::Abspow, a) => abs_pow(v[slot(a)], self.power.unwrap_or(3.0)),
            (TermKind::Square, a) => v[slot(a)] * v[slot(a)],
            (TermKind::Cross, TermArg::Xy) => v[0] * v[1],
            (TermKind::Cross, _) => v[1] * v[2],
        }
    }

    fn phi_grad(&self, v: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        match (self.kind, self.arg) {
            (TermKind::Abspow, a) => {
                g[slot(a)] = abs_pow_deriv(v[slot(a)], self.power.unwrap_or(3.0))
            }
            (TermKind::Square, a) => g[slot(a)] = 2.0 * v[slot(a)],
            (TermKind::Cross, TermArg::Xy) => {
                g[0] = v[1];
                g[1] = v[0];
            }
            (TermKind::Cross, _) => {
                g[1] = v[2];
                g[2] = v[1];
            }
        }
        g
    }

    fn depends_on_n(&self) -> bool {
        self.modulation != Modulation::None || self.residues.is_some()
    }
}

fn slot(a: TermArg) -> usize {
    match a {
        TermArg::X => 0,
        TermArg::Y => 1,
        _ => 2,
    }
}

#[derive(Debug, Clone)]
pub(crate) struct TablePotential {
    def: TableDefinition,
}

impl TablePotential {
    pub(crate) fn new(def: TableDefinition) -> Result<Self> {
        if def.period < MIN_PERIOD {
            return Err(Error::MalformedPotential(format!(
                "period must be at least {MIN_PERIOD}, got {}",
                def.period
            )));
        }
        for (i, t) in def.terms.iter().enumerate() {
            t.validate(def.period, i)?;
        }
        Ok(Self { def })
    }
}

impl Potential for TablePotential {
    fn period(&self) -> usize {
        self.def.period
    }

    fn eval(&self, n: i64, x: f64, y: f64, z: f64) -> f64 {
        self.def
            .terms
            .iter()
            .map(|t| t.weight(n, self.def.period) * t.phi([x, y, z]))
            .sum()
    }

    fn grad(&self, n: i64, x: f64, y: f64, z: f64) -> [f64; 3] {
        let mut g = [0.0; 3];
        for t in &self.def.terms {
            let w = t.weight(n, self.def.period);
            let pg = t.phi_grad([x, y, z]);
            for k in 0..3 {
                g[k] += w * pg[k];
            }
        }
        g
    }

    fn symmetry(&self) -> Symmetry {
        // every term in the grammar is even under (x, y, z) -> -(x, y, z)
        let autonomous = !self.def.terms.iter().any(Term::depends_on_n);
        Symmetry {
            autonomous,
            even: true,
            shift_invariant: autonomous,
        }
    }

    fn describe(&self) -> String {
        format!(
            "table(period={}, terms={})",
            self.def.period,
            self.def.terms.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;
    use crate::spectral::lambda_min;
    use rand::{Rng, SeedableRng};

    fn abspow(arg: TermArg, coeff: f64, p: f64) -> Term {
        Term {
            arg,
            kind: TermKind::Abspow,
            coeff,
            power: Some(p),
            modulation: Modulation::None,
            harmonic: 1,
            residues: None,
        }
    }

    #[test]
    fn table_matches_example31() {
        let (b, beta, m) = (1.5, 3.2, 7);
        let c = -b * lambda_min(m);
        let def = TableDefinition {
            period: m,
            terms: vec![
                abspow(TermArg::X, c, beta),
                abspow(TermArg::Y, c, beta),
                abspow(TermArg::Z, c, beta),
            ],
        };
        let t = PotentialSpec::table(def).unwrap();
        let e = PotentialSpec::example31(b, beta, m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.random_range(-20..20);
            let (x, y, z) = (
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let (a, b) = (t.eval(n, x, y, z), e.eval(n, x, y, z));
            assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
            let (ga, gb) = (t.grad(n, x, y, z), e.grad(n, x, y, z));
            for k in 0..3 {
                assert!((ga[k] - gb[k]).abs() <= 1e-14 * (1.0 + ga[k].abs()));
            }
        }
        assert_eq!(t.symmetry(), e.symmetry());
    }

    #[test]
    fn empty_table_is_zero() {
        let f = PotentialSpec::zero(6).unwrap();
        assert_eq!(f.eval(3, 1.0, -2.0, 5.0), 0.0);
        assert_eq!(f.grad(3, 1.0, -2.0, 5.0), [0.0; 3]);
    }

    #[test]
    fn rejects_malformed_terms() {
        let mk = |t: Term| {
            PotentialSpec::table(TableDefinition {
                period: 6,
                terms: vec![t],
            })
        };
        assert!(mk(abspow(TermArg::Y, 1.0, 3.0)).is_ok());
        assert!(matches!(
            mk(abspow(TermArg::Y, 1.0, 2.0)),
            Err(Error::MalformedPotential(_))
        ));
        assert!(mk(abspow(TermArg::Xy, 1.0, 3.0)).is_err());
        let mut t = abspow(TermArg::X, 1.0, 3.0);
        t.residues = Some(vec![7]);
        assert!(mk(t).is_err());
        let mut t = abspow(TermArg::X, 1.0, 3.0);
        t.kind = TermKind::Cross;
        t.power = None;
        assert!(mk(t).is_err());
        assert!(PotentialSpec::table(TableDefinition {
            period: 4,
            terms: vec![]
        })
        .is_err());
    }

    #[test]
    fn modulated_terms_are_periodic_and_differentiable() {
        let def = TableDefinition {
            period: 8,
            terms: vec![
                Term {
                    arg: TermArg::Xy,
                    kind: TermKind::Cross,
                    coeff: 0.7,
                    power: None,
                    modulation: Modulation::Cos,
                    harmonic: 3,
                    residues: None,
                },
                Term {
                    arg: TermArg::Z,
                    kind: TermKind::Square,
                    coeff: -1.1,
                    power: None,
                    modulation: Modulation::Sin,
                    harmonic: 1,
                    residues: Some(vec![2, 5]),
                },
                abspow(TermArg::Y, -0.4, 2.5),
            ],
        };
        let f = PotentialSpec::table(def).unwrap();
        assert!(!f.symmetry().autonomous);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let n = rng.random_range(-16..16);
            let p = [
                rng.random_range(-2.0..2.0),
                rng.random_range(0.1..2.0),
                rng.random_range(-2.0..2.0),
            ];
            assert_eq!(f.eval(n + 8, p[0], p[1], p[2]), f.eval(n, p[0], p[1], p[2]));
            let g = f.grad(n, p[0], p[1], p[2]);
            for k in 0..3 {
                let h = 1e-5;
                let mut hi = p;
                let mut lo = p;
                hi[k] += h;
                lo[k] -= h;
                let fd =
                    (f.eval(n, hi[0], hi[1], hi[2]) - f.eval(n, lo[0], lo[1], lo[2])) / (2.0 * h);
                assert!((g[k] - fd).abs() <= 1e-6 * (1.0 + g[k].abs()));
            }
        }
    }
}
