//! Grouping of critical points related by the symmetries of the problem.
//!
//! Negation maps critical points of `I` to critical points of `I` whenever
//! `F` is even, so it is applied to every record. Index shifts are *not*
//! symmetries of `I` (the index `n0` is distinguished); they only relate
//! solutions of the lattice equation, so shifts are applied only between
//! records whose full pointwise residual is below [`RESIDUAL_CERTIFIED`].

use super::ascent::lex_cmp;
use super::CriticalPointRecord;
use crate::potential::Symmetry;
use crate::sequence::PeriodicSequence;

/// Largest residual at which a record counts as a solution of the lattice
/// equation at every index.
pub const RESIDUAL_CERTIFIED: f64 = 1e-6;

fn images(u: &PeriodicSequence, sym: Symmetry, shifts: bool) -> Vec<PeriodicSequence> {
    let m = u.period() as i64;
    let ks: Vec<i64> = if shifts && sym.autonomous {
        (0..m).collect()
    } else {
        vec![0]
    };
    let mut out = Vec::new();
    for k in ks {
        let s = u.shifted(k);
        if sym.even {
            out.push(s.scaled(-1.0));
        }
        out.push(s);
    }
    out
}

fn related(a: &CriticalPointRecord, b: &CriticalPointRecord, sym: Symmetry, tol: f64) -> bool {
    let certified =
        a.residual.max_abs <= RESIDUAL_CERTIFIED && b.residual.max_abs <= RESIDUAL_CERTIFIED;
    images(&a.point, sym, certified)
        .iter()
        .any(|img| img.distance(&b.point) < tol)
}

/// Assign orbit ids in list order; the first member of each orbit gets the
/// next free id. Record order is preserved.
pub fn dedupe_orbits(
    mut records: Vec<CriticalPointRecord>,
    sym: Symmetry,
    merge_tol: f64,
) -> Vec<CriticalPointRecord> {
    let n = records.len();
    let mut ids: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    for i in 0..n {
        if ids[i].is_some() {
            continue;
        }
        ids[i] = Some(next);
        // grow the orbit transitively
        let mut frontier = vec![i];
        while let Some(j) = frontier.pop() {
            for k in 0..n {
                if ids[k].is_none() && related(&records[j], &records[k], sym, merge_tol) {
                    ids[k] = Some(next);
                    frontier.push(k);
                }
            }
        }
        next += 1;
    }
    for (r, id) in records.iter_mut().zip(ids) {
        r.orbit_id = id.expect("every record assigned");
    }
    records
}

/// Lexicographically smallest member of each orbit, by orbit id.
pub fn orbit_representatives(records: &[CriticalPointRecord]) -> Vec<&CriticalPointRecord> {
    let count = records.iter().map(|r| r.orbit_id + 1).max().unwrap_or(0);
    (0..count)
        .filter_map(|id| {
            records
                .iter()
                .filter(|r| r.orbit_id == id)
                .min_by(|a, b| lex_cmp(a.point.as_slice(), b.point.as_slice()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::FunctionalContext;

    fn ctx() -> FunctionalContext {
        FunctionalContext::example31(6, 3, 1.0, 3.0, 0.01, 0.25).unwrap()
    }

    fn sym() -> Symmetry {
        Symmetry {
            autonomous: true,
            even: true,
            shift_invariant: true,
        }
    }

    fn rec(ctx: &FunctionalContext, v: Vec<f64>) -> CriticalPointRecord {
        CriticalPointRecord::evaluate(ctx, PeriodicSequence::new(v).unwrap())
    }

    #[test]
    fn negation_pairs_share_an_orbit() {
        let c = ctx();
        let u = vec![1.0, -2.0, 0.5, 3.0, 0.0, -1.0];
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let out = dedupe_orbits(vec![rec(&c, u), rec(&c, neg)], sym(), 1e-4);
        assert_eq!(out[0].orbit_id, out[1].orbit_id);
        assert_eq!(orbit_representatives(&out).len(), 1);
        assert_eq!(out[0].morse, out[1].morse);
        assert!((out[0].residual.max_abs - out[1].residual.max_abs).abs() <= 1e-6);
    }

    #[test]
    fn shifts_merge_only_certified_solutions() {
        let c = ctx();
        // u = 0 and the negative-power residual of a constant are both exact; a
        // fabricated pair of certified records checks the shift path.
        let mut a = rec(&c, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let mut b = rec(&c, vec![2.0, 3.0, 4.0, 5.0, 6.0, 1.0]);
        let out = dedupe_orbits(vec![a.clone(), b.clone()], sym(), 1e-4);
        assert_ne!(out[0].orbit_id, out[1].orbit_id);
        a.residual.max_abs = 0.0;
        b.residual.max_abs = 0.0;
        let out = dedupe_orbits(vec![a, b], sym(), 1e-4);
        assert_eq!(out[0].orbit_id, out[1].orbit_id);
    }

    #[test]
    fn distant_records_stay_apart() {
        let c = ctx();
        let out = dedupe_orbits(
            vec![
                rec(&c, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
                rec(&c, vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0]),
            ],
            sym(),
            1e-4,
        );
        assert_eq!((out[0].orbit_id, out[1].orbit_id), (0, 1));
    }
}
