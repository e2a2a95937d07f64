//! Results documents. Every float is written as a 17-significant-digit
//! decimal string so the files are byte-stable across platforms.

use hamlink_core::io::fmt17;
use hamlink_core::solver::{CertificateVerdict, LinkingSide, ProofCase};
use hamlink_core::{
    Certificate, Classification, CriticalPointRecord, FunctionalContext, HypothesisReport,
    LinkingReport, ResidualReport, Sampling, SolverConfig, Verdict,
};
use serde_json::{json, Value};

use crate::config::{PotentialSource, RunConfig};

/// Witnesses kept per hypothesis report.
pub const MAX_WITNESSES: usize = 20;

pub fn num(x: f64) -> Value {
    Value::String(fmt17(x))
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn classification_label(c: Classification) -> &'static str {
    match c {
        Classification::Trivial => "trivial",
        Classification::ConstantNonzero => "constant-nonzero",
        Classification::Nonconstant => "nonconstant",
    }
}

pub fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    }
}

fn case_label(c: ProofCase) -> &'static str {
    match c {
        ProofCase::MinimaxEqualsMaximum => "minimax-equals-maximum",
        ProofCase::MinimaxBelowMaximum => "minimax-below-maximum",
        ProofCase::NoQualifyingPoints => "no-qualifying-points",
    }
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

pub fn solver_config(s: &SolverConfig) -> Value {
    json!({
        "restarts": s.restarts,
        "seed": s.seed,
        "grad_tol": num(s.grad_tol),
        "max_iters": s.max_iters,
        "merge_tol": num(s.merge_tol),
        "init_radius": opt_num(s.init_radius),
        "shrink": num(s.shrink),
        "sufficient_increase": num(s.sufficient_increase),
        "y_seeds": s.y_seeds,
        "z_seeds": s.z_seeds,
        "deflation_rounds": s.deflation_rounds,
    })
}

pub fn sampling(s: &Sampling) -> Value {
    json!({
        "grid": s.grid,
        "random": s.random,
        "radius_min": num(s.radius_min),
        "radius_max": num(s.radius_max),
        "seed": s.seed,
    })
}

/// Echo of the run configuration. The output directory is left out so runs
/// into different directories stay byte-identical.
pub fn config_echo(cfg: &RunConfig) -> Value {
    let p = &cfg.params;
    let source = match &cfg.potential_source {
        PotentialSource::Example31 => "example31".to_string(),
        PotentialSource::File(path) => path.display().to_string(),
        PotentialSource::Inline => "inline".to_string(),
    };
    json!({
        "m": p.m,
        "n0": p.n0,
        "b": num(p.b),
        "beta": num(p.beta),
        "delta": num(p.delta),
        "d1": num(p.d1),
        "d2": num(p.d2),
        "potential": {
            "source": source,
            "description": cfg.potential.describe(),
        },
        "solver": solver_config(&cfg.solver),
        "sampling": sampling(&cfg.sampling),
        "linking": {
            "samples": cfg.linking_samples,
            "rho": opt_num(cfg.linking_rho),
        },
    })
}

pub fn spectral(ctx: &FunctionalContext) -> Value {
    let s = ctx.spectral();
    json!({
        "lambda_min": num(s.lambda_min),
        "lambda_max": num(s.lambda_max),
        "gamma_min": num(s.gamma_min),
        "rho": num(ctx.rho()),
        "sigma": num(ctx.sigma_for(ctx.rho())),
        "eigenvalues_a": nums(&s.eigen_a().values),
        "eigenvalues_l": nums(&s.eigen_l().values),
    })
}

pub fn hypothesis(r: &HypothesisReport) -> Value {
    let witnesses: Vec<Value> = r
        .violations
        .iter()
        .take(MAX_WITNESSES)
        .map(|v| {
            json!({
                "sample": v.sample,
                "n": v.n,
                "point": nums(&v.point),
                "lhs": num(v.lhs),
                "rhs": num(v.rhs),
            })
        })
        .collect();
    json!({
        "id": format!("{:?}", r.id),
        "verdict": verdict_label(r.verdict),
        "samples": r.samples,
        "violations": r.violations.len(),
        "witnesses": witnesses,
    })
}

pub fn hypotheses(reports: &[HypothesisReport]) -> Value {
    Value::Array(reports.iter().map(hypothesis).collect())
}

fn residual(r: &ResidualReport) -> Value {
    json!({
        "at_n0": num(r.at_n0),
        "max_abs": num(r.max_abs),
        "per_index": nums(&r.per_index),
    })
}

pub fn record(index: usize, r: &CriticalPointRecord) -> Value {
    json!({
        "index": index,
        "point": nums(r.point.as_slice()),
        "value": num(r.value),
        "grad_norm": num(r.grad_norm),
        "morse_index": r.morse.index,
        "near_null": r.morse.near_null,
        "morse_caveat": r.morse.caveat,
        "classification": classification_label(r.classification),
        "orbit_id": r.orbit_id,
        "residual_pointwise": residual(&r.residual),
        "residual_summed_action": residual(&r.residual_summed),
    })
}

fn side(s: &LinkingSide) -> Value {
    json!({
        "sign": num(s.sign),
        "r_outer": num(s.r_outer),
        "a2_max_on_boundary": num(s.a2_max_on_boundary),
        "boundary_samples": s.boundary_values.len(),
        "a2_ok": s.a2_ok,
    })
}

pub fn linking(l: &LinkingReport) -> Value {
    json!({
        "rho": num(l.rho),
        "sigma": num(l.sigma),
        "a1_min_on_sphere": num(l.a1_min_on_sphere),
        "sphere_samples": l.sphere_values.len(),
        "a1_ok": l.a1_ok,
        "e_direction": nums(&l.e_direction),
        "sides": l.sides.iter().map(side).collect::<Vec<_>>(),
        "r_outer": num(l.r_outer),
        "a2_max_on_boundary": num(l.a2_max_on_boundary),
        "a2_ok": l.a2_ok,
    })
}

pub fn certificate(c: &Certificate) -> Value {
    let (status, failing) = match &c.verdict {
        CertificateVerdict::CertifiedAtDeskScale => ("certified-at-desk-scale", Vec::new()),
        CertificateVerdict::Fail(names) => ("fail", names.clone()),
    };
    json!({
        "verdict": status,
        "failing": failing,
        "case": case_label(c.case),
        "c0": opt_num(c.c0),
        "qualifying": c.qualifying,
        "distinct_orbits": c.distinct_orbits,
        "components": c.components.iter().map(|k| json!({
            "name": k.name,
            "ok": k.ok,
            "detail": k.detail,
        })).collect::<Vec<_>>(),
    })
}
