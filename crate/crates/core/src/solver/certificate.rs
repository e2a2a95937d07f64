//! Bundles the hypothesis reports, the linking geometry and the critical
//! points into one verdict on "at least two nontrivial periodic solutions".

use serde::Serialize;

use super::linking::{verify_linking_geometry, LinkingReport, LINKING_SLACK};
use super::{find_critical_points, maximize_i, Classification, CriticalPointRecord, SolverConfig};
use crate::error::Result;
use crate::functional::FunctionalContext;
use crate::potential::{check_hypotheses, HypothesisId, HypothesisReport, Sampling};

pub const LINKING_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofCase {
    /// Every qualifying point sits at the top value `c₀`.
    MinimaxEqualsMaximum,
    /// Some qualifying point has a positive value below `c₀`.
    MinimaxBelowMaximum,
    NoQualifyingPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "failing")]
pub enum CertificateVerdict {
    CertifiedAtDeskScale,
    Fail(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub hypotheses: Vec<HypothesisReport>,
    pub linking: LinkingReport,
    /// Value of the best ascent endpoint, when `I` has a finite maximum.
    pub c0: Option<f64>,
    pub records: Vec<CriticalPointRecord>,
    /// Indices into `records` of nonconstant points with `I > 0` or `I ≥ σ`.
    pub qualifying: Vec<usize>,
    pub distinct_orbits: usize,
    pub case: ProofCase,
    pub components: Vec<Component>,
    pub verdict: CertificateVerdict,
}

impl Certificate {
    pub fn certified(&self) -> bool {
        self.verdict == CertificateVerdict::CertifiedAtDeskScale
    }
}

fn component(name: &str, ok: bool, detail: String) -> Component {
    Component {
        name: name.to_string(),
        ok,
        detail,
    }
}

pub fn two_solution_certificate(
    ctx: &FunctionalContext,
    cfg: &SolverConfig,
) -> Result<Certificate> {
    let sampling = Sampling {
        seed: cfg.seed,
        ..Sampling::default()
    };
    two_solution_certificate_with(ctx, cfg, &sampling, LINKING_SAMPLES)
}

/// As [`two_solution_certificate`] with explicit hypothesis sampling and
/// linking sample count.
pub fn two_solution_certificate_with(
    ctx: &FunctionalContext,
    cfg: &SolverConfig,
    sampling: &Sampling,
    linking_samples: usize,
) -> Result<Certificate> {
    cfg.validate()?;
    let hypotheses = check_hypotheses(
        ctx.potential(),
        &ctx.params().hypothesis_constants(),
        sampling,
    );
    let linking = verify_linking_geometry(ctx, cfg, linking_samples)?;
    let maximum = maximize_i(ctx, cfg);
    let records = find_critical_points(ctx, cfg)?;

    let sigma = linking.sigma;
    let qualifying: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            r.classification == Classification::Nonconstant
                && (r.value > 0.0 || r.value >= sigma - LINKING_SLACK)
        })
        .map(|(i, _)| i)
        .collect();
    let mut orbit_ids: Vec<usize> = qualifying.iter().map(|&i| records[i].orbit_id).collect();
    orbit_ids.sort_unstable();
    orbit_ids.dedup();
    let distinct_orbits = orbit_ids.len();

    let c0 = maximum.as_ref().ok().map(|r| r.value);
    let top = qualifying
        .iter()
        .map(|&i| records[i].value)
        .fold(f64::NEG_INFINITY, f64::max);
    let case = if qualifying.is_empty() {
        ProofCase::NoQualifyingPoints
    } else if qualifying
        .iter()
        .any(|&i| records[i].value < top - 1e-9 * (1.0 + top.abs()))
    {
        ProofCase::MinimaxBelowMaximum
    } else {
        ProofCase::MinimaxEqualsMaximum
    };

    let mut components = Vec::new();
    for h in hypotheses.iter().filter(|h| h.id != HypothesisId::D4) {
        components.push(component(
            &format!("hypothesis {:?}", h.id),
            h.passed(),
            format!("{} samples, {} violations", h.samples, h.violations.len()),
        ));
    }
    components.push(component(
        "linking A1",
        linking.a1_ok,
        format!(
            "min I on sphere {:e} vs sigma {:e}",
            linking.a1_min_on_sphere, sigma
        ),
    ));
    components.push(component(
        "linking A2",
        linking.a2_ok,
        format!(
            "max I on boundary {:e} at R = {}",
            linking.a2_max_on_boundary, linking.r_outer
        ),
    ));
    components.push(component(
        "maximizer",
        maximum.is_ok(),
        match &maximum {
            Ok(r) => format!("c0 = {:e}", r.value),
            Err(e) => e.to_string(),
        },
    ));
    components.push(component(
        "two nontrivial orbits",
        distinct_orbits >= 2,
        format!(
            "{} qualifying records in {distinct_orbits} orbits",
            qualifying.len()
        ),
    ));
    let worst_grad = records.iter().map(|r| r.grad_norm).fold(0.0, f64::max);
    components.push(component(
        "gradient tolerance",
        worst_grad <= cfg.grad_tol,
        format!("max gradient norm {worst_grad:e}"),
    ));
    let worst_n0 = qualifying
        .iter()
        .map(|&i| records[i].residual.at_n0.abs())
        .fold(0.0, f64::max);
    components.push(component(
        "residual at n0",
        worst_n0 <= 10.0 * cfg.grad_tol,
        format!("max |r_n0| {worst_n0:e}"),
    ));

    let failing: Vec<String> = components
        .iter()
        .filter(|c| !c.ok)
        .map(|c| c.name.clone())
        .collect();
    let verdict = if failing.is_empty() {
        CertificateVerdict::CertifiedAtDeskScale
    } else {
        CertificateVerdict::Fail(failing)
    };

    Ok(Certificate {
        hypotheses,
        linking,
        c0,
        records,
        qualifying,
        distinct_orbits,
        case,
        components,
        verdict,
    })
}
