//! Run configuration: a TOML document with flat model keys and optional
//! `[solver]`, `[sampling]`, `[linking]` and `[report]` tables.

use std::path::{Path, PathBuf};

use hamlink_core::spectral::lambda_min;
use hamlink_core::{
    FunctionalContext, FunctionalParams, PotentialSpec, Sampling, SolverConfig, TableDefinition,
};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_N0: usize = 3;
pub const DEFAULT_D2: f64 = 0.01;
pub const DEFAULT_DELTA: f64 = 0.25;
pub const DEFAULT_OUTPUT_DIR: &str = "hamlink-out";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    m: usize,
    #[serde(default)]
    n0: Option<usize>,
    b: f64,
    beta: f64,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    d1: Option<f64>,
    #[serde(default)]
    d2: Option<f64>,
    potential: toml::Value,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    sampling: RawSampling,
    #[serde(default)]
    linking: RawLinking,
    #[serde(default)]
    report: RawReport,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    restarts: Option<usize>,
    seed: Option<u64>,
    grad_tol: Option<f64>,
    max_iters: Option<usize>,
    merge_tol: Option<f64>,
    init_radius: Option<f64>,
    shrink: Option<f64>,
    sufficient_increase: Option<f64>,
    y_seeds: Option<usize>,
    z_seeds: Option<usize>,
    deflation_rounds: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    grid: Option<usize>,
    random: Option<usize>,
    radius_min: Option<f64>,
    radius_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinking {
    samples: Option<usize>,
    rho: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReport {
    ray_points: Option<usize>,
    ray_max: Option<f64>,
    section_points: Option<usize>,
    section_radius: Option<f64>,
}

/// Where the potential came from, echoed into results.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSource {
    Example31,
    File(PathBuf),
    Inline,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub ray_points: usize,
    pub ray_max: f64,
    pub section_points: usize,
    pub section_radius: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: FunctionalParams,
    pub potential: PotentialSpec,
    pub potential_source: PotentialSource,
    pub solver: SolverConfig,
    /// Grid sizes and radii for the hypothesis checks; the seed follows `solver.seed`.
    pub sampling: Sampling,
    pub linking_samples: usize,
    /// Extra linking radius checked besides the default `min(√δ, δ)`.
    pub linking_rho: Option<f64>,
    pub output_dir: PathBuf,
    pub report: ReportOptions,
}

impl RunConfig {
    pub fn context(&self) -> Result<FunctionalContext, CliError> {
        FunctionalContext::new(self.params, self.potential.clone())
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.solver.seed = seed;
        self.sampling.seed = seed;
    }
}

fn config_err(e: serde_path_to_error::Error<toml::de::Error>) -> CliError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    let msg = inner.message().trim().to_string();
    if path.is_empty() || path == "." {
        CliError::Config(msg)
    } else {
        CliError::Config(format!("{path}: {msg}"))
    }
}

/// Parse and validate a configuration document. Relative potential paths
/// resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| CliError::Config(e.message().trim().to_string()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(config_err)?;

    if raw.m < hamlink_core::sequence::MIN_PERIOD {
        return Err(CliError::Config("m: must be ≥ 5".into()));
    }
    let params = FunctionalParams {
        m: raw.m,
        n0: raw.n0.unwrap_or(DEFAULT_N0),
        b: raw.b,
        beta: raw.beta,
        d1: raw.d1.unwrap_or(raw.b * lambda_min(raw.m)),
        d2: raw.d2.unwrap_or(DEFAULT_D2),
        delta: raw.delta.unwrap_or(DEFAULT_DELTA),
    };
    params
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut solver = SolverConfig::default();
    let s = raw.solver;
    macro_rules! take {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }
    take!(solver.restarts, s.restarts);
    take!(solver.seed, s.seed);
    take!(solver.grad_tol, s.grad_tol);
    take!(solver.max_iters, s.max_iters);
    take!(solver.merge_tol, s.merge_tol);
    take!(solver.shrink, s.shrink);
    take!(solver.sufficient_increase, s.sufficient_increase);
    take!(solver.y_seeds, s.y_seeds);
    take!(solver.z_seeds, s.z_seeds);
    take!(solver.deflation_rounds, s.deflation_rounds);
    solver.init_radius = s.init_radius;
    solver
        .validate()
        .map_err(|e| CliError::Config(format!("solver.{e}")))?;

    let mut sampling = Sampling {
        seed: solver.seed,
        ..Sampling::default()
    };
    take!(sampling.grid, raw.sampling.grid);
    take!(sampling.random, raw.sampling.random);
    take!(sampling.radius_min, raw.sampling.radius_min);
    take!(sampling.radius_max, raw.sampling.radius_max);
    if sampling.grid < 2 {
        return Err(CliError::Config("sampling.grid: must be ≥ 2".into()));
    }
    if sampling.random == 0 {
        return Err(CliError::Config("sampling.random: must be > 0".into()));
    }
    if !(sampling.radius_min > 0.0 && sampling.radius_min < sampling.radius_max) {
        return Err(CliError::Config(
            "sampling.radius_min: must satisfy 0 < radius_min < radius_max".into(),
        ));
    }

    let linking_samples = raw
        .linking
        .samples
        .unwrap_or(hamlink_core::solver::LINKING_SAMPLES);
    if linking_samples < 1000 {
        return Err(CliError::Config("linking.samples: must be ≥ 1000".into()));
    }
    if let Some(r) = raw.linking.rho {
        if !(r > 0.0 && r.is_finite()) {
            return Err(CliError::Config("linking.rho: must be > 0".into()));
        }
    }

    let report = ReportOptions {
        ray_points: raw.report.ray_points.unwrap_or(201),
        ray_max: raw.report.ray_max.unwrap_or(20.0),
        section_points: raw.report.section_points.unwrap_or(41),
        section_radius: raw.report.section_radius.unwrap_or(10.0),
    };
    if report.ray_points < 2 {
        return Err(CliError::Config("report.ray_points: must be ≥ 2".into()));
    }
    if report.section_points < 2 {
        return Err(CliError::Config(
            "report.section_points: must be ≥ 2".into(),
        ));
    }
    if !(report.ray_max > 0.0) {
        return Err(CliError::Config("report.ray_max: must be > 0".into()));
    }
    if !(report.section_radius > 0.0) {
        return Err(CliError::Config(
            "report.section_radius: must be > 0".into(),
        ));
    }

    let (potential, potential_source) = load_potential(&raw.potential, &params, base_dir)?;
    if potential.period() != params.m {
        return Err(CliError::Config(format!(
            "potential: period {} does not match m = {}",
            potential.period(),
            params.m
        )));
    }

    Ok(RunConfig {
        params,
        potential,
        potential_source,
        solver,
        sampling,
        linking_samples,
        linking_rho: raw.linking.rho,
        output_dir: raw
            .output_dir
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        report,
    })
}

fn load_potential(
    value: &toml::Value,
    params: &FunctionalParams,
    base_dir: &Path,
) -> Result<(PotentialSpec, PotentialSource), CliError> {
    match value {
        toml::Value::String(s) if s == "example31" => {
            let f = PotentialSpec::example31(params.b, params.beta, params.m)
                .map_err(|e| CliError::Config(format!("potential: {e}")))?;
            Ok((f, PotentialSource::Example31))
        }
        toml::Value::String(s) => {
            let path = base_dir.join(s);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            let f = parse_potential(&text)?;
            Ok((f, PotentialSource::File(PathBuf::from(s))))
        }
        toml::Value::Table(_) => {
            let def: TableDefinition =
                serde_path_to_error::deserialize(value.clone()).map_err(|e| {
                    let path = e.path().to_string();
                    CliError::Config(format!(
                        "potential.{path}: {}",
                        e.into_inner().message().trim()
                    ))
                })?;
            let f = PotentialSpec::table(def)
                .map_err(|e| CliError::Config(format!("potential: {e}")))?;
            Ok((f, PotentialSource::Inline))
        }
        _ => Err(CliError::Config(
            "potential: must be \"example31\", a file path, or an inline table".into(),
        )),
    }
}

/// Parse a potential definition document (`period` plus `[[terms]]`).
pub fn parse_potential(text: &str) -> Result<PotentialSpec, CliError> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| CliError::Config(format!("potential: {}", e.message().trim())))?;
    let def: TableDefinition = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!(
            "potential.{path}: {}",
            e.into_inner().message().trim()
        ))
    })?;
    PotentialSpec::table(def).map_err(|e| CliError::Config(format!("potential: {e}")))
}
