//! The five subcommands. Each returns an [`Outcome`] whose `passed` flag
//! decides between exit status 0 and 1.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use hamlink_core::io::{fmt17, parse_sequences, write_sequences};
use hamlink_core::solver::{linking_direction, orbit_representatives, verify_linking_geometry_at};
use hamlink_core::spectral::SPECTRUM_TOL;
use hamlink_core::{
    check_hypotheses, dedupe_orbits, spectrum_a, two_solution_certificate_with, Certificate,
    Classification, CriticalPointRecord, FunctionalContext, PeriodicSequence,
};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::json::{self, classification_label, num, render, verdict_label};
use crate::{CliError, Command};

pub const SOLUTIONS_FILE: &str = "solutions.csv";
pub const SOLUTIONS_META_FILE: &str = "solutions_meta.csv";
pub const RESULTS_FILE: &str = "results.json";
pub const RUN_META_FILE: &str = "run_meta.json";
pub const HYPOTHESES_FILE: &str = "hypotheses.json";
pub const VERIFY_FILE: &str = "verify.json";
pub const REPORT_FILE: &str = "report.txt";
pub const RAYS_FILE: &str = "rays.csv";
pub const SECTION_FILE: &str = "section.csv";

/// Largest stored-versus-recomputed difference `verify` accepts.
pub const DRIFT_TOL: f64 = 1e-9;

const META_HEADER: &str =
    "index,value,grad_norm,morse_index,near_null,orbit_id,classification,residual_n0,residual_max";

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// Human-readable lines for stdout.
    pub summary: String,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }
}

fn core_err(e: hamlink_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

pub fn execute(command: Command, cfg: &RunConfig, threads: usize) -> Result<Outcome, CliError> {
    let ctx = cfg.context()?;
    let mut out = Writer::new(&cfg.output_dir)?;
    let (passed, summary) = match command {
        Command::Spectra => spectra(&ctx, &mut out)?,
        Command::Check => check(&ctx, cfg, &mut out)?,
        Command::Solve => solve(&ctx, cfg, threads, &mut out)?,
        Command::Verify => verify(&ctx, cfg, &mut out)?,
        Command::Report => report(&ctx, cfg, &mut out)?,
    };
    Ok(Outcome {
        passed,
        files: out.files,
        summary,
    })
}

fn eigen_csv(values: &[f64], vectors: &DMatrix<f64>) -> String {
    let m = values.len();
    let mut s = String::from("eigenvalue");
    for k in 1..=m {
        write!(s, ",v{k}").unwrap();
    }
    s.push('\n');
    for (j, &lambda) in values.iter().enumerate() {
        s.push_str(&fmt17(lambda));
        for i in 0..m {
            s.push(',');
            s.push_str(&fmt17(vectors[(i, j)]));
        }
        s.push('\n');
    }
    s
}

fn basis_csv(m: usize, basis: &[nalgebra::DVector<f64>]) -> String {
    let header: Vec<String> = (1..=m).map(|k| format!("v{k}")).collect();
    let mut s = header.join(",");
    s.push('\n');
    for v in basis {
        let row: Vec<String> = v.iter().map(|&x| fmt17(x)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn spectra(ctx: &FunctionalContext, out: &mut Writer) -> Result<(bool, String), CliError> {
    let sd = ctx.spectral();
    let m = sd.m;
    let ea = sd.eigen_a();
    let el = sd.eigen_l();
    out.write("spectra_A.csv", &eigen_csv(&ea.values, &ea.vectors))?;
    out.write("spectra_L.csv", &eigen_csv(&el.values, &el.vectors))?;
    out.write("basis_Y.csv", &basis_csv(m, &sd.basis_y))?;
    out.write("basis_Z.csv", &basis_csv(m, &sd.basis_z))?;

    let closed = spectrum_a(m).map_err(core_err)?;
    let a_err = ea
        .values
        .iter()
        .zip(&closed.eigs)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let mut expected_l = vec![0.0];
    expected_l.extend(std::iter::repeat_n(1.0, m - 2));
    expected_l.push(2.0);
    let l_err = el
        .values
        .iter()
        .zip(&expected_l)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let passed = a_err <= SPECTRUM_TOL && l_err <= SPECTRUM_TOL;
    let summary = format!(
        "spectra: M = {m}, lambda_min = {}, gamma_min = {}\n  A vs closed form: max error {a_err:.3e}\n  L vs {{0, 1, 2}}: max error {l_err:.3e}\n  verdict: {}\n",
        fmt17(sd.lambda_min),
        fmt17(sd.gamma_min),
        if passed { "pass" } else { "fail" },
    );
    Ok((passed, summary))
}

fn check(
    ctx: &FunctionalContext,
    cfg: &RunConfig,
    out: &mut Writer,
) -> Result<(bool, String), CliError> {
    let constants = ctx.params().hypothesis_constants();
    let reports = check_hypotheses(ctx.potential(), &constants, &cfg.sampling);
    let doc = json!({
        "constants": {
            "b": num(constants.b),
            "delta": num(constants.delta),
            "d1": num(constants.d1),
            "d2": num(constants.d2),
            "beta": num(constants.beta),
        },
        "sampling": json::sampling(&cfg.sampling),
        "potential": ctx.potential().describe(),
        "reports": json::hypotheses(&reports),
    });
    out.write(HYPOTHESES_FILE, &render(&doc))?;
    let passed = reports.iter().all(|r| r.passed());
    let mut summary = String::from("check:\n");
    for r in &reports {
        write!(
            summary,
            "  {:?}: {} ({} samples, {} violations)",
            r.id,
            verdict_label(r.verdict),
            r.samples,
            r.violations.len()
        )
        .unwrap();
        if let Some(v) = r.violations.first() {
            write!(
                summary,
                "; witness n = {}, (x, y, z) = ({}, {}, {}), lhs = {}, rhs = {}",
                v.n,
                fmt17(v.point[0]),
                fmt17(v.point[1]),
                fmt17(v.point[2]),
                fmt17(v.lhs),
                fmt17(v.rhs)
            )
            .unwrap();
        }
        summary.push('\n');
    }
    Ok((passed, summary))
}

fn certificate(ctx: &FunctionalContext, cfg: &RunConfig) -> Result<Certificate, CliError> {
    two_solution_certificate_with(ctx, &cfg.solver, &cfg.sampling, cfg.linking_samples)
        .map_err(core_err)
}

fn meta_csv(records: &[CriticalPointRecord]) -> String {
    let mut s = String::from(META_HEADER);
    s.push('\n');
    for (i, r) in records.iter().enumerate() {
        writeln!(
            s,
            "{i},{},{},{},{},{},{},{},{}",
            fmt17(r.value),
            fmt17(r.grad_norm),
            r.morse.index,
            r.morse.near_null,
            r.orbit_id,
            classification_label(r.classification),
            fmt17(r.residual.at_n0),
            fmt17(r.residual.max_abs),
        )
        .unwrap();
    }
    s
}

fn certificate_summary(cert: &Certificate) -> String {
    let mut s = String::new();
    for k in &cert.components {
        writeln!(
            s,
            "  [{}] {}: {}",
            if k.ok { "ok" } else { "FAIL" },
            k.name,
            k.detail
        )
        .unwrap();
    }
    writeln!(
        s,
        "  verdict: {}",
        if cert.certified() {
            "certified at desk scale"
        } else {
            "fail"
        }
    )
    .unwrap();
    s
}

fn solve(
    ctx: &FunctionalContext,
    cfg: &RunConfig,
    threads: usize,
    out: &mut Writer,
) -> Result<(bool, String), CliError> {
    let cert = certificate(ctx, cfg)?;
    let extra = match cfg.linking_rho {
        Some(rho) => Some(
            verify_linking_geometry_at(ctx, &cfg.solver, cfg.linking_samples, rho)
                .map_err(core_err)?,
        ),
        None => None,
    };
    let mut linking = json::linking(&cert.linking);
    if let Some(l) = &extra {
        linking["at_configured_rho"] = json::linking(l);
    }
    let doc = json!({
        "config": json::config_echo(cfg),
        "spectral": json::spectral(ctx),
        "hypotheses": json::hypotheses(&cert.hypotheses),
        "solutions": cert.records.iter().enumerate().map(|(i, r)| json::record(i, r)).collect::<Vec<Value>>(),
        "linking": linking,
        "certificate": json::certificate(&cert),
    });
    out.write(RESULTS_FILE, &render(&doc))?;
    out.write(
        SOLUTIONS_FILE,
        &write_sequences(cert.records.iter().map(|r| &r.point)),
    )?;
    out.write(SOLUTIONS_META_FILE, &meta_csv(&cert.records))?;
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let meta = json!({
        "command": "solve",
        "unix_time": stamp,
        "threads": threads,
        "version": env!("CARGO_PKG_VERSION"),
    });
    out.write(RUN_META_FILE, &render(&meta))?;

    let extra_ok = extra.as_ref().is_none_or(|l| l.a1_ok && l.a2_ok);
    let passed = cert.certified() && extra_ok;
    let mut summary = format!(
        "solve: {} critical points, {} qualifying in {} orbits, c0 = {}\n",
        cert.records.len(),
        cert.qualifying.len(),
        cert.distinct_orbits,
        cert.c0.map_or("none".to_string(), fmt17),
    );
    if let Some(l) = &extra {
        writeln!(
            summary,
            "  linking at rho = {}: A1 {}, A2 {}",
            fmt17(l.rho),
            l.a1_ok,
            l.a2_ok
        )
        .unwrap();
    }
    summary.push_str(&certificate_summary(&cert));
    Ok((passed, summary))
}

struct StoredMeta {
    value: f64,
    grad_norm: f64,
    morse_index: usize,
    near_null: usize,
    orbit_id: usize,
    classification: String,
    residual_n0: f64,
    residual_max: f64,
}

fn parse_meta(text: &str, path: &Path) -> Result<Vec<StoredMeta>, CliError> {
    let bad = |line: usize, what: &str| CliError::Io {
        path: path.to_path_buf(),
        reason: format!("line {line}: {what}"),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == META_HEADER => {}
        _ => return Err(bad(1, "unexpected header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad(i + 1, "expected 9 fields"));
        }
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "malformed number"));
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(i + 1, "malformed integer"))
        };
        out.push(StoredMeta {
            value: real(f[1])?,
            grad_norm: real(f[2])?,
            morse_index: int(f[3])?,
            near_null: int(f[4])?,
            orbit_id: int(f[5])?,
            classification: f[6].to_string(),
            residual_n0: real(f[7])?,
            residual_max: real(f[8])?,
        });
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn verify(
    ctx: &FunctionalContext,
    cfg: &RunConfig,
    out: &mut Writer,
) -> Result<(bool, String), CliError> {
    let sol_path = cfg.output_dir.join(SOLUTIONS_FILE);
    let meta_path = cfg.output_dir.join(SOLUTIONS_META_FILE);
    let points = parse_sequences(&read(&sol_path)?, ctx.m()).map_err(|e| CliError::Io {
        path: sol_path.clone(),
        reason: e.to_string(),
    })?;
    let stored = parse_meta(&read(&meta_path)?, &meta_path)?;
    if points.len() != stored.len() {
        return Err(CliError::Io {
            path: meta_path,
            reason: format!(
                "{} metadata rows for {} solutions",
                stored.len(),
                points.len()
            ),
        });
    }
    let fresh: Vec<CriticalPointRecord> = points
        .into_iter()
        .map(|p| CriticalPointRecord::evaluate(ctx, p))
        .collect();
    let fresh = dedupe_orbits(fresh, ctx.potential().symmetry(), cfg.solver.merge_tol);

    let mut drift: f64 = 0.0;
    let mut mismatches = Vec::new();
    let mut rows = Vec::new();
    for (i, (r, s)) in fresh.iter().zip(&stored).enumerate() {
        let d = [
            (r.value - s.value).abs(),
            (r.grad_norm - s.grad_norm).abs(),
            (r.residual.at_n0 - s.residual_n0).abs(),
            (r.residual.max_abs - s.residual_max).abs(),
        ];
        let row_drift = d.iter().copied().fold(0.0, f64::max);
        drift = drift.max(row_drift);
        let discrete_ok = r.morse.index == s.morse_index
            && r.morse.near_null == s.near_null
            && r.orbit_id == s.orbit_id
            && classification_label(r.classification) == s.classification;
        if !discrete_ok {
            mismatches.push(i);
        }
        rows.push(json!({
            "index": i,
            "drift": num(row_drift),
            "discrete_fields_match": discrete_ok,
        }));
    }
    let passed = drift <= DRIFT_TOL && mismatches.is_empty();
    let doc = json!({
        "records": fresh.len(),
        "max_drift": num(drift),
        "tolerance": num(DRIFT_TOL),
        "mismatched_records": mismatches,
        "rows": rows,
        "verdict": if passed { "pass" } else { "fail" },
    });
    out.write(VERIFY_FILE, &render(&doc))?;
    let summary = format!(
        "verify: {} records, max drift {:.3e} (tolerance {:.0e}), {} discrete mismatches\n  verdict: {}\n",
        fresh.len(),
        drift,
        DRIFT_TOL,
        mismatches.len(),
        if passed { "pass" } else { "fail" },
    );
    Ok((passed, summary))
}

fn unit(u: &PeriodicSequence) -> Option<PeriodicSequence> {
    let n = u.norm();
    (n > 0.0).then(|| u.scaled(1.0 / n))
}

fn combine(a: &PeriodicSequence, s: f64, b: &PeriodicSequence, t: f64) -> PeriodicSequence {
    let v: Vec<f64> = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| s * x + t * y)
        .collect();
    PeriodicSequence::new(v).expect("period already validated")
}

fn report(
    ctx: &FunctionalContext,
    cfg: &RunConfig,
    out: &mut Writer,
) -> Result<(bool, String), CliError> {
    let cert = certificate(ctx, cfg)?;
    let m = ctx.m();
    let sd = ctx.spectral();
    let opts = &cfg.report;
    let e = linking_direction(ctx, cfg.solver.seed);
    let z: Vec<PeriodicSequence> = sd
        .basis_z
        .iter()
        .map(|v| PeriodicSequence::new(v.iter().copied().collect()).expect("basis has period m"))
        .collect();

    let mut rays: Vec<(String, PeriodicSequence)> = vec![
        ("e".into(), e.clone()),
        ("-e".into(), e.scaled(-1.0)),
        ("z1".into(), z[0].clone()),
        ("z2".into(), z[1].clone()),
    ];
    for r in orbit_representatives(&cert.records) {
        if r.classification == Classification::Trivial {
            continue;
        }
        if let Some(d) = unit(&r.point) {
            rays.push((format!("orbit{}", r.orbit_id), d));
        }
    }
    let mut rays_csv = String::from("ray,t,value\n");
    for (label, d) in &rays {
        for k in 0..opts.ray_points {
            let t = opts.ray_max * k as f64 / (opts.ray_points - 1) as f64;
            writeln!(
                rays_csv,
                "{label},{},{}",
                fmt17(t),
                fmt17(ctx.i_value(&d.scaled(t)))
            )
            .unwrap();
        }
    }
    out.write(RAYS_FILE, &rays_csv)?;

    let mut section_csv = String::from("section,s,t,value\n");
    let n = opts.section_points;
    let r = opts.section_radius;
    for (k, zk) in z.iter().enumerate() {
        for i in 0..n {
            let s = -r + 2.0 * r * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let t = -r + 2.0 * r * j as f64 / (n - 1) as f64;
                let u = combine(zk, s, &e, t);
                writeln!(
                    section_csv,
                    "z{}+e,{},{},{}",
                    k + 1,
                    fmt17(s),
                    fmt17(t),
                    fmt17(ctx.i_value(&u))
                )
                .unwrap();
            }
        }
    }
    out.write(SECTION_FILE, &section_csv)?;

    let p = ctx.params();
    let mut text = String::new();
    writeln!(text, "hamlink report").unwrap();
    writeln!(text).unwrap();
    writeln!(
        text,
        "model: M = {m}, n0 = {}, b = {}, beta = {}, delta = {}, d1 = {}, d2 = {}",
        p.n0, p.b, p.beta, p.delta, p.d1, p.d2
    )
    .unwrap();
    writeln!(text, "potential: {}", ctx.potential().describe()).unwrap();
    writeln!(
        text,
        "lambda_min = {}, gamma_min = {}, rho = {}, sigma = {}",
        fmt17(sd.lambda_min),
        fmt17(sd.gamma_min),
        fmt17(cert.linking.rho),
        fmt17(cert.linking.sigma)
    )
    .unwrap();
    writeln!(text).unwrap();
    writeln!(text, "hypotheses:").unwrap();
    for h in &cert.hypotheses {
        writeln!(
            text,
            "  {:?}: {} ({} samples, {} violations)",
            h.id,
            verdict_label(h.verdict),
            h.samples,
            h.violations.len()
        )
        .unwrap();
    }
    writeln!(text).unwrap();
    writeln!(
        text,
        "linking: min I on sphere = {}, max I on boundary = {} at R = {}",
        fmt17(cert.linking.a1_min_on_sphere),
        fmt17(cert.linking.a2_max_on_boundary),
        fmt17(cert.linking.r_outer)
    )
    .unwrap();
    writeln!(text).unwrap();
    writeln!(text, "critical points ({}):", cert.records.len()).unwrap();
    writeln!(
        text,
        "  {:>4} {:>24} {:>10} {:>6} {:>6} {:>16}",
        "#", "I", "|grad|", "morse", "orbit", "class"
    )
    .unwrap();
    for (i, r) in cert.records.iter().enumerate() {
        writeln!(
            text,
            "  {:>4} {:>24} {:>10.2e} {:>6} {:>6} {:>16}",
            i,
            fmt17(r.value),
            r.grad_norm,
            r.morse.index,
            r.orbit_id,
            classification_label(r.classification)
        )
        .unwrap();
    }
    writeln!(text).unwrap();
    writeln!(text, "certificate:").unwrap();
    text.push_str(&certificate_summary(&cert));
    writeln!(text).unwrap();
    writeln!(
        text,
        "plot data: {RAYS_FILE} (I along rays), {SECTION_FILE} (I over s*z_k + t*e)"
    )
    .unwrap();
    out.write(REPORT_FILE, &text)?;

    Ok((cert.certified(), text))
}
