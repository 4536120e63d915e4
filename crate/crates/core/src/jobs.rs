//! Job files and artifact export.
//!
//! A job is a strict JSON document (unknown keys are rejected) naming a
//! command, a reaction term and the solver, classifier and threshold knobs.
//! [`execute`] writes the artifacts for the command into the output
//! directory and maps the outcome to a process exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classifier::{self, Classifier, ClassifierTolerances, ThresholdOptions, Verdict};
use crate::error::{Error, Result};
use crate::nonlinearity::{Nonlinearity, NonlinearitySpec};
use crate::par;
use crate::semiwave;
use crate::solver::{self, InitialData, Run, SolverConfig, SolverParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Semiwave,
    Threshold,
    Sweep,
}

/// Axes of a parameter sweep; an empty axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub h0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub nonlinearity: NonlinearitySpec,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default = "one")]
    pub h0: f64,
    #[serde(default = "default_initial")]
    pub initial: InitialData,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub classifier: ClassifierTolerances,
    #[serde(default)]
    pub threshold: ThresholdOptions,
    #[serde(default)]
    pub sweep: SweepAxes,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_plot_data: bool,
}

fn one() -> f64 {
    1.0
}

fn default_initial() -> InitialData {
    InitialData::CosineBump { sigma: 1.0 }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { location: location.into(), message: message.into() }
}

impl JobConfig {
    /// Checks that need more than the schema: the reaction term builds,
    /// parameters are in range, sweep axes are usable.
    pub fn validate(&self) -> Result<Nonlinearity> {
        match &self.nonlinearity {
            NonlinearitySpec::CubicBistable { theta } | NonlinearitySpec::Combustion { theta }
                if !(*theta > 0.0 && *theta < 1.0) =>
            {
                return Err(parse_err("nonlinearity.theta", format!("theta = {theta} not in (0, 1)")));
            }
            _ => {}
        }
        let nl = self.nonlinearity.build().map_err(|e| parse_err("nonlinearity", e.to_string()))?;
        let base = SolverConfig { nl: nl.clone(), mu: self.mu, h0: self.h0, u0: self.initial.clone(), params: self.solver.clone() };
        base.validate().map_err(|e| parse_err("solver", e.to_string()))?;
        let y = solver::y_grid(self.solver.n);
        self.initial.sample(self.h0, &y).map_err(|e| parse_err("initial", e.to_string()))?;
        if self.command == Command::Sweep
            && self.sweep.mu.is_empty()
            && self.sweep.sigma.is_empty()
            && self.sweep.h0.is_empty()
        {
            return Err(parse_err("sweep", "a sweep needs at least one non-empty axis"));
        }
        for (name, axis) in [("sweep.mu", &self.sweep.mu), ("sweep.sigma", &self.sweep.sigma), ("sweep.h0", &self.sweep.h0)] {
            if let Some(v) = axis.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(parse_err(name, format!("value {v} must be positive")));
            }
        }
        Ok(nl)
    }

    /// One `(mu, sigma, h0)` triple per sweep point, in row-major order
    /// (mu outermost).
    pub fn sweep_points(&self) -> Vec<(f64, f64, f64)> {
        let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
        let mus = or(&self.sweep.mu, self.mu);
        let sigmas = or(&self.sweep.sigma, self.initial.sigma());
        let h0s = or(&self.sweep.h0, self.h0);
        let mut out = Vec::with_capacity(mus.len() * sigmas.len() * h0s.len());
        for &m in &mus {
            for &s in &sigmas {
                for &h in &h0s {
                    out.push((m, s, h));
                }
            }
        }
        out
    }
}

/// Parse and validate a job from JSON text.
pub fn parse_config_str(text: &str) -> Result<JobConfig> {
    let job: JobConfig = serde_json::from_str(text).map_err(|e| {
        parse_err(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    job.validate()?;
    Ok(job)
}

/// Parse and validate a job file.
pub fn parse_config(path: &Path) -> Result<JobConfig> {
    let text = fs::read_to_string(path).map_err(|e| parse_err(path.display().to_string(), e.to_string()))?;
    parse_config_str(&text)
}

/// Process exit code for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

/// `t,g,h,gprime,hprime`
pub fn fronts_csv(run: &Run) -> String {
    let mut s = String::from("t,g,h,gprime,hprime\n");
    for f in &run.fronts {
        let _ = writeln!(s, "{},{},{},{},{}", f.t, f.g, f.h, f.gprime, f.hprime);
    }
    s
}

/// Long format `t,y,x,u`.
pub fn snapshots_csv(run: &Run) -> String {
    let mut s = String::from("t,y,x,u\n");
    for snap in &run.snapshots {
        let y = solver::y_grid(snap.u.len());
        for (yj, uj) in y.iter().zip(&snap.u) {
            let _ = writeln!(s, "{},{},{},{}", snap.t, yj, snap.x(*yj), uj);
        }
    }
    s
}

/// `t,h_over_t,minus_g_over_t` for `t > 0`.
pub fn front_speed_csv(run: &Run) -> String {
    let mut s = String::from("t,h_over_t,minus_g_over_t\n");
    for f in run.fronts.iter().filter(|f| f.t > 0.0) {
        let _ = writeln!(s, "{},{},{}", f.t, f.h / f.t, -f.g / f.t);
    }
    s
}

fn verdict_json(v: &Verdict) -> serde_json::Value {
    json!({
        "outcome": v.outcome,
        "certificate": v.certificate,
        "evidence": v.evidence,
    })
}

/// Write the artifacts of one simulation into `dir`.
fn write_run(dir: &Path, run: &Run, verdict: &Verdict, emit_plot_data: bool, elapsed: f64) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("fronts.csv"), fronts_csv(run))?;
    fs::write(dir.join("snapshots.csv"), snapshots_csv(run))?;
    if emit_plot_data {
        fs::write(dir.join("front_speed.csv"), front_speed_csv(run))?;
    }
    write_json(&dir.join("verdict.json"), &verdict_json(verdict))?;
    let report = json!({
        "config_hash": run.config_hash,
        "termination": run.termination,
        "certificate": run.certificate,
        "steps": run.steps,
        "t_end": run.t_end(),
        "checks": run.checks,
        "checks_hold": run.checks.all_hold(),
        "warnings": run.warnings,
        "meta": {
            "version": env!("CARGO_PKG_VERSION"),
            "elapsed_seconds": elapsed,
        },
    });
    write_json(&dir.join("report.json"), &report)
}

/// Row of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub sigma: f64,
    pub h0: f64,
    pub verdict: String,
    pub c_hat: Option<f64>,
    pub max_u: Option<f64>,
    pub final_width: Option<f64>,
}

pub fn summary_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = String::from("mu,sigma,h0,verdict,c_hat,max_u,final_width\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.mu,
            r.sigma,
            r.h0,
            r.verdict,
            opt(r.c_hat),
            opt(r.max_u),
            opt(r.final_width)
        );
    }
    s
}

/// Run the job, writing artifacts under `out` (or the configured
/// directory). Returns the process exit code.
pub fn execute(job: &JobConfig, out: Option<&Path>, workers: Option<usize>) -> i32 {
    match execute_inner(job, out, workers) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            exit_code(&e)
        }
    }
}

fn execute_inner(job: &JobConfig, out: Option<&Path>, workers: Option<usize>) -> Result<i32> {
    let nl = job.validate()?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| job.output_dir.clone());
    fs::create_dir_all(&dir)?;
    write_json(&dir.join("config.json"), job)?;
    match job.command {
        Command::Simulate => {
            let start = Instant::now();
            let cfg = SolverConfig { nl: nl.clone(), mu: job.mu, h0: job.h0, u0: job.initial.clone(), params: job.solver.clone() };
            let run = solver::run(&cfg)?;
            let verdict = Classifier::new(&nl, job.classifier.clone())?.classify(&run);
            write_run(&dir, &run, &verdict, job.emit_plot_data, start.elapsed().as_secs_f64())?;
            Ok(0)
        }
        Command::Semiwave => {
            let sw = semiwave::c_star(&nl, job.mu)?;
            write_json(
                &dir.join("semiwave.json"),
                &json!({ "c0": sw.c0, "c_star": sw.c_star, "mu": sw.mu, "omega_star": sw.omega_star }),
            )?;
            let mut s = String::from("z,q\n");
            for (z, q) in &sw.profile {
                let _ = writeln!(s, "{z},{q}");
            }
            fs::write(dir.join("profile.csv"), s)?;
            Ok(0)
        }
        Command::Threshold => {
            let res = par::with_workers(workers, || {
                classifier::sigma_star(&nl, job.mu, job.h0, &job.initial, &job.solver, &job.classifier, &job.threshold)
            })?;
            let evals: Vec<_> = res
                .evals
                .iter()
                .map(|e| json!({ "sigma": e.sigma, "outcome": e.verdict.outcome, "certificate": e.verdict.certificate }))
                .collect();
            write_json(
                &dir.join("threshold.json"),
                &json!({
                    "sigma_lo": res.sigma_lo,
                    "sigma_hi": finite_or_null(res.sigma_hi),
                    "width": finite_or_null(res.width),
                    "budget_hit": res.budget_hit,
                    "stalled": res.stalled,
                    "evals": evals,
                }),
            )?;
            Ok(0)
        }
        Command::Sweep => {
            let points = job.sweep_points();
            let classifier = Classifier::new(&nl, job.classifier.clone())?;
            let indexed: Vec<(usize, (f64, f64, f64))> = points.into_iter().enumerate().collect();
            let rows: Vec<(SweepRow, Option<Error>)> = par::with_workers(workers, || {
                par::map(&indexed, |&(i, (mu, sigma, h0))| {
                    let sub = dir.join(format!("run_{:04}", i + 1));
                    let start = Instant::now();
                    let cfg = SolverConfig { nl: nl.clone(), mu, h0, u0: job.initial.with_sigma(sigma), params: job.solver.clone() };
                    let mut row = SweepRow { mu, sigma, h0, verdict: "error".into(), c_hat: None, max_u: None, final_width: None };
                    let run = match solver::run(&cfg) {
                        Ok(r) => r,
                        Err(e) => return (row, Some(e)),
                    };
                    let v = classifier.classify(&run);
                    row.verdict = v.outcome.as_str().into();
                    row.c_hat = classifier::speed_estimate(&run).ok().map(|s| s.c_hat);
                    row.max_u = Some(run.last().max_u());
                    row.final_width = Some(run.last().width());
                    let err = write_run(&sub, &run, &v, job.emit_plot_data, start.elapsed().as_secs_f64()).err();
                    (row, err)
                })
            });
            let mut code = 0;
            for (row, err) in &rows {
                if let Some(e) = err {
                    log::error!("sweep point mu = {}, sigma = {}, h0 = {}: {e}", row.mu, row.sigma, row.h0);
                    code = code.max(exit_code(e));
                }
            }
            let table: Vec<SweepRow> = rows.into_iter().map(|(r, _)| r).collect();
            fs::write(dir.join("summary.csv"), summary_csv(&table))?;
            Ok(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let job = parse_config_str(r#"{"command": "simulate", "nonlinearity": {"name": "logistic"}}"#).unwrap();
        assert_eq!(job.mu, 1.0);
        assert_eq!(job.solver.n, 401);
        assert_eq!(job.solver.dt_safety, 0.4);
        assert_eq!(job.initial, InitialData::CosineBump { sigma: 1.0 });
        assert_eq!(job.classifier.spread_tol, 1e-2);
    }

    #[test]
    fn theta_out_of_range_is_a_parse_error() {
        let e = parse_config_str(r#"{"command": "simulate", "nonlinearity": {"name": "cubic_bistable", "theta": 1.5}}"#)
            .unwrap_err();
        match e {
            Error::Parse { location, .. } => assert_eq!(location, "nonlinearity.theta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_reported_with_line() {
        let e = parse_config_str("{\n\"command\": \"simulate\",\n\"nonlinearity\": {\"name\": \"logistic\"},\n\"mu_typo\": 2\n}")
            .unwrap_err();
        match e {
            Error::Parse { location, message } => {
                assert!(location.starts_with("line 4"), "{location}");
                assert!(message.contains("mu_typo"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_is_cartesian() {
        let job = parse_config_str(
            r#"{"command": "sweep", "nonlinearity": {"name": "logistic"},
                "sweep": {"mu": [1, 2, 5], "sigma": [0.5, 1, 2]}}"#,
        )
        .unwrap();
        let pts = job.sweep_points();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], (1.0, 0.5, 1.0));
        assert_eq!(pts[8], (5.0, 2.0, 1.0));
        let empty = parse_config_str(r#"{"command": "sweep", "nonlinearity": {"name": "logistic"}}"#);
        assert!(matches!(empty, Err(Error::Parse { .. })));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Blowup { t: 1.0, max_u: 1e9 }), 2);
        assert_eq!(exit_code(&Error::MonotoneViolation("x".into())), 2);
        assert_eq!(exit_code(&parse_err("a", "b")), 1);
    }
}
