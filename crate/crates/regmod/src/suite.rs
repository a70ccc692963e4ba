//! Suite orchestration: per-instance pipelines (cloud → estimators → flow →
//! implication checks → solver run) and artifact emission.
//!
//! Entries are processed concurrently up to a jobs bound; every entry is
//! deterministic given its seed, results are collected in configuration
//! order, and files are written serially, so byte-identical reruns hold
//! regardless of the worker count.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::catalog;
use crate::checks::{self, EstimateBundle};
use crate::cloud;
use crate::critical::{enumerate_critical_set, CriticalSet};
use crate::error::{Error, Result};
use crate::estimators;
use crate::flow;
use crate::instance::FunctionInstance;
use crate::report::{self, Json};

pub const DEFAULT_RADII: [f64; 3] = [0.2, 0.1, 0.05];
pub const DEFAULT_SAMPLES_PER_RADIUS: usize = 512;
pub const DEFAULT_PROX_DELTA: f64 = 0.2;
pub const DEFAULT_PROX_PAIRS: usize = 1024;

#[derive(Debug, Clone)]
pub enum BaseSelector {
    /// The instance's canonical base point.
    Default,
    Point(Vec<f64>),
    /// `crit:k` — representative of the k-th enumerated critical component.
    CriticalComponent(usize),
}

impl BaseSelector {
    /// Parse `"crit:k"` or a comma-separated coordinate list.
    pub fn parse(text: &str) -> Result<Self> {
        if let Some(rest) = text.strip_prefix("crit:") {
            let k: usize = rest
                .parse()
                .map_err(|_| Error::config("base", "crit selector needs an index"))?;
            return Ok(BaseSelector::CriticalComponent(k));
        }
        let coords: std::result::Result<Vec<f64>, _> =
            text.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match coords {
            Ok(v) if !v.is_empty() => Ok(BaseSelector::Point(v)),
            _ => Err(Error::config(
                "base",
                "expected `crit:k` or a comma-separated coordinate list",
            )),
        }
    }

    pub fn resolve(&self, instance: &FunctionInstance, cs: &CriticalSet) -> Result<Vec<f64>> {
        match self {
            BaseSelector::Default => Ok(instance.default_base.clone()),
            BaseSelector::Point(v) => {
                if v.len() != instance.dimension {
                    return Err(Error::config(
                        "base",
                        format!("length must be p = {}", instance.dimension),
                    ));
                }
                Ok(v.clone())
            }
            BaseSelector::CriticalComponent(k) => {
                let piece = cs.pieces.get(*k).ok_or_else(|| {
                    Error::config(
                        "base",
                        format!("critical component {k} of {} components", cs.pieces.len()),
                    )
                })?;
                Ok(piece.representative())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub x0: Vec<f64>,
    pub tau: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub x0: Vec<f64>,
    pub tau: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone)]
pub struct EntryConfig {
    /// Built-in name or path to an instance JSON file.
    pub instance: String,
    pub base: BaseSelector,
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    /// Explicit seed; otherwise derived from the suite seed and entry index.
    pub seed: Option<u64>,
    /// Prox-regularity certificate override.
    pub rho: Option<f64>,
    pub solver: Option<SolverConfig>,
    pub flow: Option<FlowConfig>,
}

impl EntryConfig {
    pub fn new(instance: &str) -> Self {
        EntryConfig {
            instance: instance.to_string(),
            base: BaseSelector::Default,
            radii: DEFAULT_RADII.to_vec(),
            samples_per_radius: DEFAULT_SAMPLES_PER_RADIUS,
            seed: None,
            rho: None,
            solver: None,
            flow: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub entries: Vec<EntryConfig>,
    /// Mandatory: there is no wall-clock default.
    pub seed: u64,
    pub tol: f64,
    pub jobs: usize,
    pub emit_json: bool,
    pub emit_csv: bool,
    pub emit_plotdata: bool,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        SuiteConfig {
            entries: Vec::new(),
            seed,
            tol: checks::DEFAULT_CHECK_TOL,
            jobs: 1,
            emit_json: true,
            emit_csv: true,
            emit_plotdata: true,
        }
    }

    fn entry_seed(&self, index: usize) -> u64 {
        self.entries[index]
            .seed
            .unwrap_or_else(|| self.seed.wrapping_add(0x9e3779b9u64.wrapping_mul(index as u64)))
    }
}

/// The bundled suite covering the catalog's flagship instances.
pub fn paper_examples(seed: u64) -> SuiteConfig {
    let mut config = SuiteConfig::new(seed);

    let mut zq3 = EntryConfig::new("zq3");
    zq3.solver = Some(SolverConfig {
        x0: vec![1.3, 0.7, 0.0],
        tau: 0.4,
        iterations: 120,
    });
    config.entries.push(zq3);

    let mut nonneg = EntryConfig::new("zq3-nonneg");
    nonneg.solver = Some(SolverConfig {
        x0: vec![1.3, 0.7, 0.0],
        tau: 0.4,
        iterations: 120,
    });
    config.entries.push(nonneg);

    let mut bilinear = EntryConfig::new("bilinear-4x4");
    let mut x0 = catalog::builtin("bilinear-4x4")
        .expect("bundled instance")
        .default_base;
    x0[0] += 0.3;
    x0[1] -= 0.3;
    bilinear.solver = Some(SolverConfig {
        x0,
        tau: 0.2,
        iterations: 120,
    });
    config.entries.push(bilinear);

    let mut lasso = EntryConfig::new("lasso-toy");
    lasso.solver = Some(SolverConfig {
        x0: vec![2.0],
        tau: 0.5,
        iterations: 80,
    });
    lasso.flow = Some(FlowConfig {
        x0: vec![2.0],
        tau: 0.25,
        horizon: 30.0,
    });
    config.entries.push(lasso);

    let mut quartic = EntryConfig::new("quartic-gap");
    quartic.solver = Some(SolverConfig {
        x0: vec![0.3],
        tau: 0.04,
        iterations: 400,
    });
    config.entries.push(quartic);

    config
}

/// Everything one entry produced, ready to be written.
#[derive(Debug, Clone)]
pub struct EntryOutcome {
    pub name: String,
    pub report_json: String,
    pub samples_csv: String,
    pub kl_csv: String,
    pub solver_csv: Option<String>,
    /// All non-skipped implication checks passed and the flow monitors (when
    /// run) held.
    pub passed: bool,
    pub skipped_checks: usize,
    pub summary: String,
}

#[derive(Debug)]
pub struct SuiteOutcome {
    pub results: Vec<std::result::Result<EntryOutcome, String>>,
    pub written: Vec<PathBuf>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.results
            .iter()
            .all(|r| r.as_ref().map_or(false, |o| o.passed))
    }
}

/// Run every entry and write artifacts under `out_dir`.
/// Existing files are not overwritten unless `force` is set.
pub fn run_suite(config: &SuiteConfig, out_dir: &Path, force: bool) -> Result<SuiteOutcome> {
    if config.entries.is_empty() {
        return Err(Error::Usage("suite has no entries".into()));
    }
    std::fs::create_dir_all(out_dir)?;

    let jobs = config.jobs.max(1);
    let mut results: Vec<Option<std::result::Result<EntryOutcome, String>>> =
        (0..config.entries.len()).map(|_| None).collect();
    for wave in (0..config.entries.len()).collect::<Vec<_>>().chunks(jobs) {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for &idx in wave {
                let entry = &config.entries[idx];
                let seed = config.entry_seed(idx);
                let tol = config.tol;
                handles.push((
                    idx,
                    scope.spawn(move || {
                        run_entry(entry, seed, tol).map_err(|e| format!("{}: {e}", entry.instance))
                    }),
                ));
            }
            for (idx, handle) in handles {
                results[idx] = Some(handle.join().expect("entry worker panicked"));
            }
        });
    }
    let results: Vec<_> = results.into_iter().map(|r| r.expect("entry ran")).collect();

    let mut written = Vec::new();
    for result in results.iter().flatten() {
        let mut plan: Vec<(PathBuf, &str)> = Vec::new();
        if config.emit_json {
            plan.push((out_dir.join(format!("{}.report.json", result.name)), &result.report_json));
        }
        if config.emit_csv {
            plan.push((out_dir.join(format!("{}.samples.csv", result.name)), &result.samples_csv));
        }
        if config.emit_plotdata {
            plan.push((out_dir.join(format!("{}.kl.csv", result.name)), &result.kl_csv));
            if let Some(sc) = &result.solver_csv {
                plan.push((out_dir.join(format!("{}.solver.csv", result.name)), sc));
            }
        }
        for (path, content) in plan {
            if path.exists() && !force {
                return Err(Error::WouldOverwrite(path.display().to_string()));
            }
            std::fs::write(&path, content)?;
            written.push(path);
        }
    }

    Ok(SuiteOutcome { results, written })
}

/// The full per-instance pipeline.
pub fn run_entry(entry: &EntryConfig, seed: u64, tol: f64) -> Result<EntryOutcome> {
    let instance = catalog::resolve(&entry.instance)?;
    let critical = enumerate_critical_set(&instance)?;
    let base = entry.base.resolve(&instance, &critical)?;
    let cloud = cloud::sample_cloud(
        &instance,
        &critical,
        &base,
        &entry.radii,
        entry.samples_per_radius,
        seed,
    )?;
    let estimates = EstimateBundle::compute(&cloud)?;

    let rho = entry.rho.or(instance.prox_rho);
    let prox_reg = match rho {
        Some(rho) => Some(estimators::check_prox_regularity(
            &instance,
            &base,
            rho,
            DEFAULT_PROX_DELTA,
            DEFAULT_PROX_PAIRS,
            seed,
        )?),
        None => None,
    };

    let flow_report = match &entry.flow {
        Some(fc) if instance.convex => {
            let traj = flow::integrate_flow(&instance, &fc.x0, fc.tau, fc.horizon)?;
            Some(flow::verify_flow_properties(&traj, &critical, 1e-10)?)
        }
        _ => None,
    };

    let implication = checks::cross_check(&instance, &cloud, &estimates, entry.rho, tol)?;

    let solver = match &entry.solver {
        Some(sc) => Some(checks::prox_grad_run(
            &instance,
            &critical,
            &sc.x0,
            sc.tau,
            sc.iterations,
        )?),
        None => None,
    };

    let mut root = Json::object();
    root.push("instance", Json::Str(instance.name.clone()));
    root.push("family", Json::Str(instance.family.name().to_string()));
    root.push("base", Json::floats(&base));
    root.push("seed", Json::Int(seed as i64));
    root.push("radii", Json::floats(&entry.radii));
    root.push("samples_per_radius", Json::Int(entry.samples_per_radius as i64));
    root.push("base_value", Json::Float(cloud.base_value));
    root.push("excluded_no_formula", Json::Int(cloud.excluded_no_formula as i64));
    root.push("smoothness_constant", Json::Float(instance.smoothness_constant));
    let (premises_json, checks_json) = match report::implication_json(&implication) {
        Json::Object(entries) => {
            let mut premises = Json::Null;
            let mut checks_out = Json::Null;
            for (k, v) in entries {
                match k.as_str() {
                    "premises" => premises = v,
                    "checks" => checks_out = v,
                    _ => {}
                }
            }
            (premises, checks_out)
        }
        _ => unreachable!("implication report renders as an object"),
    };
    root.push("premises", premises_json);
    let mut est_obj = Json::object();
    est_obj.push(
        "kl",
        estimates.kl.as_ref().map_or(Json::Null, report::modulus_json),
    );
    est_obj.push("subregularity", report::modulus_json(&estimates.subregularity));
    est_obj.push(
        "quadratic_growth",
        report::modulus_json(&estimates.quadratic_growth),
    );
    est_obj.push(
        "luo_tseng",
        estimates.luo_tseng.as_ref().map_or(Json::Null, report::modulus_json),
    );
    root.push("estimates", est_obj);
    root.push(
        "prox_regularity",
        prox_reg.as_ref().map_or(Json::Null, report::prox_regularity_json),
    );
    root.push(
        "flow",
        flow_report.as_ref().map_or(Json::Null, report::flow_json),
    );
    root.push(
        "solver",
        solver.as_ref().map_or(Json::Null, report::solver_json),
    );
    root.push("checks", checks_json);
    let report_json = root.render() + "\n";

    let flow_ok = flow_report.as_ref().map_or(true, |f| f.all_pass());
    let prox_ok = prox_reg.as_ref().map_or(true, |p| p.certified);
    let passed = implication.all_non_skipped_pass() && flow_ok && prox_ok;
    let skipped = implication
        .checks
        .iter()
        .filter(|c| matches!(c.status, checks::CheckStatus::Skipped { .. }))
        .count();

    let kappa = &estimates.subregularity;
    let summary = format!(
        "{}: {} ({} checks, {} skipped; kappa {}{}, nu {}, c {})",
        instance.name,
        if passed { "ok" } else { "FAILED" },
        implication.checks.len(),
        skipped,
        short(kappa.value),
        if kappa.divergent { " divergent" } else { "" },
        short(estimates.quadratic_growth.value),
        estimates.kl.as_ref().map_or("-".into(), |k| short(k.value)),
    );

    Ok(EntryOutcome {
        name: instance.name.clone(),
        report_json,
        samples_csv: report::samples_csv(&cloud),
        kl_csv: report::kl_plot_csv(&cloud),
        solver_csv: solver.as_ref().map(report::solver_csv),
        passed,
        skipped_checks: skipped,
        summary,
    })
}

fn short(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3}")
    } else {
        format!("{x}")
    }
}

/// Parse a suite configuration file. `cli_seed` overrides the file's seed;
/// one of the two must be present.
pub fn parse_suite_config(text: &str, cli_seed: Option<u64>) -> Result<SuiteConfig> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::config("<document>", format!("invalid JSON: {e}")))?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::config("<document>", "suite config must be an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "seed" | "tol" | "jobs" | "emit" | "entries") {
            return Err(Error::config(key, "unknown field"));
        }
    }
    let file_seed = match obj.get("seed") {
        None => None,
        Some(s) => Some(
            s.as_u64()
                .ok_or_else(|| Error::config("seed", "must be an unsigned integer"))?,
        ),
    };
    let seed = cli_seed
        .or(file_seed)
        .ok_or_else(|| Error::config("seed", "seed required"))?;
    let mut config = SuiteConfig::new(seed);
    if let Some(t) = obj.get("tol") {
        config.tol = t
            .as_f64()
            .ok_or_else(|| Error::config("tol", "must be a number"))?;
    }
    if let Some(j) = obj.get("jobs") {
        config.jobs = j
            .as_u64()
            .ok_or_else(|| Error::config("jobs", "must be an unsigned integer"))?
            as usize;
    }
    if let Some(e) = obj.get("emit") {
        let arr = e
            .as_array()
            .ok_or_else(|| Error::config("emit", "must be an array"))?;
        config.emit_json = false;
        config.emit_csv = false;
        config.emit_plotdata = false;
        for item in arr {
            match item.as_str() {
                Some("json") => config.emit_json = true,
                Some("csv") => config.emit_csv = true,
                Some("plotdata") => config.emit_plotdata = true,
                _ => return Err(Error::config("emit", "entries are json|csv|plotdata")),
            }
        }
    }
    let entries = obj
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::config("entries", "required array"))?;
    for (i, e) in entries.iter().enumerate() {
        let path = format!("entries[{i}]");
        let eo = e
            .as_object()
            .ok_or_else(|| Error::config(&path, "entry must be an object"))?;
        let name = eo
            .get("instance")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config(format!("{path}.instance"), "required string"))?;
        let mut entry = EntryConfig::new(name);
        if let Some(b) = eo.get("base") {
            entry.base = match b {
                Value::String(s) => BaseSelector::parse(s)?,
                Value::Array(_) => BaseSelector::Point(
                    b.as_array()
                        .unwrap()
                        .iter()
                        .map(|x| {
                            x.as_f64().ok_or_else(|| {
                                Error::config(format!("{path}.base"), "must be numeric")
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?,
                ),
                _ => return Err(Error::config(format!("{path}.base"), "string or array")),
            };
        }
        if let Some(r) = eo.get("radii") {
            entry.radii = r
                .as_array()
                .ok_or_else(|| Error::config(format!("{path}.radii"), "must be an array"))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| Error::config(format!("{path}.radii"), "must be numeric"))
                })
                .collect::<Result<Vec<f64>>>()?;
        }
        if let Some(n) = eo.get("n") {
            entry.samples_per_radius = n
                .as_u64()
                .ok_or_else(|| Error::config(format!("{path}.n"), "must be an integer"))?
                as usize;
        }
        if let Some(s) = eo.get("seed") {
            entry.seed = Some(
                s.as_u64()
                    .ok_or_else(|| Error::config(format!("{path}.seed"), "must be an integer"))?,
            );
        }
        if let Some(r) = eo.get("rho") {
            entry.rho = Some(
                r.as_f64()
                    .ok_or_else(|| Error::config(format!("{path}.rho"), "must be a number"))?,
            );
        }
        if let Some(s) = eo.get("solver") {
            entry.solver = Some(parse_solver(s, &format!("{path}.solver"))?);
        }
        if let Some(f) = eo.get("flow") {
            entry.flow = Some(parse_flow(f, &format!("{path}.flow"))?);
        }
        for key in eo.keys() {
            if !matches!(
                key.as_str(),
                "instance" | "base" | "radii" | "n" | "seed" | "rho" | "solver" | "flow"
            ) {
                return Err(Error::config(format!("{path}.{key}"), "unknown field"));
            }
        }
        config.entries.push(entry);
    }
    Ok(config)
}

fn parse_solver(v: &Value, path: &str) -> Result<SolverConfig> {
    let o = v
        .as_object()
        .ok_or_else(|| Error::config(path, "must be an object"))?;
    Ok(SolverConfig {
        x0: o
            .get("x0")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::config(format!("{path}.x0"), "required array"))?
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| Error::config(format!("{path}.x0"), "must be numeric"))
            })
            .collect::<Result<Vec<f64>>>()?,
        tau: o
            .get("tau")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::config(format!("{path}.tau"), "required number"))?,
        iterations: o
            .get("iterations")
            .and_then(Value::as_u64)
            .unwrap_or(200) as usize,
    })
}

fn parse_flow(v: &Value, path: &str) -> Result<FlowConfig> {
    let o = v
        .as_object()
        .ok_or_else(|| Error::config(path, "must be an object"))?;
    Ok(FlowConfig {
        x0: o
            .get("x0")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::config(format!("{path}.x0"), "required array"))?
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| Error::config(format!("{path}.x0"), "must be numeric"))
            })
            .collect::<Result<Vec<f64>>>()?,
        tau: o
            .get("tau")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::config(format!("{path}.tau"), "required number"))?,
        horizon: o
            .get("horizon")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::config(format!("{path}.horizon"), "required number"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_suite_runs_and_passes() {
        let config = paper_examples(7);
        let dir = std::env::temp_dir().join(format!("regmod-suite-{}", std::process::id()));
        let outcome = run_suite(&config, &dir, true).unwrap();
        assert_eq!(outcome.results.len(), 5);
        for r in &outcome.results {
            let o = r.as_ref().expect("entry ran");
            assert!(o.passed, "{}", o.summary);
        }
        // five reports plus csv artifacts
        let reports = outcome
            .written
            .iter()
            .filter(|p| p.to_string_lossy().ends_with(".report.json"))
            .count();
        assert_eq!(reports, 5);
        for path in &outcome.written {
            if path.to_string_lossy().ends_with(".report.json") {
                let text = std::fs::read_to_string(path).unwrap();
                report::validate_report_schema(&text).unwrap();
            }
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn quartic_entry_reports_divergence_but_still_passes() {
        let config = paper_examples(9);
        let entry = &config.entries[4];
        assert_eq!(entry.instance, "quartic-gap");
        let outcome = run_entry(entry, 9, config.tol).unwrap();
        assert!(outcome.passed, "{}", outcome.summary);
        assert!(outcome.skipped_checks >= 3);
        let v: Value = serde_json::from_str(&outcome.report_json).unwrap();
        assert_eq!(v["estimates"]["subregularity"]["divergent"], Value::Bool(true));
    }

    #[test]
    fn missing_seed_is_a_config_error() {
        let err = parse_suite_config(r#"{"entries":[{"instance":"zq3"}]}"#, None).unwrap_err();
        assert!(err.to_string().contains("seed required"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn cli_seed_overrides_file_seed() {
        let config =
            parse_suite_config(r#"{"seed":1,"entries":[{"instance":"zq3"}]}"#, Some(5)).unwrap();
        assert_eq!(config.seed, 5);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let config = paper_examples(21);
        let base = std::env::temp_dir().join(format!("regmod-det-{}", std::process::id()));
        let dir_a = base.join("a");
        let dir_b = base.join("b");
        run_suite(&config, &dir_a, true).unwrap();
        run_suite(&config, &dir_b, true).unwrap();
        let mut names: Vec<_> = std::fs::read_dir(&dir_a)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let a = std::fs::read(dir_a.join(&name)).unwrap();
            let b = std::fs::read(dir_b.join(&name)).unwrap();
            assert_eq!(a, b, "artifact {name:?} differs between reruns");
        }
        std::fs::remove_dir_all(&base).ok();
    }
}
