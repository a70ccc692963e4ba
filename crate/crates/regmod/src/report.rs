//! Canonical report and dump emission.
//!
//! Reports are JSON with a fixed key order and floats printed with 17
//! significant digits, so re-running a suite with the same configuration
//! reproduces byte-identical files. Non-finite values appear as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::fmt::Write as _;

use crate::checks::{CheckStatus, ImplicationReport, SolverRun};
use crate::cloud::SampleCloud;
use crate::estimators::{ModulusEstimate, ProxRegularityReport};
use crate::flow::FlowReport;

/// 17 significant digits; enough to round-trip any f64.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "\"nan\"".to_string()
    } else if x == f64::INFINITY {
        "\"inf\"".to_string()
    } else if x == f64::NEG_INFINITY {
        "\"-inf\"".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Minimal canonical JSON builder: insertion-ordered objects only, floats
/// through [`format_f64`].
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn object() -> Json {
        Json::Object(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) -> &mut Self {
        match self {
            Json::Object(entries) => entries.push((key.to_string(), value)),
            _ => panic!("push on non-object"),
        }
        self
    }

    pub fn floats(values: &[f64]) -> Json {
        Json::Array(values.iter().map(|&v| Json::Float(v)).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Float(x) => out.push_str(&format_f64(*x)),
            Json::Str(s) => {
                out.push('"');
                for ch in s.chars() {
                    match ch {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\t' => out.push_str("\\t"),
                        '\r' => out.push_str("\\r"),
                        c if (c as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", c as u32);
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            Json::Object(entries) => {
                out.push('{');
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    Json::Str(k.clone()).write(out);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

pub fn modulus_json(est: &ModulusEstimate) -> Json {
    let mut j = Json::object();
    j.push("kind", Json::Str(est.kind.name().to_string()));
    j.push("value", Json::Float(est.value));
    j.push(
        "exponent",
        est.exponent.map_or(Json::Null, Json::Float),
    );
    j.push(
        "fit_residual",
        est.fit_residual.map_or(Json::Null, Json::Float),
    );
    j.push("per_radius", Json::floats(&est.per_radius));
    j.push("divergent", Json::Bool(est.divergent));
    j.push("growth_failure", Json::Bool(est.growth_failure));
    j.push(
        "max_residual",
        est.max_residual.map_or(Json::Null, Json::Float),
    );
    j.push("samples_used", Json::Int(est.samples_used as i64));
    j
}

pub fn prox_regularity_json(rep: &ProxRegularityReport) -> Json {
    let mut j = Json::object();
    j.push("rho", Json::Float(rep.rho));
    j.push("delta", Json::Float(rep.delta));
    j.push("pair_count", Json::Int(rep.pair_count as i64));
    j.push("worst_slack", Json::Float(rep.worst_slack));
    j.push("certified", Json::Bool(rep.certified));
    j.push(
        "violating_pair",
        match &rep.violating_pair {
            None => Json::Null,
            Some((x, y)) => Json::Array(vec![Json::floats(x), Json::floats(y)]),
        },
    );
    j
}

pub fn flow_json(rep: &FlowReport) -> Json {
    let mut j = Json::object();
    j.push("values_monotone", Json::Bool(rep.values_monotone));
    j.push(
        "first_ascending_step",
        rep.first_ascending_step
            .map_or(Json::Null, |k| Json::Int(k as i64)),
    );
    j.push("distances_monotone", Json::Bool(rep.distances_monotone));
    j.push("terminal_near_critical", Json::Bool(rep.terminal_near_critical));
    j.push("terminal_distance", Json::Float(rep.terminal_distance));
    j.push("energy_inequality", Json::Bool(rep.energy_inequality));
    j.push("limit", Json::floats(&rep.limit));
    j.push("tolerance", Json::Float(rep.tolerance));
    j
}

pub fn solver_json(run: &SolverRun) -> Json {
    let mut j = Json::object();
    j.push("x0", Json::floats(&run.x0));
    j.push("step", Json::Float(run.step));
    j.push("iterations", Json::Int((run.iterates.len() - 1) as i64));
    j.push("rate", run.rate.map_or(Json::Null, Json::Float));
    j.push(
        "converged_at",
        run.converged_at.map_or(Json::Null, |k| Json::Int(k as i64)),
    );
    j.push("diverged", Json::Bool(run.diverged));
    let (_, d, r) = *run.iterates.last().expect("nonempty run");
    j.push("final_critical_dist", Json::Float(d));
    j.push("final_residual_norm", Json::Float(r));
    j
}

pub fn implication_json(rep: &ImplicationReport) -> Json {
    let mut premises = Json::object();
    premises.push("convex", Json::Bool(rep.premises.convex));
    premises.push(
        "continuous_on_crit",
        Json::Bool(rep.premises.continuous_on_crit),
    );
    premises.push("assumption1", Json::Bool(rep.premises.assumption1));
    premises.push("local_min", Json::Bool(rep.premises.local_min));
    premises.push(
        "prox_rho",
        rep.premises.prox_rho.map_or(Json::Null, Json::Float),
    );

    let checks: Vec<Json> = rep
        .checks
        .iter()
        .map(|c| {
            let mut j = Json::object();
            j.push("name", Json::Str(c.name.to_string()));
            j.push("constant_formula", Json::Str(c.constant_formula.to_string()));
            j.push("constant", Json::Float(c.constant));
            j.push("lhs", Json::Float(c.lhs));
            j.push("rhs", Json::Float(c.rhs));
            j.push("slack", Json::Float(c.slack));
            j.push("status", Json::Str(c.status.label().to_string()));
            if let CheckStatus::Skipped { reason } = &c.status {
                j.push("reason", Json::Str(reason.clone()));
            }
            j
        })
        .collect();

    let mut j = Json::object();
    j.push("instance", Json::Str(rep.instance_name.clone()));
    j.push("base", Json::floats(&rep.base));
    j.push("tol", Json::Float(rep.tol));
    j.push("premises", premises);
    j.push("checks", Json::Array(checks));
    j
}

/// Sample dump: header row, one sample per line, '.' decimal separator.
/// Columns: `x0..x{p-1}, fgap, sdist, cdist, rnorm` (rnorm empty when the
/// instance has no residual kernel).
pub fn samples_csv(cloud: &SampleCloud) -> String {
    let p = cloud.base.len();
    let mut out = String::new();
    for i in 0..p {
        let _ = write!(out, "x{i},");
    }
    out.push_str("fgap,sdist,cdist,rnorm\n");
    for r in &cloud.records {
        for v in &r.x {
            let _ = write!(out, "{},", csv_f64(*v));
        }
        let _ = write!(
            out,
            "{},{},{},{}\n",
            csv_f64(r.f_gap),
            csv_f64(r.subdiff_dist),
            csv_f64(r.critical_dist),
            r.residual_norm.map_or(String::new(), csv_f64)
        );
    }
    out
}

/// Two-column log₁₀ data for the exponent fit plots, strict-gap samples only.
pub fn kl_plot_csv(cloud: &SampleCloud) -> String {
    let mut out = String::from("log10_fgap,log10_sdist\n");
    let mut rows: Vec<(f64, f64)> = cloud
        .records
        .iter()
        .filter(|r| r.f_gap > crate::cloud::STRICT_GAP && r.subdiff_dist > 0.0)
        .map(|r| (r.f_gap.log10(), r.subdiff_dist.log10()))
        .collect();
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    for (g, d) in rows {
        let _ = write!(out, "{},{}\n", csv_f64(g), csv_f64(d));
    }
    out
}

/// Iterate-versus-distance data for solver-rate plots.
pub fn solver_csv(run: &SolverRun) -> String {
    let mut out = String::from("k,cdist,rnorm\n");
    for (k, d, r) in &run.iterates {
        let _ = write!(out, "{},{},{}\n", k, csv_f64(*d), csv_f64(*r));
    }
    out
}

/// Trajectory dump for the flow command: `k, x…, f, step_norm`.
pub fn trajectory_csv(traj: &crate::flow::Trajectory) -> String {
    let p = traj.states[0].len();
    let mut out = String::from("k,");
    for i in 0..p {
        let _ = write!(out, "x{i},");
    }
    out.push_str("f,step_norm\n");
    for (k, state) in traj.states.iter().enumerate() {
        let _ = write!(out, "{k},");
        for v in state {
            let _ = write!(out, "{},", csv_f64(*v));
        }
        let step = if k == 0 { 0.0 } else { traj.step_norms[k - 1] };
        let _ = write!(out, "{},{}\n", csv_f64(traj.values[k]), csv_f64(step));
    }
    out
}

fn csv_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Validate an emitted report against the published schema: required keys,
/// their types, and the per-check record shape.
pub fn validate_report_schema(text: &str) -> Result<(), String> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("not JSON: {e}"))?;
    let obj = v.as_object().ok_or("report must be an object")?;
    for key in ["instance", "base", "premises", "checks"] {
        if !obj.contains_key(key) {
            return Err(format!("missing required key `{key}`"));
        }
    }
    if !obj["instance"].is_string() {
        return Err("`instance` must be a string".into());
    }
    if !obj["base"].is_array() {
        return Err("`base` must be an array".into());
    }
    let premises = obj["premises"]
        .as_object()
        .ok_or("`premises` must be an object")?;
    for key in ["convex", "continuous_on_crit", "assumption1", "local_min"] {
        if !premises.get(key).map_or(false, |v| v.is_boolean()) {
            return Err(format!("premise `{key}` must be a boolean"));
        }
    }
    let checks = obj["checks"].as_array().ok_or("`checks` must be an array")?;
    for (i, c) in checks.iter().enumerate() {
        let co = c.as_object().ok_or_else(|| format!("checks[{i}] not an object"))?;
        for key in ["name", "constant", "lhs", "rhs", "slack", "status"] {
            if !co.contains_key(key) {
                return Err(format!("checks[{i}] missing `{key}`"));
            }
        }
        let status = co["status"].as_str().ok_or("status must be a string")?;
        if !matches!(status, "pass" | "fail" | "skipped") {
            return Err(format!("checks[{i}] has unknown status `{status}`"));
        }
        if status == "skipped" && !co.contains_key("reason") {
            return Err(format!("checks[{i}] skipped without a reason"));
        }
        for key in ["constant", "lhs", "rhs", "slack"] {
            let ok = matches!(&co[key], serde_json::Value::Number(_))
                || matches!(co[key].as_str(), Some("inf" | "-inf" | "nan"));
            if !ok {
                return Err(format!("checks[{i}].{key} must be numeric or inf/nan"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_17_significant_digits() {
        assert_eq!(format_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(format_f64(f64::INFINITY), "\"inf\"");
        assert_eq!(format_f64(f64::NAN), "\"nan\"");
        // round-trips exactly
        let x = std::f64::consts::PI;
        let s = format_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_escaping() {
        let j = Json::Str("a\"b\\c\nd".to_string());
        assert_eq!(j.render(), "\"a\\\"b\\\\c\\nd\"");
    }

    #[test]
    fn object_order_is_insertion_order() {
        let mut j = Json::object();
        j.push("zebra", Json::Int(1));
        j.push("alpha", Json::Int(2));
        assert_eq!(j.render(), "{\"zebra\":1,\"alpha\":2}");
    }
}
