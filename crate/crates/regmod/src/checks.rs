//! Executable cross-checks between the estimated moduli, one per theorem
//! arrow, each carrying the explicit proof constant:
//!
//! * (A) growth ⇒ exponent 1/2: `ĉ ≥ √ν̂` — the desingularizer constant a
//!   quadratic-growth modulus buys is `√ν`;
//! * (B) exponent 1/2 ⇒ growth: `ν̂ ≥ ĉ²/4` (convex, or continuous on the
//!   critical set with growth);
//! * (C) subregularity + prox-regularity ⇒ exponent 1/2, pointwise:
//!   `f(x) − f(x̄) ≤ (κ̂ + ρκ̂²/2)·dist²(0, ∂f(x))`;
//! * (D) subregularity ⇒ error bound, pointwise:
//!   `dist(x, crit f) ≤ (κ̂(1+L)+1)·‖R(x)‖`;
//! * (E) subregularity ⇒ growth at local minima: `ν̂ > 0`.
//!
//! A check whose premises fail is reported as skipped with the reason —
//! never silently absent.

use crate::cloud::{SampleCloud, STRICT_GAP};
use crate::critical::CriticalSet;
use crate::error::{Error, Result};
use crate::estimators::{self, ModulusEstimate, ModulusKind, ZERO_DENOM};
use crate::instance::FunctionInstance;
use crate::linalg;
use crate::prox;

/// Default relative tolerance on modulus inequalities: the estimates are
/// extremal statistics over finite samples, and 5% absorbs that slack while
/// still failing on genuinely broken implications.
pub const DEFAULT_CHECK_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped { reason: String },
}

impl CheckStatus {
    pub fn label(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped { .. } => "skipped",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    /// Formula of the proof constant, for the report.
    pub constant_formula: &'static str,
    pub constant: f64,
    /// Worst-case left- and right-hand side over the samples (or the two
    /// aggregate sides for scalar checks).
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs` at the worst sample; nonnegative iff the check passes.
    pub slack: f64,
    pub status: CheckStatus,
}

impl CheckResult {
    fn skipped(name: &'static str, constant_formula: &'static str, reason: String) -> Self {
        CheckResult {
            name,
            constant_formula,
            constant: f64::NAN,
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            status: CheckStatus::Skipped { reason },
        }
    }

    fn from_sides(
        name: &'static str,
        constant_formula: &'static str,
        constant: f64,
        lhs: f64,
        rhs: f64,
    ) -> Self {
        let slack = rhs - lhs;
        CheckResult {
            name,
            constant_formula,
            constant,
            lhs,
            rhs,
            slack,
            status: if slack >= 0.0 { CheckStatus::Pass } else { CheckStatus::Fail },
        }
    }
}

/// Premises the theorems condition on. They are instance metadata, set by
/// the catalog, because they are undecidable from samples alone.
#[derive(Debug, Clone)]
pub struct PremiseRecord {
    pub convex: bool,
    pub continuous_on_crit: bool,
    pub assumption1: bool,
    pub local_min: bool,
    pub prox_rho: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ImplicationReport {
    pub instance_name: String,
    pub base: Vec<f64>,
    pub tol: f64,
    pub premises: PremiseRecord,
    pub checks: Vec<CheckResult>,
}

impl ImplicationReport {
    pub fn all_non_skipped_pass(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.status, CheckStatus::Fail))
    }
}

/// Estimates bundle computed on one shared cloud.
#[derive(Debug, Clone)]
pub struct EstimateBundle {
    pub kl: Option<ModulusEstimate>,
    pub subregularity: ModulusEstimate,
    pub quadratic_growth: ModulusEstimate,
    pub luo_tseng: Option<ModulusEstimate>,
}

impl EstimateBundle {
    /// Run every estimator on the cloud. KL and Luo–Tseng may be
    /// unavailable (flat region, no residual kernel); that is premise
    /// information, not an error.
    pub fn compute(cloud: &SampleCloud) -> Result<Self> {
        let kl = match estimators::estimate_kl(cloud) {
            Ok(e) => Some(e),
            Err(Error::InsufficientData(_)) => None,
            Err(e) => return Err(e),
        };
        let luo_tseng = match estimators::check_luo_tseng(cloud) {
            Ok(e) => Some(e),
            Err(Error::Capability(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(EstimateBundle {
            kl,
            subregularity: estimators::estimate_subregularity(cloud),
            quadratic_growth: estimators::estimate_quadratic_growth(cloud),
            luo_tseng,
        })
    }
}

/// Evaluate every theorem arrow on the shared cloud.
///
/// `rho` overrides the instance's prox-regularity certificate when given.
pub fn cross_check(
    instance: &FunctionInstance,
    cloud: &SampleCloud,
    estimates: &EstimateBundle,
    rho: Option<f64>,
    tol: f64,
) -> Result<ImplicationReport> {
    debug_assert_eq!(
        estimates.subregularity.kind,
        ModulusKind::Subregularity,
        "estimates must come from EstimateBundle::compute"
    );
    let premises = PremiseRecord {
        convex: instance.convex,
        continuous_on_crit: instance.continuous_on_crit,
        assumption1: instance.assumption1,
        local_min: instance.is_local_min(&cloud.base)?,
        prox_rho: rho.or(instance.prox_rho),
    };
    let kappa = &estimates.subregularity;
    let nu = &estimates.quadratic_growth;
    let growth_holds = nu.value.is_finite() && nu.value > 0.0 && !nu.growth_failure;
    let mut checks = Vec::with_capacity(5);

    // (A) growth ⇒ exponent 1/2 with constant √ν
    checks.push(match &estimates.kl {
        None => CheckResult::skipped(
            "qg-implies-kl",
            "sqrt(nu)",
            "no strict-gap samples for the exponent estimate".into(),
        ),
        Some(_) if !growth_holds => CheckResult::skipped(
            "qg-implies-kl",
            "sqrt(nu)",
            "quadratic growth fails on the cloud".into(),
        ),
        Some(kl) => {
            let constant = nu.value.sqrt();
            CheckResult::from_sides(
                "qg-implies-kl",
                "sqrt(nu)",
                constant,
                constant * (1.0 - tol),
                kl.value,
            )
        }
    });

    // (B) exponent 1/2 ⇒ growth with constant c²/4, under convexity or
    // continuity on the critical set
    checks.push(match &estimates.kl {
        None => CheckResult::skipped(
            "kl-implies-qg",
            "c^2/4",
            "no strict-gap samples for the exponent estimate".into(),
        ),
        Some(kl) => {
            if premises.convex || (premises.continuous_on_crit && growth_holds) {
                let constant = kl.value * kl.value / 4.0;
                CheckResult::from_sides(
                    "kl-implies-qg",
                    "c^2/4",
                    constant,
                    constant * (1.0 - tol),
                    nu.value,
                )
            } else {
                CheckResult::skipped(
                    "kl-implies-qg",
                    "c^2/4",
                    "needs convexity, or continuity on the critical set with growth".into(),
                )
            }
        }
    });

    // (C) subregularity + prox-regularity ⇒ exponent 1/2, pointwise with
    // constant κ + ρκ²/2
    checks.push(if kappa.divergent || !kappa.value.is_finite() {
        CheckResult::skipped(
            "subreg-proxreg-implies-kl",
            "kappa + rho*kappa^2/2",
            "subregularity fails (divergent modulus)".into(),
        )
    } else {
        match premises.prox_rho {
            None => CheckResult::skipped(
                "subreg-proxreg-implies-kl",
                "kappa + rho*kappa^2/2",
                "no uniform prox-regularity certificate".into(),
            ),
            Some(rho) => {
                let constant = kappa.value + 0.5 * rho * kappa.value * kappa.value;
                let mut worst: Option<(f64, f64)> = None;
                for r in cloud.records.iter().filter(|r| r.f_gap > STRICT_GAP) {
                    let lhs = r.f_gap;
                    let rhs = constant * r.subdiff_dist * r.subdiff_dist * (1.0 + tol);
                    if worst.map_or(true, |(l, rr)| rhs - lhs < rr - l) {
                        worst = Some((lhs, rhs));
                    }
                }
                match worst {
                    None => CheckResult::skipped(
                        "subreg-proxreg-implies-kl",
                        "kappa + rho*kappa^2/2",
                        "no strict-gap samples".into(),
                    ),
                    Some((lhs, rhs)) => CheckResult::from_sides(
                        "subreg-proxreg-implies-kl",
                        "kappa + rho*kappa^2/2",
                        constant,
                        lhs,
                        rhs,
                    ),
                }
            }
        }
    });

    // (D) subregularity ⇒ error bound, pointwise with constant κ(1+L)+1
    checks.push(if estimates.luo_tseng.is_none() {
        CheckResult::skipped(
            "luo-tseng-chain",
            "kappa*(1+L)+1",
            "no composite residual kernel".into(),
        )
    } else if kappa.divergent || !kappa.value.is_finite() {
        CheckResult::skipped(
            "luo-tseng-chain",
            "kappa*(1+L)+1",
            "subregularity fails (divergent modulus)".into(),
        )
    } else {
        let constant = kappa.value * (1.0 + instance.smoothness_constant) + 1.0;
        let mut worst: Option<(f64, f64)> = None;
        for r in &cloud.records {
            let Some(rn) = r.residual_norm else { continue };
            if rn <= ZERO_DENOM {
                continue;
            }
            let lhs = r.critical_dist;
            let rhs = constant * rn * (1.0 + tol);
            if worst.map_or(true, |(l, rr)| rhs - lhs < rr - l) {
                worst = Some((lhs, rhs));
            }
        }
        match worst {
            None => CheckResult::skipped(
                "luo-tseng-chain",
                "kappa*(1+L)+1",
                "all residuals vanish on the cloud".into(),
            ),
            Some((lhs, rhs)) => {
                CheckResult::from_sides("luo-tseng-chain", "kappa*(1+L)+1", constant, lhs, rhs)
            }
        }
    });

    // (E) subregularity ⇒ growth at local minima
    checks.push(if kappa.divergent || !kappa.value.is_finite() {
        CheckResult::skipped(
            "subreg-implies-qg-at-min",
            "nu > 0",
            "subregularity fails (divergent modulus)".into(),
        )
    } else if !premises.local_min {
        CheckResult::skipped(
            "subreg-implies-qg-at-min",
            "nu > 0",
            "base point is not a local minimizer".into(),
        )
    } else {
        CheckResult::from_sides("subreg-implies-qg-at-min", "nu > 0", 0.0, 0.0, nu.value)
    });

    Ok(ImplicationReport {
        instance_name: instance.name.clone(),
        base: cloud.base.clone(),
        tol,
        premises,
        checks,
    })
}

/// One proximal-gradient run `x⁺ = prox_h(x − τ∇g(x))` with per-iterate
/// distances, used to confront the measured moduli with an actual method.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub instance_name: String,
    pub x0: Vec<f64>,
    pub step: f64,
    /// `(k, dist(x_k, crit f), ‖R(x_k)‖)` per iterate.
    pub iterates: Vec<(usize, f64, f64)>,
    /// Geometric rate fitted on the tail of `dist(x_k, crit f)`.
    pub rate: Option<f64>,
    /// First iterate within 1e-12 of the critical set, if any.
    pub converged_at: Option<usize>,
    /// Distance grew tenfold over fifty iterates.
    pub diverged: bool,
}

pub fn prox_grad_run(
    instance: &FunctionInstance,
    critical: &CriticalSet,
    x0: &[f64],
    tau: f64,
    iterations: usize,
) -> Result<SolverRun> {
    if !(tau > 0.0) {
        return Err(Error::Usage("step must be positive".into()));
    }
    if instance.smoothness_constant > 0.0 && tau >= 1.0 / instance.smoothness_constant {
        return Err(Error::Usage(format!(
            "step {tau} violates tau < 1/L = {}",
            1.0 / instance.smoothness_constant
        )));
    }
    if !instance.in_domain(x0) {
        return Err(Error::Usage("solver start is outside dom f".into()));
    }

    let mut x = x0.to_vec();
    let mut iterates = Vec::with_capacity(iterations + 1);
    let mut converged_at = None;
    let mut diverged = false;
    for k in 0..=iterations {
        let dist = critical.distance(&x)?;
        let rnorm = linalg::norm(&prox::residual_map(instance, &x)?);
        iterates.push((k, dist, rnorm));
        if converged_at.is_none() && dist <= 1e-12 {
            converged_at = Some(k);
        }
        if k >= 50 {
            let (_, past, _) = iterates[k - 50];
            if past > 0.0 && dist >= 10.0 * past {
                diverged = true;
            }
        }
        if k < iterations {
            let grad = instance.smooth_gradient(&x)?;
            let z = linalg::add_scaled(&x, -tau, &grad);
            x = prox::prox_h(&prox::ProxRequest {
                nonsmooth: &instance.nonsmooth,
                z: &z,
                step: tau,
            })?;
        }
    }

    Ok(SolverRun {
        instance_name: instance.name.clone(),
        x0: x0.to_vec(),
        step: tau,
        rate: fit_tail_rate(&iterates),
        converged_at,
        diverged,
        iterates,
    })
}

/// Least-squares slope of `ln dist` against `k` over the tail half of the
/// iterates that are still away from the critical set. Distances below 1e-11
/// sit too close to the cancellation floor of the distance oracle to carry
/// rate information and are dropped.
fn fit_tail_rate(iterates: &[(usize, f64, f64)]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = iterates
        .iter()
        .filter(|(_, d, _)| *d > 1e-11)
        .map(|(k, d, _)| (*k as f64, d.ln()))
        .collect();
    if usable.len() < 4 {
        return None;
    }
    let tail = &usable[usable.len() / 2..];
    let n = tail.len() as f64;
    let mean_x = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = tail.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    Some((sxy / sxx).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::cloud::sample_cloud;
    use crate::critical::enumerate_critical_set;

    fn report_for(name: &str, base: &[f64]) -> ImplicationReport {
        let inst = catalog::builtin(name).unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        let cloud = sample_cloud(&inst, &cs, base, &[0.2, 0.1, 0.05], 512, 7).unwrap();
        let est = EstimateBundle::compute(&cloud).unwrap();
        cross_check(&inst, &cloud, &est, None, DEFAULT_CHECK_TOL).unwrap()
    }

    #[test]
    fn zq3_all_arrows_pass() {
        let report = report_for("zq3", &[1.0, 1.0, 0.0]);
        assert_eq!(report.checks.len(), 5);
        for check in &report.checks {
            assert_eq!(check.status, CheckStatus::Pass, "{check:?}");
        }
        // (C) carries the constant κ + ρκ²/2 = 0.5 + 2·0.125 = 0.75
        let c = report
            .checks
            .iter()
            .find(|c| c.name == "subreg-proxreg-implies-kl")
            .unwrap();
        assert!((c.constant - 0.75).abs() < 0.02);
        // (D) carries κ(1+L)+1 = 0.5·3 + 1 = 2.5
        let d = report.checks.iter().find(|c| c.name == "luo-tseng-chain").unwrap();
        assert!((d.constant - 2.5).abs() < 0.05);
    }

    #[test]
    fn quartic_gap_skips_the_subregularity_arrows() {
        let report = report_for("quartic-gap", &[0.0]);
        for name in ["subreg-proxreg-implies-kl", "luo-tseng-chain", "subreg-implies-qg-at-min"] {
            let check = report.checks.iter().find(|c| c.name == name).unwrap();
            match &check.status {
                CheckStatus::Skipped { reason } => {
                    assert!(reason.contains("subregularity fails"), "{name}: {reason}")
                }
                other => panic!("{name} should skip, got {other:?}"),
            }
        }
        assert!(report.all_non_skipped_pass());
    }

    #[test]
    fn half_square_is_tight_for_the_growth_constant() {
        let report = report_for("half-square", &[0.0]);
        let b = report.checks.iter().find(|c| c.name == "kl-implies-qg").unwrap();
        assert_eq!(b.status, CheckStatus::Pass);
        // c²/4 = 0.5 = ν: tight up to the tolerance discount
        assert!((b.constant - 0.5).abs() < 0.02, "constant {}", b.constant);
    }

    #[test]
    fn lasso_solver_contracts_at_one_half() {
        let inst = catalog::builtin("lasso-toy").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        let run = prox_grad_run(&inst, &cs, &[2.0], 0.5, 60).unwrap();
        let rate = run.rate.unwrap();
        assert!((rate - 0.5).abs() < 1e-4, "rate {rate}");
        assert!(!run.diverged);
        // iterates follow x_k = 0.5 + 1.5 · 0.5^k
        let (_, d1, _) = run.iterates[1];
        assert!((d1 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn zq3_solver_contracts_on_the_support() {
        let inst = catalog::builtin("zq3").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        let run = prox_grad_run(&inst, &cs, &[1.3, 0.7, 0.0], 0.4, 40).unwrap();
        let rate = run.rate.unwrap();
        assert!((rate - 0.2).abs() < 1e-4, "rate {rate}");
    }

    #[test]
    fn half_square_converges_in_one_step_at_unit_inverse_curvature() {
        let inst = catalog::builtin("half-square").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        // L = 1, so tau must stay below 1; 0.999 lands within 1e-3 of zero
        let run = prox_grad_run(&inst, &cs, &[3.0], 0.999, 20).unwrap();
        assert!(run.iterates[1].1 < 5e-3);
    }

    #[test]
    fn quartic_solver_stalls_near_the_origin() {
        let inst = catalog::builtin("quartic-gap").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        let run = prox_grad_run(&inst, &cs, &[0.3], 0.04, 400).unwrap();
        let rate = run.rate.unwrap();
        assert!(rate > 0.98 && rate <= 1.0, "rate {rate}");
        assert!(!run.diverged);
    }
}
