//! Sampling-based estimation of the regularity moduli relating a function's
//! first-order geometry near a critical point:
//!
//! * exponent-1/2 desingularizer constant `ĉ` and log-log exponent `θ̂`
//!   from `dist(0, ∂f(x))` against `f(x) − f(x̄)`,
//! * subregularity modulus `κ̂ = max dist(x, crit f)/dist(0, ∂f(x))`,
//! * quadratic-growth modulus `ν̂ = min (f(x) − f(x̄))/dist²(x, crit f)`,
//! * error-bound modulus `ϖ̂ = max dist(x, crit f)/‖R(x)‖`,
//! * a sampled uniform prox-regularity certificate for a given `ρ`.
//!
//! All reductions are order-independent extremal statistics (the exponent
//! fit sorts its samples first), so estimates are bitwise reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{SampleCloud, STRICT_GAP};
use crate::error::{Error, Result};
use crate::instance::FunctionInstance;
use crate::linalg;

/// Ratios with denominator at or below this are treated as 0/0 or ∞ cases.
pub const ZERO_DENOM: f64 = 1e-12;
/// Distances below this count as "on the critical set".
pub const ON_CRITICAL: f64 = 1e-10;
/// Slack at or above `−PROX_CERT_TOL` certifies the prox-regularity
/// inequality on the sampled pairs.
pub const PROX_CERT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusKind {
    Kl,
    Subregularity,
    QuadraticGrowth,
    LuoTseng,
}

impl ModulusKind {
    pub fn name(self) -> &'static str {
        match self {
            ModulusKind::Kl => "kl",
            ModulusKind::Subregularity => "subregularity",
            ModulusKind::QuadraticGrowth => "quadratic-growth",
            ModulusKind::LuoTseng => "luo-tseng",
        }
    }
}

/// One estimated regularity modulus with its per-radius profile.
#[derive(Debug, Clone)]
pub struct ModulusEstimate {
    pub kind: ModulusKind,
    /// The modulus itself: `ĉ`, `κ̂`, `ν̂` or `ϖ̂`.
    pub value: f64,
    /// Fitted exponent `θ̂` (KL only).
    pub exponent: Option<f64>,
    /// RMS residual of the log-log fit (KL only).
    pub fit_residual: Option<f64>,
    /// One value per radius, outermost first; non-finite entries record
    /// infinite ratios.
    pub per_radius: Vec<f64>,
    /// Set iff the per-radius values grow by a factor ≥ 2 across at least
    /// two consecutive radius halvings: any finite modulus keeps the ratios
    /// bounded, so sustained doubling is divergence rather than noise.
    pub divergent: bool,
    /// Quadratic growth failed on some sample (negative gap off the
    /// critical set).
    pub growth_failure: bool,
    /// Largest residual norm seen (Luo–Tseng window diagnostic).
    pub max_residual: Option<f64>,
    pub samples_used: usize,
}

impl ModulusEstimate {
    fn new(kind: ModulusKind, value: f64, per_radius: Vec<f64>, samples_used: usize) -> Self {
        let divergent = detect_divergence(&per_radius);
        ModulusEstimate {
            kind,
            value,
            exponent: None,
            fit_residual: None,
            per_radius,
            divergent,
            growth_failure: false,
            max_residual: None,
            samples_used,
        }
    }
}

fn detect_divergence(per_radius: &[f64]) -> bool {
    let mut consecutive = 0usize;
    for w in per_radius.windows(2) {
        let (outer, inner) = (w[0], w[1]);
        let doubling = inner >= 2.0 * outer || (inner.is_infinite() && outer.is_finite());
        if doubling && outer > 0.0 {
            consecutive += 1;
            if consecutive >= 2 {
                return true;
            }
        } else {
            consecutive = 0;
        }
    }
    false
}

/// Exponent and constant of the best `c√s` desingularizer on the cloud.
///
/// `θ̂` is the least-squares slope of `log dist(0, ∂f(x))` against
/// `log(f(x) − f(x̄))` over strict-gap samples; `ĉ` is the infimum of
/// `dist(0, ∂f(x))/√(f(x) − f(x̄))` — the inequality is a uniform bound, so
/// the valid constant is the worst-case ratio, and the fit supplies only
/// the exponent.
pub fn estimate_kl(cloud: &SampleCloud) -> Result<ModulusEstimate> {
    let mut pairs: Vec<(f64, f64)> = Vec::new(); // (gap, dist)
    let mut per_radius = vec![f64::INFINITY; cloud.radii.len()];
    let mut used = 0usize;
    for r in &cloud.records {
        if r.f_gap <= STRICT_GAP {
            continue;
        }
        used += 1;
        let ratio = r.subdiff_dist / r.f_gap.sqrt();
        per_radius[r.radius_index] = per_radius[r.radius_index].min(ratio);
        if r.subdiff_dist > 0.0 {
            pairs.push((r.f_gap, r.subdiff_dist));
        }
    }
    if used < 16 {
        return Err(Error::InsufficientData(format!(
            "only {used} samples lie strictly above the base value \
             (flat region around the base?)"
        )));
    }
    let c_hat = per_radius.iter().cloned().fold(f64::INFINITY, f64::min);

    // deterministic fit: sort by gap, then distance
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(g, d)| (g.ln(), d.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = logs
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum();

    let mut est = ModulusEstimate::new(ModulusKind::Kl, c_hat, per_radius, used);
    est.exponent = Some(slope);
    est.fit_residual = Some((rss / n).sqrt());
    // the constant shrinking as radii shrink signals KL-1/2 failure, not
    // divergence of a ratio; keep the flag for the growing-κ estimators
    est.divergent = false;
    Ok(est)
}

/// Subregularity modulus: per-radius worst ratio
/// `dist(x, crit f)/dist(0, ∂f(x))` with the divergence flag on sustained
/// doubling. Samples at critical points (0/0) are skipped; a vanishing
/// subdifferential distance off the critical set records an infinite ratio.
pub fn estimate_subregularity(cloud: &SampleCloud) -> ModulusEstimate {
    let mut per_radius = vec![0.0f64; cloud.radii.len()];
    let mut used = 0usize;
    for r in &cloud.records {
        let ratio = if r.subdiff_dist > ZERO_DENOM {
            r.critical_dist / r.subdiff_dist
        } else if r.critical_dist <= ON_CRITICAL {
            continue; // 0/0
        } else {
            f64::INFINITY
        };
        used += 1;
        per_radius[r.radius_index] = per_radius[r.radius_index].max(ratio);
    }
    let value = per_radius.iter().cloned().fold(0.0, f64::max);
    ModulusEstimate::new(ModulusKind::Subregularity, value, per_radius, used)
}

/// Quadratic-growth modulus `ν̂`, the worst gap-to-squared-distance ratio.
/// Requires a critical base point; negative ratios flag growth failure.
pub fn estimate_quadratic_growth(cloud: &SampleCloud) -> ModulusEstimate {
    let mut per_radius = vec![f64::INFINITY; cloud.radii.len()];
    let mut used = 0usize;
    let mut failure = false;
    for r in &cloud.records {
        if r.critical_dist <= ON_CRITICAL {
            continue;
        }
        used += 1;
        let ratio = r.f_gap / (r.critical_dist * r.critical_dist);
        if ratio < 0.0 {
            failure = true;
        }
        per_radius[r.radius_index] = per_radius[r.radius_index].min(ratio);
    }
    let value = per_radius.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut est = ModulusEstimate::new(ModulusKind::QuadraticGrowth, value, per_radius, used);
    est.divergent = false;
    est.growth_failure = failure;
    est
}

/// Error-bound modulus `ϖ̂ = max dist(x, crit f)/‖R(x)‖` over samples with a
/// nonvanishing residual, plus the largest residual norm observed (the
/// radius of validity actually exercised).
pub fn check_luo_tseng(cloud: &SampleCloud) -> Result<ModulusEstimate> {
    let mut per_radius = vec![0.0f64; cloud.radii.len()];
    let mut used = 0usize;
    let mut max_residual = 0.0f64;
    let mut any_residual = false;
    for r in &cloud.records {
        let Some(rn) = r.residual_norm else { continue };
        any_residual = true;
        max_residual = max_residual.max(rn);
        if rn <= ZERO_DENOM {
            continue;
        }
        used += 1;
        per_radius[r.radius_index] = per_radius[r.radius_index].max(r.critical_dist / rn);
    }
    if !any_residual {
        return Err(Error::Capability(format!(
            "`{}` has no composite residual kernel",
            cloud.instance_name
        )));
    }
    let value = per_radius.iter().cloned().fold(0.0, f64::max);
    let mut est = ModulusEstimate::new(ModulusKind::LuoTseng, value, per_radius, used);
    est.max_residual = Some(max_residual);
    Ok(est)
}

/// Result of the sampled uniform prox-regularity check
/// `f(y) ≥ f(x) + ⟨v, y−x⟩ − (ρ/2)‖y−x‖²` over pairs near the base.
#[derive(Debug, Clone)]
pub struct ProxRegularityReport {
    pub rho: f64,
    pub delta: f64,
    pub pair_count: usize,
    /// Worst signed slack `f(y) − f(x) − ⟨v, y−x⟩ + (ρ/2)‖y−x‖²`.
    pub worst_slack: f64,
    pub violating_pair: Option<(Vec<f64>, Vec<f64>)>,
    pub certified: bool,
}

/// Sample subgradient inequalities around `base`: `x` ranges over feasible
/// points with `f(x) ≤ f(x̄) + δ` (the base itself always qualifies), `y`
/// over feasible points, and `v` is the minimum-norm subgradient at `x`.
pub fn check_prox_regularity(
    instance: &FunctionInstance,
    base: &[f64],
    rho: f64,
    delta: f64,
    pair_count: usize,
    seed: u64,
) -> Result<ProxRegularityReport> {
    if !(delta > 0.0) {
        return Err(Error::Usage("delta must be positive".into()));
    }
    if !instance.in_domain(base) {
        return Err(Error::Usage("base point is outside dom f".into()));
    }
    let coords = instance.manifold_coords(base);
    let f_base = instance.evaluate(base)?.value();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa0761d6478bd642f);

    let mut worst = f64::INFINITY;
    let mut violating = None;
    let mut produced = 0usize;
    let mut attempts = 0usize;
    while produced < pair_count {
        attempts += 1;
        if attempts > 200 * pair_count {
            break; // value window too tight; report what we have
        }
        let x = draw_pair_point(instance, base, &coords, delta, &mut rng);
        let fx = instance.evaluate(&x)?;
        if !fx.is_finite() || fx.value() > f_base + delta {
            continue;
        }
        let y = draw_pair_point(instance, base, &coords, delta, &mut rng);
        let fy = instance.evaluate(&y)?;
        if !fy.is_finite() {
            continue;
        }
        let v = instance.subgradient_representative(&x)?;
        let d = linalg::sub(&y, &x);
        let slack = fy.value() - fx.value() - linalg::dot(&v, &d)
            + 0.5 * rho * linalg::dot(&d, &d);
        if slack < worst {
            worst = slack;
            if slack < -PROX_CERT_TOL {
                violating = Some((x.clone(), y.clone()));
            }
        }
        produced += 1;
    }
    // the base point itself is always in the value window; pair it with a
    // sweep of targets so an empty window still exercises the inequality
    let v = instance.subgradient_representative(base)?;
    for _ in 0..64 {
        let y = draw_pair_point(instance, base, &coords, delta, &mut rng);
        let fy = instance.evaluate(&y)?;
        if !fy.is_finite() {
            continue;
        }
        let d = linalg::sub(&y, base);
        let slack =
            fy.value() - f_base - linalg::dot(&v, &d) + 0.5 * rho * linalg::dot(&d, &d);
        if slack < worst {
            worst = slack;
            if slack < -PROX_CERT_TOL {
                violating = Some((base.to_vec(), y.clone()));
            }
        }
        produced += 1;
    }

    Ok(ProxRegularityReport {
        rho,
        delta,
        pair_count: produced,
        worst_slack: worst,
        violating_pair: violating,
        certified: worst >= -PROX_CERT_TOL,
    })
}

fn draw_pair_point(
    instance: &FunctionInstance,
    base: &[f64],
    coords: &[usize],
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    loop {
        let mut dir = vec![0.0; coords.len()];
        let mut i = 0;
        while i < coords.len() {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen();
            let (z1, z2) = linalg::box_muller(u1, u2);
            dir[i] = z1;
            if i + 1 < coords.len() {
                dir[i + 1] = z2;
            }
            i += 2;
        }
        let len = linalg::norm(&dir);
        if len < 1e-12 {
            continue;
        }
        let scale = delta * rng.gen::<f64>() / len;
        let mut x = base.to_vec();
        for (k, &c) in coords.iter().enumerate() {
            x[c] += scale * dir[k];
        }
        if instance.in_domain(&x) {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::cloud::sample_cloud;
    use crate::critical::enumerate_critical_set;

    fn cloud_for(name: &str, base: &[f64], n: usize, seed: u64) -> SampleCloud {
        let inst = catalog::builtin(name).unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        sample_cloud(&inst, &cs, base, &[0.2, 0.1, 0.05], n, seed).unwrap()
    }

    #[test]
    fn zq3_closed_form_moduli() {
        let cloud = cloud_for("zq3", &[1.0, 1.0, 0.0], 512, 7);
        let kl = estimate_kl(&cloud).unwrap();
        assert!((kl.value - 2.0).abs() < 0.04, "c = {}", kl.value);
        assert!((kl.exponent.unwrap() - 0.5).abs() < 0.02);
        let sub = estimate_subregularity(&cloud);
        assert!((sub.value - 0.5).abs() < 0.01);
        assert!(!sub.divergent);
        let qg = estimate_quadratic_growth(&cloud);
        assert!((qg.value - 1.0).abs() < 0.02);
        let lt = check_luo_tseng(&cloud).unwrap();
        assert!((lt.value - 0.5).abs() < 0.01);
    }

    #[test]
    fn half_square_closed_form_moduli() {
        let cloud = cloud_for("half-square", &[0.0], 256, 3);
        let kl = estimate_kl(&cloud).unwrap();
        assert!((kl.value - 2f64.sqrt()).abs() < 0.02);
        assert!((kl.exponent.unwrap() - 0.5).abs() < 0.02);
        assert!((estimate_subregularity(&cloud).value - 1.0).abs() < 1e-9);
        assert!((estimate_quadratic_growth(&cloud).value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn abs_is_sharp_not_quadratic() {
        let cloud = cloud_for("abs", &[0.0], 256, 3);
        let kl = estimate_kl(&cloud).unwrap();
        assert!(kl.exponent.unwrap().abs() < 1e-9);
        // growth modulus at radius 0.5 is 1/0.5 = 2
        let inst = catalog::builtin("abs").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        let wide = sample_cloud(&inst, &cs, &[0.0], &[0.5], 64, 3).unwrap();
        let qg = estimate_quadratic_growth(&wide);
        assert!(qg.value >= 2.0 - 1e-9 && qg.value <= 4.0 + 1e-9);
    }

    #[test]
    fn quartic_gap_diverges_with_factor_four() {
        let cloud = cloud_for("quartic-gap", &[0.0], 512, 7);
        let sub = estimate_subregularity(&cloud);
        assert!(sub.divergent);
        for w in sub.per_radius.windows(2) {
            let factor = w[1] / w[0];
            assert!(factor > 3.5 && factor < 4.5, "factor {factor}");
        }
        let kl = estimate_kl(&cloud).unwrap();
        let theta = kl.exponent.unwrap();
        assert!(theta > 0.70 && theta < 0.80, "theta {theta}");
    }

    #[test]
    fn lasso_toy_error_bound_is_tight() {
        let cloud = cloud_for("lasso-toy", &[0.5], 256, 5);
        let lt = check_luo_tseng(&cloud).unwrap();
        assert!((lt.value - 1.0).abs() < 1e-9);
        assert!(lt.max_residual.unwrap() <= 0.2 + 1e-12);
    }

    #[test]
    fn estimates_are_monotone_under_cloud_extension() {
        let inst = catalog::builtin("zq3").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        let base = [1.0, 1.0, 0.0];
        let short = sample_cloud(&inst, &cs, &base, &[0.2, 0.1], 64, 5).unwrap();
        let long = sample_cloud(&inst, &cs, &base, &[0.2, 0.1, 0.05], 64, 5).unwrap();
        assert!(estimate_subregularity(&long).value >= estimate_subregularity(&short).value);
        assert!(
            estimate_quadratic_growth(&long).value <= estimate_quadratic_growth(&short).value
        );
        assert!(check_luo_tseng(&long).unwrap().value >= check_luo_tseng(&short).unwrap().value);
        assert!(estimate_kl(&long).unwrap().value <= estimate_kl(&short).unwrap().value);
    }

    #[test]
    fn flat_region_signals_insufficient_data() {
        let cloud = cloud_for("sparse-indicator", &[1.0, 1.0, 0.0], 64, 2);
        assert!(matches!(
            estimate_kl(&cloud),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn prox_regularity_certificates_cross_zero_for_concave_quadratic() {
        let inst = catalog::builtin("neg-half-square").unwrap();
        let fail = check_prox_regularity(&inst, &[0.0], 0.5, 0.25, 1024, 11).unwrap();
        assert!(!fail.certified);
        assert!(fail.violating_pair.is_some());
        let pass = check_prox_regularity(&inst, &[0.0], 1.0, 0.25, 1024, 11).unwrap();
        assert!(pass.certified, "worst slack {}", pass.worst_slack);
    }

    #[test]
    fn prox_regularity_of_the_sparse_indicator_needs_no_curvature() {
        let inst = catalog::builtin("sparse-indicator").unwrap();
        let rep = check_prox_regularity(&inst, &[1.0, 1.0, 0.0], 0.0, 0.2, 1024, 13).unwrap();
        assert!(rep.certified);
        assert!(rep.worst_slack.abs() < 1e-10);
    }

    #[test]
    fn zq3_prox_regularity_with_spectral_certificate() {
        let inst = catalog::builtin("zq3").unwrap();
        let rep = check_prox_regularity(&inst, &[1.0, 1.0, 0.0], 2.0, 0.2, 1024, 17).unwrap();
        assert!(rep.certified);
    }
}
