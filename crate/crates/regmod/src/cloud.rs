//! Seeded sample clouds around a base point, with cached oracle values.
//!
//! Samples for radius `ε_j` are drawn on the instance's feasible manifold at
//! distances in `[ε_j/2, ε_j]` from the base: indicator instances perturb the
//! base support only (off-domain points have value `+∞` and are vacuous in
//! every modulus definition, so sampling them would waste the budget). Each
//! radius has its own RNG stream keyed by `(seed, radius index)`, so a cloud
//! with an extended schedule is a superset of the shorter one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::critical::CriticalSet;
use crate::error::{Error, Result};
use crate::instance::FunctionInstance;
use crate::linalg;
use crate::prox;

/// Gap threshold separating "same value as the base" samples from the strict
/// window `f(x) > f(x̄)` that the exponent estimates quantify over.
pub const STRICT_GAP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub x: Vec<f64>,
    /// `f(x)` minus the stationary base value.
    pub f_gap: f64,
    /// Exact `dist(0, ∂f(x))`.
    pub subdiff_dist: f64,
    /// Exact `dist(x, crit f)`.
    pub critical_dist: f64,
    /// `‖prox_h(x − ∇g(x)) − x‖`, when the residual kernel exists.
    pub residual_norm: Option<f64>,
    pub radius_index: usize,
}

#[derive(Debug, Clone)]
pub struct SampleCloud {
    pub instance_name: String,
    pub base: Vec<f64>,
    /// Stationary value the gaps are measured against.
    pub base_value: f64,
    /// Strictly decreasing radius schedule.
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub seed: u64,
    pub records: Vec<SampleRecord>,
    /// Samples dropped because the subdifferential oracle signalled
    /// no-exact-formula there.
    pub excluded_no_formula: usize,
}

impl SampleCloud {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records_for_radius(&self, idx: usize) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(move |r| r.radius_index == idx)
    }
}

/// Draw `n` samples per radius around `base` and cache every oracle value.
/// Deterministic in `seed`; identical inputs give identical clouds.
pub fn sample_cloud(
    instance: &FunctionInstance,
    critical: &CriticalSet,
    base: &[f64],
    radii: &[f64],
    n: usize,
    seed: u64,
) -> Result<SampleCloud> {
    if !instance.in_domain(base) {
        return Err(Error::Usage(format!(
            "base point is outside dom f for `{}`",
            instance.name
        )));
    }
    if n < 32 {
        return Err(Error::Usage("need at least 32 samples per radius".into()));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Usage("radius schedule must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Usage("radius schedule must be strictly decreasing".into()));
    }

    let coords = instance.manifold_coords(base);
    if coords.is_empty() {
        return Err(Error::Usage(
            "base point has empty support; nothing to perturb".into(),
        ));
    }
    let base_value = instance.critical_value(base)?;

    let mut records = Vec::with_capacity(radii.len() * n);
    let mut excluded = 0usize;
    for (ri, &radius) in radii.iter().enumerate() {
        let mut rng = radius_stream(seed, ri);
        let mut produced = 0usize;
        let mut attempts = 0usize;
        while produced < n {
            attempts += 1;
            if attempts > 100 * n {
                return Err(Error::Usage(format!(
                    "cannot draw feasible samples at radius {radius} around the base \
                     (shrink the radius schedule)"
                )));
            }
            let x = draw_on_manifold(base, &coords, radius, &mut rng);
            if !instance.in_domain(&x) {
                continue;
            }
            let subdiff = match instance.subdiff_distance(&x) {
                Ok(d) => d,
                Err(Error::NoExactFormula(_)) => {
                    excluded += 1;
                    produced += 1; // consumes budget, keeps streams aligned
                    continue;
                }
                Err(e) => return Err(e),
            };
            let value = instance.evaluate(&x)?;
            if !value.is_finite() {
                continue;
            }
            let critical_dist = critical.distance(&x)?;
            let residual_norm = match prox::residual_map(instance, &x) {
                Ok(r) => Some(linalg::norm(&r)),
                Err(Error::Capability(_)) => None,
                Err(e) => return Err(e),
            };
            records.push(SampleRecord {
                x,
                f_gap: value.value() - base_value,
                subdiff_dist: subdiff,
                critical_dist,
                residual_norm,
                radius_index: ri,
            });
            produced += 1;
        }
    }

    Ok(SampleCloud {
        instance_name: instance.name.clone(),
        base: base.to_vec(),
        base_value,
        radii: radii.to_vec(),
        samples_per_radius: n,
        seed,
        records,
        excluded_no_formula: excluded,
    })
}

fn radius_stream(seed: u64, radius_index: usize) -> ChaCha8Rng {
    let key = seed ^ 0x9e3779b97f4a7c15u64.wrapping_mul(radius_index as u64 + 1);
    ChaCha8Rng::seed_from_u64(key)
}

/// Base plus a random direction in the manifold coordinates, scaled to land
/// in the annulus `[radius/2, radius]`.
fn draw_on_manifold(
    base: &[f64],
    coords: &[usize],
    radius: f64,
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
        let scale = radius * rng.gen_range(0.5..=1.0) / len;
        let mut x = base.to_vec();
        for (k, &c) in coords.iter().enumerate() {
            x[c] += scale * dir[k];
        }
        return x;
    }
}
