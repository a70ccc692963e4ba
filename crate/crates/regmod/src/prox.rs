//! Exact proximal and projection kernels, and the unit-step residual map
//! `R(x) = prox_h(x − ∇g(x)) − x` whose zero set is exactly `crit f`.

use crate::error::{Error, Result};
use crate::instance::{FunctionInstance, NonsmoothPart, PlqPiece};
use crate::linalg;

/// A proximal evaluation request: `argmin_u h(u) + ‖u − z‖²/(2τ)`.
#[derive(Debug, Clone)]
pub struct ProxRequest<'a> {
    pub nonsmooth: &'a NonsmoothPart,
    pub z: &'a [f64],
    pub step: f64,
}

/// Exact proximal map of the nonsmooth part.
///
/// Closed-form kernels: soft-thresholding for `λ‖·‖₁`, hard-thresholding
/// projections for the sparsity indicators (step-independent), per-piece
/// minimization for scalar plq tables, identity for `h = 0`.
pub fn prox_h(req: &ProxRequest) -> Result<Vec<f64>> {
    if !(req.step > 0.0) {
        return Err(Error::Usage("proximal step must be positive".into()));
    }
    let z = req.z;
    match req.nonsmooth {
        NonsmoothPart::Zero => Ok(z.to_vec()),
        NonsmoothPart::L1 { lambda } => {
            let t = req.step * lambda;
            Ok(z.iter().map(|&v| soft_threshold(v, t)).collect())
        }
        NonsmoothPart::SparseIndicator { kappa0 } => Ok(project_sparse(z, *kappa0)),
        NonsmoothPart::SparseNonneg { kappa0 } => Ok(project_sparse_nonneg(z, *kappa0)),
        NonsmoothPart::BlockSparse { block, kappa0 } => {
            let (u, v) = z.split_at(*block);
            let mut out = project_sparse(u, *kappa0);
            out.extend(project_sparse(v, *kappa0));
            Ok(out)
        }
        NonsmoothPart::Plq { pieces } => Ok(vec![prox_plq(pieces, z[0], req.step)]),
    }
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Euclidean projection onto `{x : ‖x‖₀ ≤ κ₀}`: keep the `κ₀` largest
/// magnitudes, zero the rest. Ties break toward the lowest index so the
/// projection is deterministic.
pub fn project_sparse(z: &[f64], kappa0: usize) -> Vec<f64> {
    if kappa0 >= z.len() {
        return z.to_vec();
    }
    let keep = largest_magnitude_indices(z, kappa0);
    let mut out = vec![0.0; z.len()];
    for i in keep {
        out[i] = z[i];
    }
    out
}

/// Projection onto `{‖x‖₀ ≤ κ₀} ∩ R₊ᵖ`: clamp negatives to zero, then keep
/// the `κ₀` largest entries (ties toward the lowest index).
pub fn project_sparse_nonneg(z: &[f64], kappa0: usize) -> Vec<f64> {
    let clamped: Vec<f64> = z.iter().map(|&v| v.max(0.0)).collect();
    project_sparse(&clamped, kappa0)
}

fn largest_magnitude_indices(z: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| {
        z[b].abs()
            .partial_cmp(&z[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

/// Exact scalar prox of a plq table: per-piece clamped minimizer, best value
/// wins (lowest piece index on ties).
fn prox_plq(pieces: &[PlqPiece], z: f64, step: f64) -> f64 {
    let mut best_u = f64::NAN;
    let mut best_obj = f64::INFINITY;
    for p in pieces {
        // minimize a u² + b u + c + (u − z)²/(2τ) over [lo, hi]
        let denom = 2.0 * p.a + 1.0 / step;
        let u_star = if denom > 0.0 {
            (z / step - p.b) / denom
        } else {
            // flat or concave piece: an endpoint is optimal
            f64::NAN
        };
        let candidates = [u_star.max(p.lo).min(p.hi), p.lo, p.hi];
        for &u in &candidates {
            if !u.is_finite() || !p.contains(u) {
                continue;
            }
            let obj = p.value(u) + (u - z) * (u - z) / (2.0 * step);
            if obj < best_obj - 1e-15 {
                best_obj = obj;
                best_u = u;
            }
        }
    }
    best_u
}

/// Proximal-gradient residual with unit step:
/// `R(x) = prox_h(x − ∇g(x)) − x`; `R(x) = 0` iff `x ∈ crit f`.
pub fn residual_map(instance: &FunctionInstance, x: &[f64]) -> Result<Vec<f64>> {
    let grad = instance.smooth_gradient(x)?;
    let z = linalg::sub(x, &grad);
    let p = prox_h(&ProxRequest {
        nonsmooth: &instance.nonsmooth,
        z: &z,
        step: 1.0,
    })?;
    Ok(linalg::sub(&p, x))
}

/// Exact proximal map of the whole function, `argmin_u f(u) + ‖u−x‖²/(2τ)`,
/// for the convex catalog families. Used by the backward-Euler flow.
pub fn prox_full(instance: &FunctionInstance, x: &[f64], step: f64) -> Result<Vec<f64>> {
    use crate::instance::SmoothPart;
    if !(step > 0.0) {
        return Err(Error::Usage("proximal step must be positive".into()));
    }
    match (&instance.smooth, &instance.nonsmooth) {
        (SmoothPart::None, _) => prox_h(&ProxRequest {
            nonsmooth: &instance.nonsmooth,
            z: x,
            step,
        }),
        (SmoothPart::Quadratic { m_bar }, NonsmoothPart::Zero) => {
            // (I + τM̄) u = x
            let n = instance.dimension;
            let lhs = nalgebra::DMatrix::identity(n, n) + m_bar * step;
            let rhs = nalgebra::DVector::from_column_slice(x);
            let sol = lhs
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Capability("singular proximal system".into()))?;
            Ok(sol.as_slice().to_vec())
        }
        (SmoothPart::LeastSquares { a, b }, NonsmoothPart::Zero) => {
            let n = instance.dimension;
            let lhs = nalgebra::DMatrix::identity(n, n) + a.transpose() * a * step;
            let rhs = nalgebra::DVector::from_column_slice(x) + a.transpose() * b * step;
            let sol = lhs
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Capability("singular proximal system".into()))?;
            Ok(sol.as_slice().to_vec())
        }
        (smooth, NonsmoothPart::L1 { lambda }) if instance.dimension == 1 => {
            // scalar smooth quadratic q(u) = ½ a u² + b u (+ const)
            let (qa, qb) = match smooth {
                SmoothPart::Quadratic { m_bar } => (m_bar[(0, 0)], 0.0),
                SmoothPart::LeastSquares { a, b } => {
                    let col = a.column(0);
                    (col.dot(&col), -col.dot(b))
                }
                _ => {
                    return Err(Error::Capability(format!(
                        "no exact full prox for `{}`",
                        instance.name
                    )))
                }
            };
            let denom = qa + 1.0 / step;
            if denom <= 0.0 {
                return Err(Error::Capability("nonconvex scalar prox".into()));
            }
            Ok(vec![soft_threshold(x[0] / step - qb, *lambda) / denom])
        }
        _ => Err(Error::Capability(format!(
            "no exact full proximal kernel for `{}`",
            instance.name
        ))),
    }
}
