//! Small dense linear-algebra helpers over `&[f64]` slices.
//!
//! Instances in this crate are tiny (p ≤ 32), so everything is plain dense
//! arithmetic; nalgebra is used where a factorization is needed.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

pub fn matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let v = m * DVector::from_column_slice(x);
    v.as_slice().to_vec()
}

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0, |acc, &ev| acc.max(ev.abs()))
}

pub fn min_eigenvalue_sym(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &ev| acc.min(ev))
}

/// Orthonormal basis of the null space of `m`, via SVD.
///
/// Singular directions with σ ≤ `tol · σ_max` (or σ ≤ tol when the matrix is
/// numerically zero) count as null. Columns are sign-canonicalized so the
/// first coordinate of largest magnitude is positive.
pub fn kernel_basis(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let ncols = m.ncols();
    if ncols == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 {
        // No constraints: the whole space.
        return (0..ncols)
            .map(|j| {
                let mut e = vec![0.0; ncols];
                e[j] = 1.0;
                e
            })
            .collect();
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = if smax > 0.0 { tol * smax } else { tol };
    let mut basis = Vec::new();
    for i in 0..ncols {
        let sv = if i < svd.singular_values.len() {
            svd.singular_values[i]
        } else {
            0.0
        };
        if sv <= cutoff {
            let mut col: Vec<f64> = (0..ncols).map(|j| v_t[(i, j)]) .collect();
            canonicalize_sign(&mut col);
            basis.push(col);
        }
    }
    basis
}

/// Flip the vector so its largest-magnitude entry is positive; ties break on
/// the lowest index. Keeps enumerated bases reproducible across runs.
pub fn canonicalize_sign(v: &mut [f64]) {
    let mut lead = 0usize;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > v[lead].abs() + 1e-14 {
            lead = i;
        }
    }
    if v[lead] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Box–Muller standard normal pair from two uniforms in (0, 1].
pub fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_zq3_support_block() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let basis = kernel_basis(&m, 1e-10);
        assert_eq!(basis.len(), 1);
        let b = &basis[0];
        assert!((b[0] - b[1]).abs() < 1e-12);
        assert!((norm(b) - 1.0).abs() < 1e-12);
        assert!(b[0] > 0.0);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        let m = DMatrix::identity(3, 3);
        assert!(kernel_basis(&m, 1e-10).is_empty());
    }

    #[test]
    fn spectral_norm_of_zq3_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((spectral_norm_sym(&m) - 2.0).abs() < 1e-12);
    }
}
