//! Brute-force enumeration of the critical set `(∂f)⁻¹(0)` for catalog
//! families, represented as affine pieces so distance queries are exact.
//!
//! For zero-norm quadratics the enumeration walks every support `S`: at full
//! support (`|S| = κ₀`) the normal cone is the off-support span, so the piece
//! is the kernel of the support block of `M̄`; at partial support the
//! limiting cone additionally caps the off-support subgradient sparsity at
//! `p − κ₀`, so a kernel subspace is kept only when the cap holds on all of
//! it. Partial-support pieces are flagged — they are reported, not certified.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::instance::{support, FunctionInstance, NonsmoothPart, PlqPiece, SmoothPart};
use crate::linalg;

const KERNEL_TOL: f64 = 1e-10;

/// An affine piece of the critical set: `origin + span(basis)`, with the
/// basis orthonormal and supported on `support`. Optional per-direction
/// coefficient bounds carve rays and segments out of the span.
#[derive(Debug, Clone)]
pub struct AffinePiece {
    pub support: Vec<usize>,
    pub origin: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub coeff_bounds: Vec<(f64, f64)>,
    pub partial_support: bool,
}

impl AffinePiece {
    pub fn point(origin: Vec<f64>, partial_support: bool) -> Self {
        let support = support(&origin);
        AffinePiece {
            support,
            origin,
            basis: Vec::new(),
            coeff_bounds: Vec::new(),
            partial_support,
        }
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Exact Euclidean projection of `x` onto the piece. Coefficient bounds
    /// clamp componentwise, which is exact because the basis is orthonormal.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let d = linalg::sub(x, &self.origin);
        let mut out = self.origin.clone();
        for (k, b) in self.basis.iter().enumerate() {
            let mut c = linalg::dot(&d, b);
            let (lo, hi) = self.coeff_bounds[k];
            c = c.max(lo).min(hi);
            for (o, &bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        linalg::dist(x, &self.project(x))
    }

    /// A deterministic representative point: a generic combination of the
    /// basis directions (geometrically decaying coefficients, clamped to the
    /// bounds), so it avoids the thin boundary points of the piece.
    pub fn representative(&self) -> Vec<f64> {
        let mut rep = self.origin.clone();
        let mut scale = std::f64::consts::SQRT_2;
        for (k, b) in self.basis.iter().enumerate() {
            let (lo, hi) = self.coeff_bounds[k];
            let c = scale.clamp(lo, hi);
            for (r, &bi) in rep.iter_mut().zip(b) {
                *r += c * bi;
            }
            scale *= 0.7;
        }
        rep
    }
}

/// Enumerated description of `(∂f)⁻¹(0)` supporting exact distance queries.
#[derive(Debug, Clone)]
pub struct CriticalSet {
    pub instance_name: String,
    pub pieces: Vec<AffinePiece>,
}

impl CriticalSet {
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Exact `dist(x, crit f)`: minimum projection distance over the pieces.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(linalg::dist(x, &self.project(x)?))
    }

    /// Nearest critical point to `x`.
    ///
    /// Pieces whose support misses a large part of `x` are pruned by the
    /// cheap bound `dist ≥ ‖x off the piece support‖`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.pieces.is_empty() {
            return Err(Error::EmptyCriticalSet);
        }
        let total: f64 = x.iter().map(|v| v * v).sum();
        let mut best_d = f64::INFINITY;
        let mut best: Option<Vec<f64>> = None;
        for piece in &self.pieces {
            let on: f64 = piece.support.iter().map(|&i| x[i] * x[i]).sum();
            if (total - on).max(0.0).sqrt() >= best_d {
                continue;
            }
            let proj = piece.project(x);
            let d = linalg::dist(x, &proj);
            if d < best_d {
                best_d = d;
                best = Some(proj);
            }
        }
        Ok(best.expect("nonempty critical set"))
    }
}

pub fn enumerate_critical_set(instance: &FunctionInstance) -> Result<CriticalSet> {
    let pieces = match (&instance.smooth, &instance.nonsmooth) {
        (SmoothPart::QuarticBranch, _) => vec![AffinePiece::point(vec![0.0], false)],
        (SmoothPart::Quadratic { m_bar }, NonsmoothPart::Zero) => {
            vec![kernel_piece(m_bar, instance.dimension)]
        }
        (SmoothPart::LeastSquares { a, b }, NonsmoothPart::Zero) => {
            vec![least_squares_piece(a, b)?]
        }
        (SmoothPart::None, NonsmoothPart::Zero) => vec![full_space_piece(instance.dimension)],
        (_, NonsmoothPart::L1 { lambda }) => l1_pieces(instance, *lambda)?,
        (_, NonsmoothPart::Plq { pieces }) => plq_pieces(instance, pieces)?,
        (_, NonsmoothPart::SparseIndicator { kappa0 }) => {
            sparse_pieces(instance, *kappa0, false)?
        }
        (_, NonsmoothPart::SparseNonneg { kappa0 }) => sparse_pieces(instance, *kappa0, true)?,
        (_, NonsmoothPart::BlockSparse { block, kappa0 }) => {
            block_sparse_pieces(instance, *block, *kappa0)?
        }
    };
    let pieces = dedupe(pieces);
    Ok(CriticalSet {
        instance_name: instance.name.clone(),
        pieces,
    })
}

fn full_space_piece(p: usize) -> AffinePiece {
    let basis: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            e
        })
        .collect();
    AffinePiece {
        support: (0..p).collect(),
        origin: vec![0.0; p],
        coeff_bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); basis.len()],
        basis,
        partial_support: false,
    }
}

fn kernel_piece(m_bar: &DMatrix<f64>, p: usize) -> AffinePiece {
    let basis = linalg::kernel_basis(m_bar, KERNEL_TOL);
    AffinePiece {
        support: (0..p).collect(),
        origin: vec![0.0; p],
        coeff_bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); basis.len()],
        basis,
        partial_support: false,
    }
}

fn least_squares_piece(a: &DMatrix<f64>, b: &nalgebra::DVector<f64>) -> Result<AffinePiece> {
    let p = a.ncols();
    let svd = a.clone().svd(true, true);
    let origin = svd
        .solve(b, KERNEL_TOL)
        .map_err(|e| Error::Capability(format!("least-squares solve failed: {e}")))?;
    let basis = linalg::kernel_basis(a, KERNEL_TOL);
    Ok(AffinePiece {
        support: (0..p).collect(),
        origin: origin.as_slice().to_vec(),
        coeff_bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); basis.len()],
        basis,
        partial_support: false,
    })
}

/// Stationary points of `g + λ‖·‖₁` by sign-pattern enumeration (p ≤ 8).
fn l1_pieces(instance: &FunctionInstance, lambda: f64) -> Result<Vec<AffinePiece>> {
    let p = instance.dimension;
    if matches!(instance.smooth, SmoothPart::None) {
        // 0 ∈ λ∂|x_i| forces x = 0 when λ > 0; everything when λ = 0
        return Ok(if lambda > 0.0 {
            vec![AffinePiece::point(vec![0.0; p], false)]
        } else {
            vec![full_space_piece(p)]
        });
    }
    if p > 8 {
        return Err(Error::Capability(
            "l1 critical enumeration limited to p <= 8".into(),
        ));
    }
    let q = match &instance.smooth {
        SmoothPart::Quadratic { m_bar } => m_bar.clone(),
        SmoothPart::LeastSquares { a, .. } => a.transpose() * a,
        _ => return Err(Error::Capability("unsupported smooth part".into())),
    };
    let lin = match &instance.smooth {
        SmoothPart::Quadratic { .. } => nalgebra::DVector::zeros(p),
        SmoothPart::LeastSquares { a, b } => -(a.transpose() * b),
        _ => unreachable!(),
    };
    // ∇g(x) = Qx + lin; stationarity: (Qx + lin)_B = −λσ_B on the sign
    // block, |(Qx + lin)_i| ≤ λ off it.
    let mut out = Vec::new();
    let mut pattern = vec![0i8; p];
    enumerate_sign_patterns(&mut pattern, 0, &mut |sigma: &[i8]| {
        let block: Vec<usize> = (0..p).filter(|&i| sigma[i] != 0).collect();
        let candidate = if block.is_empty() {
            Some(vec![0.0; p])
        } else {
            let qb =
                DMatrix::from_fn(block.len(), block.len(), |i, j| q[(block[i], block[j])]);
            let rhs = nalgebra::DVector::from_fn(block.len(), |i, _| {
                -lambda * sigma[block[i]] as f64 - lin[block[i]]
            });
            qb.lu().solve(&rhs).map(|xb| {
                let mut x = vec![0.0; p];
                for (k, &i) in block.iter().enumerate() {
                    x[i] = xb[k];
                }
                x
            })
        };
        let Some(x) = candidate else { return };
        for (i, &s) in sigma.iter().enumerate() {
            if s != 0 && (x[i] * s as f64) <= 0.0 {
                return;
            }
        }
        let grad = &q * nalgebra::DVector::from_column_slice(&x) + &lin;
        for (i, &s) in sigma.iter().enumerate() {
            if s == 0 && grad[i].abs() > lambda + 1e-12 {
                return;
            }
        }
        out.push(AffinePiece::point(x, false));
    });
    Ok(out)
}

fn enumerate_sign_patterns(pattern: &mut Vec<i8>, i: usize, f: &mut impl FnMut(&[i8])) {
    if i == pattern.len() {
        f(pattern);
        return;
    }
    for s in [0i8, 1, -1] {
        pattern[i] = s;
        enumerate_sign_patterns(pattern, i + 1, f);
    }
}

/// Stationary points of a bare scalar plq table.
fn plq_pieces(instance: &FunctionInstance, pieces: &[PlqPiece]) -> Result<Vec<AffinePiece>> {
    if !matches!(instance.smooth, SmoothPart::None) {
        return Err(Error::Capability(
            "plq critical enumeration supports bare tables only".into(),
        ));
    }
    let mut out = Vec::new();
    for p in pieces {
        if p.a > 0.0 {
            let v = -p.b / (2.0 * p.a);
            if v >= p.lo && v <= p.hi {
                out.push(AffinePiece::point(vec![v], false));
            }
        } else if p.a == 0.0 && p.b == 0.0 && p.lo < p.hi {
            // flat piece: a whole interval of minimizers
            out.push(AffinePiece {
                support: vec![0],
                origin: vec![0.0],
                basis: vec![vec![1.0]],
                coeff_bounds: vec![(p.lo, p.hi)],
                partial_support: false,
            });
        }
    }
    // knots where the subdifferential interval brackets zero
    for w in pieces.windows(2) {
        let t = w[0].hi;
        if t.is_finite() && (t - w[1].lo).abs() < 1e-12 {
            let (dl, dr) = (w[0].derivative(t), w[1].derivative(t));
            if dl <= 1e-15 && dr >= -1e-15 {
                out.push(AffinePiece::point(vec![t], false));
            }
        }
    }
    Ok(out)
}

/// Support enumeration for `½xᵀM̄x + δ_C` (and the nonnegative variant).
fn sparse_pieces(
    instance: &FunctionInstance,
    kappa0: usize,
    nonneg: bool,
) -> Result<Vec<AffinePiece>> {
    let p = instance.dimension;
    let m_bar = match &instance.smooth {
        SmoothPart::Quadratic { m_bar } => m_bar.clone(),
        SmoothPart::None => DMatrix::zeros(p, p),
        _ => {
            return Err(Error::Capability(
                "sparse critical enumeration needs a quadratic (or absent) smooth part".into(),
            ))
        }
    };
    let mut out = Vec::new();
    for size in (1..=kappa0).rev() {
        for s in combinations(p, size) {
            if let Some(piece) = support_piece(&m_bar, p, kappa0, &s, nonneg)? {
                out.push(piece);
            }
        }
    }
    // the origin is always critical: 0 ∈ N_C(0) and ∇g(0) = 0
    out.push(AffinePiece::point(vec![0.0; p], true));
    Ok(out)
}

/// Piece for one support set, or `None` when the normal-cone feasibility cap
/// fails somewhere on the kernel subspace.
fn support_piece(
    m_bar: &DMatrix<f64>,
    p: usize,
    kappa0: usize,
    s: &[usize],
    nonneg: bool,
) -> Result<Option<AffinePiece>> {
    // kernel of the support block: (M̄x)_S = 0 with supp(x) ⊆ S
    let block = DMatrix::from_fn(s.len(), s.len(), |i, j| m_bar[(s[i], s[j])]);
    let kernel = linalg::kernel_basis(&block, KERNEL_TOL);
    if kernel.is_empty() {
        return Ok(None); // only the origin, added separately
    }
    let partial = s.len() < kappa0;
    if partial && off_support_hits(m_bar, p, s, &kernel) > p - kappa0 {
        return Ok(None);
    }
    let mut basis = Vec::with_capacity(kernel.len());
    for k in kernel {
        let mut v = vec![0.0; p];
        for (j, &c) in s.iter().enumerate() {
            v[c] = k[j];
        }
        linalg::canonicalize_sign(&mut v);
        basis.push(v);
    }
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); basis.len()];
    if nonneg {
        if basis.len() > 1 {
            return Err(Error::Capability(
                "nonnegative sparse enumeration supports kernels of dimension <= 1".into(),
            ));
        }
        // keep the half-line staying in the nonnegative orthant; a sign-mixed
        // direction degenerates to the origin
        let b = &mut basis[0];
        let all_nonneg = s.iter().all(|&c| b[c] >= -1e-14);
        let all_nonpos = s.iter().all(|&c| b[c] <= 1e-14);
        if all_nonpos && !all_nonneg {
            for x in b.iter_mut() {
                *x = -*x;
            }
        } else if !all_nonneg {
            return Ok(None);
        }
        bounds[0] = (0.0, f64::INFINITY);
    }
    Ok(Some(AffinePiece {
        support: s.to_vec(),
        origin: vec![0.0; p],
        basis,
        coeff_bounds: bounds,
        partial_support: partial,
    }))
}

fn off_support_hits(m_bar: &DMatrix<f64>, p: usize, s: &[usize], kernel: &[Vec<f64>]) -> usize {
    (0..p)
        .filter(|i| !s.contains(i))
        .filter(|&row| {
            kernel.iter().any(|k| {
                let v: f64 = s
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| m_bar[(row, c)] * k[j])
                    .sum();
                v.abs() > KERNEL_TOL
            })
        })
        .count()
}

/// Support-pair enumeration for the vectorized bilinear family with
/// `M̄ = [[0, B], [Bᵀ, 0]]`, `B = I_m ⊗ A`.
fn block_sparse_pieces(
    instance: &FunctionInstance,
    block: usize,
    kappa0: usize,
) -> Result<Vec<AffinePiece>> {
    let m_bar = match &instance.smooth {
        SmoothPart::Quadratic { m_bar } => m_bar.clone(),
        _ => {
            return Err(Error::Capability(
                "block-sparse enumeration needs the quadratic coupling matrix".into(),
            ))
        }
    };
    let p = instance.dimension;
    let mut supports: Vec<Vec<usize>> = vec![Vec::new()];
    for size in 1..=kappa0 {
        supports.extend(combinations(block, size));
    }
    let mut out = Vec::new();
    for su in &supports {
        for sv in &supports {
            if su.is_empty() && sv.is_empty() {
                continue; // the origin is added below
            }
            let s: Vec<usize> = su
                .iter()
                .copied()
                .chain(sv.iter().map(|&i| i + block))
                .collect();
            let blockm = DMatrix::from_fn(s.len(), s.len(), |i, j| m_bar[(s[i], s[j])]);
            let kernel = linalg::kernel_basis(&blockm, KERNEL_TOL);
            if kernel.is_empty() {
                continue;
            }
            let partial = su.len() < kappa0 || sv.len() < kappa0;
            if partial && !blockwise_cap_holds(&m_bar, p, block, kappa0, &s, &kernel) {
                continue;
            }
            let mut basis = Vec::with_capacity(kernel.len());
            for k in kernel {
                let mut v = vec![0.0; p];
                for (j, &c) in s.iter().enumerate() {
                    v[c] = k[j];
                }
                linalg::canonicalize_sign(&mut v);
                basis.push(v);
            }
            out.push(AffinePiece {
                support: s,
                origin: vec![0.0; p],
                coeff_bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); basis.len()],
                basis,
                partial_support: partial,
            });
        }
    }
    out.push(AffinePiece::point(vec![0.0; p], true));
    Ok(out)
}

fn blockwise_cap_holds(
    m_bar: &DMatrix<f64>,
    p: usize,
    block: usize,
    kappa0: usize,
    s: &[usize],
    kernel: &[Vec<f64>],
) -> bool {
    let mut hits_u = 0usize;
    let mut hits_v = 0usize;
    for row in (0..p).filter(|i| !s.contains(i)) {
        let hit = kernel.iter().any(|k| {
            let v: f64 = s
                .iter()
                .enumerate()
                .map(|(j, &c)| m_bar[(row, c)] * k[j])
                .sum();
            v.abs() > KERNEL_TOL
        });
        if hit {
            if row < block {
                hits_u += 1;
            } else {
                hits_v += 1;
            }
        }
    }
    hits_u <= block - kappa0 && hits_v <= block - kappa0
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Drop pieces wholly contained in another piece (points on a line, the
/// duplicated origin). Keeps reports readable and distances unchanged.
///
/// A piece can only sit inside a piece whose support covers its own, and
/// support sets are tiny, so a bitmask subset test prunes almost every pair
/// before the projection-based containment check runs.
fn dedupe(pieces: Vec<AffinePiece>) -> Vec<AffinePiece> {
    let mut sorted = pieces;
    sorted.sort_by(|a, b| b.dimension().cmp(&a.dimension()));
    let mut kept: Vec<AffinePiece> = Vec::new();
    let mut kept_masks: Vec<u64> = Vec::new();
    for piece in sorted {
        let mask = support_mask(&piece.support);
        let contained = kept
            .iter()
            .zip(&kept_masks)
            .any(|(k, &km)| (mask & !km) == 0 && contains(k, &piece));
        if !contained {
            kept_masks.push(mask);
            kept.push(piece);
        }
    }
    kept
}

/// Saturates to all-ones above 64 coordinates, falling back to the full
/// containment test there.
fn support_mask(support: &[usize]) -> u64 {
    let mut mask = 0u64;
    for &i in support {
        if i >= 64 {
            return u64::MAX;
        }
        mask |= 1u64 << i;
    }
    mask
}

fn contains(outer: &AffinePiece, inner: &AffinePiece) -> bool {
    if outer.dimension() < inner.dimension() {
        return false;
    }
    if outer.distance(&inner.origin) >= 1e-12 {
        return false;
    }
    inner.basis.iter().enumerate().all(|(k, b)| {
        let (lo, hi) = inner.coeff_bounds[k];
        let cp = 1.0f64.min(hi);
        let cm = (-1.0f64).max(lo);
        outer.distance(&linalg::add_scaled(&inner.origin, cp, b)) < 1e-12
            && outer.distance(&linalg::add_scaled(&inner.origin, cm, b)) < 1e-12
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn zq3_critical_set_is_the_diagonal_line() {
        let inst = catalog::builtin("zq3").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        assert_eq!(cs.pieces.len(), 1);
        let piece = &cs.pieces[0];
        assert_eq!(piece.dimension(), 1);
        let b = &piece.basis[0];
        assert!((b[0] - b[1]).abs() < 1e-12 && b[2].abs() < 1e-12);
        // distance from (1.1, 0.9, 0) is |x1 − x2|/√2
        let d = cs.distance(&[1.1, 0.9, 0.0]).unwrap();
        assert!((d - 0.2 / std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(cs.distance(&[2.0, 2.0, 0.0]).unwrap() < 1e-12);
    }

    #[test]
    fn zq3_nonneg_critical_set_is_the_ray() {
        let inst = catalog::builtin("zq3-nonneg").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        assert_eq!(cs.pieces.len(), 1);
        assert_eq!(cs.pieces[0].coeff_bounds[0].0, 0.0);
        // the negative side projects to the origin
        let d = cs.distance(&[-1.0, -1.0, 0.0]).unwrap();
        assert!((d - 2.0f64.sqrt()).abs() < 1e-12);
        assert!(cs.distance(&[3.0, 3.0, 0.0]).unwrap() < 1e-12);
    }

    #[test]
    fn quartic_gap_critical_set_is_origin() {
        let inst = catalog::builtin("quartic-gap").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        assert_eq!(cs.pieces.len(), 1);
        assert_eq!(cs.pieces[0].dimension(), 0);
        assert!((cs.distance(&[0.1]).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn strongly_convex_quadratic_minimizer() {
        let inst = catalog::builtin("half-square").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        assert_eq!(cs.pieces.len(), 1);
        assert_eq!(cs.pieces[0].dimension(), 0);
        assert_eq!(cs.pieces[0].origin, vec![0.0]);
    }

    #[test]
    fn lasso_toy_minimizer() {
        let inst = catalog::builtin("lasso-toy").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        assert_eq!(cs.pieces.len(), 1);
        assert!((cs.pieces[0].origin[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn abs_minimizer_at_origin() {
        let inst = catalog::builtin("abs").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        assert_eq!(cs.pieces.len(), 1);
        assert_eq!(cs.pieces[0].origin, vec![0.0]);
    }

    #[test]
    fn sparse_indicator_critical_set_is_the_constraint_set() {
        let inst = catalog::builtin("sparse-indicator").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        // three coordinate planes of dimension 2
        let planes = cs.pieces.iter().filter(|p| p.dimension() == 2).count();
        assert_eq!(planes, 3);
        // distance equals the hard-thresholding residual
        let z = [0.3, 2.0, -1.0];
        let proj = crate::prox::project_sparse(&z, 2);
        let want = linalg::dist(&z, &proj);
        assert!((cs.distance(&z).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn bilinear_contains_the_two_parameter_plane() {
        let inst = catalog::builtin("bilinear-4x4").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        let base = inst.default_base.clone();
        assert!(cs.distance(&base).unwrap() < 1e-12);
        // perturbing along the difference direction leaves the plane
        let mut x = base.clone();
        x[0] += 0.1;
        x[1] -= 0.1;
        let d = cs.distance(&x).unwrap();
        assert!((d - 0.2 / std::f64::consts::SQRT_2).abs() < 1e-10, "d = {d}");
    }

    #[test]
    fn stationary_value_is_zero_on_zero_norm_quadratics() {
        for name in ["zq3", "zq3-nonneg", "bilinear-4x4"] {
            let inst = catalog::builtin(name).unwrap();
            let cs = enumerate_critical_set(&inst).unwrap();
            for piece in &cs.pieces {
                let rep = piece.representative();
                let v = inst.evaluate(&rep).unwrap();
                assert!(
                    v.is_finite() && v.value().abs() < 1e-10,
                    "{name}: stationary value {v:?} at {rep:?}"
                );
            }
        }
    }

    #[test]
    fn grid_search_agrees_with_projection_on_zq3() {
        let inst = catalog::builtin("zq3").unwrap();
        let cs = enumerate_critical_set(&inst).unwrap();
        // dense parameter sweep along the enumerated line
        let x = [0.73, 1.21, 0.0];
        let exact = cs.distance(&x).unwrap();
        let mut best = f64::INFINITY;
        let mut t = -3.0;
        while t <= 3.0 {
            let z = [t / 2f64.sqrt(), t / 2f64.sqrt(), 0.0];
            best = best.min(linalg::dist(&x, &z));
            t += 1e-3;
        }
        assert!((best - exact).abs() < 1e-3);
        assert!(exact <= best + 1e-12);
    }
}
