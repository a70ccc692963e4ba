//! Structured test functions `f = g + h` with exact first-order oracles.
//!
//! Every instance carries closed-form evaluation, smooth gradient,
//! subdifferential-distance and domain-membership oracles. Oracles are pure;
//! an instance is immutable after construction and safe to share across
//! threads.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

pub const DEFAULT_BOX_RADIUS: f64 = 10.0;

/// Largest dimension accepted for sparsity-indicator families, so that
/// brute-force support enumeration stays feasible.
pub const MAX_SPARSE_DIM: usize = 24;

/// Extended-real function value: finite or `+∞` (outside `dom h`).
/// Values are never `−∞`; instances stay proper by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn finite(v: f64) -> Self {
        assert!(
            v > f64::NEG_INFINITY && !v.is_nan(),
            "extended-real values must be proper"
        );
        ExtendedReal::Finite(v)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// The value as `f64`, with `+∞` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }
}

/// Smooth component `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothPart {
    None,
    /// `g(x) = ½ xᵀ M̄ x` with `M̄` symmetrized at construction.
    Quadratic { m_bar: DMatrix<f64> },
    /// `g(x) = ½ ‖Ax − b‖²`.
    LeastSquares { a: DMatrix<f64>, b: DVector<f64> },
    /// Scalar `g(x) = x⁴` (the smooth branch of the quartic-gap special case).
    QuarticBranch,
}

/// One piece of a scalar piecewise linear-quadratic table:
/// `a·u² + b·u + c` on `[lo, hi]` (`±∞` bounds allowed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlqPiece {
    pub lo: f64,
    pub hi: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PlqPiece {
    pub fn value(&self, u: f64) -> f64 {
        self.a * u * u + self.b * u + self.c
    }

    pub fn derivative(&self, u: f64) -> f64 {
        2.0 * self.a * u + self.b
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.lo && u <= self.hi
    }
}

/// Nonsmooth component `h`.
#[derive(Debug, Clone, PartialEq)]
pub enum NonsmoothPart {
    Zero,
    /// `h(x) = λ‖x‖₁`.
    L1 { lambda: f64 },
    /// Indicator of `C = {x : ‖x‖₀ ≤ κ₀}`.
    SparseIndicator { kappa0: usize },
    /// Indicator of `C ∩ R₊ᵖ`.
    SparseNonneg { kappa0: usize },
    /// Indicator of `{‖u‖₀ ≤ κ₀} × {‖v‖₀ ≤ κ₀}` for `x = (u, v)` split into
    /// two consecutive blocks of `block` coordinates each.
    BlockSparse { block: usize, kappa0: usize },
    /// Scalar piecewise linear-quadratic table; pieces ordered left to right.
    Plq { pieces: Vec<PlqPiece> },
}

/// Catalog family tag. `QuarticGap` carries the one family-level special
/// case: the function value drops to `−1` at the origin while every sample
/// the estimators see lives on the smooth branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Quadratic,
    LeastSquares,
    L1,
    QuadraticL1,
    LeastSquaresL1,
    ZeroNormQuadratic,
    ZeroNormQuadraticNonneg,
    BilinearSparse,
    SparseIndicator,
    Plq,
    QuarticGap,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Quadratic => "quadratic",
            Family::LeastSquares => "least-squares",
            Family::L1 => "l1",
            Family::QuadraticL1 => "quadratic-l1",
            Family::LeastSquaresL1 => "least-squares-l1",
            Family::ZeroNormQuadratic => "zero-norm-quadratic",
            Family::ZeroNormQuadraticNonneg => "zero-norm-quadratic-nonneg",
            Family::BilinearSparse => "bilinear-sparse",
            Family::SparseIndicator => "sparse-indicator",
            Family::Plq => "plq",
            Family::QuarticGap => "quartic-gap",
        }
    }
}

/// A structured function `f = g + h` from the catalog.
#[derive(Debug, Clone)]
pub struct FunctionInstance {
    pub name: String,
    pub family: Family,
    pub dimension: usize,
    pub smooth: SmoothPart,
    pub nonsmooth: NonsmoothPart,
    pub convex: bool,
    /// Lipschitz modulus of `∇g` on the working box.
    pub smoothness_constant: f64,
    pub box_radius: f64,
    /// `f` restricted to `dom f` is continuous at its critical points.
    pub continuous_on_crit: bool,
    /// Stationary values separate: `f(y) ≤ f(x̄)` on a critical neighborhood
    /// of every critical `x̄` (certified analytically per family).
    pub assumption1: bool,
    /// Uniform prox-regularity certificate `ρ`, when the family admits one.
    pub prox_rho: Option<f64>,
    /// Canonical base point used by the bundled suite and as CLI default.
    pub default_base: Vec<f64>,
}

impl FunctionInstance {
    pub fn new(
        name: impl Into<String>,
        family: Family,
        dimension: usize,
        smooth: SmoothPart,
        nonsmooth: NonsmoothPart,
        box_radius: f64,
        default_base: Vec<f64>,
    ) -> Result<Self> {
        let smooth = match smooth {
            SmoothPart::Quadratic { m_bar } => SmoothPart::Quadratic {
                m_bar: linalg::symmetrize(&m_bar),
            },
            other => other,
        };
        let mut inst = FunctionInstance {
            name: name.into(),
            family,
            dimension,
            smooth,
            nonsmooth,
            convex: false,
            smoothness_constant: 0.0,
            box_radius,
            continuous_on_crit: family != Family::QuarticGap,
            assumption1: true,
            prox_rho: None,
            default_base,
        };
        inst.validate()?;
        inst.smoothness_constant = inst.lipschitz_on_box();
        inst.convex = inst.derive_convexity();
        inst.prox_rho = inst.derive_prox_rho();
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::config("p", "dimension must be positive"));
        }
        if !(self.box_radius > 0.0) {
            return Err(Error::config("box_radius", "must be positive"));
        }
        match &self.smooth {
            SmoothPart::None => {}
            SmoothPart::Quadratic { m_bar } => {
                if m_bar.nrows() != self.dimension || m_bar.ncols() != self.dimension {
                    return Err(Error::config("M", "matrix must be p x p"));
                }
            }
            SmoothPart::LeastSquares { a, b } => {
                if a.ncols() != self.dimension {
                    return Err(Error::config("A", "matrix must have p columns"));
                }
                if b.len() != a.nrows() {
                    return Err(Error::config("b", "length must match the rows of A"));
                }
            }
            SmoothPart::QuarticBranch => {
                if self.dimension != 1 {
                    return Err(Error::config("p", "quartic-gap is a scalar family"));
                }
            }
        }
        match &self.nonsmooth {
            NonsmoothPart::Zero => {}
            NonsmoothPart::L1 { lambda } => {
                if !(*lambda >= 0.0) {
                    return Err(Error::config("lambda", "must be nonnegative"));
                }
            }
            NonsmoothPart::SparseIndicator { kappa0 }
            | NonsmoothPart::SparseNonneg { kappa0 } => {
                if *kappa0 < 1 || *kappa0 > self.dimension {
                    return Err(Error::config("kappa0", "must satisfy 1 <= kappa0 <= p"));
                }
                if self.dimension > MAX_SPARSE_DIM {
                    return Err(Error::config(
                        "p",
                        format!("sparsity families require p <= {MAX_SPARSE_DIM}"),
                    ));
                }
            }
            NonsmoothPart::BlockSparse { block, kappa0 } => {
                if *block == 0 || self.dimension != 2 * block {
                    return Err(Error::config("p", "block-sparse requires p = 2 * block"));
                }
                if *kappa0 < 1 || *kappa0 > *block {
                    return Err(Error::config("kappa0", "must satisfy 1 <= kappa0 <= block"));
                }
                if *block > MAX_SPARSE_DIM {
                    return Err(Error::config(
                        "p",
                        format!("sparsity blocks require block <= {MAX_SPARSE_DIM}"),
                    ));
                }
            }
            NonsmoothPart::Plq { pieces } => {
                if self.dimension != 1 {
                    return Err(Error::config("pieces", "plq tables are scalar"));
                }
                if pieces.is_empty() {
                    return Err(Error::config("pieces", "table must be nonempty"));
                }
                for (i, w) in pieces.windows(2).enumerate() {
                    if w[0].hi > w[1].lo + 1e-12 {
                        return Err(Error::config(
                            format!("pieces[{}]", i + 1),
                            "piece domains must be ordered",
                        ));
                    }
                }
                for (i, p) in pieces.iter().enumerate() {
                    if p.lo > p.hi {
                        return Err(Error::config(format!("pieces[{i}]"), "lo must be <= hi"));
                    }
                }
            }
        }
        Ok(())
    }

    fn lipschitz_on_box(&self) -> f64 {
        match &self.smooth {
            SmoothPart::None => 0.0,
            SmoothPart::Quadratic { m_bar } => linalg::spectral_norm_sym(m_bar),
            SmoothPart::LeastSquares { a, .. } => {
                linalg::spectral_norm_sym(&(a.transpose() * a))
            }
            // |g''(x)| = 12 x² on the box.
            SmoothPart::QuarticBranch => 12.0 * self.box_radius * self.box_radius,
        }
    }

    fn derive_convexity(&self) -> bool {
        let smooth_ok = match &self.smooth {
            SmoothPart::None => true,
            SmoothPart::Quadratic { m_bar } => linalg::min_eigenvalue_sym(m_bar) >= -1e-12,
            SmoothPart::LeastSquares { .. } => true,
            SmoothPart::QuarticBranch => false, // the family jumps at the origin
        };
        let nonsmooth_ok = match &self.nonsmooth {
            NonsmoothPart::Zero | NonsmoothPart::L1 { .. } => true,
            NonsmoothPart::SparseIndicator { kappa0 } => *kappa0 == self.dimension,
            NonsmoothPart::SparseNonneg { kappa0 } => *kappa0 == self.dimension,
            NonsmoothPart::BlockSparse { block, kappa0 } => kappa0 == block,
            NonsmoothPart::Plq { pieces } => plq_is_convex(pieces),
        };
        smooth_ok && nonsmooth_ok
    }

    fn derive_prox_rho(&self) -> Option<f64> {
        if self.family == Family::QuarticGap {
            // ∂f at the origin is the whole line; no uniform certificate.
            return None;
        }
        if self.convex {
            return Some(0.0);
        }
        // Quadratic curvature bound: g(y) − g(x) − ⟨∇g(x), y−x⟩ = ½ dᵀM̄d
        // ≥ −½‖M̄‖₂‖d‖², and the indicator part contributes nothing on
        // support-preserving pairs.
        match &self.smooth {
            SmoothPart::Quadratic { m_bar } => Some(linalg::spectral_norm_sym(m_bar)),
            SmoothPart::None => Some(0.0),
            _ => None,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Value of the smooth part `g` alone.
    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        match &self.smooth {
            SmoothPart::None => 0.0,
            SmoothPart::Quadratic { m_bar } => 0.5 * linalg::dot(x, &linalg::matvec(m_bar, x)),
            SmoothPart::LeastSquares { a, b } => {
                let r = a * DVector::from_column_slice(x) - b;
                0.5 * r.norm_squared()
            }
            SmoothPart::QuarticBranch => {
                let t = x[0];
                t * t * t * t
            }
        }
    }

    /// Value of the nonsmooth part `h` alone (`+∞` outside `dom h`).
    pub fn nonsmooth_value(&self, x: &[f64]) -> ExtendedReal {
        match &self.nonsmooth {
            NonsmoothPart::Zero => ExtendedReal::Finite(0.0),
            NonsmoothPart::L1 { lambda } => {
                ExtendedReal::Finite(lambda * x.iter().map(|v| v.abs()).sum::<f64>())
            }
            NonsmoothPart::SparseIndicator { kappa0 } => {
                if support(x).len() <= *kappa0 {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PosInfinity
                }
            }
            NonsmoothPart::SparseNonneg { kappa0 } => {
                if x.iter().all(|&v| v >= 0.0) && support(x).len() <= *kappa0 {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PosInfinity
                }
            }
            NonsmoothPart::BlockSparse { block, kappa0 } => {
                let (u, v) = x.split_at(*block);
                if support(u).len() <= *kappa0 && support(v).len() <= *kappa0 {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PosInfinity
                }
            }
            NonsmoothPart::Plq { pieces } => {
                let u = x[0];
                let mut best = f64::INFINITY;
                for p in pieces {
                    if p.contains(u) {
                        best = best.min(p.value(u));
                    }
                }
                if best.is_finite() {
                    ExtendedReal::Finite(best)
                } else {
                    ExtendedReal::PosInfinity
                }
            }
        }
    }

    /// `f(x) = g(x) + h(x)`, `+∞` iff `x ∉ dom h`.
    pub fn evaluate(&self, x: &[f64]) -> Result<ExtendedReal> {
        self.check_dim(x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Usage("evaluation point must be finite".into()));
        }
        if self.family == Family::QuarticGap && x[0] == 0.0 {
            return Ok(ExtendedReal::Finite(-1.0));
        }
        match self.nonsmooth_value(x) {
            ExtendedReal::PosInfinity => Ok(ExtendedReal::PosInfinity),
            ExtendedReal::Finite(h) => Ok(ExtendedReal::finite(self.smooth_value(x) + h)),
        }
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dimension && self.nonsmooth_value(x).is_finite()
    }

    /// Gradient of the smooth part; `M̄x` for quadratic forms.
    pub fn smooth_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(match &self.smooth {
            SmoothPart::None => vec![0.0; self.dimension],
            SmoothPart::Quadratic { m_bar } => linalg::matvec(m_bar, x),
            SmoothPart::LeastSquares { a, b } => {
                let r = a * DVector::from_column_slice(x) - b;
                (a.transpose() * r).as_slice().to_vec()
            }
            SmoothPart::QuarticBranch => vec![4.0 * x[0] * x[0] * x[0]],
        })
    }

    /// Exact `dist(0, ∂f(x))` where the catalog has a formula.
    ///
    /// Sparsity-indicator families only have one at full-support points,
    /// where the normal cone is the span of the off-support coordinates;
    /// elsewhere this signals [`Error::NoExactFormula`] rather than guessing.
    pub fn subdiff_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        if self.family == Family::QuarticGap {
            // ∂f(0) is the whole line, so the distance vanishes there.
            let t = x[0];
            return Ok(if t == 0.0 { 0.0 } else { (4.0 * t * t * t).abs() });
        }
        if !self.in_domain(x) {
            // dist to the empty subdifferential
            return Ok(f64::INFINITY);
        }
        let grad = self.smooth_gradient(x)?;
        match &self.nonsmooth {
            NonsmoothPart::Zero => Ok(linalg::norm(&grad)),
            NonsmoothPart::L1 { lambda } => {
                let mut s = 0.0;
                for (i, &xi) in x.iter().enumerate() {
                    let d = if xi != 0.0 {
                        grad[i] + lambda * xi.signum()
                    } else {
                        // dist(−∇g_i, [−λ, λ])
                        (grad[i].abs() - lambda).max(0.0)
                    };
                    s += d * d;
                }
                Ok(s.sqrt())
            }
            NonsmoothPart::SparseIndicator { kappa0 } | NonsmoothPart::SparseNonneg { kappa0 } => {
                let supp = support(x);
                if supp.len() < *kappa0 {
                    return Err(Error::NoExactFormula(format!(
                        "{}: point has partial support {} < kappa0 = {}",
                        self.name,
                        supp.len(),
                        kappa0
                    )));
                }
                if matches!(self.nonsmooth, NonsmoothPart::SparseNonneg { .. })
                    && supp.iter().any(|&i| x[i] <= 0.0)
                {
                    return Err(Error::NoExactFormula(format!(
                        "{}: nonnegative family needs strictly positive support",
                        self.name
                    )));
                }
                Ok(restricted_norm(&grad, &supp))
            }
            NonsmoothPart::BlockSparse { block, kappa0 } => {
                let (u, v) = x.split_at(*block);
                let su = support(u);
                let sv = support(v);
                if su.len() < *kappa0 || sv.len() < *kappa0 {
                    return Err(Error::NoExactFormula(format!(
                        "{}: both blocks must have full support kappa0 = {}",
                        self.name, kappa0
                    )));
                }
                let supp: Vec<usize> = su
                    .iter()
                    .copied()
                    .chain(sv.iter().map(|&i| i + block))
                    .collect();
                Ok(restricted_norm(&grad, &supp))
            }
            NonsmoothPart::Plq { pieces } => {
                let (lo, hi) = plq_subdiff_interval(pieces, x[0]).ok_or_else(|| {
                    Error::NoExactFormula(format!("{}: point outside the plq domain", self.name))
                })?;
                let g0 = grad[0];
                Ok(interval_distance(g0 + lo, g0 + hi))
            }
        }
    }

    /// Stationary value used as the gap base for sampling around `base`.
    ///
    /// Equals `f(base)` for every family except the quartic-gap special
    /// case, whose value jumps down at the origin while the samples approach
    /// along the smooth branch (limit value 0).
    pub fn critical_value(&self, base: &[f64]) -> Result<f64> {
        self.check_dim(base)?;
        if self.family == Family::QuarticGap && base[0] == 0.0 {
            return Ok(0.0);
        }
        let v = self.evaluate(base)?;
        if !v.is_finite() {
            return Err(Error::Usage(format!(
                "base point is outside dom f for `{}`",
                self.name
            )));
        }
        Ok(v.value())
    }

    /// Whether a critical `base` is a local minimizer of `f` on `dom f`.
    ///
    /// Decided analytically: convex families always, quadratic-over-support
    /// families by positive semidefiniteness of the support block, the
    /// quartic gap by inspection.
    pub fn is_local_min(&self, base: &[f64]) -> Result<bool> {
        self.check_dim(base)?;
        if self.convex {
            return Ok(true);
        }
        match (&self.smooth, &self.nonsmooth) {
            (SmoothPart::QuarticBranch, _) => Ok(base[0] == 0.0),
            (SmoothPart::Quadratic { m_bar }, NonsmoothPart::SparseIndicator { .. })
            | (SmoothPart::Quadratic { m_bar }, NonsmoothPart::SparseNonneg { .. })
            | (SmoothPart::Quadratic { m_bar }, NonsmoothPart::BlockSparse { .. }) => {
                let supp = self.manifold_coords(base);
                if supp.is_empty() {
                    return Ok(linalg::min_eigenvalue_sym(m_bar) >= -1e-12);
                }
                let sub = submatrix(m_bar, &supp);
                Ok(linalg::min_eigenvalue_sym(&sub) >= -1e-12)
            }
            (SmoothPart::Quadratic { m_bar }, _) => {
                Ok(linalg::min_eigenvalue_sym(m_bar) >= -1e-12)
            }
            (SmoothPart::None, _) => Ok(true),
            _ => Ok(false),
        }
    }

    /// Coordinates of the sampling manifold around `base`: the support of
    /// `base` for indicator families, all coordinates otherwise.
    pub fn manifold_coords(&self, base: &[f64]) -> Vec<usize> {
        match &self.nonsmooth {
            NonsmoothPart::SparseIndicator { .. } | NonsmoothPart::SparseNonneg { .. } => {
                support(base)
            }
            NonsmoothPart::BlockSparse { block, .. } => {
                let (u, v) = base.split_at(*block);
                support(u)
                    .into_iter()
                    .chain(support(v).into_iter().map(|i| i + block))
                    .collect()
            }
            _ => (0..self.dimension).collect(),
        }
    }

    /// Minimum-norm subgradient representative `∇g(x) + argmin‖·‖ ∂h(x)`.
    pub fn subgradient_representative(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if !self.in_domain(x) {
            return Err(Error::Usage("representative requested outside dom f".into()));
        }
        let grad = self.smooth_gradient(x)?;
        Ok(match &self.nonsmooth {
            NonsmoothPart::Zero
            | NonsmoothPart::SparseIndicator { .. }
            | NonsmoothPart::SparseNonneg { .. }
            | NonsmoothPart::BlockSparse { .. } => grad,
            NonsmoothPart::L1 { lambda } => x
                .iter()
                .zip(&grad)
                .map(|(&xi, &gi)| {
                    if xi != 0.0 {
                        gi + lambda * xi.signum()
                    } else {
                        // min-norm element of g_i + [−λ, λ]
                        interval_min_norm(gi - lambda, gi + lambda)
                    }
                })
                .collect(),
            NonsmoothPart::Plq { pieces } => {
                let (lo, hi) = plq_subdiff_interval(pieces, x[0])
                    .ok_or_else(|| Error::Usage("point outside plq domain".into()))?;
                vec![interval_min_norm(grad[0] + lo, grad[0] + hi)]
            }
        })
    }
}

/// Indices of nonzero coordinates.
pub fn support(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

fn restricted_norm(v: &[f64], coords: &[usize]) -> f64 {
    coords.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt()
}

fn submatrix(m: &DMatrix<f64>, coords: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(coords.len(), coords.len(), |i, j| m[(coords[i], coords[j])])
}

fn interval_distance(lo: f64, hi: f64) -> f64 {
    if lo <= 0.0 && 0.0 <= hi {
        0.0
    } else {
        lo.abs().min(hi.abs())
    }
}

fn interval_min_norm(lo: f64, hi: f64) -> f64 {
    if lo <= 0.0 && 0.0 <= hi {
        0.0
    } else if lo > 0.0 {
        lo
    } else {
        hi
    }
}

/// Subdifferential of a scalar plq table at `u` as an interval
/// `[left derivative, right derivative]`; `None` outside the domain.
/// Unbounded sides at finite domain endpoints come back as `±∞`.
fn plq_subdiff_interval(pieces: &[PlqPiece], u: f64) -> Option<(f64, f64)> {
    let holding: Vec<&PlqPiece> = pieces.iter().filter(|p| p.contains(u)).collect();
    if holding.is_empty() {
        return None;
    }
    let first = holding.first().unwrap();
    let last = holding.last().unwrap();
    let lo = if u > first.lo {
        first.derivative(u)
    } else {
        f64::NEG_INFINITY
    };
    let hi = if u < last.hi {
        last.derivative(u)
    } else {
        f64::INFINITY
    };
    Some((lo, hi))
}

pub(crate) fn plq_is_convex(pieces: &[PlqPiece]) -> bool {
    if pieces.iter().any(|p| p.a < 0.0) {
        return false;
    }
    for w in pieces.windows(2) {
        let (l, r) = (&w[0], &w[1]);
        // continuity and monotone derivatives across the knot
        if (l.hi - r.lo).abs() > 1e-12 {
            return false;
        }
        if l.hi.is_finite() && (l.value(l.hi) - r.value(r.lo)).abs() > 1e-10 {
            return false;
        }
        if l.hi.is_finite() && l.derivative(l.hi) > r.derivative(r.lo) + 1e-12 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn zq3_evaluate_on_and_off_domain() {
        let inst = catalog::builtin("zq3").unwrap();
        let v = inst.evaluate(&[1.1, 0.9, 0.0]).unwrap();
        assert!((v.value() - 0.02).abs() < 1e-12);
        let off = inst.evaluate(&[1.0, 1.0, 1.0]).unwrap();
        assert!(!off.is_finite());
    }

    #[test]
    fn zq3_gradient_is_symmetrized_matvec() {
        let inst = catalog::builtin("zq3").unwrap();
        let g = inst.smooth_gradient(&[1.1, 0.9, 0.0]).unwrap();
        assert!((g[0] - 0.2).abs() < 1e-12);
        assert!((g[1] + 0.2).abs() < 1e-12);
        assert!(g[2].abs() < 1e-12);
    }

    #[test]
    fn zq3_subdiff_distance_full_support() {
        let inst = catalog::builtin("zq3").unwrap();
        let d = inst.subdiff_distance(&[1.1, 0.9, 0.0]).unwrap();
        assert!((d - 0.08f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zq3_subdiff_distance_partial_support_signals() {
        let inst = catalog::builtin("zq3").unwrap();
        let err = inst.subdiff_distance(&[1.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NoExactFormula(_)));
    }

    #[test]
    fn quartic_gap_values() {
        let inst = catalog::builtin("quartic-gap").unwrap();
        assert_eq!(inst.evaluate(&[0.0]).unwrap().value(), -1.0);
        assert!((inst.evaluate(&[0.1]).unwrap().value() - 1e-4).abs() < 1e-18);
        assert!((inst.subdiff_distance(&[0.1]).unwrap() - 0.004).abs() < 1e-15);
        assert_eq!(inst.subdiff_distance(&[0.0]).unwrap(), 0.0);
        assert_eq!(inst.critical_value(&[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn lasso_toy_subdiff_distance() {
        let inst = catalog::builtin("lasso-toy").unwrap();
        let d = inst.subdiff_distance(&[0.8]).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
        // at zero the interval [−1.5, −0.5] misses the origin by 0.5
        let d0 = inst.subdiff_distance(&[0.0]).unwrap();
        assert!((d0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn smooth_gradient_trivial_cases() {
        let half = catalog::builtin("half-square").unwrap();
        assert!((half.smooth_gradient(&[3.0]).unwrap()[0] - 3.0).abs() < 1e-15);
        let lasso = catalog::builtin("lasso-toy").unwrap();
        assert_eq!(lasso.smooth_gradient(&[1.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let inst = catalog::builtin("zq3").unwrap();
        assert!(matches!(
            inst.evaluate(&[1.0]).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn prox_rho_certificates() {
        assert_eq!(catalog::builtin("zq3").unwrap().prox_rho, Some(2.0));
        assert_eq!(catalog::builtin("neg-half-square").unwrap().prox_rho, Some(1.0));
        assert_eq!(catalog::builtin("lasso-toy").unwrap().prox_rho, Some(0.0));
        assert_eq!(catalog::builtin("quartic-gap").unwrap().prox_rho, None);
    }

    #[test]
    fn convexity_flags() {
        assert!(catalog::builtin("half-square").unwrap().convex);
        assert!(catalog::builtin("lasso-toy").unwrap().convex);
        assert!(catalog::builtin("huber").unwrap().convex);
        assert!(!catalog::builtin("zq3").unwrap().convex);
        assert!(!catalog::builtin("neg-half-square").unwrap().convex);
        assert!(!catalog::builtin("quartic-gap").unwrap().convex);
    }

    #[test]
    fn local_min_flags() {
        assert!(catalog::builtin("zq3").unwrap().is_local_min(&[1.0, 1.0, 0.0]).unwrap());
        assert!(catalog::builtin("quartic-gap").unwrap().is_local_min(&[0.0]).unwrap());
        assert!(!catalog::builtin("neg-half-square").unwrap().is_local_min(&[0.0]).unwrap());
        // the bilinear saddle is not a local minimizer on its manifold
        let bil = catalog::builtin("bilinear-4x4").unwrap();
        let base = bil.default_base.clone();
        assert!(!bil.is_local_min(&base).unwrap());
    }
}
