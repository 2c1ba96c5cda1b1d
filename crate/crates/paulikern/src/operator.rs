//! Dense real-symmetric operator arithmetic and certified projectors.
//!
//! Everything downstream (truncated expansions, kernel extraction, the
//! pseudopotential solver) runs on [`Operator`] values: square dense
//! matrices in a fixed orthonormal basis. Projectors carry their rank and
//! an orthonormal spanning set alongside the matrix so that idempotency
//! and Hermiticity are certified once, at construction.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Entrywise symmetry tolerance per unit dimension.
pub const SYMMETRY_TOL_PER_DIM: f64 = 1e-12;
/// Idempotency tolerance per unit dimension for certified projectors.
pub const IDEMPOTENCY_TOL_PER_DIM: f64 = 1e-12;
/// Default relative singular-value threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Dense square matrix over the reals in a fixed orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: DMatrix<f64>,
}

impl Operator {
    /// Wraps a square matrix, rejecting empty or non-finite input.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim == 0 || entries.ncols() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: entries.ncols(),
            });
        }
        for col in 0..dim {
            for row in 0..dim {
                if !entries[(row, col)].is_finite() {
                    return Err(Error::NonFiniteEntry { row, col });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds from a flat row-major slice of length `dim * dim`.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimMismatch {
                left: dim * dim,
                right: entries.len(),
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            dim: self.dim,
            entries: &self.entries + &other.entries,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            dim: self.dim,
            entries: &self.entries - &other.entries,
        })
    }

    /// Matrix product `self * other`. Non-commutative; the result of a
    /// product of symmetric factors is itself symmetric only when they
    /// commute, so no symmetry is assumed or enforced here.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            dim: self.dim,
            entries: &self.entries * &other.entries,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.scale(factor),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.transpose(),
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        Ok(&self.entries * v)
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Frobenius norm, the default operator distance throughout.
    pub fn fro_norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }

    /// Largest entrywise asymmetry `max |a_ij - a_ji|`.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)]).abs());
            }
        }
        worst
    }

    /// Scale-aware symmetry tolerance for this operator.
    pub fn symmetry_tolerance(&self) -> f64 {
        SYMMETRY_TOL_PER_DIM * self.dim as f64 * self.max_abs().max(1.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetry_residual() <= self.symmetry_tolerance()
    }

    /// Replaces the entries by `(a + a^T) / 2`.
    pub fn symmetrize(&mut self) {
        let t = self.entries.transpose();
        self.entries = (&self.entries + t).scale(0.5);
    }
}

/// Eigendecomposition of a symmetric operator, eigenvalues ascending and
/// eigenvectors stored as the corresponding orthonormal columns.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigDecomposition {
    pub fn eigenvector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }
}

/// Full symmetric eigendecomposition with eigenvalues in ascending order.
///
/// Fails with [`Error::NotSymmetric`] when the input violates the symmetry
/// tolerance; otherwise the matrix is symmetrized before factorization so
/// roundoff-level asymmetry cannot leak into the spectrum.
pub fn hermitian_eig(a: &Operator) -> Result<EigDecomposition> {
    let residual = a.symmetry_residual();
    let tol = a.symmetry_tolerance();
    if residual > tol {
        return Err(Error::NotSymmetric { residual, tol });
    }
    Ok(symmetric_eig_unchecked(a))
}

/// Eigendecomposition without the symmetry gate, for operators that are
/// symmetric by construction.
pub(crate) fn symmetric_eig_unchecked(a: &Operator) -> EigDecomposition {
    let mut sym = a.clone();
    sym.symmetrize();
    let se = sym.entries.symmetric_eigen();
    let mut order: Vec<usize> = (0..a.dim).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(a.dim, a.dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    EigDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Residuals behind an idempotency check; `is_projector` holds when both
/// stay within the requested tolerance.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProjectorCheck {
    pub idempotency_residual: f64,
    pub symmetry_residual: f64,
    pub is_projector: bool,
}

/// Checks `a^2 = a` (Frobenius residual) together with symmetry.
pub fn is_projector(a: &Operator, tol: f64) -> ProjectorCheck {
    let idempotency_residual = match a.matmul(a) {
        Ok(sq) => sq.try_sub(a).expect("dims match").fro_norm(),
        Err(_) => f64::INFINITY,
    };
    let symmetry_residual = a.symmetry_residual();
    ProjectorCheck {
        idempotency_residual,
        symmetry_residual,
        is_projector: idempotency_residual <= tol && symmetry_residual <= a.symmetry_tolerance(),
    }
}

/// Orthogonal projector certified at construction: symmetric, idempotent,
/// with `rank` orthonormal spanning vectors stored as matrix columns.
#[derive(Clone, Debug)]
pub struct Projector {
    op: Operator,
    rank: usize,
    span: DMatrix<f64>,
}

impl Projector {
    /// Certifies `op` as the orthogonal projector onto the columns of
    /// `span`. All invariants (symmetry, idempotency, trace = rank, span
    /// orthonormality, `op * span = span`) are enforced here.
    pub fn certify(op: Operator, span: DMatrix<f64>) -> Result<Self> {
        let dim = op.dim();
        let rank = span.ncols();
        if span.nrows() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: span.nrows(),
            });
        }
        if rank == 0 {
            return Err(Error::EmptySpan);
        }
        let sym_residual = op.symmetry_residual();
        let sym_tol = op.symmetry_tolerance();
        if sym_residual > sym_tol {
            return Err(Error::NotSymmetric {
                residual: sym_residual,
                tol: sym_tol,
            });
        }
        let idem_tol = IDEMPOTENCY_TOL_PER_DIM * dim as f64;
        let check = is_projector(&op, idem_tol);
        if check.idempotency_residual > idem_tol {
            return Err(Error::InvalidParams {
                reason: format!(
                    "idempotency residual {:.3e} exceeds {:.3e}",
                    check.idempotency_residual, idem_tol
                ),
            });
        }
        if (op.trace() - rank as f64).abs() > 1e-10 * (rank as f64).max(1.0) {
            return Err(Error::InvalidParams {
                reason: format!("trace {} does not match rank {}", op.trace(), rank),
            });
        }
        let ortho = orthonormality_residual(&span);
        if ortho > 1e-12 * dim as f64 {
            return Err(Error::InvalidParams {
                reason: format!("span orthonormality residual {ortho:.3e}"),
            });
        }
        let fixes = (op.matrix() * &span - &span).norm();
        if fixes > 1e-10 * dim as f64 {
            return Err(Error::InvalidParams {
                reason: format!("span is not fixed by the operator: residual {fixes:.3e}"),
            });
        }
        Ok(Self { op, rank, span })
    }

    /// Projector onto a single basis axis; handy in tests and generators.
    pub fn onto_axis(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::IndexOutOfRange {
                index: axis,
                max: dim - 1,
            });
        }
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        projector_from_span(&[v], DEFAULT_RANK_TOL)
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Orthonormal spanning vectors as the columns of a `dim x rank` matrix.
    pub fn span(&self) -> &DMatrix<f64> {
        &self.span
    }

    pub fn span_vectors(&self) -> Vec<DVector<f64>> {
        (0..self.rank)
            .map(|k| self.span.column(k).into_owned())
            .collect()
    }
}

fn orthonormality_residual(basis: &DMatrix<f64>) -> f64 {
    let gram = basis.transpose() * basis;
    let k = basis.ncols();
    (gram - DMatrix::identity(k, k)).norm()
}

/// Builds the orthogonal projector onto the span of `vectors`.
///
/// The numerical rank is decided by column-pivoted Gram-Schmidt with
/// re-orthogonalization at relative threshold `tol`: a pivot whose residual
/// norm falls below `tol` times the largest input norm is treated as
/// linearly dependent and dropped. Already-orthonormal input is adopted
/// verbatim, which keeps JSON round-trips exact.
pub fn projector_from_span(vectors: &[DVector<f64>], tol: f64) -> Result<Projector> {
    if vectors.is_empty() {
        return Err(Error::EmptySpan);
    }
    let dim = vectors[0].len();
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: v.len(),
            });
        }
    }
    if dim == 0 {
        return Err(Error::EmptySpan);
    }
    let max_norm = vectors.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    if max_norm <= tol {
        return Err(Error::RankZero { tol });
    }

    let basis = if is_orthonormal_family(vectors) {
        let mut m = DMatrix::zeros(dim, vectors.len());
        for (k, v) in vectors.iter().enumerate() {
            m.set_column(k, v);
        }
        m
    } else {
        pivoted_gram_schmidt(vectors, tol * max_norm)
    };

    if basis.ncols() == 0 {
        return Err(Error::RankZero { tol });
    }
    let op = Operator::from_matrix(&basis * basis.transpose())?;
    Projector::certify(op, basis)
}

fn is_orthonormal_family(vectors: &[DVector<f64>]) -> bool {
    let dim = vectors[0].len();
    if vectors.len() > dim {
        return false;
    }
    for (i, v) in vectors.iter().enumerate() {
        if (v.norm_squared() - 1.0).abs() > 1e-12 {
            return false;
        }
        for w in vectors.iter().take(i) {
            if v.dot(w).abs() > 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Column-pivoted modified Gram-Schmidt with one re-orthogonalization pass.
/// Residual columns below `threshold` in norm are discarded.
fn pivoted_gram_schmidt(vectors: &[DVector<f64>], threshold: f64) -> DMatrix<f64> {
    let dim = vectors[0].len();
    let mut residual: Vec<DVector<f64>> = vectors.to_vec();
    let mut used = vec![false; residual.len()];
    let mut basis: Vec<DVector<f64>> = Vec::new();

    loop {
        let mut pivot = None;
        let mut best = threshold;
        for (idx, v) in residual.iter().enumerate() {
            if !used[idx] {
                let n = v.norm();
                if n > best {
                    best = n;
                    pivot = Some(idx);
                }
            }
        }
        let Some(idx) = pivot else { break };
        used[idx] = true;
        let mut q = residual[idx].clone();
        // Second orthogonalization pass tightens the basis to machine
        // precision even for nearly dependent inputs.
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dot(&q);
                q -= b * overlap;
            }
        }
        let n = q.norm();
        if n <= threshold {
            continue;
        }
        q /= n;
        for (jdx, v) in residual.iter_mut().enumerate() {
            if !used[jdx] {
                let overlap = q.dot(v);
                *v -= &q * overlap;
            }
        }
        basis.push(q);
    }

    let mut m = DMatrix::zeros(dim, basis.len());
    for (k, b) in basis.iter().enumerate() {
        m.set_column(k, b);
    }
    m
}

/// Ordered family of projectors on a common space. Members need not
/// commute with one another.
#[derive(Clone, Debug)]
pub struct ProjectorSet {
    dim: usize,
    projectors: Vec<Projector>,
}

impl ProjectorSet {
    pub fn new(projectors: Vec<Projector>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::EmptySpan);
        };
        let dim = first.dim();
        for p in &projectors {
            if p.dim() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
        }
        Ok(Self { dim, projectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Projector> {
        self.projectors.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Projector> {
        self.projectors.iter()
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn total_rank(&self) -> usize {
        self.projectors.iter().map(Projector::rank).sum()
    }
}

// JSON schema: {"dim": n, "entries": [.. n*n reals, row-major ..]}
impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries.push(self.entries[(i, j)]);
            }
        }
        let mut s = serializer.serialize_struct("Operator", 2)?;
        s.serialize_field("dim", &self.dim)?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            entries: Vec<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        Operator::from_row_major(raw.dim, &raw.entries).map_err(D::Error::custom)
    }
}

// JSON schema: {"dim": n, "projectors": [{"span": [[..], ..]}, ..]}
impl Serialize for ProjectorSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct SpanOnly {
            span: Vec<Vec<f64>>,
        }
        let projectors: Vec<SpanOnly> = self
            .projectors
            .iter()
            .map(|p| SpanOnly {
                span: p
                    .span_vectors()
                    .iter()
                    .map(|v| v.iter().copied().collect())
                    .collect(),
            })
            .collect();
        let mut s = serializer.serialize_struct("ProjectorSet", 2)?;
        s.serialize_field("dim", &self.dim)?;
        s.serialize_field("projectors", &projectors)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for ProjectorSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct SpanOnly {
            span: Vec<Vec<f64>>,
        }
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            projectors: Vec<SpanOnly>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut projectors = Vec::with_capacity(raw.projectors.len());
        for (i, p) in raw.projectors.iter().enumerate() {
            let vectors: Vec<DVector<f64>> = p
                .span
                .iter()
                .map(|v| {
                    if v.len() != raw.dim {
                        Err(D::Error::custom(format!(
                            "projector {i}: span vector length {} does not match dim {}",
                            v.len(),
                            raw.dim
                        )))
                    } else {
                        Ok(DVector::from_vec(v.clone()))
                    }
                })
                .collect::<std::result::Result<_, _>>()?;
            let proj = projector_from_span(&vectors, DEFAULT_RANK_TOL)
                .map_err(|e| D::Error::custom(format!("projector {i}: {e}")))?;
            projectors.push(proj);
        }
        ProjectorSet::new(projectors).map_err(D::Error::custom)
    }
}
