//! Generators of projector families and toy Hamiltonians: seeded random
//! ensembles, the analytic equal-overlap triple, and a three-identical-
//! particle model in a two-dimensional product-oscillator basis.
//!
//! The toy model mimics the three-cluster setup: each pair subsystem
//! carries forbidden oscillator states in its own Jacobi frame, frames are
//! related by a kinematic rotation (cosine -1/2 for equal masses), and the
//! rotation preserves total quanta so truncating at `nmax` is exact for
//! the projectors.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{projector_from_span, Operator, Projector, ProjectorSet, DEFAULT_RANK_TOL};
use crate::oscillator::{hermite_values, GaussHermite};

/// Gauss-Hermite node count used for a basis truncated at `nmax`.
fn quadrature_order(nmax: usize) -> usize {
    2 * nmax + 16
}

/// Seeded ensemble of generically non-commuting projectors, each built
/// from `rank` Gaussian vectors. Identical seeds give identical sets.
pub fn random_ensemble(
    dim: usize,
    n_proj: usize,
    ranks: &[usize],
    seed: u64,
) -> Result<ProjectorSet> {
    if dim < 2 {
        return Err(Error::BadRanks {
            reason: format!("dim {dim} too small for a random ensemble"),
        });
    }
    if ranks.len() != n_proj {
        return Err(Error::BadRanks {
            reason: format!("{} ranks given for {} projectors", ranks.len(), n_proj),
        });
    }
    if n_proj == 0 {
        return Err(Error::BadRanks {
            reason: "at least one projector required".into(),
        });
    }
    for &r in ranks {
        if r == 0 || r > dim {
            return Err(Error::BadRanks {
                reason: format!("rank {r} outside 1..={dim}"),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut projectors = Vec::with_capacity(n_proj);
    for &rank in ranks {
        let vectors: Vec<DVector<f64>> = (0..rank)
            .map(|_| DVector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(&mut rng))))
            .collect();
        projectors.push(projector_from_span(&vectors, DEFAULT_RANK_TOL)?);
    }
    ProjectorSet::new(projectors)
}

/// Three rank-1 projectors onto unit vectors with exact pairwise overlap
/// `c`, embedded in `dim` dimensions. The associated Gram matrix
/// `(1-c) I + c J` has spectrum `{1+2c, 1-c, 1-c}`, which is therefore
/// the nonzero spectrum of the projector sum; the family is positive
/// definite exactly for `c` in `(-1/2, 1)`.
pub fn equal_overlap_triple(dim: usize, c: f64) -> Result<ProjectorSet> {
    if dim < 3 {
        return Err(Error::InvalidParams {
            reason: format!("dim {dim} < 3"),
        });
    }
    if !(-0.5..1.0).contains(&c) || c == -0.5 {
        return Err(Error::InvalidOverlap { c });
    }
    let gram = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { c });
    let chol = nalgebra::Cholesky::new(gram).ok_or(Error::InvalidOverlap { c })?;
    let l = chol.l();
    let mut projectors = Vec::with_capacity(3);
    for i in 0..3 {
        let mut v = DVector::zeros(dim);
        for j in 0..=i {
            v[j] = l[(i, j)];
        }
        projectors.push(projector_from_span(&[v], DEFAULT_RANK_TOL)?);
    }
    ProjectorSet::new(projectors)
}

/// Forbidden relative-motion states available in the one-dimensional
/// oscillator reduction: the nodeless `0S` and the two-node `2S`
/// analogues. (A `2D` state has no one-dimensional counterpart.)
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ForbiddenState {
    #[serde(rename = "0S")]
    ZeroS,
    #[serde(rename = "2S")]
    TwoS,
}

impl ForbiddenState {
    /// Oscillator quantum of the forbidden state in the pair coordinate.
    pub fn quanta(self) -> usize {
        match self {
            ForbiddenState::ZeroS => 0,
            ForbiddenState::TwoS => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ForbiddenState::ZeroS => "0S",
            ForbiddenState::TwoS => "2S",
        }
    }
}

impl std::str::FromStr for ForbiddenState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "0S" => Ok(ForbiddenState::ZeroS),
            "2S" => Ok(ForbiddenState::TwoS),
            other => Err(Error::InvalidParams {
                reason: format!("unknown forbidden state {other:?}, expected 0S or 2S"),
            }),
        }
    }
}

/// Parameters of the three-body toy model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToyModelParams {
    /// Total-quanta cutoff: the basis keeps `n_x + n_y <= nmax`.
    pub nmax: usize,
    /// Forbidden states carried by every pair subsystem.
    pub fs: Vec<ForbiddenState>,
    /// Kinematic rotation cosine between adjacent Jacobi frames;
    /// -1/2 for equal masses.
    pub rotation_cos: f64,
    /// Depth of the attractive Gaussian pair interaction.
    pub potential_depth: f64,
    /// Range of the Gaussian pair interaction.
    pub potential_range: f64,
    /// Oscillator length of basis and forbidden states; fixed at 1.
    pub oscillator_length: f64,
}

// Default interaction: narrow and deep. A short-range attraction rewards
// amplitude at pair coincidence, which the Pauli-projected space can only
// supply through coupled symmetric states; this keeps the lowest allowed
// levels visibly coupled to the forbidden space, the regime the
// pseudopotential diagnostics are about. (A wide attraction instead favors
// the antisymmetric-type ground state that decouples identically.)
impl Default for ToyModelParams {
    fn default() -> Self {
        Self {
            nmax: 8,
            fs: vec![ForbiddenState::ZeroS],
            rotation_cos: -0.5,
            potential_depth: 32.0,
            potential_range: 0.3,
            oscillator_length: 1.0,
        }
    }
}

impl ToyModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.fs.is_empty() {
            return Err(Error::InvalidParams {
                reason: "at least one forbidden state required".into(),
            });
        }
        let mut seen = Vec::new();
        for f in &self.fs {
            if seen.contains(f) {
                return Err(Error::InvalidParams {
                    reason: format!("duplicate forbidden state {}", f.label()),
                });
            }
            seen.push(*f);
        }
        let max_quanta = self.fs.iter().map(|f| f.quanta()).max().unwrap_or(0);
        if self.nmax < max_quanta {
            return Err(Error::InvalidParams {
                reason: format!(
                    "nmax {} below the largest forbidden-state quantum {max_quanta}",
                    self.nmax
                ),
            });
        }
        if self.rotation_cos.abs() > 1.0 {
            return Err(Error::InvalidParams {
                reason: format!("rotation cosine {} outside [-1, 1]", self.rotation_cos),
            });
        }
        if !self.potential_range.is_finite() || self.potential_range <= 0.0 {
            return Err(Error::InvalidParams {
                reason: "potential range must be positive".into(),
            });
        }
        if !self.potential_depth.is_finite() {
            return Err(Error::InvalidParams {
                reason: "potential depth must be finite".into(),
            });
        }
        if self.oscillator_length != 1.0 {
            return Err(Error::InvalidParams {
                reason: "oscillator length is fixed at 1".into(),
            });
        }
        Ok(())
    }
}

/// Product-oscillator basis truncated at total quanta `nmax`, ordered by
/// total quanta and, within a block, by descending `n_x`.
pub fn basis_labels(nmax: usize) -> Vec<(usize, usize)> {
    let mut labels = Vec::new();
    for total in 0..=nmax {
        for nx in (0..=total).rev() {
            labels.push((nx, total - nx));
        }
    }
    labels
}

/// Basis size `(nmax + 1)(nmax + 2) / 2`.
pub fn basis_size(nmax: usize) -> usize {
    (nmax + 1) * (nmax + 2) / 2
}

/// Orthogonal operator implementing the plane rotation of the pair and
/// spectator coordinates on the truncated product basis. Block-diagonal
/// in total quanta because the rotation preserves `x^2 + y^2`; matrix
/// elements by tensor Gauss-Hermite quadrature, self-checked for
/// orthogonality.
pub fn frame_rotation(nmax: usize, angle: f64) -> Result<Operator> {
    let labels = basis_labels(nmax);
    let dim = labels.len();
    let rule = GaussHermite::new(quadrature_order(nmax))?;
    let q = rule.len();
    let (sin, cos) = angle.sin_cos();

    // Hermite values at the plain nodes and at the rotated node pairs.
    let plain = rule.hermite_table(nmax);
    let mut rotated_x = DMatrix::zeros(q * q, nmax + 1);
    let mut rotated_y = DMatrix::zeros(q * q, nmax + 1);
    for a in 0..q {
        for b in 0..q {
            let x = rule.nodes()[a];
            let y = rule.nodes()[b];
            let xr = cos * x + sin * y;
            let yr = -sin * x + cos * y;
            let hx = hermite_values(nmax, xr);
            let hy = hermite_values(nmax, yr);
            for n in 0..=nmax {
                rotated_x[(a * q + b, n)] = hx[n];
                rotated_y[(a * q + b, n)] = hy[n];
            }
        }
    }

    // element(i, j) = sum_ab w_a w_b phi_i(R(x,y)) phi_j(x, y);
    // factor as A^T B with the weights split across both sides.
    let mut a_mat = DMatrix::zeros(q * q, dim);
    let mut b_mat = DMatrix::zeros(q * q, dim);
    for a in 0..q {
        for b in 0..q {
            let w = (rule.weights()[a] * rule.weights()[b]).sqrt();
            let node = a * q + b;
            for (col, &(nx, ny)) in labels.iter().enumerate() {
                a_mat[(node, col)] = w * rotated_x[(node, nx)] * rotated_y[(node, ny)];
                b_mat[(node, col)] = w * plain[(a, nx)] * plain[(b, ny)];
            }
        }
    }
    let matrix = a_mat.transpose() * b_mat;

    let residual = (&matrix * matrix.transpose() - DMatrix::identity(dim, dim)).norm();
    if residual > 1e-10 {
        return Err(Error::QuadratureFailure {
            check: "rotation orthogonality",
            residual,
            tol: 1e-10,
        });
    }
    Operator::from_matrix(matrix)
}

/// A fully assembled toy model: the pair projectors, the Hamiltonian and
/// the basis labels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToyModel {
    pub params: ToyModelParams,
    pub basis_labels: Vec<(usize, usize)>,
    pub set: ProjectorSet,
    pub hamiltonian: Operator,
}

/// Matrix of the Gaussian pair potential `-depth * exp(-x^2 / range^2)`
/// in the one-dimensional oscillator basis, checked against a finer rule.
fn pair_potential_1d(nmax: usize, depth: f64, range: f64) -> Result<DMatrix<f64>> {
    let assemble = |rule: &GaussHermite| -> DMatrix<f64> {
        let table = rule.hermite_table(nmax);
        let mut v = DMatrix::zeros(nmax + 1, nmax + 1);
        for (i, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
            let gauss = -depth * (-x * x / (range * range)).exp();
            for m in 0..=nmax {
                for n in m..=nmax {
                    v[(m, n)] += w * gauss * table[(i, m)] * table[(i, n)];
                }
            }
        }
        for m in 0..=nmax {
            for n in 0..m {
                v[(m, n)] = v[(n, m)];
            }
        }
        v
    };
    // The Gaussian potential is not polynomial against the weight, so it
    // gets a finer rule than the (exact) rotation integrals; narrow
    // ranges converge slower and earn extra nodes. Convergence is
    // certified by comparing against a still finer rule.
    let order = 2 * nmax + 48 + (32.0 / (range * range)).ceil() as usize;
    let coarse = assemble(&GaussHermite::new(order)?);
    let fine = assemble(&GaussHermite::new(order + 16)?);
    let residual = (&coarse - &fine).norm();
    let tol = 1e-10 * depth.abs().max(1.0);
    if residual > tol {
        return Err(Error::QuadratureFailure {
            check: "pair potential convergence",
            residual,
            tol,
        });
    }
    Ok(fine)
}

/// Builds the three-body toy model.
///
/// The basis is the product-oscillator basis in the first Jacobi frame.
/// The first pair projector selects the forbidden oscillator quanta in
/// the pair coordinate; the other two are its conjugates under the frame
/// rotations by plus and minus the kinematic angle. The Hamiltonian is
/// the two-dimensional oscillator plus one Gaussian attraction per pair
/// coordinate.
pub fn build_three_body_toy(params: &ToyModelParams) -> Result<ToyModel> {
    params.validate()?;
    let nmax = params.nmax;
    let labels = basis_labels(nmax);
    let dim = labels.len();

    // First-frame span: |f>|m> for every forbidden f and spectator m.
    let mut span_vectors = Vec::new();
    for f in &params.fs {
        let fq = f.quanta();
        for m in 0..=(nmax - fq) {
            let idx = labels
                .iter()
                .position(|&(nx, ny)| nx == fq && ny == m)
                .expect("label in basis");
            let mut v = DVector::zeros(dim);
            v[idx] = 1.0;
            span_vectors.push(v);
        }
    }
    let p1 = projector_from_span(&span_vectors, DEFAULT_RANK_TOL)?;

    let angle = params.rotation_cos.acos();
    let rot_plus = frame_rotation(nmax, angle)?;
    let rot_minus = frame_rotation(nmax, -angle)?;

    let conjugate = |rot: &Operator, p: &Projector| -> Result<Projector> {
        let span = rot.matrix() * p.span();
        let op = Operator::from_matrix(&span * span.transpose())?;
        Projector::certify(op, span)
    };
    let p2 = conjugate(&rot_plus, &p1)?;
    let p3 = conjugate(&rot_minus, &p1)?;
    let set = ProjectorSet::new(vec![p1, p2, p3])?;

    // H = oscillator + sum of the pair attractions, each expressed in the
    // first frame by conjugation.
    let mut h0 = DMatrix::zeros(dim, dim);
    for (i, &(nx, ny)) in labels.iter().enumerate() {
        h0[(i, i)] = (nx + ny) as f64 + 1.0;
    }
    let v1d = pair_potential_1d(nmax, params.potential_depth, params.potential_range)?;
    let mut v1 = DMatrix::zeros(dim, dim);
    for (i, &(ix, iy)) in labels.iter().enumerate() {
        for (j, &(jx, jy)) in labels.iter().enumerate() {
            if iy == jy {
                v1[(i, j)] = v1d[(ix, jx)];
            }
        }
    }
    let v2 = rot_plus.matrix() * &v1 * rot_plus.matrix().transpose();
    let v3 = rot_minus.matrix() * &v1 * rot_minus.matrix().transpose();
    let mut hamiltonian = Operator::from_matrix(h0 + v1 + v2 + v3)?;
    hamiltonian.symmetrize();

    Ok(ToyModel {
        params: params.clone(),
        basis_labels: labels,
        set,
        hamiltonian,
    })
}
