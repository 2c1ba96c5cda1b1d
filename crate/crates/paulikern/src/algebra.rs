//! Numeric projector algebra: truncated expansions, the power limit,
//! allowed-subspace extraction and the executable identity checks.
//!
//! The complete projector onto the union of the forbidden subspaces is
//! defined spectrally here, as the identity minus the projector onto
//! `ker P` with `P` the plain sum of the family. The truncated expansion
//! and the power sequence `1 - (1-P)^m` are kept as independent
//! computation routes and verified against each other; the power route is
//! guarded because it diverges once `P` has an eigenvalue at or above 2.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{
    symmetric_eig_unchecked, EigDecomposition, Operator, Projector, ProjectorSet,
};
use crate::words::FormalSum;

/// Default eigenvalue cutoff separating the kernel from the rest of the
/// spectrum of `P`.
pub const DEFAULT_KERNEL_THRESHOLD: f64 = 1e-10;
/// Default Frobenius-norm guard for the power sequence.
pub const DEFAULT_POWER_GUARD: f64 = 1e6;
/// Eigenvalues this close to 2 make `(1-P)^m` stagnate instead of decay.
pub const STAGNATION_TOL: f64 = 1e-9;
/// Upper edge of the reported almost-forbidden band.
pub const ALMOST_FORBIDDEN_CEILING: f64 = 0.1;

/// `P = sum_i P_i`. Symmetric by construction; a projector only when the
/// members are mutually orthogonal.
pub fn sum_projector(set: &ProjectorSet) -> Operator {
    let mut acc = Operator::zeros(set.dim());
    for p in set.iter() {
        acc = acc.try_add(p.op()).expect("set members share dim");
    }
    acc
}

/// Truncated expansion of order `n`, computed through the recursion
/// `G_{k+1} = P + G_k - P G_k` (with `G_1 = P`) at cost `O(n dim^3)` instead
/// of enumerating words.
pub fn truncated_expansion(set: &ProjectorSet, order: u32) -> Operator {
    let p = sum_projector(set);
    let mut complete = p.clone();
    for _ in 1..order {
        let pg = p.matmul(&complete).expect("dims match");
        complete = p
            .try_add(&complete)
            .and_then(|s| s.try_sub(&pg))
            .expect("dims match");
    }
    complete
}

/// Evaluates a formal sum of generator words on concrete projectors:
/// every word becomes the corresponding matrix product, the empty word
/// the identity.
pub fn evaluate_formal_sum(sum: &FormalSum, set: &ProjectorSet) -> Result<Operator> {
    let dim = set.dim();
    let mut acc = Operator::zeros(dim);
    for (word, coeff) in sum.terms() {
        let mut term = Operator::identity(dim);
        for &letter in word.letters() {
            let proj = set.get(letter - 1).ok_or(Error::IndexOutOfRange {
                index: letter,
                max: set.len(),
            })?;
            term = term.matmul(proj.op())?;
        }
        acc = acc.try_add(&term.scale(coeff as f64))?;
    }
    Ok(acc)
}

/// `1 - (1-P)^m` by binary exponentiation. Every intermediate power is
/// checked against `guard` in Frobenius norm; once the spectrum of `P`
/// reaches 2 the sequence grows without bound and the error reports the
/// power at which the guard tripped.
pub fn power_limit(set: &ProjectorSet, m: u64, guard: f64) -> Result<Operator> {
    if m == 0 {
        return Err(Error::InvalidParams {
            reason: "power must be at least 1".into(),
        });
    }
    let dim = set.dim();
    let one_minus_p = Operator::identity(dim)
        .try_sub(&sum_projector(set))
        .expect("dims match");

    let check = |op: &Operator, at_power: u64| -> Result<()> {
        let norm = op.fro_norm();
        if !norm.is_finite() || norm > guard {
            return Err(Error::Diverged {
                at_power,
                norm,
                guard,
            });
        }
        Ok(())
    };

    // Square-and-multiply on (1-P), tracking the exponent reached so the
    // divergence diagnostics can name it.
    let mut result = Operator::identity(dim);
    let mut result_pow = 0u64;
    let mut base = one_minus_p;
    let mut base_pow = 1u64;
    let mut remaining = m;
    loop {
        if remaining & 1 == 1 {
            result = result.matmul(&base).expect("dims match");
            result_pow += base_pow;
            check(&result, result_pow)?;
        }
        remaining >>= 1;
        if remaining == 0 {
            break;
        }
        base = base.matmul(&base).expect("dims match");
        base_pow *= 2;
        check(&base, base_pow)?;
    }

    Ok(Operator::identity(dim).try_sub(&result).expect("dims"))
}

/// Orthonormal basis of the allowed subspace `ker P`, extracted from the
/// eigenvectors of `P` with eigenvalue strictly below `threshold`.
#[derive(Clone, Debug)]
pub struct KernelBasis {
    dim: usize,
    vectors: DMatrix<f64>,
    threshold: f64,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kernel_dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Basis vectors as the columns of a `dim x kernel_dim` matrix.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.vectors.column(k).into_owned()
    }

    /// Largest `||P_i v||` over the basis and the individual projectors.
    /// `ker P` is the intersection of the member kernels, so these stay at
    /// the threshold scale for every `i` separately.
    pub fn intersection_residuals(&self, set: &ProjectorSet) -> Vec<f64> {
        set.iter()
            .map(|p| {
                let image = p.op().matrix() * &self.vectors;
                (0..image.ncols())
                    .map(|k| image.column(k).norm())
                    .fold(0.0_f64, f64::max)
            })
            .collect()
    }

    /// Largest `||P v||` over the basis.
    pub fn sum_residual(&self, set: &ProjectorSet) -> f64 {
        let image = sum_projector(set).into_matrix() * &self.vectors;
        (0..image.ncols())
            .map(|k| image.column(k).norm())
            .fold(0.0_f64, f64::max)
    }
}

fn kernel_from_eig(eig: &EigDecomposition, dim: usize, threshold: f64) -> KernelBasis {
    let kernel_dim = eig
        .eigenvalues
        .iter()
        .take_while(|&&l| l < threshold)
        .count();
    let vectors = eig.eigenvectors.columns(0, kernel_dim).into_owned();
    KernelBasis {
        dim,
        vectors,
        threshold,
    }
}

/// Extracts `ker P` for `P` the sum of the family. An empty kernel is a
/// valid result (every state forbidden).
pub fn kernel_basis(set: &ProjectorSet, threshold: f64) -> KernelBasis {
    let p = sum_projector(set);
    let eig = symmetric_eig_unchecked(&p);
    kernel_from_eig(&eig, set.dim(), threshold)
}

/// The complete projector, defined spectrally: identity minus the
/// projector onto `ker P`. Exists for every family, including those whose
/// power sequence diverges.
pub fn complete_projector(set: &ProjectorSet, threshold: f64) -> Projector {
    let dim = set.dim();
    let p = sum_projector(set);
    let eig = symmetric_eig_unchecked(&p);
    let kernel_dim = eig
        .eigenvalues
        .iter()
        .take_while(|&&l| l < threshold)
        .count();
    let kernel = eig.eigenvectors.columns(0, kernel_dim);
    let op_matrix = DMatrix::identity(dim, dim) - kernel * kernel.transpose();
    let span = eig
        .eigenvectors
        .columns(kernel_dim, dim - kernel_dim)
        .into_owned();
    let op = Operator::from_matrix(op_matrix).expect("square");
    Projector::certify(op, span).expect("spectral construction is certified")
}

/// Residual report for the finite-order identity between the truncated
/// expansion and the power route `1 - (1-P)^m`. The identity is exact for
/// every order, convergent spectrum or not.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionIdentityReport {
    pub order: u32,
    pub dim: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn verify_expansion_identity(set: &ProjectorSet, order: u32) -> ExpansionIdentityReport {
    let dim = set.dim();
    let complete = truncated_expansion(set, order);

    // Direct route: plain powers of (1-P), no guard, no recursion.
    let one_minus_p = Operator::identity(dim)
        .try_sub(&sum_projector(set))
        .expect("dims");
    let mut power = Operator::identity(dim);
    for _ in 0..order {
        power = power.matmul(&one_minus_p).expect("dims");
    }
    let direct = Operator::identity(dim).try_sub(&power).expect("dims");

    let residual = complete.try_sub(&direct).expect("dims").fro_norm();
    let tolerance = 1e-10 * dim as f64;
    ExpansionIdentityReport {
        order,
        dim,
        residual,
        tolerance,
        pass: residual <= tolerance,
    }
}

/// Two-sided kernel comparison between `P` and the spectrally defined
/// complete projector.
#[derive(Clone, Debug, Serialize)]
pub struct KernelIdentityReport {
    pub kernel_dim_sum: usize,
    pub kernel_dim_complete: usize,
    /// Largest norm of the complete projector applied to the kernel
    /// basis of `P`.
    pub complete_on_sum_kernel: f64,
    /// Largest norm of `P` applied to the kernel eigenvectors of the
    /// complete projector.
    pub sum_on_complete_kernel: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn verify_kernel_identity(set: &ProjectorSet, threshold: f64) -> KernelIdentityReport {
    let p = sum_projector(set);
    let p_kernel = kernel_basis(set, threshold);
    let complete = complete_projector(set, threshold);

    let complete_on_kernel = complete.op().matrix() * p_kernel.vectors();
    let complete_on_sum_kernel = (0..complete_on_kernel.ncols())
        .map(|k| complete_on_kernel.column(k).norm())
        .fold(0.0_f64, f64::max);

    // Independent eigendecomposition of the complete projector itself;
    // its kernel must be the same subspace.
    let complete_eig = symmetric_eig_unchecked(complete.op());
    let complete_kernel = kernel_from_eig(&complete_eig, set.dim(), threshold);
    let sum_on_kernel_image = p.matrix() * complete_kernel.vectors();
    let sum_on_complete_kernel = (0..sum_on_kernel_image.ncols())
        .map(|k| sum_on_kernel_image.column(k).norm())
        .fold(0.0_f64, f64::max);

    let residual_tol = 10.0 * threshold;
    let pass = p_kernel.kernel_dim() == complete_kernel.kernel_dim()
        && complete_on_sum_kernel <= residual_tol
        && sum_on_complete_kernel <= residual_tol;
    KernelIdentityReport {
        kernel_dim_sum: p_kernel.kernel_dim(),
        kernel_dim_complete: complete_kernel.kernel_dim(),
        complete_on_sum_kernel,
        sum_on_complete_kernel,
        threshold,
        pass,
    }
}

/// Absorption residuals `||P_i G - P_i||` and `||G P_i - P_i||` for one
/// member, with `G` the complete projector.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CommutationResidual {
    pub left: f64,
    pub right: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutationReport {
    pub residuals: Vec<CommutationResidual>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Each member commutes with the complete projector and is absorbed by
/// it: the range of `P_i` lies inside the complete projector's range.
pub fn commutation_check(set: &ProjectorSet, threshold: f64) -> CommutationReport {
    let complete = complete_projector(set, threshold);
    let mut residuals = Vec::with_capacity(set.len());
    let mut max_residual = 0.0_f64;
    for p in set.iter() {
        let pg = p.op().matmul(complete.op()).expect("dims");
        let gp = complete.op().matmul(p.op()).expect("dims");
        let left = pg.try_sub(p.op()).expect("dims").fro_norm();
        let right = gp.try_sub(p.op()).expect("dims").fro_norm();
        max_residual = max_residual.max(left).max(right);
        residuals.push(CommutationResidual { left, right });
    }
    let tolerance = 1e-9 * set.dim() as f64;
    CommutationReport {
        residuals,
        max_residual,
        tolerance,
        pass: max_residual <= tolerance,
    }
}

/// Spectrum of `P` with convergence diagnostics for the power sequence.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    /// Full spectrum of `P`, ascending.
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    /// `rho = max |1 - lambda|` over eigenvalues above the kernel cutoff;
    /// the geometric rate of `(1-P)^m` on the complement of the kernel.
    pub contraction_factor: f64,
    /// Smallest `m` with `rho^m <= target`, absent whenever `rho >= 1`.
    pub predicted_m: Option<u64>,
    /// Some eigenvalue reaches 2: the power sequence grows without bound.
    pub divergent: bool,
    /// Some eigenvalue sits exactly at 2 (within tolerance): the sequence
    /// neither decays nor grows on that mode.
    pub stagnant: bool,
    /// Eigenvalues in the almost-forbidden band `[threshold, 0.1]`.
    pub almost_forbidden: Vec<f64>,
    /// Eigenvalues within a factor 10 of the kernel cutoff, where the
    /// kernel decision is numerically ambiguous.
    pub ambiguous: Vec<f64>,
    pub threshold: f64,
    pub target: f64,
}

/// Diagnoses the convergence of the power sequence from the spectrum of
/// `P`. `target` is the requested contraction level in `(0, 1)`.
pub fn convergence_report(
    set: &ProjectorSet,
    threshold: f64,
    target: f64,
) -> Result<SpectrumReport> {
    if !(0.0..1.0).contains(&target) || target == 0.0 {
        return Err(Error::InvalidParams {
            reason: format!("target {target} must lie in (0, 1)"),
        });
    }
    if threshold <= 0.0 {
        return Err(Error::InvalidParams {
            reason: "threshold must be positive".into(),
        });
    }
    let p = sum_projector(set);
    let eig = symmetric_eig_unchecked(&p);
    let eigenvalues = eig.eigenvalues.clone();
    let kernel_dim = eigenvalues.iter().take_while(|&&l| l < threshold).count();

    let contraction_factor = eigenvalues
        .iter()
        .filter(|&&l| l >= threshold)
        .map(|&l| (1.0 - l).abs())
        .fold(0.0_f64, f64::max);
    let divergent = eigenvalues.iter().any(|&l| l >= 2.0 - STAGNATION_TOL);
    let stagnant = eigenvalues
        .iter()
        .any(|&l| (l - 2.0).abs() <= STAGNATION_TOL);

    let predicted_m = if !divergent && contraction_factor < 1.0 {
        if contraction_factor <= 0.0 {
            Some(1)
        } else {
            let m = (target.ln() / contraction_factor.ln()).ceil();
            Some(m.max(1.0) as u64)
        }
    } else {
        None
    };

    let almost_forbidden = eigenvalues
        .iter()
        .copied()
        .filter(|&l| l >= threshold && l <= ALMOST_FORBIDDEN_CEILING)
        .collect();
    let ambiguous = eigenvalues
        .iter()
        .copied()
        .filter(|&l| l >= threshold / 10.0 && l <= threshold * 10.0)
        .collect();

    Ok(SpectrumReport {
        eigenvalues,
        kernel_dim,
        contraction_factor,
        predicted_m,
        divergent,
        stagnant,
        almost_forbidden,
        ambiguous,
        threshold,
        target,
    })
}
