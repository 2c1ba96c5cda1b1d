//! Orthogonalizing pseudopotential workflow: penalize the forbidden
//! components with `H + lambda * P`, compare against the exact projected
//! Hamiltonian on the allowed subspace, and expose the sensitivity of the
//! spectrum to almost-forbidden modes.
//!
//! Only the plain sum `P` enters the penalty; the kernel identity
//! guarantees the large-`lambda` limit is the projection onto the same
//! allowed subspace the complete projector would select.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{kernel_basis, sum_projector, KernelBasis};
use crate::error::{Error, Result};
use crate::operator::ProjectorSet;
use crate::operator::{hermitian_eig, symmetric_eig_unchecked, Operator};

/// Projected levels closer than this are flagged as degenerate; the
/// perturbative tail of a degenerate level has no clean `1/lambda` decay.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Number of trailing grid points entering the slope fit.
pub const SLOPE_FIT_POINTS: usize = 4;

/// The Hamiltonian restricted to the allowed subspace, together with the
/// kernel basis that defines the restriction.
#[derive(Clone, Debug)]
pub struct ProjectedHamiltonian {
    pub matrix: Operator,
    pub basis: KernelBasis,
}

/// Restricts `h` to `ker P`: `K^T h K` with `K` stacking the kernel basis
/// vectors. Its spectrum is the exact `lambda -> infinity` reference.
pub fn projected_hamiltonian(
    h: &Operator,
    set: &ProjectorSet,
    threshold: f64,
) -> Result<ProjectedHamiltonian> {
    if h.dim() != set.dim() {
        return Err(Error::DimMismatch {
            left: h.dim(),
            right: set.dim(),
        });
    }
    if !h.is_symmetric() {
        return Err(Error::NotSymmetric {
            residual: h.symmetry_residual(),
            tol: h.symmetry_tolerance(),
        });
    }
    let basis = kernel_basis(set, threshold);
    restrict_to(h, basis)
}

fn restrict_to(h: &Operator, basis: KernelBasis) -> Result<ProjectedHamiltonian> {
    if basis.kernel_dim() == 0 {
        return Err(Error::EmptyKernel);
    }
    let k = basis.vectors();
    let mut matrix = Operator::from_matrix(k.transpose() * h.matrix() * k)?;
    matrix.symmetrize();
    Ok(ProjectedHamiltonian { matrix, basis })
}

/// Result of a penalty-strength sweep.
#[derive(Clone, Debug, Serialize)]
pub struct OppSweepResult {
    /// Penalty strengths, ascending.
    pub lambda_grid: Vec<f64>,
    /// Lowest `levels` eigenvalues of `H + lambda P` per grid point.
    pub energies: Vec<Vec<f64>>,
    /// Lowest `levels` eigenvalues of the projected Hamiltonian.
    pub projected_energies: Vec<f64>,
    /// Fitted log-log slope of `|E_k(lambda) - E_k^proj|` over the tail;
    /// absent when the gap is below noise (no coupling to penalize).
    pub slopes: Vec<Option<f64>>,
    /// Level sits within [`DEGENERACY_GAP`] of a neighbor in the projected
    /// spectrum; the slope contract does not apply there.
    pub degenerate_tail: Vec<bool>,
    pub kernel_dim: usize,
    pub threshold: f64,
}

/// Dense eigensolve of `H + lambda P` across the grid. The grid must be
/// ascending and nonnegative; per-point solves run in parallel and the
/// result order is the grid order.
pub fn lambda_sweep(
    h: &Operator,
    set: &ProjectorSet,
    lambda_grid: &[f64],
    levels: usize,
    threshold: f64,
) -> Result<OppSweepResult> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParams {
            reason: "lambda grid is empty".into(),
        });
    }
    if lambda_grid.windows(2).any(|w| w[0] >= w[1]) || lambda_grid[0] < 0.0 {
        return Err(Error::InvalidParams {
            reason: "lambda grid must be ascending and nonnegative".into(),
        });
    }
    if levels == 0 {
        return Err(Error::InvalidParams {
            reason: "at least one level required".into(),
        });
    }
    let projected = projected_hamiltonian(h, set, threshold)?;
    let kernel_dim = projected.basis.kernel_dim();
    if levels > kernel_dim {
        return Err(Error::LevelCountExceedsKernel { levels, kernel_dim });
    }
    let projected_eig = symmetric_eig_unchecked(&projected.matrix);
    let projected_energies: Vec<f64> = projected_eig.eigenvalues[..levels].to_vec();

    let p = sum_projector(set);
    let energies: Vec<Vec<f64>> = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let penalized = h.try_add(&p.scale(lambda)).expect("dims checked");
            let eig = symmetric_eig_unchecked(&penalized);
            eig.eigenvalues[..levels].to_vec()
        })
        .collect();

    let mut slopes = Vec::with_capacity(levels);
    for k in 0..levels {
        let tail: Vec<(f64, f64)> = lambda_grid
            .iter()
            .zip(&energies)
            .rev()
            .take(SLOPE_FIT_POINTS)
            .filter(|(&l, _)| l > 0.0)
            .map(|(&l, e)| (l, (e[k] - projected_energies[k]).abs()))
            .collect();
        slopes.push(fit_loglog_slope(&tail, projected_energies[k]));
    }

    let degenerate_tail: Vec<bool> = (0..levels)
        .map(|k| {
            let lower = k > 0
                && (projected_eig.eigenvalues[k] - projected_eig.eigenvalues[k - 1]).abs()
                    < DEGENERACY_GAP;
            let upper = k + 1 < projected_eig.eigenvalues.len()
                && (projected_eig.eigenvalues[k + 1] - projected_eig.eigenvalues[k]).abs()
                    < DEGENERACY_GAP;
            lower || upper
        })
        .collect();

    Ok(OppSweepResult {
        lambda_grid: lambda_grid.to_vec(),
        energies,
        projected_energies,
        slopes,
        degenerate_tail,
        kernel_dim,
        threshold,
    })
}

fn fit_loglog_slope(tail: &[(f64, f64)], reference_energy: f64) -> Option<f64> {
    if tail.len() < 2 {
        return None;
    }
    let noise = 1e-13 * reference_energy.abs().max(1.0);
    if tail.iter().any(|&(_, gap)| gap <= noise) {
        return None;
    }
    let points: Vec<(f64, f64)> = tail.iter().map(|&(l, g)| (l.ln(), g.ln())).collect();
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// One row of the almost-forbidden sensitivity table.
#[derive(Clone, Debug, Serialize)]
pub struct AlmostForbiddenRow {
    /// Band edge: modes of `P` with eigenvalue in `[threshold, eps)` are
    /// the almost-forbidden modes this row decides about.
    pub eps: f64,
    /// Allowed dimension when the band is kept in the model space.
    pub kernel_dim_keep: usize,
    /// Allowed dimension when the band is eliminated.
    pub kernel_dim_elim: usize,
    /// Projected ground energy with the band kept; absent if the allowed
    /// space is empty.
    pub e_keep: Option<f64>,
    /// Projected ground energy with the band eliminated.
    pub e_elim: Option<f64>,
}

/// Sensitivity of the ground energy to the treatment of almost-forbidden
/// modes, swept over a grid of band edges.
#[derive(Clone, Debug, Serialize)]
pub struct AlmostForbiddenReport {
    pub rows: Vec<AlmostForbiddenRow>,
    /// Kernel cutoff defining the strictly forbidden complement.
    pub base_threshold: f64,
    /// Penalty strength of the finite-lambda reference energy.
    pub lambda_ref: f64,
    /// Ground energy of `H + lambda_ref P`, the value an OPP calculation
    /// at finite strength would report.
    pub e_opp_ref: f64,
    /// Smallest eigenvalue of `P` above the base threshold.
    pub smallest_nonzero: Option<f64>,
}

/// For each band edge `eps`: eliminate the almost-forbidden modes
/// (allowed space = eigenvalues below `base_threshold`) versus keep them
/// (allowed space = eigenvalues below `eps`). The eliminated space is
/// contained in the kept space, so `e_elim >= e_keep` variationally.
pub fn almost_forbidden_report(
    h: &Operator,
    set: &ProjectorSet,
    eps_grid: &[f64],
    lambda_ref: f64,
    base_threshold: f64,
) -> Result<AlmostForbiddenReport> {
    if h.dim() != set.dim() {
        return Err(Error::DimMismatch {
            left: h.dim(),
            right: set.dim(),
        });
    }
    if eps_grid.is_empty()
        || eps_grid.windows(2).any(|w| w[0] >= w[1])
        || eps_grid[0] <= 0.0
        || *eps_grid.last().unwrap() >= 1.0
    {
        return Err(Error::InvalidParams {
            reason: "eps grid must be ascending inside (0, 1)".into(),
        });
    }
    if lambda_ref <= 0.0 {
        return Err(Error::InvalidParams {
            reason: "lambda_ref must be positive".into(),
        });
    }
    let p = sum_projector(set);
    let p_eig = symmetric_eig_unchecked(&p);

    let ground_for_cutoff = |cutoff: f64| -> Option<(usize, Option<f64>)> {
        let kdim = p_eig
            .eigenvalues
            .iter()
            .take_while(|&&l| l < cutoff)
            .count();
        if kdim == 0 {
            return Some((0, None));
        }
        let basis = p_eig.eigenvectors.columns(0, kdim);
        let mut projected = basis.transpose() * h.matrix() * basis;
        let t = projected.transpose();
        projected = (projected + t).scale(0.5);
        let ground =
            symmetric_eig_unchecked(&Operator::from_matrix(projected).ok()?).eigenvalues[0];
        Some((kdim, Some(ground)))
    };

    let (kernel_dim_elim, e_elim) =
        ground_for_cutoff(base_threshold).expect("projection is well formed");

    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let (kernel_dim_keep, e_keep) = ground_for_cutoff(eps).expect("projection is well formed");
        rows.push(AlmostForbiddenRow {
            eps,
            kernel_dim_keep,
            kernel_dim_elim,
            e_keep,
            e_elim,
        });
    }

    let penalized = h.try_add(&p.scale(lambda_ref))?;
    let e_opp_ref = symmetric_eig_unchecked(&penalized).eigenvalues[0];
    let smallest_nonzero = p_eig
        .eigenvalues
        .iter()
        .copied()
        .find(|&l| l >= base_threshold);

    Ok(AlmostForbiddenReport {
        rows,
        base_threshold,
        lambda_ref,
        e_opp_ref,
        smallest_nonzero,
    })
}

/// Log-spaced grid helper: `count` points from `start` to `stop`
/// inclusive, both positive.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !start.is_finite() || !stop.is_finite() || start <= 0.0 || stop <= start || count < 2 {
        return Err(Error::InvalidParams {
            reason: format!("bad log grid {start}:{stop}:{count}"),
        });
    }
    let l0 = start.ln();
    let l1 = stop.ln();
    Ok((0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// Spectrum of the projected Hamiltonian defined through the kernel of an
/// arbitrary symmetric operator (used to cross-check that penalizing with
/// the complete projector selects the same allowed space as `P`).
pub fn projected_spectrum_via(
    h: &Operator,
    selector: &Operator,
    threshold: f64,
) -> Result<Vec<f64>> {
    let eig = hermitian_eig(selector)?;
    let kdim = eig
        .eigenvalues
        .iter()
        .take_while(|&&l| l < threshold)
        .count();
    if kdim == 0 {
        return Err(Error::EmptyKernel);
    }
    let basis = eig.eigenvectors.columns(0, kdim);
    let mut projected = basis.transpose() * h.matrix() * basis;
    let t = projected.transpose();
    projected = (projected + t).scale(0.5);
    Ok(symmetric_eig_unchecked(&Operator::from_matrix(projected)?).eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{complete_projector, DEFAULT_KERNEL_THRESHOLD};
    use crate::models::{build_three_body_toy, equal_overlap_triple, ToyModelParams};
    use crate::operator::Projector;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    fn diag(entries: &[f64]) -> Operator {
        Operator::from_matrix(DMatrix::from_diagonal(&DVector::from_row_slice(entries))).unwrap()
    }

    fn axis_set(dim: usize, axes: &[usize]) -> ProjectorSet {
        let projectors = axes
            .iter()
            .map(|&a| Projector::onto_axis(dim, a).unwrap())
            .collect();
        ProjectorSet::new(projectors).unwrap()
    }

    #[test]
    fn projected_diagonal_example() {
        let h = diag(&[1.0, 2.0, 3.0]);
        let set = axis_set(3, &[0]);
        let proj = projected_hamiltonian(&h, &set, 1e-10).unwrap();
        assert_eq!(proj.basis.kernel_dim(), 2);
        let eig = symmetric_eig_unchecked(&proj.matrix);
        assert_abs_diff_eq!(eig.eigenvalues[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.eigenvalues[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn projected_empty_kernel() {
        let h = diag(&[1.0, 2.0]);
        let set = axis_set(2, &[0, 1]);
        assert!(matches!(
            projected_hamiltonian(&h, &set, 1e-10),
            Err(Error::EmptyKernel)
        ));
    }

    #[test]
    fn projection_raises_the_toy_ground_energy() {
        let toy = build_three_body_toy(&ToyModelParams::default()).unwrap();
        let unprojected = symmetric_eig_unchecked(&toy.hamiltonian).eigenvalues[0];
        let proj = projected_hamiltonian(&toy.hamiltonian, &toy.set, 1e-10).unwrap();
        let projected = symmetric_eig_unchecked(&proj.matrix).eigenvalues[0];
        assert!(
            projected > unprojected,
            "restricting the variational space must raise the minimum: {projected} <= {unprojected}"
        );
    }

    #[test]
    fn sweep_diagonal_example() {
        let h = diag(&[1.0, 2.0, 3.0]);
        let set = axis_set(3, &[0]);
        let grid = [1e2, 1e3, 1e4];
        let sweep = lambda_sweep(&h, &set, &grid, 2, 1e-10).unwrap();
        // Commuting penalty: energies equal the projected values exactly,
        // at every strength, and no slope is defined.
        for row in &sweep.energies {
            assert_abs_diff_eq!(row[0], 2.0, epsilon = 1e-10);
            assert_abs_diff_eq!(row[1], 3.0, epsilon = 1e-10);
        }
        assert_eq!(sweep.slopes, vec![None, None]);

        // The pushed-up level sits near 1 + lambda.
        let penalized = h.try_add(&sum_projector(&set).scale(1e4)).unwrap();
        let eig = symmetric_eig_unchecked(&penalized);
        assert_abs_diff_eq!(eig.eigenvalues[2], 1.0 + 1e4, epsilon = 1e-9);
    }

    #[test]
    fn sweep_zero_strength_reproduces_h() {
        let h = diag(&[1.0, 2.0, 3.0, 4.0]);
        let set = axis_set(4, &[3]);
        let sweep = lambda_sweep(&h, &set, &[0.0, 10.0], 2, 1e-10).unwrap();
        assert_abs_diff_eq!(sweep.energies[0][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sweep.energies[0][1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn slope_matches_two_level_perturbation_oracle() {
        // h = [[1, g], [g, 2]], P onto the second axis. The exact lowest
        // eigenvalue of h + lambda P is
        //   (3 + lambda)/2 - sqrt(((1 + lambda)/2)^2 + g^2),
        // which approaches the projected value 1 like -g^2 / lambda:
        // log-log slope -1 with prefactor g^2.
        let g = 0.35;
        let h = Operator::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, g, g, 2.0])).unwrap();
        let set = axis_set(2, &[1]);
        let grid = log_grid(1e2, 1e6, 9).unwrap();
        let sweep = lambda_sweep(&h, &set, &grid, 1, 1e-10).unwrap();
        assert_abs_diff_eq!(sweep.projected_energies[0], 1.0, epsilon = 1e-12);
        let slope = sweep.slopes[0].expect("coupled level has a tail");
        assert_abs_diff_eq!(slope, -1.0, epsilon = 0.02);
        // Prefactor: |E(lambda) - 1| * lambda -> g^2 on the tail.
        let last = sweep.energies.last().unwrap()[0];
        let lambda = *grid.last().unwrap();
        assert_abs_diff_eq!((last - 1.0).abs() * lambda, g * g, epsilon = 1e-2);
        assert!(!sweep.degenerate_tail[0]);
    }

    #[test]
    fn energies_monotone_in_strength() {
        let toy = build_three_body_toy(&ToyModelParams {
            nmax: 4,
            ..ToyModelParams::default()
        })
        .unwrap();
        let grid = log_grid(1e0, 1e5, 8).unwrap();
        let sweep = lambda_sweep(&toy.hamiltonian, &toy.set, &grid, 2, 1e-10).unwrap();
        let p_norm = sum_projector(&toy.set).fro_norm();
        let h_norm = toy.hamiltonian.fro_norm();
        for k in 0..2 {
            for (w, lam) in sweep.energies.windows(2).zip(grid.windows(2)) {
                // Exact eigenvalues are monotone (the penalty is positive
                // semidefinite); computed ones carry the eigensolver's
                // backward error, which scales with the penalized norm.
                let slack = 1e-12 + 1e-14 * (h_norm + lam[1] * p_norm);
                assert!(
                    w[1][k] >= w[0][k] - slack,
                    "level {k} decreased: {} -> {} at lambda {}",
                    w[0][k],
                    w[1][k],
                    lam[1]
                );
            }
            // Gap to the projected value shrinks along the tail.
            let gaps: Vec<f64> = sweep
                .energies
                .iter()
                .zip(&grid)
                .map(|(e, &lam)| {
                    let noise = 1e-14 * (h_norm + lam * p_norm);
                    ((e[k] - sweep.projected_energies[k]).abs(), noise)
                })
                .map(|(g, noise)| g.max(noise))
                .collect();
            for w in gaps.windows(2).skip(gaps.len().saturating_sub(4)) {
                assert!(w[1] <= w[0] * (1.0 + 1e-9), "{} -> {}", w[0], w[1]);
            }
            // First-order tail: the gap at the last point obeys C/lambda
            // with C estimated from the previous grid point.
            let n = grid.len();
            let c_estimate = gaps[n - 2] * grid[n - 2];
            let noise = 1e-14 * (h_norm + grid[n - 1] * p_norm);
            assert!(
                gaps[n - 1] <= 2.0 * c_estimate / grid[n - 1] + noise,
                "level {k}: tail gap {} vs C/lambda {}",
                gaps[n - 1],
                c_estimate / grid[n - 1]
            );
        }
    }

    #[test]
    fn levels_beyond_kernel_rejected() {
        let h = diag(&[1.0, 2.0, 3.0]);
        let set = axis_set(3, &[0]);
        assert!(matches!(
            lambda_sweep(&h, &set, &[1.0, 10.0], 3, 1e-10),
            Err(Error::LevelCountExceedsKernel {
                levels: 3,
                kernel_dim: 2
            })
        ));
    }

    #[test]
    fn complete_projector_penalty_selects_same_allowed_space() {
        let toy = build_three_body_toy(&ToyModelParams {
            nmax: 4,
            ..ToyModelParams::default()
        })
        .unwrap();
        let p = sum_projector(&toy.set);
        let complete = complete_projector(&toy.set, DEFAULT_KERNEL_THRESHOLD);
        let via_p = projected_spectrum_via(&toy.hamiltonian, &p, DEFAULT_KERNEL_THRESHOLD).unwrap();
        let via_complete =
            projected_spectrum_via(&toy.hamiltonian, complete.op(), DEFAULT_KERNEL_THRESHOLD)
                .unwrap();
        assert_eq!(via_p.len(), via_complete.len());
        for (a, b) in via_p.iter().zip(&via_complete) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn almost_forbidden_no_band_means_equal_columns() {
        // Spectrum of P is {0, 0, 1, 1}: no eigenvalue inside any band
        // below one, so keeping and eliminating agree.
        let h = diag(&[1.0, 2.0, 3.0, 4.0]);
        let set = axis_set(4, &[0, 1]);
        let report = almost_forbidden_report(&h, &set, &[1e-8, 1e-4, 1e-2], 1e5, 1e-10).unwrap();
        for row in &report.rows {
            assert_eq!(row.kernel_dim_keep, row.kernel_dim_elim);
            assert_eq!(row.e_keep, row.e_elim);
        }
        assert_abs_diff_eq!(report.smallest_nonzero.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn almost_forbidden_band_lowers_kept_energy() {
        // An equal-overlap triple at c close to -1/2 has two genuinely
        // small eigenvalues 1 - c... use c = -0.49 -> spectrum
        // {0.02, 1.49, 1.49} plus zeros: sweep a band around 0.02.
        let set = equal_overlap_triple(5, -0.49).unwrap();
        let m = DMatrix::from_fn(5, 5, |i, j| {
            if i == j {
                i as f64 + 1.0
            } else {
                0.3 / (1.0 + (i as f64 - j as f64).abs())
            }
        });
        let mut h = Operator::from_matrix(m).unwrap();
        h.symmetrize();
        let eps_grid = [1e-3, 0.05];
        let report = almost_forbidden_report(&h, &set, &eps_grid, 1e5, 1e-10).unwrap();
        // First row: band empty, columns agree. Second: the 0.02 mode is
        // kept, enlarging the space, so the kept energy drops.
        assert_eq!(
            report.rows[0].kernel_dim_keep,
            report.rows[0].kernel_dim_elim
        );
        assert_eq!(
            report.rows[1].kernel_dim_keep,
            report.rows[1].kernel_dim_elim + 1
        );
        let keep = report.rows[1].e_keep.unwrap();
        let elim = report.rows[1].e_elim.unwrap();
        assert!(elim >= keep, "variational ordering: {elim} < {keep}");
    }

    #[test]
    fn log_grid_shape() {
        let g = log_grid(10.0, 1e6, 12).unwrap();
        assert_eq!(g.len(), 12);
        assert_abs_diff_eq!(g[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[11], 1e6, epsilon = 1e-6);
        let ratio = g[1] / g[0];
        for w in g.windows(2) {
            assert_abs_diff_eq!(w[1] / w[0], ratio, epsilon = 1e-10);
        }
        assert!(log_grid(0.0, 1.0, 5).is_err());
        assert!(log_grid(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn grid_validation() {
        let h = diag(&[1.0, 2.0]);
        let set = axis_set(2, &[0]);
        assert!(lambda_sweep(&h, &set, &[], 1, 1e-10).is_err());
        assert!(lambda_sweep(&h, &set, &[2.0, 1.0], 1, 1e-10).is_err());
        assert!(almost_forbidden_report(&h, &set, &[0.5, 0.1], 1.0, 1e-10).is_err());
        assert!(almost_forbidden_report(&h, &set, &[0.5, 1.5], 1.0, 1e-10).is_err());
    }
}
