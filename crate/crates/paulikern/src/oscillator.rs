//! Gauss-Hermite quadrature and normalized Hermite evaluation for the
//! oscillator-basis model. Nodes and weights come from the Golub-Welsch
//! eigenproblem of the Hermite Jacobi matrix; the rule is self-checked by
//! reconstructing basis orthonormality before anyone integrates with it.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{symmetric_eig_unchecked, Operator};

/// Orthonormality reconstruction tolerance for a trusted rule.
pub const QUADRATURE_SELF_CHECK_TOL: f64 = 1e-12;

/// Nodes and weights for integration against the weight `exp(-x^2)`.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `order`-point rule and validates it: the weights must
    /// sum to `sqrt(pi)` and the rule must reproduce orthonormality of
    /// the first `order / 2` Hermite functions to high accuracy.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParams {
                reason: "quadrature order must be positive".into(),
            });
        }
        // Jacobi matrix for Hermite polynomials: zero diagonal,
        // off-diagonal beta_k = sqrt(k / 2).
        let mut jacobi = DMatrix::zeros(order, order);
        for k in 1..order {
            let beta = (k as f64 / 2.0).sqrt();
            jacobi[(k - 1, k)] = beta;
            jacobi[(k, k - 1)] = beta;
        }
        let eig = symmetric_eig_unchecked(&Operator::from_matrix(jacobi).expect("square"));
        let mu0 = std::f64::consts::PI.sqrt();

        // Golub-Welsch eigenvalues locate the roots to ~1e-12; polish them
        // with Newton on h_order (h_n' = sqrt(2n) h_{n-1}) and take the
        // weights from the Christoffel formula, which lands the rule at
        // machine precision.
        let derivative_factor = (2.0 * order as f64).sqrt();
        let nodes: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&x0| {
                let mut x = x0;
                for _ in 0..4 {
                    let h = hermite_values(order, x);
                    let step = h[order] / (derivative_factor * h[order - 1]);
                    x -= step;
                    if step.abs() <= 1e-15 * x.abs().max(1.0) {
                        break;
                    }
                }
                x
            })
            .collect();
        let weights: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                let h = hermite_values(order - 1, x);
                1.0 / h.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();

        let rule = Self { nodes, weights };

        let weight_sum: f64 = rule.weights.iter().sum();
        let weight_residual = (weight_sum - mu0).abs();
        if weight_residual > QUADRATURE_SELF_CHECK_TOL * mu0 {
            return Err(Error::QuadratureFailure {
                check: "weight sum",
                residual: weight_residual,
                tol: QUADRATURE_SELF_CHECK_TOL * mu0,
            });
        }
        let max_n = (order / 2).saturating_sub(1);
        let residual = rule.orthonormality_residual(max_n);
        if residual > QUADRATURE_SELF_CHECK_TOL {
            return Err(Error::QuadratureFailure {
                check: "basis orthonormality",
                residual,
                tol: QUADRATURE_SELF_CHECK_TOL,
            });
        }
        Ok(rule)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` against `exp(-x^2)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Worst deviation of `integral(h_m h_n exp(-x^2))` from the identity
    /// over `m, n <= max_n`.
    pub fn orthonormality_residual(&self, max_n: usize) -> f64 {
        let table = self.hermite_table(max_n);
        let mut worst = 0.0_f64;
        for m in 0..=max_n {
            for n in m..=max_n {
                let mut acc = 0.0;
                for (i, &w) in self.weights.iter().enumerate() {
                    acc += w * table[(i, m)] * table[(i, n)];
                }
                let expected = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((acc - expected).abs());
            }
        }
        worst
    }

    /// Values `h_n(node_i)` for `n <= max_n`, one node per row.
    pub fn hermite_table(&self, max_n: usize) -> DMatrix<f64> {
        let mut table = DMatrix::zeros(self.len(), max_n + 1);
        for (i, &x) in self.nodes.iter().enumerate() {
            let row = hermite_values(max_n, x);
            for (n, &v) in row.iter().enumerate() {
                table[(i, n)] = v;
            }
        }
        table
    }
}

/// Normalized Hermite polynomials `h_0(x) .. h_max(x)`: the oscillator
/// eigenfunction is `phi_n(x) = h_n(x) exp(-x^2/2)` and the `h_n` are
/// orthonormal under the weight `exp(-x^2)`.
pub fn hermite_values(max_n: usize, x: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(max_n + 1);
    let h0 = std::f64::consts::PI.powf(-0.25);
    values.push(h0);
    if max_n == 0 {
        return values;
    }
    values.push(std::f64::consts::SQRT_2 * x * h0);
    for n in 1..max_n {
        let nf = n as f64;
        let next =
            x * (2.0 / (nf + 1.0)).sqrt() * values[n] - (nf / (nf + 1.0)).sqrt() * values[n - 1];
        values.push(next);
    }
    values
}
