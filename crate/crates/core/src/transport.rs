//! Cross-dataset Gaussian kernel and its Sinkhorn scaling to the EOT plan.
//!
//! The plan `W = diag(α) K diag(β)` has every row summing to `√(n/m)` and
//! every column summing to `√(m/n)`, so its entries add up to `√(mn)`. Scaling
//! runs entirely in the log domain: the duals `f = log α`, `g = log β` are
//! updated with log-sum-exp reductions, which keeps small bandwidths usable.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// How the kernel bandwidth ε is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// Median of all cross-dataset squared distances.
    #[default]
    Median,
    /// A fixed ε in squared-distance units.
    Fixed(f64),
}

/// Stopping rule for Sinkhorn.
///
/// `tol` bounds the largest relative marginal violation `|sum/target − 1|`
/// over all rows and columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// A scaled entropic transport plan.
///
/// The stored orientation always has `rows() <= cols()`. When the caller's
/// first dataset was the larger one, the roles were exchanged internally and
/// [`TransportPlan::swapped`] is set; [`TransportPlan::caller_plan`] restores
/// the caller's orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    w: DMatrix<f64>,
    log_alpha: DVector<f64>,
    log_beta: DVector<f64>,
    epsilon: f64,
    iterations: usize,
    marginal_residual: f64,
    swapped: bool,
}

impl TransportPlan {
    /// The plan `W` (`m × n`, `m ≤ n` unless built directly by [`sinkhorn`]).
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn rows(&self) -> usize {
        self.w.nrows()
    }

    pub fn cols(&self) -> usize {
        self.w.ncols()
    }

    /// Row scaling `α` (may overflow to infinity for tiny ε; see [`Self::log_alpha`]).
    pub fn alpha(&self) -> DVector<f64> {
        self.log_alpha.map(f64::exp)
    }

    pub fn beta(&self) -> DVector<f64> {
        self.log_beta.map(f64::exp)
    }

    pub fn log_alpha(&self) -> &DVector<f64> {
        &self.log_alpha
    }

    pub fn log_beta(&self) -> &DVector<f64> {
        &self.log_beta
    }

    /// Bandwidth used for the kernel. Plans built by [`sinkhorn`] from a raw
    /// log-kernel report 1, i.e. the kernel is `exp(−cost)` with `cost = −log K`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Largest absolute deviation of a row or column sum from its target.
    pub fn marginal_residual(&self) -> f64 {
        self.marginal_residual
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    /// The plan in the caller's orientation (rows = caller's first dataset).
    pub fn caller_plan(&self) -> DMatrix<f64> {
        if self.swapped {
            self.w.transpose()
        } else {
            self.w.clone()
        }
    }

    /// Row and column targets `(√(n/m), √(m/n))`.
    pub fn targets(&self) -> (f64, f64) {
        marginal_targets(self.rows(), self.cols())
    }

    /// Largest relative marginal violation over rows and columns.
    pub fn relative_residual(&self) -> f64 {
        relative_marginal_violation(&self.w)
    }
}

fn marginal_targets(m: usize, n: usize) -> (f64, f64) {
    let (m, n) = (m as f64, n as f64);
    ((n / m).sqrt(), (m / n).sqrt())
}

/// `max |sum/target − 1|` over all rows and columns of `w`.
pub fn relative_marginal_violation(w: &DMatrix<f64>) -> f64 {
    let (r, c) = marginal_targets(w.nrows(), w.ncols());
    let rows = w.row_iter().map(|row| (row.sum() / r - 1.0).abs());
    let cols = w.column_iter().map(|col| (col.sum() / c - 1.0).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

fn absolute_marginal_violation(w: &DMatrix<f64>) -> f64 {
    let (r, c) = marginal_targets(w.nrows(), w.ncols());
    let rows = w.row_iter().map(|row| (row.sum() - r).abs());
    let cols = w.column_iter().map(|col| (col.sum() - c).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

/// Points as contiguous columns, for the distance kernel.
fn points_as_columns(x: &DataMatrix) -> DMatrix<f64> {
    x.as_matrix().transpose()
}

/// Pairwise squared Euclidean distances `‖x_i − y_j‖²`.
pub fn squared_distance_matrix(x: &DataMatrix, y: &DataMatrix) -> Result<DMatrix<f64>> {
    if x.cols() != y.cols() {
        return Err(Error::Dimension(format!(
            "datasets have {} and {} dimensions",
            x.cols(),
            y.cols()
        )));
    }
    let xt = points_as_columns(x);
    let yt = points_as_columns(y);
    let (m, n) = (x.rows(), y.rows());
    // Computed column by column of the result so every entry is a direct sum.
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let yj = yt.column(j);
            (0..m)
                .map(|i| {
                    xt.column(i)
                        .iter()
                        .zip(yj.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(DMatrix::from_iterator(m, n, cols.into_iter().flatten()))
}

/// Median of all entries; the midpoint of the two central values for even counts.
pub fn median_bandwidth(d2: &DMatrix<f64>) -> Result<f64> {
    let mut values: Vec<f64> = d2.iter().copied().collect();
    if values.is_empty() {
        return Err(Error::Dimension("empty distance matrix".into()));
    }
    let len = values.len();
    let mid = len / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    let median = if len % 2 == 1 {
        upper
    } else {
        let lower = values[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    if median > 0.0 && median.is_finite() {
        Ok(median)
    } else {
        Err(Error::DegenerateBandwidth)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "bandwidth must be positive and finite, got {epsilon}"
        )))
    }
}

/// `K_ij = exp(−D2_ij / ε)`. Fails if any entry underflows to zero.
pub fn gaussian_kernel(d2: &DMatrix<f64>, epsilon: f64) -> Result<DMatrix<f64>> {
    check_epsilon(epsilon)?;
    let k = d2.map(|d| (-d / epsilon).exp());
    if let Some(pos) = k.iter().position(|v| *v == 0.0) {
        let (row, col) = (pos % k.nrows(), pos / k.nrows());
        return Err(Error::KernelUnderflow {
            row,
            col,
            exponent: d2[(row, col)] / epsilon,
        });
    }
    Ok(k)
}

/// `log K = −D2 / ε`, the input expected by [`sinkhorn`].
pub fn log_kernel(d2: &DMatrix<f64>, epsilon: f64) -> Result<DMatrix<f64>> {
    check_epsilon(epsilon)?;
    Ok(d2.map(|d| -d / epsilon))
}

/// `log Σ_k exp(a_k + b_k)` for two equal-length slices.
fn log_sum_exp(a: &[f64], b: &[f64]) -> f64 {
    let max = a
        .iter()
        .zip(b)
        .map(|(x, y)| x + y)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x + y - max).exp()).sum();
    max + sum.ln()
}

/// For each column `c` of `kernel`, `log Σ_k exp(kernel[k, c] + dual[k])`.
fn column_lse(kernel: &DMatrix<f64>, dual: &[f64]) -> Vec<f64> {
    (0..kernel.ncols())
        .into_par_iter()
        .map(|c| log_sum_exp(kernel.column(c).as_slice(), dual))
        .collect()
}

/// Scales `exp(log_kernel)` to the plan marginals by log-domain Sinkhorn.
///
/// Each sweep updates the row duals then the column duals. After a sweep the
/// columns are exact, so the stopping test looks at the row violation; the
/// reported residual is re-measured on the final plan over rows and columns.
pub fn sinkhorn(log_kernel: &DMatrix<f64>, options: &SinkhornOptions) -> Result<TransportPlan> {
    let (m, n) = log_kernel.shape();
    if m == 0 || n == 0 {
        return Err(Error::Dimension("empty kernel".into()));
    }
    if !log_kernel.iter().all(|v| v.is_finite()) {
        return Err(Error::Input(
            "log-kernel contains non-finite entries".into(),
        ));
    }
    if options.tol.is_nan() || options.tol <= 0.0 {
        return Err(Error::Input(format!(
            "tolerance must be positive, got {}",
            options.tol
        )));
    }
    let (row_target, col_target) = marginal_targets(m, n);
    let (log_r, log_c) = (row_target.ln(), col_target.ln());

    // column c of `by_row` is row c of the kernel
    let by_row = log_kernel.transpose();
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let mut row_lse = column_lse(&by_row, &g);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < options.max_iter {
        iterations += 1;
        for (fi, lse) in f.iter_mut().zip(&row_lse) {
            *fi = log_r - lse;
        }
        let col_lse = column_lse(log_kernel, &f);
        for (gj, lse) in g.iter_mut().zip(&col_lse) {
            *gj = log_c - lse;
        }
        row_lse = column_lse(&by_row, &g);
        if !f.iter().chain(&g).chain(&row_lse).all(|v| v.is_finite()) {
            return Err(Error::Numerical(
                "non-finite dual variables; the bandwidth is too small for the data scale".into(),
            ));
        }
        residual = f
            .iter()
            .zip(&row_lse)
            .map(|(fi, lse)| (fi + lse - log_r).exp_m1().abs())
            .fold(0.0, f64::max);
        if residual <= options.tol {
            break;
        }
    }
    if residual > options.tol {
        return Err(Error::Convergence {
            iterations,
            residual,
        });
    }

    // Resolve the scalar ambiguity: ‖α‖₁ = ‖β‖₁.
    let zeros_m = vec![0.0; m];
    let zeros_n = vec![0.0; n];
    let shift = 0.5 * (log_sum_exp(&g, &zeros_n) - log_sum_exp(&f, &zeros_m));
    let log_alpha = DVector::from_iterator(m, f.iter().map(|v| v + shift));
    let log_beta = DVector::from_iterator(n, g.iter().map(|v| v - shift));

    let w = DMatrix::from_fn(m, n, |i, j| {
        (log_alpha[i] + log_kernel[(i, j)] + log_beta[j]).exp()
    });
    let marginal_residual = absolute_marginal_violation(&w);
    Ok(TransportPlan {
        w,
        log_alpha,
        log_beta,
        epsilon: 1.0,
        iterations,
        marginal_residual,
        swapped: false,
    })
}

/// Resolves a bandwidth choice against a squared-distance matrix.
pub fn resolve_bandwidth(bandwidth: Bandwidth, d2: &DMatrix<f64>) -> Result<f64> {
    match bandwidth {
        Bandwidth::Median => median_bandwidth(d2),
        Bandwidth::Fixed(eps) => {
            check_epsilon(eps)?;
            Ok(eps)
        }
    }
}

/// EOT plan between two datasets.
///
/// If `x` has more points than `y` the roles are exchanged so the stored plan
/// has `rows() <= cols()`, and the plan is flagged as swapped.
pub fn transport_plan(
    x: &DataMatrix,
    y: &DataMatrix,
    bandwidth: Bandwidth,
    options: &SinkhornOptions,
) -> Result<TransportPlan> {
    if x.cols() != y.cols() {
        return Err(Error::Dimension(format!(
            "datasets have {} and {} dimensions",
            x.cols(),
            y.cols()
        )));
    }
    let swapped = x.rows() > y.rows();
    let (small, large) = if swapped { (y, x) } else { (x, y) };
    let d2 = squared_distance_matrix(small, large)?;
    let epsilon = resolve_bandwidth(bandwidth, &d2)?;
    let log_k = log_kernel(&d2, epsilon)?;
    let mut plan = sinkhorn(&log_k, options)?;
    plan.epsilon = epsilon;
    plan.swapped = swapped;
    Ok(plan)
}
