//! EOT eigenmaps: the joint embedding built from the leading nontrivial
//! singular vectors of the transport plan.
//!
//! With `W = U S Vᵀ` and the trivial pair `(1, 1/√m, 1/√n)` removed, point
//! `x_i` maps to `√m (s_k^t u_k[i])_{k=2..q+1}` and `y_j` to
//! `√n (s_k^t v_k[j])_{k=2..q+1}`. At `t = 0` the pair minimizes the
//! plan-weighted alignment cost under zero-mean, identity-covariance
//! constraints; for integer `t > 0` Euclidean distances in the embedding are
//! diffusion distances of the bipartite random walk (see [`crate::diffusion`]).
//! Non-integer `t` is accepted and simply rescales the coordinates.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{truncated_svd, DataMatrix};
use crate::transport::{transport_plan, Bandwidth, SinkhornOptions, TransportPlan};

/// Tolerance on `|s₁ − 1|` and on the trivial vectors used to certify a plan.
pub const TRIVIAL_PAIR_TOLERANCE: f64 = 1e-6;

/// Default eigengap threshold for [`select_dimension`].
pub const DEFAULT_EIGENGAP: f64 = 0.02;

/// Leading singular triplets of a transport plan, in the plan's stored
/// orientation (rows = smaller dataset).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    values: DVector<f64>,
    left: DMatrix<f64>,
    right: DMatrix<f64>,
    trivial_certified: bool,
    swapped: bool,
}

impl SpectralModel {
    /// Singular values `s_1 ≥ s_2 ≥ …`, with `s_1 = 1`.
    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Left singular vectors (`m × k`).
    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    /// Right singular vectors (`n × k`).
    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    /// Number of triplets held.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn trivial_certified(&self) -> bool {
        self.trivial_certified
    }

    /// Whether the plan's rows correspond to the caller's second dataset.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    /// `(m, n)` of the stored orientation.
    pub fn shape(&self) -> (usize, usize) {
        (self.left.nrows(), self.right.nrows())
    }
}

/// Leading `k` singular triplets of the plan, with the trivial pair certified.
pub fn spectral_model(plan: &TransportPlan, k: usize) -> Result<SpectralModel> {
    let (m, n) = (plan.rows(), plan.cols());
    if k == 0 || k > m.min(n) {
        return Err(Error::Dimension(format!(
            "requested {k} singular triplets of a {m}x{n} plan"
        )));
    }
    let svd = truncated_svd(plan.w(), k)?;
    let s1 = svd.values[0];
    if (s1 - 1.0).abs() > TRIVIAL_PAIR_TOLERANCE {
        return Err(Error::PlanNotConverged(format!(
            "leading singular value {s1} differs from 1"
        )));
    }
    let (um, vn) = (1.0 / (m as f64).sqrt(), 1.0 / (n as f64).sqrt());
    let u_dev = svd
        .left
        .column(0)
        .iter()
        .map(|u| (u - um).abs())
        .fold(0.0, f64::max);
    let v_dev = svd
        .right
        .column(0)
        .iter()
        .map(|v| (v - vn).abs())
        .fold(0.0, f64::max);
    if u_dev > TRIVIAL_PAIR_TOLERANCE || v_dev > TRIVIAL_PAIR_TOLERANCE {
        return Err(Error::PlanNotConverged(format!(
            "leading singular vectors are not constant (deviation {:e})",
            u_dev.max(v_dev)
        )));
    }
    Ok(SpectralModel {
        values: svd.values,
        left: svd.left,
        right: svd.right,
        trivial_certified: true,
        swapped: plan.swapped(),
    })
}

/// A pair of embedded datasets in the caller's orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEmbedding {
    /// Embedded first dataset (`m × q`).
    pub x: DMatrix<f64>,
    /// Embedded second dataset (`n × q`).
    pub y: DMatrix<f64>,
    pub q: usize,
    pub t: f64,
    /// The singular values `s_2 … s_{q+1}` scaling the coordinates.
    pub s_used: Vec<f64>,
    /// Set when `s_{q+1}` and `s_{q+2}` coincide to within 1e-12, so the
    /// embedding subspace is only defined up to rotation.
    pub near_degenerate: bool,
}

impl JointEmbedding {
    /// Both embedded datasets stacked, first dataset on top.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (m, n) = (self.x.nrows(), self.y.nrows());
        let mut out = DMatrix::zeros(m + n, self.q);
        out.rows_mut(0, m).copy_from(&self.x);
        out.rows_mut(m, n).copy_from(&self.y);
        out
    }
}

/// Builds the embedding from a spectral model holding at least `q + 1` triplets.
pub fn embed(model: &SpectralModel, q: usize, t: f64) -> Result<JointEmbedding> {
    let (m, n) = model.shape();
    if q == 0 || q > m.saturating_sub(1) {
        return Err(Error::Dimension(format!(
            "embedding dimension must be between 1 and {} (smaller dataset size minus one), got {q}",
            m.saturating_sub(1)
        )));
    }
    if model.len() < q + 1 {
        return Err(Error::Dimension(format!(
            "spectral model holds {} triplets, embedding needs {}",
            model.len(),
            q + 1
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Input(format!(
            "t must be a finite non-negative number, got {t}"
        )));
    }
    let s = model.values();
    let s_used: Vec<f64> = (1..=q).map(|k| s[k]).collect();
    let weights: Vec<f64> = s_used.iter().map(|sk| sk.max(0.0).powf(t)).collect();
    let (sm, sn) = ((m as f64).sqrt(), (n as f64).sqrt());
    let left = DMatrix::from_fn(m, q, |i, k| sm * weights[k] * model.left()[(i, k + 1)]);
    let right = DMatrix::from_fn(n, q, |j, k| sn * weights[k] * model.right()[(j, k + 1)]);
    let near_degenerate = model.len() > q + 1 && (s[q] - s[q + 1]).abs() <= 1e-12;
    let (x, y) = if model.swapped() {
        (right, left)
    } else {
        (left, right)
    };
    Ok(JointEmbedding {
        x,
        y,
        q,
        t,
        s_used,
        near_degenerate,
    })
}

/// Embedding dimension: a fixed value or the eigengap rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmbeddingDimension {
    Fixed(usize),
    /// [`select_dimension`] with the given threshold.
    Auto(f64),
}

impl Default for EmbeddingDimension {
    fn default() -> Self {
        EmbeddingDimension::Auto(DEFAULT_EIGENGAP)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EigenmapOptions {
    pub dimension: EmbeddingDimension,
    pub t: f64,
    pub bandwidth: Bandwidth,
    pub sinkhorn: SinkhornOptions,
}

/// Everything computed along the way by [`eot_eigenmaps`].
#[derive(Debug, Clone)]
pub struct EigenmapResult {
    pub plan: TransportPlan,
    pub model: SpectralModel,
    pub embedding: JointEmbedding,
    /// Present when the dimension was chosen automatically.
    pub selection: Option<DimensionSelection>,
}

/// Transport plan, spectral model, and joint embedding in one call.
///
/// An automatic dimension needs the full spectrum, so all `m` triplets are
/// computed in that case; a fixed `q` computes `q + 2` (when available) so the
/// degeneracy check on `s_{q+1}, s_{q+2}` can run.
pub fn eot_eigenmaps(
    x: &DataMatrix,
    y: &DataMatrix,
    options: &EigenmapOptions,
) -> Result<EigenmapResult> {
    let plan = transport_plan(x, y, options.bandwidth, &options.sinkhorn)?;
    let m = plan.rows();
    let (k, selection) = match options.dimension {
        EmbeddingDimension::Fixed(q) => {
            if q == 0 || q + 1 > m {
                return Err(Error::Dimension(format!(
                    "embedding dimension must be between 1 and {}, got {q}",
                    m.saturating_sub(1)
                )));
            }
            ((q + 2).min(m), None)
        }
        EmbeddingDimension::Auto(_) => (m, None),
    };
    let model = spectral_model(&plan, k)?;
    let (q, selection) = match options.dimension {
        EmbeddingDimension::Fixed(q) => (q, selection),
        EmbeddingDimension::Auto(threshold) => {
            let sel = select_dimension(model.values().as_slice(), threshold)?;
            (sel.q, Some(sel))
        }
    };
    let embedding = embed(&model, q, options.t)?;
    Ok(EigenmapResult {
        plan,
        model,
        embedding,
        selection,
    })
}

/// Outcome of the eigengap rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionSelection {
    pub q: usize,
    /// No ratio reached the threshold and `q = 1` was returned as a fallback.
    pub degenerate: bool,
}

/// Largest `i` (1-based, `i ≤ len − 1`) with `s_i / s_{i+1} ≥ 1 + threshold`.
///
/// A zero `s_{i+1}` counts as an infinite ratio.
pub fn select_dimension(s: &[f64], threshold: f64) -> Result<DimensionSelection> {
    if s.len() < 2 {
        return Err(Error::Input("need at least two singular values".into()));
    }
    if s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || s[0] <= 0.0 {
        return Err(Error::Input(
            "singular values must be finite and non-negative with s_1 > 0".into(),
        ));
    }
    let best = s
        .windows(2)
        .enumerate()
        .rev()
        .find(|(_, w)| w[1] == 0.0 || w[0] / w[1] >= 1.0 + threshold)
        .map(|(i, _)| i + 1);
    Ok(match best {
        Some(q) => DimensionSelection {
            q,
            degenerate: false,
        },
        None => DimensionSelection {
            q: 1,
            degenerate: true,
        },
    })
}

/// Plan-weighted alignment cost `Σ_ij ‖x̃_i − ỹ_j‖² W_ij`.
pub fn embedding_cost(embedding: &JointEmbedding, plan: &TransportPlan) -> Result<f64> {
    let w = plan.caller_plan();
    alignment_cost(&embedding.x, &embedding.y, &w)
}

/// `Σ_ij ‖a_i − b_j‖² W_ij` for arbitrary point sets `a` (`m × q`) and `b` (`n × q`).
pub fn alignment_cost(a: &DMatrix<f64>, b: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != w.nrows() || b.nrows() != w.ncols() || a.ncols() != b.ncols() {
        return Err(Error::Dimension(format!(
            "cost needs {}x{} plan, got point sets {}x{} and {}x{}",
            a.nrows(),
            b.nrows(),
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let mut total = 0.0;
    for j in 0..b.nrows() {
        let bj = b.row(j);
        for i in 0..a.nrows() {
            total += (a.row(i) - bj).norm_squared() * w[(i, j)];
        }
    }
    Ok(total)
}

/// Closed form of the `t = 0` cost: `2√(mn) Σ_{k=2}^{q+1} (1 − s_k)`.
pub fn predicted_cost(model: &SpectralModel, q: usize) -> f64 {
    let (m, n) = model.shape();
    let gap: f64 = model.values().iter().skip(1).take(q).map(|s| 1.0 - s).sum();
    2.0 * ((m * n) as f64).sqrt() * gap
}
