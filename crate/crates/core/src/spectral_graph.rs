//! Dense operators of the bipartite graph whose edge weights are the plan.
//!
//! ```text
//! Ŵ = [0 W; Wᵀ 0]    L = I − Ŵ    D = diag(√m·I_m, √n·I_n)
//! L̃ = D L D⁻¹        P = I − L̃ = D Ŵ D⁻¹
//! ```
//!
//! `L` is PSD with eigenvalues `{0, 1 − s_2, …, 1 − s_m, 1 (n − m times),
//! 1 + s_m, …, 1 + s_2, 2}` and `P` is the transition matrix of a random walk
//! that alternates between the two datasets. This module is a verification
//! surface: everything is materialized densely, so it is limited to
//! `m + n ≤ 5000`.

use nalgebra::{DMatrix, DVector};

use crate::embedding::SpectralModel;
use crate::error::{Error, Result};
use crate::transport::TransportPlan;

/// Largest `m + n` for which the dense operators are built.
pub const MAX_DENSE_NODES: usize = 5000;

/// Relative marginal accuracy a plan needs before its operators are built.
pub const OPERATOR_MARGINAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOperators {
    m: usize,
    n: usize,
    pub adjacency: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    /// Diagonal of `D`.
    pub scale: DVector<f64>,
    pub scaled_laplacian: DMatrix<f64>,
    pub transition: DMatrix<f64>,
}

impl BipartiteOperators {
    pub fn sizes(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// The plan block `W` of `Ŵ`.
    pub fn plan(&self) -> DMatrix<f64> {
        self.adjacency
            .view((0, self.m), (self.m, self.n))
            .into_owned()
    }
}

/// Builds `Ŵ, L, D, L̃, P` from a plan in its stored orientation.
pub fn build_operators(plan: &TransportPlan) -> Result<BipartiteOperators> {
    let (m, n) = (plan.rows(), plan.cols());
    if m + n > MAX_DENSE_NODES {
        return Err(Error::Dimension(format!(
            "dense bipartite operators limited to {MAX_DENSE_NODES} nodes, got {}",
            m + n
        )));
    }
    let violation = plan.relative_residual();
    if violation > OPERATOR_MARGINAL_TOLERANCE {
        return Err(Error::PlanNotConverged(format!(
            "marginal violation {violation:e} exceeds {OPERATOR_MARGINAL_TOLERANCE:e}"
        )));
    }
    let size = m + n;
    let w = plan.w();
    let mut adjacency = DMatrix::zeros(size, size);
    adjacency.view_mut((0, m), (m, n)).copy_from(w);
    adjacency.view_mut((m, 0), (n, m)).copy_from(&w.transpose());
    let laplacian = DMatrix::identity(size, size) - &adjacency;

    let (sm, sn) = ((m as f64).sqrt(), (n as f64).sqrt());
    let scale = DVector::from_fn(size, |i, _| if i < m { sm } else { sn });
    let scaled_laplacian =
        DMatrix::from_fn(size, size, |i, j| scale[i] * laplacian[(i, j)] / scale[j]);
    let transition = DMatrix::from_fn(size, size, |i, j| scale[i] * adjacency[(i, j)] / scale[j]);
    Ok(BipartiteOperators {
        m,
        n,
        adjacency,
        laplacian,
        scale,
        scaled_laplacian,
        transition,
    })
}

/// An eigenpair of `L` predicted from the singular triplets of `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedEigenpair {
    pub value: f64,
    pub vector: DVector<f64>,
}

/// The full predicted spectrum of `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedSpectrum {
    /// All `m + n` eigenvalues, ascending.
    pub values: Vec<f64>,
    /// The `2m` eigenvectors determined by the singular triplets, ascending by
    /// eigenvalue. The `n − m` middle-band vectors (eigenvalue 1) are any
    /// orthonormal completion and are not listed.
    pub pairs: Vec<PredictedEigenpair>,
}

/// Spectrum and eigenvectors of `L` predicted from a full spectral model.
pub fn predicted_spectrum(model: &SpectralModel) -> Result<PredictedSpectrum> {
    let (m, n) = model.shape();
    if model.len() != m {
        return Err(Error::Input(format!(
            "model holds {} of {m} triplets; the full spectrum needs all of them",
            model.len()
        )));
    }
    let s = model.values();
    let mut values = Vec::with_capacity(m + n);
    values.extend(s.iter().map(|sk| 1.0 - sk));
    values.extend(std::iter::repeat_n(1.0, n - m));
    values.extend(s.iter().rev().map(|sk| 1.0 + sk));

    let half = std::f64::consts::FRAC_1_SQRT_2;
    let stacked = |k: usize, sign: f64| {
        let u = model.left().column(k);
        let v = model.right().column(k);
        DVector::from_fn(m + n, |i, _| {
            if i < m {
                half * u[i]
            } else {
                sign * half * v[i - m]
            }
        })
    };
    let mut pairs: Vec<PredictedEigenpair> = (0..m)
        .map(|k| PredictedEigenpair {
            value: 1.0 - s[k],
            vector: stacked(k, 1.0),
        })
        .collect();
    pairs.extend((0..m).rev().map(|k| PredictedEigenpair {
        value: 1.0 + s[k],
        vector: stacked(k, -1.0),
    }));
    Ok(PredictedSpectrum { values, pairs })
}

/// `ψ = D φ / ‖D φ‖`, mapping an eigenvector of `L` to one of `L̃` (and `P`).
pub fn scaled_eigenvector(phi: &DVector<f64>, m: usize, n: usize) -> Result<DVector<f64>> {
    if phi.len() != m + n {
        return Err(Error::Dimension(format!(
            "vector has length {}, expected {}",
            phi.len(),
            m + n
        )));
    }
    let (sm, sn) = ((m as f64).sqrt(), (n as f64).sqrt());
    let scaled = DVector::from_fn(m + n, |i, _| phi[i] * if i < m { sm } else { sn });
    let norm = scaled.norm();
    if norm == 0.0 {
        return Err(Error::Input("zero vector".into()));
    }
    Ok(scaled / norm)
}

/// `fᵀ L f` evaluated two independent ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    /// Direct matrix product.
    pub matrix_form: f64,
    /// `(1/√(mn)) Σ_ij (√m g_i − √n h_j)² W_ij` with `f = [g; h]`.
    pub weighted_sum: f64,
}

pub fn quadratic_form(ops: &BipartiteOperators, f: &DVector<f64>) -> Result<QuadraticForm> {
    let (m, n) = ops.sizes();
    if f.len() != m + n {
        return Err(Error::Dimension(format!(
            "vector has length {}, expected {}",
            f.len(),
            m + n
        )));
    }
    let matrix_form = f.dot(&(&ops.laplacian * f));
    let (sm, sn) = ((m as f64).sqrt(), (n as f64).sqrt());
    let mut weighted = 0.0;
    for j in 0..n {
        let h = sn * f[m + j];
        for i in 0..m {
            let d = sm * f[i] - h;
            weighted += d * d * ops.adjacency[(i, m + j)];
        }
    }
    Ok(QuadraticForm {
        matrix_form,
        weighted_sum: weighted / (sm * sn),
    })
}
