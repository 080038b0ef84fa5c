//! Diffusion distances of the random walk on the bipartite plan graph.
//!
//! After `t` steps the walk's transition matrix splits into blocks
//!
//! ```text
//! P_XX = U Sᵗ Uᵀ        P_XY = √(m/n) U Sᵗ Vᵀ
//! P_YX = √(n/m) V Sᵗ Uᵀ  P_YY = V Sᵗ Vᵀ
//! ```
//!
//! For even `t` the walk sits on the dataset it started from (so `P_XX` and
//! `P_YY` are the proper, non-negative transition blocks), for odd `t` on the
//! other one. All four blocks are row-stochastic for every `t`.
//!
//! Distances are evaluated from the singular triplets, e.g.
//! `D_XY(x_i, y_j)² = Σ_{k≥2} s_k^{2t} (√m u_k[i] − √n v_k[j])²`, which equals
//! the squared Euclidean distance between the points in the full
//! (`q = m − 1`) embedding with the same `t`. No `n × n` block is formed.
//!
//! All indices and blocks are in the caller's orientation: `X` is the first
//! dataset passed to [`crate::transport::transport_plan`], even when the plan
//! was stored transposed.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::embedding::{spectral_model, SpectralModel};
use crate::error::{Error, Result};
use crate::transport::TransportPlan;

/// Which pair of datasets a distance compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    /// Two points of the first dataset.
    XX,
    /// Two points of the second dataset.
    YY,
    /// A point of the first dataset and a point of the second.
    XY,
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "XX" => Ok(DistanceKind::XX),
            "YY" => Ok(DistanceKind::YY),
            "XY" => Ok(DistanceKind::XY),
            "YX" => Err(Error::Input(
                "use XY with (x index, y index) for cross distances".into(),
            )),
            other => Err(Error::Input(format!("unknown distance kind {other:?}"))),
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DistanceKind::XX => "XX",
            DistanceKind::YY => "YY",
            DistanceKind::XY => "XY",
        };
        f.write_str(s)
    }
}

/// The four `t`-step transition blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPowers {
    pub xx: DMatrix<f64>,
    pub xy: DMatrix<f64>,
    pub yx: DMatrix<f64>,
    pub yy: DMatrix<f64>,
}

/// A full spectral model together with a step count `t ≥ 1`.
#[derive(Debug, Clone)]
pub struct DiffusionContext {
    model: SpectralModel,
    t: u32,
    /// `s_k^t` for every triplet.
    powers: DVector<f64>,
}

impl DiffusionContext {
    /// Computes the full spectral model of the plan.
    pub fn new(plan: &TransportPlan, t: u32) -> Result<Self> {
        let model = spectral_model(plan, plan.rows())?;
        Self::from_model(model, t)
    }

    pub fn from_model(model: SpectralModel, t: u32) -> Result<Self> {
        if t == 0 {
            return Err(Error::Input("diffusion needs t >= 1".into()));
        }
        let (m, _) = model.shape();
        if model.len() != m {
            return Err(Error::Input(format!(
                "diffusion needs all {m} singular triplets, model holds {}",
                model.len()
            )));
        }
        let powers = model.values().map(|s| s.powi(t as i32));
        Ok(Self { model, t, powers })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    /// `(m, n)` in the caller's orientation.
    pub fn sizes(&self) -> (usize, usize) {
        let (m, n) = self.model.shape();
        if self.model.swapped() {
            (n, m)
        } else {
            (m, n)
        }
    }

    /// The four transition blocks, densely. `P_YY` is `n × n`.
    pub fn block_power(&self) -> BlockPowers {
        let (m, n) = self.model.shape();
        let u = self.model.left();
        let v = self.model.right();
        let us = DMatrix::from_fn(m, m, |i, k| u[(i, k)] * self.powers[k]);
        let vs = DMatrix::from_fn(n, m, |j, k| v[(j, k)] * self.powers[k]);
        let ratio = (m as f64 / n as f64).sqrt();
        let xx = &us * u.transpose();
        let xy = (&us * v.transpose()) * ratio;
        let yx = (&vs * u.transpose()) / ratio;
        let yy = &vs * v.transpose();
        if self.model.swapped() {
            BlockPowers {
                xx: yy,
                xy: yx,
                yx: xy,
                yy: xx,
            }
        } else {
            BlockPowers { xx, xy, yx, yy }
        }
    }

    /// Maps a caller-oriented request to the stored orientation.
    fn internal(
        &self,
        kind: DistanceKind,
        i: usize,
        j: usize,
    ) -> Result<(DistanceKind, usize, usize)> {
        let (m, n) = self.sizes();
        let (li, lj) = match kind {
            DistanceKind::XX => (m, m),
            DistanceKind::YY => (n, n),
            DistanceKind::XY => (m, n),
        };
        if i >= li || j >= lj {
            return Err(Error::Input(format!(
                "indices ({i}, {j}) out of range for {kind} distances on a {m}x{n} pair"
            )));
        }
        Ok(if !self.model.swapped() {
            (kind, i, j)
        } else {
            match kind {
                DistanceKind::XX => (DistanceKind::YY, i, j),
                DistanceKind::YY => (DistanceKind::XX, i, j),
                DistanceKind::XY => (DistanceKind::XY, j, i),
            }
        })
    }

    /// Squared distance using coordinates `k = 2..=last` (1-based triplet indices).
    fn partial_sq(
        &self,
        kind: DistanceKind,
        i: usize,
        j: usize,
        range: std::ops::Range<usize>,
    ) -> f64 {
        let (m, n) = self.model.shape();
        let (sm, sn) = ((m as f64).sqrt(), (n as f64).sqrt());
        let u = self.model.left();
        let v = self.model.right();
        range
            .map(|k| {
                let d = match kind {
                    DistanceKind::XX => sm * (u[(i, k)] - u[(j, k)]),
                    DistanceKind::YY => sn * (v[(i, k)] - v[(j, k)]),
                    DistanceKind::XY => sm * u[(i, k)] - sn * v[(j, k)],
                };
                let w = self.powers[k];
                w * w * d * d
            })
            .sum()
    }

    /// Diffusion distance between point `i` and point `j` of the given kind.
    ///
    /// For `XY`, `i` indexes the first dataset and `j` the second; the
    /// `YX` distance is the same number with the arguments read the other way.
    pub fn distance(&self, kind: DistanceKind, i: usize, j: usize) -> Result<f64> {
        let (kind, i, j) = self.internal(kind, i, j)?;
        Ok(self.partial_sq(kind, i, j, 1..self.model.len()).sqrt())
    }

    /// Distance using only the leading `q` nontrivial coordinates.
    pub fn truncated_distance(
        &self,
        kind: DistanceKind,
        i: usize,
        j: usize,
        q: usize,
    ) -> Result<f64> {
        let (kind, i, j) = self.internal(kind, i, j)?;
        let end = (q + 1).min(self.model.len());
        Ok(self.partial_sq(kind, i, j, 1..end).sqrt())
    }
}

/// Upper bound on the squared-distance error of keeping `q` coordinates,
/// given `s_next = s_{q+2}`, the largest dropped singular value.
///
/// `(√m + √n)² s^{2t}` for `XY`, `4m s^{2t}` for `XX`, `4n s^{2t}` for `YY`.
pub fn truncation_bound(
    s_next: f64,
    t: u32,
    m: usize,
    n: usize,
    kind: DistanceKind,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&s_next) {
        return Err(Error::Input(format!(
            "s_next must lie in [0, 1], got {s_next}"
        )));
    }
    let decay = s_next.powi(2 * t as i32);
    let (m, n) = (m as f64, n as f64);
    let factor = match kind {
        DistanceKind::XY => (m.sqrt() + n.sqrt()).powi(2),
        DistanceKind::XX => 4.0 * m,
        DistanceKind::YY => 4.0 * n,
    };
    Ok(factor * decay)
}
