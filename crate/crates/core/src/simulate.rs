//! Seeded generators for the latent manifold observation model
//!
//! ```text
//! x_i = ν₁ + a₁ 𝒰 x̄_i + 𝒱₁ z_i⁽¹⁾ + η_i⁽¹⁾
//! y_j = ν₂ + a₂ 𝒰 ȳ_j + 𝒱₂ z_j⁽²⁾ + η_j⁽²⁾
//! ```
//!
//! with mutually orthogonal `𝒰, 𝒱₁, 𝒱₂`, and the three benchmark presets built
//! on it (torus alignment with a shift, torus alignment with nuisance
//! structure and heteroskedastic noise, Gaussian-mixture joint clustering).
//!
//! Randomness comes from ChaCha8 streams: one stream per (dataset, role) so
//! that the latent points, nuisance draws and noise of each dataset never
//! share a generator and outputs do not depend on evaluation order.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, DataMatrix};

/// Major radius of the benchmark torus.
pub const TORUS_MAJOR: f64 = 2.0;
/// Minor radius of the benchmark torus.
pub const TORUS_MINOR: f64 = 0.8;
/// Number of mixture components in the clustering latent.
pub const GMM_CLASSES: usize = 6;
/// Distance of each mixture mean from the origin along its own axis.
pub const GMM_MEAN_SCALE: f64 = 5.0;

/// Which side of the observation model a draw belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    First,
    Second,
}

#[derive(Debug, Clone, Copy)]
enum Role {
    Latent,
    Nuisance,
    Noise,
}

fn stream(seed: u64, dataset: Dataset, role: Role) -> ChaCha8Rng {
    let d = match dataset {
        Dataset::First => 0,
        Dataset::Second => 1,
    };
    let r = match role {
        Role::Latent => 0,
        Role::Nuisance => 1,
        Role::Noise => 2,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + 3 * d + r);
    rng
}

/// Latent points, with cluster labels when the latent is a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSample {
    pub points: DataMatrix,
    pub labels: Option<Vec<usize>>,
}

fn torus_points<R: Rng>(count: usize, rng: &mut R) -> Result<LatentSample> {
    if count == 0 {
        return Err(Error::Dimension("sample size must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(3 * count);
    for _ in 0..count {
        let u: f64 = rng.random_range(0.0..TAU);
        let v: f64 = rng.random_range(0.0..TAU);
        let ring = TORUS_MAJOR + TORUS_MINOR * u.cos();
        values.extend([ring * v.cos(), ring * v.sin(), TORUS_MINOR * u.sin()]);
    }
    Ok(LatentSample {
        points: DataMatrix::from_row_slice(count, 3, &values)?,
        labels: None,
    })
}

fn gmm_points<R: Rng>(count: usize, rng: &mut R) -> Result<LatentSample> {
    if count == 0 {
        return Err(Error::Dimension("sample size must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(GMM_CLASSES * count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let label = rng.random_range(0..GMM_CLASSES);
        labels.push(label);
        for axis in 0..GMM_CLASSES {
            let mean = if axis == label { GMM_MEAN_SCALE } else { 0.0 };
            let e: f64 = StandardNormal.sample(rng);
            values.push(mean + e);
        }
    }
    Ok(LatentSample {
        points: DataMatrix::from_row_slice(count, GMM_CLASSES, &values)?,
        labels: Some(labels),
    })
}

/// Points drawn with `(u, v)` uniform on `[0, 2π)²` and mapped to
/// `((2 + 0.8 cos u) cos v, (2 + 0.8 cos u) sin v, 0.8 sin u)`.
pub fn sample_torus(count: usize, seed: u64) -> Result<LatentSample> {
    torus_points(count, &mut stream(seed, Dataset::First, Role::Latent))
}

/// Six equally likely classes with means `5 e_k` and identity covariance in `ℝ⁶`.
pub fn sample_gmm(count: usize, seed: u64) -> Result<LatentSample> {
    gmm_points(count, &mut stream(seed, Dataset::First, Role::Latent))
}

/// An orthonormal column basis of a subspace of `ℝ^p`.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// Standard basis vectors `e_k` for the listed (0-based) coordinates.
    Coordinates {
        ambient: usize,
        axes: Vec<usize>,
    },
    Dense(DMatrix<f64>),
}

impl Basis {
    /// `[e_start, …, e_{start+count−1}]` in `ℝ^ambient`.
    pub fn coordinate_block(ambient: usize, start: usize, count: usize) -> Self {
        Basis::Coordinates {
            ambient,
            axes: (start..start + count).collect(),
        }
    }

    /// The zero-dimensional subspace.
    pub fn empty(ambient: usize) -> Self {
        Self::coordinate_block(ambient, 0, 0)
    }

    pub fn ambient(&self) -> usize {
        match self {
            Basis::Coordinates { ambient, .. } => *ambient,
            Basis::Dense(m) => m.nrows(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Basis::Coordinates { axes, .. } => axes.len(),
            Basis::Dense(m) => m.ncols(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Basis::Coordinates { ambient, axes } => {
                let mut out = DMatrix::zeros(*ambient, axes.len());
                for (c, &a) in axes.iter().enumerate() {
                    out[(a, c)] = 1.0;
                }
                out
            }
            Basis::Dense(m) => m.clone(),
        }
    }

    /// `out += scale · B z`.
    fn lift_into(&self, z: &[f64], scale: f64, out: &mut [f64]) {
        match self {
            Basis::Coordinates { axes, .. } => {
                for (&a, zk) in axes.iter().zip(z) {
                    out[a] += scale * zk;
                }
            }
            Basis::Dense(m) => {
                for (c, zk) in z.iter().enumerate() {
                    for (o, b) in out.iter_mut().zip(m.column(c).iter()) {
                        *o += scale * zk * b;
                    }
                }
            }
        }
    }

    /// Largest entry of `|Bᵀ C|`.
    fn cross_gram(&self, other: &Basis) -> f64 {
        match (self, other) {
            (Basis::Coordinates { axes: a, .. }, Basis::Coordinates { axes: b, .. }) => {
                if a.iter().any(|x| b.contains(x)) {
                    1.0
                } else {
                    0.0
                }
            }
            _ => {
                if self.rank() == 0 || other.rank() == 0 {
                    return 0.0;
                }
                max_abs(&(self.to_dense().transpose() * other.to_dense()))
            }
        }
    }

    fn orthonormality_error(&self) -> f64 {
        match self {
            Basis::Coordinates { ambient, axes } => {
                let mut seen = vec![false; *ambient];
                for &a in axes {
                    if a >= *ambient || seen[a] {
                        return 1.0;
                    }
                    seen[a] = true;
                }
                0.0
            }
            Basis::Dense(m) => {
                max_abs(&(m.transpose() * m - DMatrix::identity(m.ncols(), m.ncols())))
            }
        }
    }
}

/// Per-component law of the nuisance variables `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nuisance {
    Zero,
    /// Every component independently uniform on `[low, high]`.
    Uniform {
        low: f64,
        high: f64,
    },
}

/// Per-entry Gaussian noise law.
#[derive(Debug, Clone, PartialEq)]
pub enum Noise {
    Zero,
    /// `N(0, σ²)` in every coordinate.
    Homoskedastic {
        sigma: f64,
    },
    /// Variance `10σ²` on coordinates `2..=r` of the first third of the
    /// points, `5σ²` on coordinates `1..=r` of the middle third, `σ²`
    /// elsewhere (1-based indices, `r` the latent dimension).
    Banded {
        sigma: f64,
        latent_dim: usize,
    },
    /// Explicit standard deviations, one per (point, coordinate).
    PerEntry(DMatrix<f64>),
}

impl Noise {
    /// Standard deviation of entry `(point, coord)` for a dataset of `count` points.
    pub fn std_at(&self, point: usize, coord: usize, count: usize) -> f64 {
        match self {
            Noise::Zero => 0.0,
            Noise::Homoskedastic { sigma } => *sigma,
            Noise::Banded { sigma, latent_dim } => {
                let (j, k) = (point + 1, coord + 1);
                let r = *latent_dim;
                if (2..=r).contains(&k) && j <= count / 3 {
                    10f64.sqrt() * sigma
                } else if (1..=r).contains(&k) && 3 * j > count && j <= 2 * count / 3 {
                    5f64.sqrt() * sigma
                } else {
                    *sigma
                }
            }
            Noise::PerEntry(std) => std[(point, coord)],
        }
    }
}

/// Full parameterization of the observation model for both datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    pub p: usize,
    pub r: usize,
    pub shift: [Vec<f64>; 2],
    pub scale: [f64; 2],
    pub shared: Basis,
    pub nuisance_basis: [Basis; 2],
    pub nuisance: [Nuisance; 2],
    pub noise: [Noise; 2],
    pub seed: u64,
}

fn side(which: Dataset) -> usize {
    match which {
        Dataset::First => 0,
        Dataset::Second => 1,
    }
}

impl ObservationModel {
    /// Checks dimensions, positivity of the scalings, and the mutual
    /// orthogonality of the three subspaces (to 1e-10).
    pub fn validate(&self) -> Result<()> {
        if self.shared.ambient() != self.p || self.shared.rank() != self.r {
            return Err(Error::Dimension(format!(
                "shared basis must be {}x{}, got {}x{}",
                self.p,
                self.r,
                self.shared.ambient(),
                self.shared.rank()
            )));
        }
        for s in 0..2 {
            if self.shift[s].len() != self.p {
                return Err(Error::Dimension(format!(
                    "shift {} has the wrong length",
                    s + 1
                )));
            }
            if !(self.scale[s] > 0.0 && self.scale[s].is_finite()) {
                return Err(Error::Input(format!("scale a{} must be positive", s + 1)));
            }
            if self.nuisance_basis[s].ambient() != self.p {
                return Err(Error::Dimension(format!(
                    "nuisance basis {} has the wrong ambient dimension",
                    s + 1
                )));
            }
            if let Nuisance::Uniform { low, high } = self.nuisance[s] {
                if !(low <= high && low.is_finite() && high.is_finite()) {
                    return Err(Error::Input(format!(
                        "nuisance {} has an empty range",
                        s + 1
                    )));
                }
            }
        }
        let tol = 1e-10;
        for (name, basis) in [
            ("U", &self.shared),
            ("V1", &self.nuisance_basis[0]),
            ("V2", &self.nuisance_basis[1]),
        ] {
            if basis.orthonormality_error() > tol {
                return Err(Error::Input(format!("basis {name} is not orthonormal")));
            }
        }
        let pairs = [
            ("U", "V1", self.shared.cross_gram(&self.nuisance_basis[0])),
            ("U", "V2", self.shared.cross_gram(&self.nuisance_basis[1])),
            (
                "V1",
                "V2",
                self.nuisance_basis[0].cross_gram(&self.nuisance_basis[1]),
            ),
        ];
        for (a, b, g) in pairs {
            if g > tol {
                return Err(Error::Input(format!(
                    "bases {a} and {b} are not orthogonal"
                )));
            }
        }
        Ok(())
    }
}

/// Lifts latent points into the ambient space for one dataset.
///
/// Nuisance and noise draws come from the dataset's own streams of `model.seed`.
pub fn observe(
    latent: &LatentSample,
    which: Dataset,
    model: &ObservationModel,
) -> Result<DataMatrix> {
    model.validate()?;
    if latent.points.cols() != model.r {
        return Err(Error::Dimension(format!(
            "latent points have {} coordinates, model expects {}",
            latent.points.cols(),
            model.r
        )));
    }
    let s = side(which);
    let count = latent.points.rows();
    if let Noise::PerEntry(std) = &model.noise[s] {
        if std.shape() != (count, model.p) {
            return Err(Error::Dimension(
                "per-entry noise map has the wrong shape".into(),
            ));
        }
    }
    let p = model.p;
    let basis = &model.nuisance_basis[s];
    let mut nuisance_rng = stream(model.seed, which, Role::Nuisance);
    let mut noise_rng = stream(model.seed, which, Role::Noise);
    let latent_points = latent.points.as_matrix();
    let mut values = Vec::with_capacity(count * p);
    let mut row = vec![0.0; p];
    let mut z = vec![0.0; basis.rank()];
    for i in 0..count {
        row.copy_from_slice(&model.shift[s]);
        let xbar: Vec<f64> = latent_points.row(i).iter().copied().collect();
        model.shared.lift_into(&xbar, model.scale[s], &mut row);
        if let Nuisance::Uniform { low, high } = model.nuisance[s] {
            for zk in z.iter_mut() {
                let u: f64 = nuisance_rng.random();
                *zk = low + (high - low) * u;
            }
            basis.lift_into(&z, 1.0, &mut row);
        }
        if model.noise[s] != Noise::Zero {
            for (k, v) in row.iter_mut().enumerate() {
                let e: f64 = StandardNormal.sample(&mut noise_rng);
                *v += model.noise[s].std_at(i, k, count) * e;
            }
        }
        values.extend_from_slice(&row);
    }
    DataMatrix::from_row_slice(count, p, &values)
}

/// Benchmark configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// Torus latent, scale mismatch `a₁ = 3θ, a₂ = θ` (θ = 13), shift `ν₁ = 3τθ e₁`,
    /// homoskedastic noise `σ = 0.05θ`.
    Setting1 { tau: f64 },
    /// As setting 1 with `τ = 1`, plus uniform nuisance on `[γθ/2, γθ]` in the
    /// second dataset and banded heteroskedastic noise on the second dataset.
    Setting2 { gamma: f64 },
    /// Six-class Gaussian mixture latent, `a₁ = a₂ = θ`, `ν₁ = 15e₁ + 15e₂`,
    /// uniform nuisance on `[θ/2, θ]` and banded noise (σ = 1) in the second dataset.
    Clustering { theta: f64 },
}

/// Scale constant θ of the torus settings.
pub const TORUS_THETA: f64 = 13.0;

impl Preset {
    pub fn latent_dim(&self) -> usize {
        match self {
            Preset::Setting1 { .. } | Preset::Setting2 { .. } => 3,
            Preset::Clustering { .. } => GMM_CLASSES,
        }
    }

    /// Embedding dimension used with this preset in the benchmarks.
    pub fn default_q(&self) -> usize {
        self.latent_dim()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Setting1 { .. } => "setting1",
            Preset::Setting2 { .. } => "setting2",
            Preset::Clustering { .. } => "clustering",
        }
    }

    /// Checks the parameter against its benchmark range.
    pub fn check_range(&self) -> Result<()> {
        let (name, value, lo, hi) = match *self {
            Preset::Setting1 { tau } => ("tau", tau, 1.0, 8.0),
            Preset::Setting2 { gamma } => ("gamma", gamma, 0.0, 1.0),
            Preset::Clustering { theta } => ("theta", theta, 1.0, 3.0),
        };
        if (lo..=hi).contains(&value) {
            Ok(())
        } else {
            Err(Error::Input(format!(
                "{name} = {value} outside [{lo}, {hi}]"
            )))
        }
    }

    /// The observation model of this preset in `ℝ^p`.
    pub fn model(&self, p: usize, seed: u64) -> Result<ObservationModel> {
        let r = self.latent_dim();
        if p <= r {
            return Err(Error::Dimension(format!(
                "ambient dimension must exceed the latent dimension {r}, got {p}"
            )));
        }
        let axis = |k: usize, value: f64| {
            let mut v = vec![0.0; p];
            v[k] = value;
            v
        };
        let shared = Basis::coordinate_block(p, 0, r);
        let nuisance_basis = [Basis::empty(p), Basis::coordinate_block(p, r, p - r)];
        let theta = TORUS_THETA;
        let sigma = 0.05 * theta;
        let model = match *self {
            Preset::Setting1 { tau } => ObservationModel {
                p,
                r,
                shift: [axis(0, tau * 3.0 * theta), vec![0.0; p]],
                scale: [3.0 * theta, theta],
                shared,
                nuisance_basis,
                nuisance: [Nuisance::Zero, Nuisance::Zero],
                noise: [
                    Noise::Homoskedastic { sigma },
                    Noise::Homoskedastic { sigma },
                ],
                seed,
            },
            Preset::Setting2 { gamma } => ObservationModel {
                p,
                r,
                shift: [axis(0, 3.0 * theta), vec![0.0; p]],
                scale: [3.0 * theta, theta],
                shared,
                nuisance_basis,
                nuisance: [
                    Nuisance::Zero,
                    Nuisance::Uniform {
                        low: gamma * theta / 2.0,
                        high: gamma * theta,
                    },
                ],
                noise: [
                    Noise::Homoskedastic { sigma },
                    Noise::Banded {
                        sigma,
                        latent_dim: r,
                    },
                ],
                seed,
            },
            Preset::Clustering { theta } => {
                let mut shift1 = vec![0.0; p];
                shift1[0] = 15.0;
                shift1[1] = 15.0;
                ObservationModel {
                    p,
                    r,
                    shift: [shift1, vec![0.0; p]],
                    scale: [theta, theta],
                    shared,
                    nuisance_basis,
                    nuisance: [
                        Nuisance::Zero,
                        Nuisance::Uniform {
                            low: theta / 2.0,
                            high: theta,
                        },
                    ],
                    noise: [
                        Noise::Homoskedastic { sigma: 1.0 },
                        Noise::Banded {
                            sigma: 1.0,
                            latent_dim: r,
                        },
                    ],
                    seed,
                }
            }
        };
        model.validate()?;
        Ok(model)
    }

    /// Draws the latent points of one dataset from the seed's latent stream.
    pub fn latent(&self, count: usize, which: Dataset, seed: u64) -> Result<LatentSample> {
        let mut rng = stream(seed, which, Role::Latent);
        match self {
            Preset::Setting1 { .. } | Preset::Setting2 { .. } => torus_points(count, &mut rng),
            Preset::Clustering { .. } => gmm_points(count, &mut rng),
        }
    }
}

/// A generated pair with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPair {
    pub x: DataMatrix,
    pub y: DataMatrix,
    pub latent_x: LatentSample,
    pub latent_y: LatentSample,
    pub model: ObservationModel,
}

impl SimulatedPair {
    /// Latent points of both datasets stacked, first dataset on top.
    pub fn latent_stacked(&self) -> Result<DataMatrix> {
        self.latent_x.points.vstack(&self.latent_y.points)
    }

    /// Cluster labels of both datasets stacked, when the latent has them.
    pub fn labels_stacked(&self) -> Option<Vec<usize>> {
        let a = self.latent_x.labels.as_ref()?;
        let b = self.latent_y.labels.as_ref()?;
        Some(a.iter().chain(b).copied().collect())
    }
}

/// Generates a preset pair; parameters must lie in the benchmark range.
pub fn simulate_preset(
    preset: Preset,
    m: usize,
    n: usize,
    p: usize,
    seed: u64,
) -> Result<SimulatedPair> {
    preset.check_range()?;
    simulate_preset_unchecked(preset, m, n, p, seed)
}

/// Generates a preset pair without the parameter-range check.
pub fn simulate_preset_unchecked(
    preset: Preset,
    m: usize,
    n: usize,
    p: usize,
    seed: u64,
) -> Result<SimulatedPair> {
    let model = preset.model(p, seed)?;
    let latent_x = preset.latent(m, Dataset::First, seed)?;
    let latent_y = preset.latent(n, Dataset::Second, seed)?;
    let x = observe(&latent_x, Dataset::First, &model)?;
    let y = observe(&latent_y, Dataset::Second, &model)?;
    Ok(SimulatedPair {
        x,
        y,
        latent_x,
        latent_y,
        model,
    })
}
