#![allow(dead_code)]

use eotmaps::simulate::{sample_torus, Basis, Dataset, Noise, Nuisance, ObservationModel};
use eotmaps::DataMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

pub fn uniform_data(rows: usize, cols: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataMatrix::new(DMatrix::from_fn(rows, cols, |_, _| {
        rng.random_range(-1.0..1.0)
    }))
    .unwrap()
}

/// Haar-ish random orthogonal matrix.
pub fn orthogonal(dim: usize, seed: u64) -> DMatrix<f64> {
    gaussian(dim, dim, seed).qr().q()
}

/// Noiseless observation model with dense random bases:
/// `U` takes the first `r` columns of a random rotation, `V1` the next `r1`, `V2` the rest.
pub fn dense_model(p: usize, r: usize, r1: usize, a: [f64; 2], seed: u64) -> ObservationModel {
    let q = orthogonal(p, seed);
    let block = |start: usize, count: usize| Basis::Dense(q.columns(start, count).into_owned());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut shift = || {
        (0..p)
            .map(|_| rng.random_range(-20.0..20.0))
            .collect::<Vec<f64>>()
    };
    ObservationModel {
        p,
        r,
        shift: [shift(), shift()],
        scale: a,
        shared: block(0, r),
        nuisance_basis: [block(r, r1), block(r + r1, p - r - r1)],
        nuisance: [
            Nuisance::Uniform {
                low: -3.0,
                high: 5.0,
            },
            Nuisance::Uniform {
                low: 0.0,
                high: 8.0,
            },
        ],
        noise: [Noise::Zero, Noise::Zero],
        seed,
    }
}

/// The same model with translations and nuisance removed.
pub fn stripped(model: &ObservationModel) -> ObservationModel {
    let mut clean = model.clone();
    clean.shift = [vec![0.0; model.p], vec![0.0; model.p]];
    clean.nuisance = [Nuisance::Zero, Nuisance::Zero];
    clean
}

pub struct Fixture {
    pub x: DataMatrix,
    pub y: DataMatrix,
    pub x_clean: DataMatrix,
    pub y_clean: DataMatrix,
    pub latent_x: DataMatrix,
    pub latent_y: DataMatrix,
}

/// Noiseless torus data observed through `model`, with and without the
/// translation and nuisance terms.
pub fn torus_fixture(m: usize, n: usize, model: &ObservationModel, seed: u64) -> Fixture {
    let lx = sample_torus(m, seed).unwrap();
    let ly = sample_torus(n, seed + 1).unwrap();
    let clean = stripped(model);
    Fixture {
        x: eotmaps::simulate::observe(&lx, Dataset::First, model).unwrap(),
        y: eotmaps::simulate::observe(&ly, Dataset::Second, model).unwrap(),
        x_clean: eotmaps::simulate::observe(&lx, Dataset::First, &clean).unwrap(),
        y_clean: eotmaps::simulate::observe(&ly, Dataset::Second, &clean).unwrap(),
        latent_x: lx.points,
        latent_y: ly.points,
    }
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / y.abs())
        .fold(0.0, f64::max)
}
