mod common;

use common::*;
use eotmaps::transport::{log_kernel, median_bandwidth, sinkhorn, squared_distance_matrix};
use eotmaps::{
    eot_eigenmaps, transport_plan, Bandwidth, EigenmapOptions, EmbeddingDimension, SinkhornOptions,
};

const TOL: f64 = 1e-10;

fn opts() -> SinkhornOptions {
    SinkhornOptions {
        tol: TOL,
        max_iter: 10_000,
    }
}

fn clean_bandwidth(f: &Fixture) -> f64 {
    median_bandwidth(&squared_distance_matrix(&f.x_clean, &f.y_clean).unwrap()).unwrap()
}

#[test]
fn translation_and_nuisance_leave_the_plan_unchanged() {
    let model = dense_model(14, 3, 4, [2.0, 0.7], 21);
    let f = torus_fixture(40, 55, &model, 3);
    let eps = clean_bandwidth(&f);
    let with = transport_plan(&f.x, &f.y, Bandwidth::Fixed(eps), &opts()).unwrap();
    let without = transport_plan(&f.x_clean, &f.y_clean, Bandwidth::Fixed(eps), &opts()).unwrap();
    assert!(max_abs_diff(with.w(), without.w()) <= 10.0 * TOL);
}

#[test]
fn translation_alone_leaves_the_plan_unchanged() {
    let x = uniform_data(30, 5, 1);
    let y = uniform_data(45, 5, 2);
    let eps = 0.7;
    let base = transport_plan(&x, &y, Bandwidth::Fixed(eps), &opts()).unwrap();
    let moved = transport_plan(
        &x.translate(&[100.0, -3.0, 0.0, 7.0, 1.0]).unwrap(),
        &y.translate(&[-5.0, 2.0, 40.0, 0.0, 0.0]).unwrap(),
        Bandwidth::Fixed(eps),
        &opts(),
    )
    .unwrap();
    assert!(max_abs_diff(base.w(), moved.w()) <= 10.0 * TOL);
}

#[test]
fn plan_depends_on_latent_points_through_effective_bandwidth() {
    let (a1, a2) = (3.0, 0.5);
    let model = dense_model(12, 3, 2, [a1, a2], 8);
    let f = torus_fixture(35, 50, &model, 9);
    let eps = clean_bandwidth(&f);
    let observed = transport_plan(&f.x, &f.y, Bandwidth::Fixed(eps), &opts()).unwrap();
    // the cross term of the latent cost carries the factor a1·a2
    let d2 = squared_distance_matrix(&f.latent_x, &f.latent_y).unwrap();
    let latent = sinkhorn(&log_kernel(&d2, eps / (a1 * a2)).unwrap(), &opts()).unwrap();
    assert!(max_abs_diff(observed.w(), latent.w()) <= 10.0 * TOL);
}

#[test]
fn scaling_data_and_bandwidth_together_changes_nothing() {
    let x = uniform_data(25, 4, 3);
    let y = uniform_data(32, 4, 4);
    let c = 7.5;
    let dim = EmbeddingDimension::Fixed(4);
    let base = EigenmapOptions {
        dimension: dim,
        bandwidth: Bandwidth::Fixed(0.4),
        ..Default::default()
    };
    let scaled = EigenmapOptions {
        bandwidth: Bandwidth::Fixed(0.4 * c * c),
        ..base
    };
    let a = eot_eigenmaps(&x, &y, &base).unwrap();
    let b = eot_eigenmaps(&x.scale(c).unwrap(), &y.scale(c).unwrap(), &scaled).unwrap();
    assert!(max_abs_diff(a.plan.w(), b.plan.w()) <= 1e-8);
    assert!(max_abs_diff(&a.embedding.x, &b.embedding.x) <= 1e-8);
    assert!(max_abs_diff(&a.embedding.y, &b.embedding.y) <= 1e-8);

    // the median rule follows the data scale on its own
    let a = eot_eigenmaps(
        &x,
        &y,
        &EigenmapOptions {
            dimension: dim,
            ..Default::default()
        },
    )
    .unwrap();
    let b = eot_eigenmaps(
        &x.scale(c).unwrap(),
        &y.scale(c).unwrap(),
        &EigenmapOptions {
            dimension: dim,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((b.plan.epsilon() / a.plan.epsilon() - c * c).abs() < 1e-10);
    assert!(max_abs_diff(&a.embedding.x, &b.embedding.x) <= 1e-8);
}

#[test]
fn exchanging_the_datasets_exchanges_the_outputs() {
    let x = uniform_data(20, 3, 5);
    let y = uniform_data(28, 3, 6);
    let options = EigenmapOptions {
        dimension: EmbeddingDimension::Fixed(3),
        t: 1.0,
        ..Default::default()
    };
    let xy = eot_eigenmaps(&x, &y, &options).unwrap();
    let yx = eot_eigenmaps(&y, &x, &options).unwrap();
    assert!(max_abs_diff(&xy.plan.caller_plan(), &yx.plan.caller_plan().transpose()) < 1e-14);
    assert_eq!(xy.embedding.x, yx.embedding.y);
    assert_eq!(xy.embedding.y, yx.embedding.x);
}

#[test]
fn equal_sizes_swap_to_the_transposed_plan() {
    let x = uniform_data(24, 3, 7);
    let y = uniform_data(24, 3, 8);
    let xy = transport_plan(&x, &y, Bandwidth::Median, &opts()).unwrap();
    let yx = transport_plan(&y, &x, Bandwidth::Median, &opts()).unwrap();
    assert!(max_abs_diff(xy.w(), &yx.w().transpose()) <= 10.0 * TOL);
}

#[test]
fn embedding_is_unchanged_by_translation_and_nuisance() {
    let model = dense_model(10, 3, 3, [1.5, 1.0], 30);
    let f = torus_fixture(30, 30, &model, 31);
    let eps = clean_bandwidth(&f);
    let options = EigenmapOptions {
        dimension: EmbeddingDimension::Fixed(3),
        bandwidth: Bandwidth::Fixed(eps),
        ..Default::default()
    };
    let a = eot_eigenmaps(&f.x, &f.y, &options).unwrap();
    let b = eot_eigenmaps(&f.x_clean, &f.y_clean, &options).unwrap();
    assert!(max_abs_diff(&a.embedding.x, &b.embedding.x) <= 1e-6);
    assert!(max_abs_diff(&a.embedding.y, &b.embedding.y) <= 1e-6);
}
