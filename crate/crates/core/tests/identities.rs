mod common;

use common::*;
use eotmaps::embedding::{alignment_cost, embed, embedding_cost, predicted_cost};
use eotmaps::spectral_graph::{quadratic_form, scaled_eigenvector};
use eotmaps::{
    build_operators, predicted_spectrum, spectral_model, symmetric_eigen, transport_plan,
    truncation_bound, Bandwidth, DiffusionContext, DistanceKind, SinkhornOptions, TransportPlan,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn plan(m: usize, n: usize, seed: u64) -> TransportPlan {
    let x = uniform_data(m, 3, seed);
    let y = uniform_data(n, 3, seed + 100);
    transport_plan(&x, &y, Bandwidth::Median, &SinkhornOptions::default()).unwrap()
}

/// `√rows · Q` with `Q` orthonormal and orthogonal to the constant vector.
fn feasible(rows: usize, q: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut g = DMatrix::from_fn(rows, q, |_, _| rng.random_range(-1.0..1.0));
    for mut c in g.column_iter_mut() {
        let mean = c.mean();
        c.add_scalar_mut(-mean);
    }
    g.qr().q() * (rows as f64).sqrt()
}

#[test]
fn optimal_embedding_satisfies_the_constraints_and_cost_identity() {
    let (m, n, q) = (20, 30, 5);
    let plan = plan(m, n, 1);
    let model = spectral_model(&plan, m).unwrap();
    let emb = embed(&model, q, 0.0).unwrap();
    for (block, rows) in [(&emb.x, m), (&emb.y, n)] {
        for c in block.column_iter() {
            assert!(c.sum().abs() / rows as f64 <= 1e-8);
        }
        let gram = block.transpose() * block / rows as f64;
        assert!(max_abs_diff(&gram, &DMatrix::identity(q, q)) <= 1e-8);
    }
    let cost = embedding_cost(&emb, &plan).unwrap();
    let expected = predicted_cost(&model, q);
    assert!((cost - expected).abs() <= 1e-8 * expected);
}

#[test]
fn no_feasible_competitor_beats_the_embedding() {
    let (m, n, q) = (20, 30, 4);
    let plan = plan(m, n, 2);
    let model = spectral_model(&plan, m).unwrap();
    let emb = embed(&model, q, 0.0).unwrap();
    let best = embedding_cost(&emb, &plan).unwrap();
    let w = plan.caller_plan();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..200 {
        let (a, b) = if trial % 2 == 0 {
            (feasible(m, q, &mut rng), feasible(n, q, &mut rng))
        } else {
            // small perturbations of the optimum, re-projected onto the constraint set
            let mut a = emb.x.clone() + feasible(m, q, &mut rng) * 0.05;
            let mut b = emb.y.clone() + feasible(n, q, &mut rng) * 0.05;
            for (block, rows) in [(&mut a, m), (&mut b, n)] {
                *block = block.clone().qr().q() * (rows as f64).sqrt();
            }
            (a, b)
        };
        let cost = alignment_cost(&a, &b, &w).unwrap();
        assert!(cost >= best - 1e-8, "trial {trial}: {cost} < {best}");
    }
    // a common rotation of both blocks is also optimal
    let r = orthogonal(q, 4);
    let rotated = alignment_cost(&(&emb.x * &r), &(&emb.y * &r), &w).unwrap();
    assert!((rotated - best).abs() <= 1e-8 * best);
}

#[test]
fn laplacian_spectrum_and_eigenvectors_follow_the_singular_triplets() {
    let (m, n) = (12, 18);
    let plan = plan(m, n, 5);
    let ops = build_operators(&plan).unwrap();
    let model = spectral_model(&plan, m).unwrap();
    let predicted = predicted_spectrum(&model).unwrap();
    let eig = symmetric_eigen(&ops.laplacian, m + n).unwrap();
    let mut dense: Vec<f64> = eig.values.iter().copied().collect();
    dense.reverse();
    for (a, b) in dense.iter().zip(&predicted.values) {
        assert!((a - b).abs() <= 1e-8);
    }
    assert!(dense[0] >= -1e-10);

    let emb = embed(&model, m - 1, 0.0).unwrap();
    let stacked = emb.stacked();
    let scale = ((m + n) as f64).sqrt();
    for (k, pair) in predicted.pairs.iter().take(m).enumerate() {
        // L φ = λ φ
        let residual = &ops.laplacian * &pair.vector - &pair.vector * pair.value;
        assert!(residual.amax() <= 1e-8);
        // P ψ = (1 − λ) ψ for ψ ∝ D φ
        let psi = scaled_eigenvector(&pair.vector, m, n).unwrap();
        let residual = &ops.transition * &psi - &psi * (1.0 - pair.value);
        assert!(residual.amax() <= 1e-8);
        // plan-weighted mismatch of the two halves of ψ: both halves carry the
        // full singular vectors, so the sum is twice φᵀ L φ
        let mut weighted = 0.0;
        for i in 0..m {
            for j in 0..n {
                weighted += (psi[i] - psi[m + j]).powi(2) * plan.w()[(i, j)];
            }
        }
        let form = (m + n) as f64 / ((m * n) as f64).sqrt() * weighted;
        assert!(
            (form - 2.0 * pair.value).abs() <= 1e-8,
            "k = {k}: {form} vs {}",
            pair.value
        );
        let qf = quadratic_form(&ops, &pair.vector).unwrap();
        assert!((qf.matrix_form - pair.value).abs() <= 1e-8);
        assert!((qf.weighted_sum - pair.value).abs() <= 1e-8);
        // nontrivial ψ_k scaled by √(m+n) is the embedding column k − 1
        if k > 0 {
            let column = stacked.column(k - 1);
            let err = (0..m + n)
                .map(|i| (psi[i] * scale - column[i]).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-8, "k = {k}: {err}");
        }
    }
}

#[test]
fn random_functions_give_matching_quadratic_forms() {
    let plan = plan(15, 22, 6);
    let ops = build_operators(&plan).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let f = DVector::from_fn(37, |_, _| rng.random_range(-1.0..1.0));
        let qf = quadratic_form(&ops, &f).unwrap();
        assert!((qf.matrix_form - qf.weighted_sum).abs() <= 1e-8 * qf.matrix_form.abs().max(1.0));
        assert!(qf.matrix_form >= -1e-10);
    }
}

fn row_distance(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    (a.row(i) - b.row(j)).norm()
}

#[test]
fn diffusion_distances_match_dense_transition_powers() {
    let (m, n) = (10, 16);
    let plan = plan(m, n, 8);
    let ops = build_operators(&plan).unwrap();
    let (sm, sn) = ((m as f64).sqrt(), (n as f64).sqrt());
    for t in 1..=3u32 {
        let ctx = DiffusionContext::new(&plan, t).unwrap();
        let blocks = ctx.block_power();
        let power = (0..t).fold(DMatrix::identity(m + n, m + n), |acc, _| {
            acc * &ops.transition
        });
        // the nonzero blocks of P^t are the proper transition blocks
        if t % 2 == 0 {
            assert!(max_abs_diff(&blocks.xx, &power.view((0, 0), (m, m)).into_owned()) <= 1e-8);
            assert!(max_abs_diff(&blocks.yy, &power.view((m, m), (n, n)).into_owned()) <= 1e-8);
        } else {
            assert!(max_abs_diff(&blocks.xy, &power.view((0, m), (m, n)).into_owned()) <= 1e-8);
            assert!(max_abs_diff(&blocks.yx, &power.view((m, 0), (n, m)).into_owned()) <= 1e-8);
        }
        let emb = embed(ctx.model(), m - 1, t as f64).unwrap();
        for i in 0..m {
            for k in 0..m {
                let dense = if t % 2 == 0 {
                    sm * row_distance(&blocks.xx, i, &blocks.xx, k)
                } else {
                    sn * row_distance(&blocks.xy, i, &blocks.xy, k)
                };
                let closed = ctx.distance(DistanceKind::XX, i, k).unwrap();
                assert!((dense - closed).abs() <= 1e-8);
                assert!((row_distance(&emb.x, i, &emb.x, k) - closed).abs() <= 1e-8);
            }
            for j in 0..n {
                let xy = sn * row_distance(&blocks.xy, i, &blocks.yy, j);
                let yx = sm * row_distance(&blocks.yx, j, &blocks.xx, i);
                let closed = ctx.distance(DistanceKind::XY, i, j).unwrap();
                assert!((xy - closed).abs() <= 1e-8);
                assert!((yx - closed).abs() <= 1e-8);
                assert!((row_distance(&emb.x, i, &emb.y, j) - closed).abs() <= 1e-8);
            }
        }
        for j in 0..n {
            for l in 0..n {
                let dense = if t % 2 == 0 {
                    sn * row_distance(&blocks.yy, j, &blocks.yy, l)
                } else {
                    sm * row_distance(&blocks.yx, j, &blocks.yx, l)
                };
                let closed = ctx.distance(DistanceKind::YY, j, l).unwrap();
                assert!((dense - closed).abs() <= 1e-8);
                assert!((row_distance(&emb.y, j, &emb.y, l) - closed).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn truncation_error_stays_below_the_bound() {
    let (m, n) = (30, 45);
    let plan = plan(m, n, 9);
    let contexts: Vec<DiffusionContext> = (1..=3)
        .map(|t| DiffusionContext::new(&plan, t).unwrap())
        .collect();
    let s = contexts[0].model().values().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let kinds = [DistanceKind::XX, DistanceKind::YY, DistanceKind::XY];
    for _ in 0..1000 {
        let ctx = &contexts[rng.random_range(0..3)];
        let kind = kinds[rng.random_range(0..3)];
        let q = rng.random_range(1..m - 1);
        let (li, lj) = match kind {
            DistanceKind::XX => (m, m),
            DistanceKind::YY => (n, n),
            DistanceKind::XY => (m, n),
        };
        let (i, j) = (rng.random_range(0..li), rng.random_range(0..lj));
        let full = ctx.distance(kind, i, j).unwrap().powi(2);
        let kept = ctx.truncated_distance(kind, i, j, q).unwrap().powi(2);
        let bound = truncation_bound(s[q + 1], ctx.t(), m, n, kind).unwrap();
        assert!(full - kept <= bound + 1e-12, "{kind} q={q} t={}", ctx.t());
        assert!(full >= kept);
    }
}

#[test]
fn diffusion_distance_is_a_metric_on_the_pooled_points() {
    let (m, n) = (14, 20);
    let plan = plan(m, n, 11);
    let ctx = DiffusionContext::new(&plan, 2).unwrap();
    // pooled index: first m are X, the rest Y
    let d = |a: usize, b: usize| -> f64 {
        match (a < m, b < m) {
            (true, true) => ctx.distance(DistanceKind::XX, a, b).unwrap(),
            (false, false) => ctx.distance(DistanceKind::YY, a - m, b - m).unwrap(),
            (true, false) => ctx.distance(DistanceKind::XY, a, b - m).unwrap(),
            (false, true) => ctx.distance(DistanceKind::XY, b, a - m).unwrap(),
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let (a, b, c) = (
            rng.random_range(0..m + n),
            rng.random_range(0..m + n),
            rng.random_range(0..m + n),
        );
        assert!(d(a, b) >= 0.0);
        assert!((d(a, b) - d(b, a)).abs() <= 1e-10);
        assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-10);
    }
}
