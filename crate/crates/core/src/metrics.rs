//! Alignment and clustering quality scores, and the k-NN / k-means utilities
//! they rely on. Points are rows of a dense matrix; labels are `usize` ids.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Neighborhood size used by the concordance and purity scores by default.
pub const DEFAULT_NEIGHBORS: usize = 50;

#[cfg(test)]
fn squared_distance(points: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(points.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Row-major copy so each point is a contiguous slice.
fn rows_of(points: &DMatrix<f64>) -> Vec<Vec<f64>> {
    points
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect()
}

// Per-point terms are computed in parallel but collected and summed in index
// order, so results do not depend on the thread count.

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest neighbors of every point (self excluded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSets {
    pub k: usize,
    /// `indices[i]` lists the neighbors of point `i`, nearest first.
    pub indices: Vec<Vec<usize>>,
}

/// Exact Euclidean k-NN; equal distances are ordered by index.
pub fn knn(points: &DMatrix<f64>, k: usize) -> Result<NeighborSets> {
    let count = points.nrows();
    if k == 0 || k >= count {
        return Err(Error::Input(format!(
            "need 1 <= k < N, got k = {k}, N = {count}"
        )));
    }
    let rows = rows_of(points);
    let indices = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(f64, usize)> = (0..count)
                .filter(|&j| j != i)
                .map(|j| (sq(&rows[i], &rows[j]), j))
                .collect();
            let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, by);
                cand.truncate(k);
            }
            cand.sort_unstable_by(by);
            cand.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    Ok(NeighborSets { k, indices })
}

fn check_rows(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Dimension(format!("inputs have {a} and {b} rows")))
    }
}

/// Mean Jaccard overlap between the k-NN sets of each point in `latent` and in `embedded`.
pub fn jaccard_concordance(
    embedded: &DMatrix<f64>,
    latent: &DMatrix<f64>,
    k: usize,
) -> Result<f64> {
    check_rows(embedded.nrows(), latent.nrows())?;
    let w = knn(embedded, k)?;
    let s = knn(latent, k)?;
    let total: f64 = s
        .indices
        .par_iter()
        .zip(&w.indices)
        .map(|(a, b)| {
            let mut a = a.clone();
            a.sort_unstable();
            let shared = b.iter().filter(|j| a.binary_search(j).is_ok()).count();
            shared as f64 / (2 * k - shared) as f64
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total / s.indices.len() as f64)
}

/// Fraction of point pairs on which two partitions agree (same/same or different/different).
pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    check_rows(a.len(), b.len())?;
    let count = a.len();
    if count < 2 {
        return Err(Error::Input("rand index needs at least two points".into()));
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let pairs = |c: u64| c * c.saturating_sub(1) / 2;
    let n = count as u64;
    let total = pairs(n);
    let same_both: u64 = table.values().copied().map(pairs).sum();
    let same_a: u64 = rows.values().copied().map(pairs).sum();
    let same_b: u64 = cols.values().copied().map(pairs).sum();
    // pairs split in both = total − same_a − same_b + same_both
    let agree = total + 2 * same_both - same_a - same_b;
    Ok(agree as f64 / total as f64)
}

/// Distinct labels in order of first appearance and each point's group index.
fn groups(labels: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut order = Vec::new();
    let group = labels
        .iter()
        .map(|&l| {
            *ids.entry(l).or_insert_with(|| {
                order.push(l);
                order.len() - 1
            })
        })
        .collect();
    (order, group)
}

fn centroids(points: &DMatrix<f64>, group: &[usize], count: usize) -> (DMatrix<f64>, Vec<usize>) {
    let mut sums = DMatrix::zeros(count, points.ncols());
    let mut sizes = vec![0usize; count];
    for (i, &g) in group.iter().enumerate() {
        let mut row = sums.row_mut(g);
        row += points.row(i);
        sizes[g] += 1;
    }
    for (g, &s) in sizes.iter().enumerate() {
        if s > 0 {
            let mut row = sums.row_mut(g);
            row /= s as f64;
        }
    }
    (sums, sizes)
}

/// Davies-Bouldin index with RMS within-cluster scatter.
///
/// Returns `f64::INFINITY` when two clusters share a centroid.
pub fn davies_bouldin(points: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    check_rows(points.nrows(), labels.len())?;
    let (order, group) = groups(labels);
    let clusters = order.len();
    if clusters < 2 {
        return Err(Error::Input(
            "Davies-Bouldin needs at least two labels".into(),
        ));
    }
    let (center, sizes) = centroids(points, &group, clusters);
    let mut scatter = vec![0.0; clusters];
    for (i, &g) in group.iter().enumerate() {
        scatter[g] += (points.row(i) - center.row(g)).norm_squared();
    }
    for (s, &size) in scatter.iter_mut().zip(&sizes) {
        *s = (*s / size as f64).sqrt();
    }
    let mut total = 0.0;
    for a in 0..clusters {
        let mut worst: f64 = 0.0;
        for b in (0..clusters).filter(|&b| b != a) {
            let sep = (center.row(a) - center.row(b)).norm();
            if sep == 0.0 {
                return Ok(f64::INFINITY);
            }
            worst = worst.max((scatter[a] + scatter[b]) / sep);
        }
        total += worst;
    }
    Ok(total / clusters as f64)
}

/// Mean silhouette width; singleton clusters contribute 0.
pub fn silhouette_mean(points: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    check_rows(points.nrows(), labels.len())?;
    let (order, group) = groups(labels);
    let clusters = order.len();
    if clusters < 2 {
        return Err(Error::Input("silhouette needs at least two labels".into()));
    }
    let sizes = group.iter().fold(vec![0usize; clusters], |mut acc, &g| {
        acc[g] += 1;
        acc
    });
    let rows = rows_of(points);
    let total: f64 = (0..rows.len())
        .into_par_iter()
        .map(|i| {
            let own = group[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; clusters];
            for (j, row) in rows.iter().enumerate() {
                if j != i {
                    sums[group[j]] += sq(&rows[i], row).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..clusters)
                .filter(|&g| g != own)
                .map(|g| sums[g] / sizes[g] as f64)
                .fold(f64::INFINITY, f64::min);
            if a < b {
                1.0 - a / b
            } else if a > b {
                b / a - 1.0
            } else {
                0.0
            }
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total / rows.len() as f64)
}

/// Mean fraction of same-label points inside the ball reaching each point's
/// k-th nearest neighbor (boundary included, self excluded).
pub fn neighbor_purity(points: &DMatrix<f64>, labels: &[usize], k: usize) -> Result<f64> {
    check_rows(points.nrows(), labels.len())?;
    let neighbors = knn(points, k)?;
    let rows = rows_of(points);
    let total: f64 = (0..rows.len())
        .into_par_iter()
        .map(|i| {
            let kth = neighbors.indices[i][k - 1];
            let radius = sq(&rows[i], &rows[kth]);
            let (mut inside, mut same) = (0usize, 0usize);
            for (j, row) in rows.iter().enumerate() {
                if j != i && sq(&rows[i], row) <= radius {
                    inside += 1;
                    if labels[j] == labels[i] {
                        same += 1;
                    }
                }
            }
            same as f64 / inside as f64
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total / rows.len() as f64)
}

/// Result of [`kmeans`].
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub centroids: DMatrix<f64>,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
}

/// Settings for [`kmeans`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 200,
        }
    }
}

fn nearest(row: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    centers
        .iter()
        .enumerate()
        .map(|(c, center)| (c, sq(row, center)))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        )
}

fn seed_centers(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let count = rows.len();
    let mut chosen = vec![rng.random_range(0..count)];
    let mut dist: Vec<f64> = rows.iter().map(|r| sq(r, &rows[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, d) in dist.iter().enumerate() {
                if *d > 0.0 {
                    pick = Some(i);
                    if target < *d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.expect("positive total weight")
        } else {
            // every point coincides with a center; take unused indices in order
            (0..count).find(|i| !chosen.contains(i)).expect("k <= N")
        };
        chosen.push(next);
        for (d, r) in dist.iter_mut().zip(rows) {
            *d = d.min(sq(r, &rows[next]));
        }
    }
    chosen.iter().map(|&i| rows[i].clone()).collect()
}

fn lloyd(
    rows: &[Vec<f64>],
    mut centers: Vec<Vec<f64>>,
    max_iter: usize,
) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let k = centers.len();
    let dim = rows[0].len();
    let mut labels: Vec<usize> = rows.iter().map(|r| nearest(r, &centers).0).collect();
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut sizes = vec![0usize; k];
        for (r, &l) in rows.iter().zip(&labels) {
            sizes[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(r) {
                *s += v;
            }
        }
        for c in 0..k {
            if sizes[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / sizes[c] as f64).collect();
            }
        }
        for c in 0..k {
            if sizes[c] == 0 {
                // move the empty center onto the point worst served by its own center
                let far = (0..rows.len())
                    .map(|i| (i, sq(&rows[i], &centers[labels[i]])))
                    .fold(
                        (0, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    )
                    .0;
                sizes[labels[far]] -= 1;
                labels[far] = c;
                sizes[c] = 1;
                centers[c] = rows[far].clone();
            }
        }
        let next: Vec<usize> = rows.iter().map(|r| nearest(r, &centers).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    let wcss = rows
        .iter()
        .zip(&labels)
        .map(|(r, &l)| sq(r, &centers[l]))
        .sum();
    (labels, centers, wcss)
}

/// Lloyd's algorithm with distance-squared weighted seeding, best of
/// `options.restarts` runs by within-cluster sum of squares.
///
/// Restart `r` draws from stream `r` of a ChaCha8 generator seeded with `seed`,
/// so the result does not depend on the thread count.
pub fn kmeans(
    points: &DMatrix<f64>,
    k: usize,
    seed: u64,
    options: &KMeansOptions,
) -> Result<KMeans> {
    let count = points.nrows();
    if k == 0 || k > count {
        return Err(Error::Input(format!(
            "need 1 <= k <= N, got k = {k}, N = {count}"
        )));
    }
    if options.restarts == 0 {
        return Err(Error::Input("at least one restart is required".into()));
    }
    let rows = rows_of(points);
    let runs: Vec<(Vec<usize>, Vec<Vec<f64>>, f64)> = (0..options.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let centers = seed_centers(&rows, k, &mut rng);
            lloyd(&rows, centers, options.max_iter)
        })
        .collect();
    let (labels, centers, wcss) = runs
        .into_iter()
        .reduce(|best, cur| if cur.2 < best.2 { cur } else { best })
        .expect("at least one restart");
    let dim = points.ncols();
    let centroids = DMatrix::from_fn(k, dim, |c, d| centers[c][d]);
    Ok(KMeans {
        labels,
        centroids,
        wcss,
    })
}

/// Pearson correlation of two equal-length vectors (0 if either is constant).
pub fn correlation(a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
    check_rows(a.len(), b.len())?;
    let n = a.len() as f64;
    let (ma, mb) = (a.sum() / n, b.sum() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(0.0);
    }
    Ok(sab / (saa * sbb).sqrt())
}
