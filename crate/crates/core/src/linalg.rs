//! Dense matrix container and the two decompositions the rest of the crate
//! relies on: a truncated SVD and a symmetric eigendecomposition.
//!
//! Both decompositions fix the sign of every returned vector so that repeated
//! calls on the same input give bitwise-identical output:
//!
//! * the entry of largest magnitude of each left vector (or eigenvector) is
//!   positive, ties going to the smaller index;
//! * each right singular vector is then oriented so that `u_kᵀ A v_k ≥ 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A dataset of `rows` points in `cols` ambient dimensions.
///
/// Every entry is finite and both dimensions are at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "data matrix must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::Input(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(Self(values))
    }

    /// Builds a matrix from a row-major slice.
    pub fn from_row_slice(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if rows * cols != values.len() {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                values.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, values))
    }

    /// Builds a matrix from a list of rows, which must all have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Dimension(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(rows.len(), cols, &flat)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &DataMatrix) -> Result<DataMatrix> {
        if self.cols() != other.cols() {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns on {} columns",
                other.cols(),
                self.cols()
            )));
        }
        let (m, n) = (self.rows(), other.rows());
        let mut out = DMatrix::zeros(m + n, self.cols());
        out.rows_mut(0, m).copy_from(&self.0);
        out.rows_mut(m, n).copy_from(&other.0);
        Ok(DataMatrix(out))
    }

    /// Adds `shift` to every row.
    pub fn translate(&self, shift: &[f64]) -> Result<DataMatrix> {
        if shift.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "shift has length {}, data has {} columns",
                shift.len(),
                self.cols()
            )));
        }
        let mut out = self.0.clone();
        for (mut col, s) in out.column_iter_mut().zip(shift) {
            col.add_scalar_mut(*s);
        }
        DataMatrix::new(out)
    }

    /// Multiplies every entry by `c`.
    pub fn scale(&self, c: f64) -> Result<DataMatrix> {
        DataMatrix::new(&self.0 * c)
    }
}

impl TryFrom<DMatrix<f64>> for DataMatrix {
    type Error = Error;

    fn try_from(values: DMatrix<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// Leading singular triplets `A ≈ U diag(s) Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// Singular values, non-increasing and non-negative.
    pub values: DVector<f64>,
    /// Left singular vectors as columns (`rows × k`).
    pub left: DMatrix<f64>,
    /// Right singular vectors as columns (`cols × k`).
    pub right: DMatrix<f64>,
}

/// Leading eigenpairs of a symmetric matrix, by algebraic value, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: DMatrix<f64>,
}

/// Largest absolute entry of a matrix (0 for an empty matrix).
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn check_finite(a: &DMatrix<f64>) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input("matrix contains non-finite entries".into()))
    }
}

/// Index of the entry of largest magnitude; the first one wins ties.
fn argmax_abs<'a>(v: impl Iterator<Item = &'a f64>) -> usize {
    let mut best = 0;
    let mut best_abs = f64::NEG_INFINITY;
    for (i, x) in v.enumerate() {
        if x.abs() > best_abs {
            best = i;
            best_abs = x.abs();
        }
    }
    best
}

fn orient_columns(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let i = argmax_abs(col.iter());
        if col[i] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Full symmetric eigendecomposition sorted by descending eigenvalue.
fn full_eigen_descending(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = nalgebra::linalg::SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .total_cmp(&eig.eigenvalues[i])
            .then(i.cmp(&j))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Leading `k` eigenpairs of a symmetric matrix.
///
/// The matrix must be symmetric to within `1e-12 · max(1, ‖A‖_max)`.
pub fn symmetric_eigen(a: &DMatrix<f64>, k: usize) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if k == 0 || k > n {
        return Err(Error::Dimension(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    check_finite(a)?;
    let asym = max_abs(&(a - a.transpose()));
    if asym > 1e-12 * max_abs(a).max(1.0) {
        return Err(Error::Input(format!(
            "matrix is not symmetric (max |A - Aᵀ| = {asym:e})"
        )));
    }
    let (values, vectors) = full_eigen_descending(a);
    let mut vectors = vectors.columns(0, k).into_owned();
    orient_columns(&mut vectors);
    Ok(SymmetricEigen {
        values: values.rows(0, k).into_owned(),
        vectors,
    })
}

/// Leading `k` singular triplets of `a`.
///
/// Works through the eigendecomposition of the smaller Gram matrix. For a
/// wide matrix the left vectors come from `A Aᵀ`; singular values are then
/// re-measured as `‖Aᵀ u_k‖` (avoiding the squaring loss for small values)
/// and the right vectors are re-orthogonalized. Directions whose singular
/// value falls below `1e-12 · s_1` are completed by orthogonalization.
pub fn truncated_svd(a: &DMatrix<f64>, k: usize) -> Result<Svd> {
    let (m, n) = a.shape();
    if k == 0 || k > m.min(n) {
        return Err(Error::Dimension(format!(
            "requested {k} singular triplets of a {m}x{n} matrix"
        )));
    }
    check_finite(a)?;
    let mut svd = if m <= n {
        wide_svd(a, k)
    } else {
        let t = wide_svd(&a.transpose(), k);
        Svd {
            values: t.values,
            left: t.right,
            right: t.left,
        }
    };
    normalize_signs(a, &mut svd);
    Ok(svd)
}

fn wide_svd(a: &DMatrix<f64>, k: usize) -> Svd {
    let m = a.nrows();
    let gram = a * a.transpose();
    let gram = (&gram + gram.transpose()) * 0.5;
    let (_, vectors) = full_eigen_descending(&gram);
    let mut left = vectors.columns(0, m).into_owned();
    orient_columns(&mut left);

    let raw = a.transpose() * &left;
    let norms: Vec<f64> = raw.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    order.truncate(k);

    let floor = 1e-12 * norms[order[0]].max(f64::MIN_POSITIVE);
    let n = a.ncols();
    let mut u = DMatrix::zeros(m, k);
    let mut v = DMatrix::<f64>::zeros(n, k);
    let mut s = DVector::zeros(k);
    let mut seed = 0usize;
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &left.column(src));
        let norm = norms[src];
        s[dst] = norm;
        let mut col: DVector<f64> = raw.column(src).into_owned();
        let mut done = norm > floor && orthonormalize_against(&mut col, &v, dst);
        while !done {
            col = DVector::zeros(n);
            col[seed % n] = 1.0;
            seed += 1;
            done = orthonormalize_against(&mut col, &v, dst);
        }
        v.set_column(dst, &col);
    }
    Svd {
        values: s,
        left: u,
        right: v,
    }
}

/// Two passes of modified Gram-Schmidt against the first `count` columns of
/// `basis`. Returns false if the vector collapses.
fn orthonormalize_against(col: &mut DVector<f64>, basis: &DMatrix<f64>, count: usize) -> bool {
    let start = col.norm();
    if start == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for j in 0..count {
            let b = basis.column(j);
            let proj = b.dot(col);
            col.axpy(-proj, &b, 1.0);
        }
    }
    let norm = col.norm();
    if norm < 1e-8 * start {
        return false;
    }
    *col /= norm;
    true
}

fn normalize_signs(a: &DMatrix<f64>, svd: &mut Svd) {
    for k in 0..svd.values.len() {
        let i = argmax_abs(svd.left.column(k).iter());
        if svd.left[(i, k)] < 0.0 {
            svd.left.column_mut(k).neg_mut();
            svd.right.column_mut(k).neg_mut();
        }
        let av = a * svd.right.column(k);
        if svd.left.column(k).dot(&av) < 0.0 {
            svd.right.column_mut(k).neg_mut();
        }
    }
}
