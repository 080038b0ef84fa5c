//! PCA reference embeddings: one dataset on its own, or both datasets stacked.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{truncated_svd, DataMatrix};

/// Principal component scores of the column-centered data, `q` columns.
///
/// Component signs follow the [`truncated_svd`] convention.
pub fn pca_embed(x: &DataMatrix, q: usize) -> Result<DMatrix<f64>> {
    let (rows, cols) = (x.rows(), x.cols());
    if q == 0 || rows < 2 || q > (rows - 1).min(cols) {
        return Err(Error::Dimension(format!(
            "PCA dimension must be in 1..={} for {rows}x{cols} data, got {q}",
            rows.saturating_sub(1).min(cols)
        )));
    }
    let mut centered = x.as_matrix().clone();
    for mut column in centered.column_iter_mut() {
        let mean = column.mean();
        column.add_scalar_mut(-mean);
    }
    let svd = truncated_svd(&centered, q)?;
    Ok(&centered * &svd.right)
}

/// PCA of `[X; Y]`, split back into the `X` and `Y` blocks.
pub fn joint_pca_embed(
    x: &DataMatrix,
    y: &DataMatrix,
    q: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let stacked = x.vstack(y)?;
    let scores = pca_embed(&stacked, q)?;
    let m = x.rows();
    Ok((
        scores.rows(0, m).into_owned(),
        scores.rows(m, y.rows()).into_owned(),
    ))
}
