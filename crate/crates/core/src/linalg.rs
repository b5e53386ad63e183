//! SVD and symmetric eigenvalues on nalgebra matrices, computed with faer.
//! Singular values come back in descending order.

use faer::Mat;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) struct ThinSvd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> Result<Mat<f64>> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)]))
    } else {
        Err(Error::NonFinite("matrix passed to a decomposition".into()))
    }
}

pub(crate) fn thin_svd(m: DMatrix<f64>) -> Result<ThinSvd> {
    let svd = to_faer(&m)?
        .thin_svd()
        .map_err(|e| Error::NonFinite(format!("SVD failed: {e:?}")))?;
    let (u, v) = (svd.U(), svd.V());
    let k = svd.S().dim();
    Ok(ThinSvd {
        u: DMatrix::from_fn(u.nrows(), k, |r, c| u[(r, c)]),
        s: (0..k).map(|i| svd.S()[i]).collect(),
        v_t: DMatrix::from_fn(k, v.nrows(), |r, c| v[(c, r)]),
    })
}

pub(crate) fn singular_values(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let mut s = to_faer(&m)?
        .singular_values()
        .map_err(|e| Error::NonFinite(format!("SVD failed: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Number of singular values above `rel · s[0]`, at least 1.
pub(crate) fn numerical_rank(s: &[f64], rel: f64) -> usize {
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > rel * top).count().max(1)
}

/// Symmetric eigenvalues, ascending.
pub(crate) fn sym_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>> {
    to_faer(&m)?
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::NonFinite(format!("eigendecomposition failed: {e:?}")))
}
