//! Small least-squares helpers built on cross-product matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Cross products of a design matrix given by rows: `X'X`, `X'y`, `y'y`.
pub(crate) struct CrossProducts {
    pub xtx: DMatrix<f64>,
    pub xty: DVector<f64>,
    pub yty: f64,
    pub nobs: usize,
}

impl CrossProducts {
    pub fn from_rows<'a>(rows: impl Iterator<Item = (&'a [f64], f64)>, p: usize) -> Self {
        let mut xtx = DMatrix::zeros(p, p);
        let mut xty = DVector::zeros(p);
        let mut yty = 0.0;
        let mut nobs = 0;
        for (x, y) in rows {
            for i in 0..p {
                xty[i] += x[i] * y;
                for j in 0..=i {
                    xtx[(i, j)] += x[i] * x[j];
                }
            }
            yty += y * y;
            nobs += 1;
        }
        for i in 0..p {
            for j in i + 1..p {
                xtx[(i, j)] = xtx[(j, i)];
            }
        }
        Self {
            xtx,
            xty,
            yty,
            nobs,
        }
    }
}

/// Least-squares fit using the leading `k` regressors.
pub(crate) struct SubsetFit {
    pub coef: DVector<f64>,
    pub rss: f64,
    /// Diagonal element `[(X'X)^-1]_00`.
    pub inv00: f64,
}

pub(crate) fn fit_leading(cp: &CrossProducts, k: usize) -> Result<SubsetFit> {
    if k == 0 {
        return Ok(SubsetFit {
            coef: DVector::zeros(0),
            rss: cp.yty,
            inv00: f64::NAN,
        });
    }
    let a = cp.xtx.view((0, 0), (k, k)).into_owned();
    let b = cp.xty.rows(0, k).into_owned();
    let chol = a.cholesky().ok_or(Error::DegenerateRegressor)?;
    let coef = chol.solve(&b);
    let mut e0 = DVector::zeros(k);
    e0[0] = 1.0;
    let inv00 = chol.solve(&e0)[0];
    let rss = (cp.yty - coef.dot(&b)).max(0.0);
    Ok(SubsetFit { coef, rss, inv00 })
}
