//! Series container, the no-intercept AR(1) regression, and the vector
//! centering utilities used by every test.

use crate::error::{Error, Result};

/// An ordered sequence of finite observations.
///
/// A series built by [`integrate`] starts from a known zero origin; its
/// regression then also uses the pair `(Y0 = 0, Y1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    origin_at_zero: bool,
}

impl Series {
    /// Observed data. Needs at least two finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                required: 2,
                actual: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self {
            values,
            origin_at_zero: false,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when the series was cumulated from a zero origin.
    pub fn origin_at_zero(&self) -> bool {
        self.origin_at_zero
    }

    /// The `(lagged, current)` regression pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let head = self
            .origin_at_zero
            .then(|| (0.0, self.values[0]))
            .into_iter();
        head.chain(self.values.windows(2).map(|w| (w[0], w[1])))
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// OLS fit of `Y_t = phi * Y_{t-1} + V_t` without intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Fit {
    pub phi_hat: f64,
    /// `(phi_hat - 1) / se(phi_hat)`: the Dickey-Fuller t ratio.
    pub t_stat: f64,
    pub residuals: Vec<f64>,
    /// Residual variance with `n_used - 1` degrees of freedom.
    pub s2: f64,
    pub sum_sq_lag: f64,
    pub n_used: usize,
}

impl Ar1Fit {
    /// Standard error of `phi_hat`.
    pub fn std_err(&self) -> f64 {
        (self.s2 / self.sum_sq_lag).sqrt()
    }

    /// Residual second moment with divisor `n_used`.
    pub fn gamma0(&self) -> f64 {
        self.residuals.iter().map(|v| v * v).sum::<f64>() / self.n_used as f64
    }
}

pub fn fit_ar1(y: &Series) -> Result<Ar1Fit> {
    let n_used = y.len() - 1 + usize::from(y.origin_at_zero());
    if n_used < 2 {
        return Err(Error::TooShort {
            required: 3,
            actual: y.len(),
        });
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (lag, cur) in y.pairs() {
        sxy += lag * cur;
        sxx += lag * lag;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateRegressor);
    }
    let phi_hat = sxy / sxx;
    let residuals: Vec<f64> = y.pairs().map(|(lag, cur)| cur - phi_hat * lag).collect();
    let rss: f64 = residuals.iter().map(|v| v * v).sum();
    let s2 = rss / (n_used - 1) as f64;
    if s2 == 0.0 {
        return Err(Error::ZeroResidualVariance);
    }
    let t_stat = (phi_hat - 1.0) / (s2 / sxx).sqrt();
    Ok(Ar1Fit {
        phi_hat,
        t_stat,
        residuals,
        s2,
        sum_sq_lag: sxx,
        n_used,
    })
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Subtracts the sample mean. Empty input yields empty output.
pub fn center(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let m = mean(v);
    v.iter().map(|x| x - m).collect()
}

/// A vector rescaled to mean 0 and population variance 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedVector {
    pub values: Vec<f64>,
    pub original_mean: f64,
    pub original_scale: f64,
}

pub fn standardize(v: &[f64]) -> Result<StandardizedVector> {
    if v.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            actual: v.len(),
        });
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::ZeroVariance);
    }
    let scale = var.sqrt();
    let mut values: Vec<f64> = v.iter().map(|x| (x - m) / scale).collect();
    // one refinement pass removes rounding residue from the first
    let m2 = mean(&values);
    let s2 = (values.iter().map(|x| (x - m2) * (x - m2)).sum::<f64>() / v.len() as f64).sqrt();
    for x in &mut values {
        *x = (*x - m2) / s2;
    }
    Ok(StandardizedVector {
        values,
        original_mean: m,
        original_scale: scale,
    })
}

/// Cumulates noise into `Y_t = Y_{t-1} + V_t` from `Y_0 = 0`.
pub fn integrate(noise: &[f64]) -> Result<Series> {
    if noise.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_finite(noise)?;
    let mut acc = 0.0;
    let values = noise
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    Ok(Series {
        values,
        origin_at_zero: true,
    })
}
