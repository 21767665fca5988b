//! Augmented Dickey-Fuller regression with MAIC lag selection.

use std::collections::BTreeMap;

use super::critical::CriticalValueTable;
use super::ols::{fit_leading, CrossProducts};
use crate::error::{Error, Result};
use crate::result::{Method, TestResult};
use crate::series::Series;

/// `floor(12 (n / 100)^(1/4))`.
pub fn default_k_max(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Design rows of `dy_t = phi0 y_{t-1} + sum_j b_j dy_{t-j} + e_t` for
/// 0-based `t` in `start..n`, with `lags` augmentation terms.
fn design(y: &[f64], lags: usize, start: usize) -> (Vec<f64>, Vec<f64>) {
    let p = lags + 1;
    let mut x = Vec::with_capacity((y.len() - start) * p);
    let mut dep = Vec::with_capacity(y.len() - start);
    for t in start..y.len() {
        x.push(y[t - 1]);
        for j in 1..=lags {
            x.push(y[t - j] - y[t - j - 1]);
        }
        dep.push(y[t] - y[t - 1]);
    }
    (x, dep)
}

fn cross_products(y: &[f64], lags: usize, start: usize) -> CrossProducts {
    let p = lags + 1;
    let (x, dep) = design(y, lags, start);
    CrossProducts::from_rows(x.chunks(p).zip(dep.iter().copied()), p)
}

/// Lag order minimizing MAIC over `0..=k_max` on the common sample
/// `t = k_max + 2..=n`.
pub fn maic_select(y: &Series, k_max: usize) -> Result<usize> {
    let v = y.values();
    let n = v.len();
    if n <= k_max + 2 {
        return Err(Error::InsufficientData(format!(
            "MAIC with k_max = {k_max} needs more than {} observations, got {n}",
            k_max + 2
        )));
    }
    if k_max == 0 {
        return Ok(0);
    }
    let cp = cross_products(v, k_max, k_max + 1);
    let nobs = cp.nobs as f64;
    let penalty_den = (n - k_max) as f64;
    let sum_sq_lag = cp.xtx[(0, 0)];
    let mut best = (f64::INFINITY, 0);
    for k in 0..=k_max {
        let fit = fit_leading(&cp, k + 1)?;
        let s2 = fit.rss / nobs;
        let tau = fit.coef[0] * fit.coef[0] * sum_sq_lag / s2;
        let maic = s2.ln() + 2.0 * (tau + k as f64) / penalty_den;
        if maic < best.0 {
            best = (maic, k);
        }
    }
    Ok(best.1)
}

/// ADF regression at a fixed lag order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdfFit {
    pub lags: usize,
    /// Coefficient on `y_{t-1}`; `phi - 1` in AR(1) terms.
    pub phi0: f64,
    pub t_stat: f64,
    pub nobs: usize,
}

/// Fits the ADF regression with `lags` augmentation terms on every usable
/// observation, `t = lags + 2..=n`.
pub fn adf_fit(y: &Series, lags: usize) -> Result<AdfFit> {
    let v = y.values();
    let n = v.len();
    let p = lags + 1;
    if n < lags + p + 2 {
        return Err(Error::InsufficientData(format!(
            "ADF with {lags} lags needs at least {} observations, got {n}",
            lags + p + 2
        )));
    }
    let cp = cross_products(v, lags, lags + 1);
    let fit = fit_leading(&cp, p)?;
    let s2 = fit.rss / (cp.nobs - p) as f64;
    if s2 == 0.0 {
        return Err(Error::ZeroResidualVariance);
    }
    Ok(AdfFit {
        lags,
        phi0: fit.coef[0],
        t_stat: fit.coef[0] / (s2 * fit.inv00).sqrt(),
        nobs: cp.nobs,
    })
}

/// ADF t ratio at the MAIC-selected lag.
pub fn adf_statistic(y: &Series, k_max: usize) -> Result<AdfFit> {
    let k = maic_select(y, k_max)?;
    adf_fit(y, k)
}

pub fn adf_test(
    y: &Series,
    k_max: usize,
    size: f64,
    cv: &CriticalValueTable,
) -> Result<TestResult> {
    let critical = cv.quantile(size)?;
    let fit = adf_statistic(y, k_max)?;
    Ok(TestResult {
        method: Method::Adf,
        statistic: fit.t_stat,
        p_value: None,
        critical_value: Some(critical),
        reject: fit.t_stat < critical,
        reject_phi: None,
        nuisance: BTreeMap::from([
            ("lag_order".to_string(), fit.lags as f64),
            ("k_max".to_string(), k_max as f64),
        ]),
        bootstrap: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{gen_noise, NoiseKind};
    use crate::rng::substream;
    use crate::series::{fit_ar1, integrate};

    fn walk(kind: NoiseKind, n: usize, seed: u64) -> Series {
        let v = gen_noise(kind, n, 200, &mut substream(seed, &[0xadf])).unwrap();
        Series::new(integrate(&v).unwrap().into_values()).unwrap()
    }

    #[test]
    fn default_lag_cap() {
        assert_eq!(default_k_max(100), 12);
        assert_eq!(default_k_max(500), 17);
    }

    #[test]
    fn zero_lags_matches_ar1_fit() {
        for seed in 0..20 {
            let y = walk(NoiseKind::Iid, 60, seed);
            let a = adf_fit(&y, 0).unwrap();
            let f = fit_ar1(&y).unwrap();
            assert!((a.phi0 - (f.phi_hat - 1.0)).abs() < 1e-10);
            assert!((a.t_stat - f.t_stat).abs() < 1e-10 * (1.0 + f.t_stat.abs()));
        }
    }

    #[test]
    fn single_candidate() {
        let y = walk(NoiseKind::Iid, 30, 1);
        assert_eq!(maic_select(&y, 0).unwrap(), 0);
    }

    #[test]
    fn insufficient_data() {
        let y = Series::new(vec![1.0, 2.0, 0.5, 3.0]).unwrap();
        assert!(matches!(
            maic_select(&y, 2),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn iid_walks_mostly_pick_zero_lags() {
        let hits = (0..200)
            .filter(|&s| {
                maic_select(&walk(NoiseKind::Iid, 500, s), default_k_max(500)).unwrap() == 0
            })
            .count();
        assert!(hits > 100, "{hits}");
    }

    #[test]
    fn negative_ma_needs_augmentation() {
        let hits = (0..200)
            .filter(|&s| maic_select(&walk(NoiseKind::MaNeg, 100, s), 10).unwrap() >= 1)
            .count();
        assert!(hits > 100, "{hits}");
    }

    #[test]
    fn stationary_series_is_rejected() {
        let cv = CriticalValueTable::simulate(500, 20_000, 3, &[0.05]).unwrap();
        let mut rejects = 0;
        for s in 0..100 {
            let e = gen_noise(NoiseKind::Iid, 500, 0, &mut substream(s, &[0x57])).unwrap();
            let mut y = vec![0.0; 500];
            for t in 1..500 {
                y[t] = 0.2 * y[t - 1] + e[t];
            }
            let r = adf_test(&Series::new(y).unwrap(), default_k_max(500), 0.05, &cv).unwrap();
            rejects += usize::from(r.reject);
        }
        assert!(rejects >= 99, "{rejects}");
    }
}
