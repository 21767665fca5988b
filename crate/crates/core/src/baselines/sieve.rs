//! AR-sieve bootstrap ADF test.

use std::collections::BTreeMap;

use rand::Rng;

use super::adf::adf_statistic;
use super::ols::{fit_leading, CrossProducts};
use crate::bootstrap::{check_size, run_replicates, summarize};
use crate::error::{Error, Result};
use crate::result::{Method, TestResult};
use crate::series::{center, fit_ar1, Series};

/// Selected autoregression with its centered residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveFit {
    /// `a_1..a_p` in `x_t = sum_j a_j x_{t-j} + e_t`.
    pub coeffs: Vec<f64>,
    pub innovations: Vec<f64>,
}

impl SieveFit {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

/// `floor(10 log10 n)`.
pub fn default_p_max(n: usize) -> usize {
    (10.0 * (n as f64).log10()).floor() as usize
}

fn lag_rows(x: &[f64], lags: usize, start: usize) -> CrossProducts {
    let mut flat = Vec::with_capacity((x.len() - start) * lags.max(1));
    for t in start..x.len() {
        for j in 1..=lags {
            flat.push(x[t - j]);
        }
    }
    let deps = x[start..].iter().copied();
    if lags == 0 {
        return CrossProducts::from_rows(deps.map(|y| (&[][..], y)), 0);
    }
    CrossProducts::from_rows(flat.chunks(lags).zip(deps), lags)
}

/// Least-squares autoregression with order chosen by AIC over `0..=p_max`
/// on the common sample `t = p_max..n`.
pub fn ar_sieve_fit(x: &[f64], p_max: usize) -> Result<SieveFit> {
    let n = x.len();
    if n <= p_max + 2 {
        return Err(Error::InsufficientData(format!(
            "sieve with p_max = {p_max} needs more than {} values, got {n}",
            p_max + 2
        )));
    }
    let mut order = 0;
    if p_max > 0 {
        let cp = lag_rows(x, p_max, p_max);
        let nobs = cp.nobs as f64;
        let mut best = f64::INFINITY;
        for p in 0..=p_max {
            let fit = fit_leading(&cp, p)?;
            let aic = nobs * (fit.rss / nobs).ln() + 2.0 * p as f64;
            if aic < best {
                best = aic;
                order = p;
            }
        }
    }
    if order == 0 {
        return Ok(SieveFit {
            coeffs: Vec::new(),
            innovations: center(x),
        });
    }
    let cp = lag_rows(x, order, order);
    let fit = fit_leading(&cp, order)?;
    let coeffs: Vec<f64> = fit.coef.iter().copied().collect();
    let resid: Vec<f64> = (order..n)
        .map(|t| {
            x[t] - coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| a * x[t - j - 1])
                .sum::<f64>()
        })
        .collect();
    Ok(SieveFit {
        coeffs,
        innovations: center(&resid),
    })
}

/// Rebuilds `len` values of the autoregression from iid draws of the sieve
/// innovations, starting from zeros and discarding `5 p` warm-up values.
pub fn sieve_noise<R: Rng + ?Sized>(sieve: &SieveFit, len: usize, rng: &mut R) -> Vec<f64> {
    let p = sieve.order();
    let burn = 5 * p;
    let pool = &sieve.innovations;
    let mut u = vec![0.0; p + burn + len];
    for t in p..u.len() {
        let e = pool[rng.random_range(0..pool.len())];
        let ar: f64 = sieve
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a * u[t - j - 1])
            .sum();
        u[t] = ar + e;
    }
    u.split_off(p + burn)
}

pub fn arb_adf_test(
    y: &Series,
    replicates: usize,
    size: f64,
    k_max: usize,
    seed: u64,
) -> Result<TestResult> {
    check_size(size)?;
    let observed = adf_statistic(y, k_max)?;
    let first = fit_ar1(y)?;
    let resid = center(&first.residuals);
    let p_max = default_p_max(resid.len()).min(resid.len().saturating_sub(3));
    let sieve = ar_sieve_fit(&resid, p_max)?;
    let n = y.len();
    let (phi_reps, t_reps) = run_replicates(replicates, seed, |rng| {
        let v = sieve_noise(&sieve, n - 1, rng);
        let mut path = Vec::with_capacity(n);
        let mut acc = 0.0;
        path.push(acc);
        for x in v {
            acc += x;
            path.push(acc);
        }
        let fit = adf_statistic(&Series::new(path)?, k_max)?;
        Ok((1.0 + fit.phi0, fit.t_stat))
    })?;
    let run = summarize(1.0 + observed.phi0, observed.t_stat, phi_reps, t_reps, seed);
    Ok(TestResult {
        method: Method::ArbAdf,
        statistic: observed.t_stat,
        p_value: Some(run.p_t),
        critical_value: None,
        reject: run.p_t < size,
        reject_phi: Some(run.p_phi < size),
        nuisance: BTreeMap::from([
            ("lag_order".to_string(), observed.lags as f64),
            ("sieve_order".to_string(), sieve.order() as f64),
            ("B".to_string(), replicates as f64),
        ]),
        bootstrap: Some(run),
    })
}
