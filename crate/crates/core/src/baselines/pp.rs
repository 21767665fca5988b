//! Flat-top long-run variance and the pivoted Phillips-Perron statistic.

use std::collections::BTreeMap;

use super::critical::CriticalValueTable;
use crate::acov::{sample_autocov, select_bandwidth, BandwidthRule, Kernel};
use crate::error::{Error, Result};
use crate::lpb::MIN_LENGTH;
use crate::result::{Method, TestResult};
use crate::series::{fit_ar1, Ar1Fit, Series};

/// `sum_{|h| <= c l} kappa(h / l) gamma(h)` from raw residuals, floored at
/// `gamma(0) / n` (or the smallest positive double) when not positive.
pub fn flat_top_lrv(resid: &[f64], l: usize, kernel: Kernel) -> f64 {
    let n = resid.len();
    if n == 0 {
        return f64::MIN_POSITIVE;
    }
    let l = l.max(1);
    let max_lag = ((kernel.cutoff() * l as f64).floor() as usize).min(n - 1);
    let gamma = sample_autocov(resid, max_lag)
        .expect("max_lag below length")
        .gamma;
    let mut lrv = gamma[0];
    for (h, g) in gamma.iter().enumerate().skip(1) {
        lrv += 2.0 * kernel.weight(h as f64 / l as f64) * g;
    }
    if lrv > 0.0 {
        lrv
    } else {
        let floor = gamma[0] / n as f64;
        if floor > 0.0 {
            floor
        } else {
            f64::MIN_POSITIVE
        }
    }
}

/// `Z_t = t sqrt(gamma0 / lrv) - (lrv - gamma0) / (2 sqrt(lrv) sqrt(n^-2 sum y_{t-1}^2))`
/// with `n` the number of regression pairs.
pub fn pp_z_stat(fit: &Ar1Fit, lrv: f64, gamma0: f64) -> Result<f64> {
    if !(lrv > 0.0) {
        return Err(Error::NonpositiveLrv(lrv));
    }
    if lrv == gamma0 {
        return Ok(fit.t_stat);
    }
    let n = fit.n_used as f64;
    let scale = (fit.sum_sq_lag / (n * n)).sqrt();
    Ok(fit.t_stat * (gamma0 / lrv).sqrt() - (lrv - gamma0) / (2.0 * lrv.sqrt() * scale))
}

pub fn fpp_test(
    y: &Series,
    size: f64,
    rule: BandwidthRule,
    cv: &CriticalValueTable,
) -> Result<TestResult> {
    if y.len() < MIN_LENGTH {
        return Err(Error::TooShort {
            required: MIN_LENGTH,
            actual: y.len(),
        });
    }
    let critical = cv.quantile(size)?;
    let fit = fit_ar1(y)?;
    let n = fit.residuals.len();
    let acov = sample_autocov(&fit.residuals, n - 1)?;
    let l = select_bandwidth(&acov, rule)?;
    let lrv = flat_top_lrv(&fit.residuals, l, Kernel::Trapezoid);
    let gamma0 = acov.gamma0();
    let z = pp_z_stat(&fit, lrv, gamma0)?;
    Ok(TestResult {
        method: Method::Fpp,
        statistic: z,
        p_value: None,
        critical_value: Some(critical),
        reject: z < critical,
        reject_phi: None,
        nuisance: BTreeMap::from([
            ("bandwidth".to_string(), l as f64),
            ("lrv".to_string(), lrv),
            ("gamma0".to_string(), gamma0),
        ]),
        bootstrap: None,
    })
}
