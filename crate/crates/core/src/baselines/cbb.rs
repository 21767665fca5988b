//! Circular block bootstrap Phillips-Perron test.

use std::collections::BTreeMap;

use rand::Rng;

use crate::acov::Kernel;
use crate::bootstrap::{check_size, run_replicates, summarize};
use crate::error::{Error, Result};
use crate::lpb::MIN_LENGTH;
use crate::result::{Method, TestResult};
use crate::series::{center, fit_ar1, integrate, Series};

/// Concatenates blocks of length `b` starting at the given 0-based offsets,
/// wrapping around the end of `v`, truncated to `v.len()`.
pub fn cbb_resample_from_starts(v: &[f64], b: usize, starts: &[usize]) -> Vec<f64> {
    let n = v.len();
    let mut out = Vec::with_capacity(n);
    'outer: for &s in starts {
        for j in 0..b {
            if out.len() == n {
                break 'outer;
            }
            out.push(v[(s + j) % n]);
        }
    }
    out
}

pub fn cbb_resample<R: Rng + ?Sized>(v: &[f64], b: usize, rng: &mut R) -> Vec<f64> {
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let b = b.clamp(1, n);
    let starts: Vec<usize> = (0..n.div_ceil(b)).map(|_| rng.random_range(0..n)).collect();
    cbb_resample_from_starts(v, b, &starts)
}

/// How the block length is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockLengthRule {
    /// Politis-White automatic selection for the circular bootstrap.
    #[default]
    Automatic,
    /// `ceil(n^(1/3))`.
    Fixed,
}

/// Automatic block length for the circular block bootstrap.
///
/// Picks the smallest `m` after which `K_N` autocorrelations are all below
/// `2 sqrt(log10 n / n)`, sets `M = 2m`, estimates the flat-top spectral
/// quantities `G` and `g(0)`, and returns
/// `ceil((2 G^2 / (4/3 g(0)^2))^(1/3) n^(1/3))` clamped to `[1, ceil(n/3)]`.
pub fn cbb_block_length(v: &[f64]) -> usize {
    let n = v.len();
    let upper = n.div_ceil(3).max(1);
    if n < 4 {
        return 1;
    }
    let x = center(v);
    let nf = n as f64;
    let k_n = 5.max(nf.log10().sqrt().ceil() as usize);
    let m_max = ((nf.sqrt().ceil() as usize) + k_n).min(n - 1);
    let acov = |h: usize| x[h..].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / nf;
    let r: Vec<f64> = (0..=m_max).map(acov).collect();
    if r[0] <= 0.0 {
        return 1;
    }
    let threshold = 2.0 * (nf.log10() / nf).sqrt();
    let rho = |h: usize| if h <= m_max { r[h] / r[0] } else { 0.0 };
    let m_hat = (1..=m_max)
        .find(|&m| (1..=k_n).all(|k| rho(m + k).abs() < threshold))
        .unwrap_or(m_max);
    let big_m = (2 * m_hat).min(m_max);
    let mut g = 0.0;
    let mut g0 = r[0];
    for (k, rk) in r.iter().enumerate().take(big_m + 1).skip(1) {
        let w = Kernel::Trapezoid.weight(2.0 * k as f64 / big_m as f64);
        g += 2.0 * w * k as f64 * rk;
        g0 += 2.0 * w * rk;
    }
    let d = 4.0 / 3.0 * g0 * g0;
    if !(d > 0.0) {
        return 1;
    }
    let b = (2.0 * g * g / d).cbrt() * nf.cbrt();
    (b.ceil() as usize).clamp(1, upper)
}

pub fn block_length(v: &[f64], rule: BlockLengthRule) -> usize {
    match rule {
        BlockLengthRule::Automatic => cbb_block_length(v),
        BlockLengthRule::Fixed => ((v.len() as f64).cbrt().ceil() as usize).max(1),
    }
}

pub fn cbb_pp_test(y: &Series, replicates: usize, size: f64, seed: u64) -> Result<TestResult> {
    cbb_pp_test_with(y, replicates, size, seed, BlockLengthRule::Automatic)
}

pub fn cbb_pp_test_with(
    y: &Series,
    replicates: usize,
    size: f64,
    seed: u64,
    rule: BlockLengthRule,
) -> Result<TestResult> {
    check_size(size)?;
    if y.len() < MIN_LENGTH {
        return Err(Error::TooShort {
            required: MIN_LENGTH,
            actual: y.len(),
        });
    }
    let fit = fit_ar1(y)?;
    let v = center(&fit.residuals);
    let b = block_length(&v, rule);
    let (phi_reps, t_reps) = run_replicates(replicates, seed, |rng| {
        let noise = cbb_resample(&v, b, rng);
        let f = fit_ar1(&integrate(&noise)?)?;
        Ok((f.phi_hat, f.t_stat))
    })?;
    let run = summarize(fit.phi_hat, fit.t_stat, phi_reps, t_reps, seed);
    Ok(TestResult {
        method: Method::CbbPp,
        statistic: fit.t_stat,
        p_value: Some(run.p_t),
        critical_value: None,
        reject: run.p_t < size,
        reject_phi: Some(run.p_phi < size),
        nuisance: BTreeMap::from([
            ("block_length".to_string(), b as f64),
            ("B".to_string(), replicates as f64),
        ]),
        bootstrap: Some(run),
    })
}
