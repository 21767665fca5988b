//! Linear process bootstrap unit-root test.
//!
//! The AR(1) residuals are whitened with the Cholesky factor of the
//! floored tapered covariance estimate, the whitened values are resampled
//! iid, re-colored with the same factor, and cumulated into a random walk
//! from which the bootstrap `(phi*, t*)` pair is computed.

use std::collections::BTreeMap;

use rand::Rng;

use crate::acov::{
    build_sigma_hat, sample_autocov, select_bandwidth, BandwidthRule, Kernel, SigmaHat,
};
use crate::bootstrap::{check_size, run_replicates, summarize};
use crate::error::{Error, Result};
use crate::result::{Method, TestResult};
use crate::series::{center, fit_ar1, integrate, standardize, Ar1Fit, Series, StandardizedVector};

/// Shortest series the test accepts.
pub const MIN_LENGTH: usize = 16;

/// Everything computed once from the observed series before resampling.
#[derive(Debug, Clone)]
pub struct LpbState {
    pub fit: Ar1Fit,
    /// Centered residuals.
    pub centered_resid: Vec<f64>,
    pub sigma: SigmaHat,
    /// Whitened, re-centered and rescaled residuals: the resampling pool.
    pub innovations: StandardizedVector,
    pub n: usize,
}

impl LpbState {
    /// Builds the resampling pool from a fit and a given covariance factor.
    pub fn with_sigma(fit: Ar1Fit, sigma: SigmaHat) -> Result<Self> {
        let centered_resid = center(&fit.residuals);
        let whitened = sigma.whiten(&centered_resid)?;
        let innovations = standardize(&center(&whitened))?;
        Ok(Self {
            n: centered_resid.len(),
            fit,
            centered_resid,
            sigma,
            innovations,
        })
    }
}

pub fn lpb_prepare(y: &Series, rule: BandwidthRule, kernel: Kernel) -> Result<LpbState> {
    if y.len() < MIN_LENGTH {
        return Err(Error::TooShort {
            required: MIN_LENGTH,
            actual: y.len(),
        });
    }
    let fit = fit_ar1(y)?;
    let n = fit.residuals.len();
    // raw residuals here; centering applies only to the vector being whitened
    let acov = sample_autocov(&fit.residuals, n - 1)?;
    let l = select_bandwidth(&acov, rule)?;
    let sigma = build_sigma_hat(&acov, l, kernel)?;
    LpbState::with_sigma(fit, sigma)
}

/// `n` indices drawn uniformly with replacement.
pub fn resample_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Bootstrap noise `V* = L eps*` for the given resampling indices.
pub fn noise_from_indices(state: &LpbState, indices: &[usize]) -> Result<Vec<f64>> {
    let pool = &state.innovations.values;
    let eps: Vec<f64> = indices
        .iter()
        .map(|&i| {
            pool.get(i).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("index {i} outside pool of {}", pool.len()))
            })
        })
        .collect::<Result<_>>()?;
    state.sigma.color(&eps)
}

pub fn bootstrap_noise<R: Rng + ?Sized>(state: &LpbState, rng: &mut R) -> Result<Vec<f64>> {
    let idx = resample_indices(state.n, rng);
    noise_from_indices(state, &idx)
}

/// One bootstrap statistic pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replicate {
    pub phi_star: f64,
    pub t_star: f64,
}

pub fn replicate_from_indices(state: &LpbState, indices: &[usize]) -> Result<Replicate> {
    let v = noise_from_indices(state, indices)?;
    let fit = fit_ar1(&integrate(&v)?)?;
    Ok(Replicate {
        phi_star: fit.phi_hat,
        t_star: fit.t_stat,
    })
}

pub fn lpb_replicate<R: Rng + ?Sized>(state: &LpbState, rng: &mut R) -> Result<Replicate> {
    let idx = resample_indices(state.n, rng);
    replicate_from_indices(state, &idx)
}

/// Runs the bootstrap on a prepared state.
pub fn lpb_test_prepared(
    state: &LpbState,
    replicates: usize,
    size: f64,
    seed: u64,
) -> Result<TestResult> {
    check_size(size)?;
    let (phi_reps, t_reps) = run_replicates(replicates, seed, |rng| {
        lpb_replicate(state, rng).map(|r| (r.phi_star, r.t_star))
    })?;
    let run = summarize(state.fit.phi_hat, state.fit.t_stat, phi_reps, t_reps, seed);
    let nuisance = BTreeMap::from([
        ("bandwidth".to_string(), state.sigma.bandwidth as f64),
        ("sigma_star_sq".to_string(), state.sigma.sigma_star_sq),
        (
            "floored_count".to_string(),
            state.sigma.floored_count as f64,
        ),
        ("B".to_string(), replicates as f64),
    ]);
    Ok(TestResult {
        method: Method::LpbPp,
        statistic: state.fit.t_stat,
        p_value: Some(run.p_t),
        critical_value: None,
        reject: run.p_t < size,
        reject_phi: Some(run.p_phi < size),
        nuisance,
        bootstrap: Some(run),
    })
}

pub fn lpb_test(
    y: &Series,
    replicates: usize,
    size: f64,
    rule: BandwidthRule,
    seed: u64,
) -> Result<TestResult> {
    check_size(size)?;
    let state = lpb_prepare(y, rule, Kernel::Trapezoid)?;
    lpb_test_prepared(&state, replicates, size, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::bootstrap_pvalue;
    use crate::rng::substream;
    use crate::series::mean;
    use rand_distr::StandardNormal;

    fn random_walk(n: usize, seed: u64) -> Series {
        let mut rng = substream(seed, &[0xa1]);
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        Series::new(integrate(&v).unwrap().into_values()).unwrap()
    }

    #[test]
    fn identity_covariance_bypass() {
        let y = random_walk(50, 3);
        let fit = fit_ar1(&y).unwrap();
        let n = fit.residuals.len();
        let state = LpbState::with_sigma(fit.clone(), SigmaHat::identity(n)).unwrap();
        let want = standardize(&center(&center(&fit.residuals))).unwrap();
        assert_eq!(state.innovations.values, want.values);
    }

    #[test]
    fn prepared_state_invariants() {
        for seed in 0..100 {
            let y = random_walk(100, seed);
            let s = lpb_prepare(&y, BandwidthRule::default(), Kernel::Trapezoid).unwrap();
            assert_eq!(s.n, 99);
            assert_eq!(s.centered_resid.len(), 99);
            assert_eq!(s.innovations.values.len(), 99);
            assert_eq!(s.sigma.dim(), 99);
            assert!(s.sigma.bandwidth >= 1 && s.sigma.bandwidth <= 99 / 4);
            assert!(s.sigma.sigma_star_sq > 0.0);
            assert!(mean(&s.innovations.values).abs() < 1e-10);
            let var = s.innovations.values.iter().map(|x| x * x).sum::<f64>() / 99.0;
            assert!((var - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn short_inputs_are_refused() {
        let alternating = Series::new(
            (0..10)
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            lpb_prepare(&alternating, BandwidthRule::default(), Kernel::Trapezoid),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn short_perturbed_alternating_series() {
        let y = Series::new(
            (0..16)
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } + 0.1 * (i as f64).sin())
                .collect(),
        )
        .unwrap();
        let s = lpb_prepare(&y, BandwidthRule::default(), Kernel::Trapezoid).unwrap();
        assert_eq!(s.n, 15);
        assert_eq!(s.innovations.values.len(), 15);
        assert!(s.sigma.bandwidth <= 15 / 4);
    }

    #[test]
    fn identity_indices_recolor_the_pool() {
        let y = random_walk(60, 8);
        let s = lpb_prepare(&y, BandwidthRule::default(), Kernel::Trapezoid).unwrap();
        let idx: Vec<usize> = (0..s.n).collect();
        let v = noise_from_indices(&s, &idx).unwrap();
        assert_eq!(v, s.sigma.color(&s.innovations.values).unwrap());
    }

    #[test]
    fn replicate_is_deterministic() {
        let y = random_walk(80, 1);
        let s = lpb_prepare(&y, BandwidthRule::default(), Kernel::Trapezoid).unwrap();
        let a = lpb_replicate(&s, &mut substream(4, &[1])).unwrap();
        let b = lpb_replicate(&s, &mut substream(4, &[1])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_covariance_gives_dickey_fuller_quantile() {
        // independent oracle: the 5% point of the no-constant DF t ratio from
        // 1e5 Gaussian random walks of length 100 (Y0 = 0 pair included)
        let mut oracle = Vec::with_capacity(100_000);
        for p in 0..100_000u64 {
            let mut rng = substream(0xdf, &[p]);
            let mut y = 0.0;
            let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
            for _ in 0..100 {
                let lag = y;
                y += rng.sample::<f64, _>(StandardNormal);
                sxy += lag * y;
                sxx += lag * lag;
                syy += y * y;
            }
            let phi = sxy / sxx;
            let s2 = (syy - phi * sxy) / 99.0;
            oracle.push((phi - 1.0) / (s2 / sxx).sqrt());
        }
        oracle.sort_by(f64::total_cmp);
        let df5 = oracle[4999];
        assert!((df5 + 1.95).abs() < 0.1, "{df5}");

        let mut rng = substream(77, &[]);
        let pool: Vec<f64> = (0..100).map(|_| rng.sample(StandardNormal)).collect();
        let fit = fit_ar1(&random_walk(101, 2)).unwrap();
        let mut state = LpbState::with_sigma(fit, SigmaHat::identity(100)).unwrap();
        state.innovations = standardize(&pool).unwrap();
        let mut t: Vec<f64> = (0..10_000u64)
            .map(|i| {
                lpb_replicate(&state, &mut substream(78, &[i]))
                    .unwrap()
                    .t_star
            })
            .collect();
        t.sort_by(f64::total_cmp);
        let q = t[499];
        assert!((q - df5).abs() <= 0.15, "bootstrap {q} vs oracle {df5}");
    }

    #[test]
    fn test_is_deterministic_and_consistent() {
        let y = random_walk(100, 12);
        let a = lpb_test(&y, 99, 0.05, BandwidthRule::default(), 5).unwrap();
        let b = lpb_test(&y, 99, 0.05, BandwidthRule::default(), 5).unwrap();
        assert_eq!(a, b);
        let run = a.bootstrap.as_ref().unwrap();
        let below = run.t_reps.iter().filter(|&&t| run.t_observed > t).count();
        assert_eq!(run.p_t, below as f64 / 99.0);
        assert_eq!(a.reject, run.p_t < 0.05);
        assert_eq!(a.reject_phi, Some(run.p_phi < 0.05));
        assert_eq!(run.p_t, bootstrap_pvalue(run.t_observed, &run.t_reps));
    }

    #[test]
    fn single_replicate() {
        let y = random_walk(40, 21);
        let r = lpb_test(&y, 1, 0.05, BandwidthRule::default(), 1).unwrap();
        let p = r.p_value.unwrap();
        assert!(p == 0.0 || p == 1.0);
        assert_eq!(r.reject, p == 0.0);
    }

    #[test]
    fn decision_is_monotone_in_size() {
        let y = random_walk(100, 31);
        let r = lpb_test(&y, 200, 0.05, BandwidthRule::default(), 2).unwrap();
        let p = r.p_value.unwrap();
        let sizes = [0.01, 0.05, 0.1, 0.2, 0.5, 0.9];
        let decisions: Vec<bool> = sizes.iter().map(|&s| p < s).collect();
        for w in decisions.windows(2) {
            assert!(!w[0] || w[1]);
        }
    }

    #[test]
    fn invalid_size_is_rejected() {
        let y = random_walk(40, 2);
        assert!(lpb_test(&y, 10, 1.5, BandwidthRule::default(), 1).is_err());
    }
}
