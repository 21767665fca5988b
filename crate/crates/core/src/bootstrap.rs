//! Shared replicate loop and p-value rule for the bootstrap tests.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::result::BootstrapRun;
use crate::rng::{substream, StreamRng};

/// Attempts per replicate before the run is abandoned.
pub const MAX_ATTEMPTS: usize = 3;

/// Share of replicates strictly below the observed statistic.
pub fn bootstrap_pvalue(observed: f64, reps: &[f64]) -> f64 {
    if reps.is_empty() {
        return f64::NAN;
    }
    let below = reps.iter().filter(|&&r| observed > r).count();
    below as f64 / reps.len() as f64
}

/// Runs `b` replicates; replicate `i` draws from substream `(seed, i, attempt)`.
/// Output order follows the replicate index regardless of scheduling.
pub fn run_replicates<F>(b: usize, seed: u64, replicate: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&mut StreamRng) -> Result<(f64, f64)> + Sync,
{
    if b == 0 {
        return Err(Error::InvalidParameter(
            "at least one replicate required".into(),
        ));
    }
    let pairs: Vec<(f64, f64)> = (0..b)
        .into_par_iter()
        .map(|i| {
            for attempt in 0..MAX_ATTEMPTS {
                let mut rng = substream(seed, &[i as u64, attempt as u64]);
                if let Ok(pair) = replicate(&mut rng) {
                    return Ok(pair);
                }
            }
            Err(Error::ReplicateFailure {
                index: i,
                attempts: MAX_ATTEMPTS,
            })
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

pub(crate) fn summarize(
    phi_observed: f64,
    t_observed: f64,
    phi_reps: Vec<f64>,
    t_reps: Vec<f64>,
    seed: u64,
) -> BootstrapRun {
    BootstrapRun {
        p_phi: bootstrap_pvalue(phi_observed, &phi_reps),
        p_t: bootstrap_pvalue(t_observed, &t_reps),
        replicates: t_reps.len(),
        phi_reps,
        t_reps,
        phi_observed,
        t_observed,
        seed,
    }
}

pub(crate) fn check_size(size: f64) -> Result<()> {
    if size > 0.0 && size < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "size {size} must lie in (0, 1)"
        )))
    }
}
