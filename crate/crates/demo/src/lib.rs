//! Browser bindings. Each export takes plain numbers and returns a JSON
//! string; the `*_json` functions are the same operations for native use.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use urtest::acov::{build_sigma_hat, sample_autocov, select_bandwidth, BandwidthRule, Kernel};
use urtest::dgp::{gen_series, DgpSpec, NoiseKind, VARPHI_GRID};
use urtest::lpb::{lpb_prepare, lpb_test_prepared};
use urtest::mc::{run_cell, McConfig};
use urtest::result::Method;
use urtest::rng::substream;
use urtest::series::{fit_ar1, Series};
use urtest::Result;

/// Largest series the browser operations accept.
pub const MAX_N: usize = 400;

fn simulate(noise: &str, varphi: f64, n: usize, seed: u64) -> Result<Series> {
    if n > MAX_N {
        return Err(urtest::Error::InvalidParameter(format!(
            "n = {n} exceeds {MAX_N}"
        )));
    }
    let spec = DgpSpec::new(noise.parse()?, varphi, n);
    gen_series(&spec, &mut substream(seed, &[0xde30]))
}

fn histogram(x: &[f64], bins: usize) -> Value {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0usize; bins];
    for v in x {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    json!({ "lo": lo, "width": width, "counts": counts })
}

/// Simulates one series and runs the LPB test on it.
pub fn lpb_demo_json(
    noise: &str,
    varphi: f64,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<String> {
    let y = simulate(noise, varphi, n, seed)?;
    let state = lpb_prepare(&y, BandwidthRule::default(), Kernel::Trapezoid)?;
    let r = lpb_test_prepared(&state, replicates.max(1), 0.05, seed)?;
    let run = r.bootstrap.as_ref().expect("bootstrap test");
    Ok(json!({
        "series": y.values(),
        "statistic": r.statistic,
        "p_value": r.p_value,
        "reject": r.reject,
        "phi_hat": state.fit.phi_hat,
        "bandwidth": state.sigma.bandwidth,
        "sigma_star_sq": state.sigma.sigma_star_sq,
        "floored_count": state.sigma.floored_count,
        "t_star": histogram(&run.t_reps, 30),
    })
    .to_string())
}

/// The covariance estimate behind the test: matrix, eigenvalues before and
/// after flooring, and the floor. `bandwidth = 0` selects it adaptively.
pub fn sigma_hat_json(
    noise: &str,
    varphi: f64,
    n: usize,
    seed: u64,
    bandwidth: usize,
) -> Result<String> {
    let y = simulate(noise, varphi, n, seed)?;
    let fit = fit_ar1(&y)?;
    let acov = sample_autocov(&fit.residuals, fit.residuals.len() - 1)?;
    let l = match bandwidth {
        0 => select_bandwidth(&acov, BandwidthRule::default())?,
        l => l,
    };
    let s = &build_sigma_hat(&acov, l, Kernel::Trapezoid)?;
    let dim = s.dim();
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| s.matrix[(i, j)]).collect())
        .collect();
    let mut raw: Vec<f64> = s
        .tapered
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    raw.sort_by(f64::total_cmp);
    Ok(json!({
        "dim": dim,
        "bandwidth": s.bandwidth,
        "floor": s.floor_value,
        "floored_count": s.floored_count,
        "sigma_star_sq": s.sigma_star_sq,
        "matrix": rows,
        "eigen_raw": raw,
        "eigen_floored": s.eigenvalues,
    })
    .to_string())
}

/// Rejection rates of the bootstrap PP tests over the varphi grid.
pub fn rejection_curve_json(
    noise: &str,
    n: usize,
    reps: usize,
    replicates: usize,
    seed: u64,
) -> Result<String> {
    let noise: NoiseKind = noise.parse()?;
    if n > MAX_N {
        return Err(urtest::Error::InvalidParameter(format!(
            "n = {n} exceeds {MAX_N}"
        )));
    }
    let cfg = McConfig {
        tests: vec![Method::LpbPp, Method::CbbPp],
        noises: vec![noise],
        n,
        reps: reps.max(1),
        b: replicates.max(1),
        master_seed: seed,
        parallelism: 1,
        ..McConfig::default()
    };
    cfg.validate()?;
    let mut curves = serde_json::Map::new();
    for &m in &cfg.tests {
        let rates: Vec<f64> = VARPHI_GRID
            .iter()
            .map(|&v| run_cell(m, noise, v, &cfg, None).map(|c| c.rate()))
            .collect::<Result<_>>()?;
        curves.insert(m.label().to_string(), json!(rates));
    }
    Ok(json!({ "varphi": VARPHI_GRID, "rates": curves }).to_string())
}

fn to_js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn lpb_demo(
    noise: &str,
    varphi: f64,
    n: usize,
    replicates: usize,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_js(lpb_demo_json(noise, varphi, n, replicates, seed.into()))
}

#[wasm_bindgen]
pub fn sigma_hat(
    noise: &str,
    varphi: f64,
    n: usize,
    seed: u32,
    bandwidth: usize,
) -> std::result::Result<String, JsError> {
    to_js(sigma_hat_json(noise, varphi, n, seed.into(), bandwidth))
}

#[wasm_bindgen]
pub fn rejection_curve(
    noise: &str,
    n: usize,
    reps: usize,
    replicates: usize,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_js(rejection_curve_json(
        noise,
        n,
        reps,
        replicates,
        seed.into(),
    ))
}
