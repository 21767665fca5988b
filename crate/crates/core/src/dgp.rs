//! Noise generators and the near-unit-root process builder.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::series::Series;

pub const DEFAULT_BURN_IN: usize = 200;
pub const VARPHI_GRID: [f64; 6] = [0.0, -0.02, -0.04, -0.06, -0.08, -0.10];

const ARCH_BASE: f64 = 1e-6;
const ARCH_SLOPE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseKind {
    /// `V_t = e_t`
    Iid,
    /// `V_t = e_t + 0.5 e_{t-1}`
    MaPos,
    /// `V_t = e_t - 0.5 e_{t-1}`
    MaNeg,
    /// `V_t = e_t + 0.5 V_{t-1}`
    ArPos,
    /// `V_t = e_t - 0.5 V_{t-1}`
    ArNeg,
    /// `V_t = s_t e_t`, `s_t^2 = 1e-6 + 0.25 V_{t-1}^2`
    Arch,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 6] = [
        NoiseKind::Iid,
        NoiseKind::MaPos,
        NoiseKind::MaNeg,
        NoiseKind::ArPos,
        NoiseKind::ArNeg,
        NoiseKind::Arch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Iid => "iid",
            NoiseKind::MaPos => "ma_pos",
            NoiseKind::MaNeg => "ma_neg",
            NoiseKind::ArPos => "ar_pos",
            NoiseKind::ArNeg => "ar_neg",
            NoiseKind::Arch => "arch",
        }
    }

    /// Number of extra pre-sample innovations consumed by [`apply_noise`].
    pub fn presample(self) -> usize {
        match self {
            NoiseKind::MaPos | NoiseKind::MaNeg => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown noise '{s}'")))
    }
}

/// Maps innovations to noise. Moving-average kinds treat `eps[0]` as the
/// pre-sample draw and return one value fewer; recursive kinds start from
/// `V_0 = 0`.
pub fn apply_noise(kind: NoiseKind, eps: &[f64]) -> Vec<f64> {
    let ar = |coef: f64| {
        let mut prev = 0.0;
        eps.iter()
            .map(|e| {
                prev = coef * prev + e;
                prev
            })
            .collect()
    };
    match kind {
        NoiseKind::Iid => eps.to_vec(),
        NoiseKind::MaPos => eps.windows(2).map(|w| w[1] + 0.5 * w[0]).collect(),
        NoiseKind::MaNeg => eps.windows(2).map(|w| w[1] - 0.5 * w[0]).collect(),
        NoiseKind::ArPos => ar(0.5),
        NoiseKind::ArNeg => ar(-0.5),
        NoiseKind::Arch => {
            let mut prev = 0.0f64;
            eps.iter()
                .map(|e| {
                    prev = (ARCH_BASE + ARCH_SLOPE * prev * prev).sqrt() * e;
                    prev
                })
                .collect()
        }
    }
}

/// `n` noise values after discarding `burn_in` leading values.
pub fn gen_noise<R: Rng + ?Sized>(
    kind: NoiseKind,
    n: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let eps: Vec<f64> = (0..n + burn_in + kind.presample())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let mut v = apply_noise(kind, &eps);
    Ok(v.split_off(burn_in))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpSpec {
    pub noise: NoiseKind,
    pub varphi: f64,
    pub n: usize,
    pub burn_in: usize,
}

impl DgpSpec {
    pub fn new(noise: NoiseKind, varphi: f64, n: usize) -> Self {
        Self {
            noise,
            varphi,
            n,
            burn_in: DEFAULT_BURN_IN,
        }
    }
}

/// Runs `X_t = (1 + varphi) X_{t-1} + V_t` from `X_0 = 0` over `v` and drops
/// the first `discard` values.
pub fn series_from_noise(varphi: f64, v: &[f64], discard: usize) -> Result<Series> {
    let rho = 1.0 + varphi;
    let mut x = 0.0;
    let path: Vec<f64> = v
        .iter()
        .map(|e| {
            x = rho * x + e;
            x
        })
        .skip(discard)
        .collect();
    Series::new(path)
}

/// Unit-root paths start at exactly zero; stationary alternatives run a
/// burn-in from zero first. The returned series carries no origin pair.
pub fn gen_series<R: Rng + ?Sized>(spec: &DgpSpec, rng: &mut R) -> Result<Series> {
    if !(spec.varphi <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "varphi = {} must be <= 0",
            spec.varphi
        )));
    }
    if spec.n < 2 {
        return Err(Error::TooShort {
            required: 2,
            actual: spec.n,
        });
    }
    if spec.varphi == 0.0 {
        let v = gen_noise(spec.noise, spec.n, spec.burn_in, rng)?;
        series_from_noise(0.0, &v, 0)
    } else {
        let v = gen_noise(spec.noise, spec.n + spec.burn_in, spec.burn_in, rng)?;
        series_from_noise(spec.varphi, &v, spec.burn_in)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn stubbed_innovations() {
        assert_eq!(apply_noise(NoiseKind::Iid, &[0.3, -0.7]), vec![0.3, -0.7]);
        assert_eq!(
            apply_noise(NoiseKind::MaPos, &[1.0, 1.0, -2.0]),
            vec![1.5, -1.5]
        );
        assert_eq!(
            apply_noise(NoiseKind::MaNeg, &[1.0, 1.0, -2.0]),
            vec![0.5, -2.5]
        );
        assert_eq!(apply_noise(NoiseKind::ArPos, &[1.0, 1.0]), vec![1.0, 1.5]);
        assert_eq!(apply_noise(NoiseKind::ArNeg, &[1.0, 1.0]), vec![1.0, 0.5]);
        let v = apply_noise(NoiseKind::Arch, &[2.0]);
        assert!((v[0] - 0.002).abs() < 1e-15);
    }

    #[test]
    fn generated_lengths() {
        for kind in NoiseKind::ALL {
            let v = gen_noise(kind, 17, 5, &mut substream(1, &[])).unwrap();
            assert_eq!(v.len(), 17);
        }
        assert!(gen_noise(NoiseKind::Iid, 0, 5, &mut substream(1, &[])).is_err());
    }

    #[test]
    fn names_round_trip() {
        for kind in NoiseKind::ALL {
            assert_eq!(kind.name().parse::<NoiseKind>().unwrap(), kind);
        }
        assert_eq!("MA-NEG".parse::<NoiseKind>().unwrap(), NoiseKind::MaNeg);
        assert!("garch".parse::<NoiseKind>().is_err());
    }

    #[test]
    fn pure_cumulation() {
        let s = series_from_noise(0.0, &[1.0, -1.0, 2.0], 0).unwrap();
        assert_eq!(s.values(), &[1.0, 0.0, 2.0]);
        assert!(!s.origin_at_zero());
    }

    #[test]
    fn no_memory_at_minus_one() {
        let v = [0.4, -1.2, 3.0, 0.1];
        assert_eq!(series_from_noise(-1.0, &v, 0).unwrap().values(), &v);
    }

    #[test]
    fn positive_varphi_refused() {
        let spec = DgpSpec::new(NoiseKind::Iid, 0.1, 50);
        assert!(gen_series(&spec, &mut substream(0, &[])).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = DgpSpec::new(NoiseKind::Arch, -0.04, 100);
        let a = gen_series(&spec, &mut substream(3, &[1])).unwrap();
        let b = gen_series(&spec, &mut substream(3, &[1])).unwrap();
        assert_eq!(a, b);
    }

    fn lag1_autocorr(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        let den: f64 = x.iter().map(|a| (a - m).powi(2)).sum();
        num / den
    }

    #[test]
    fn near_unit_root_persistence() {
        let spec = DgpSpec::new(NoiseKind::Iid, -0.02, 5000);
        let hits = (0..200)
            .filter(|&s| {
                let r = lag1_autocorr(gen_series(&spec, &mut substream(s, &[7])).unwrap().values());
                (0.96..=0.995).contains(&r)
            })
            .count();
        assert!(hits >= 180, "{hits}");
    }

    #[test]
    fn iid_moments() {
        let n = 100_000;
        let v = gen_noise(NoiseKind::Iid, n, 0, &mut substream(10, &[])).unwrap();
        let nf = n as f64;
        let mean = v.iter().sum::<f64>() / nf;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
        assert!(mean.abs() < 5.0 / nf.sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / nf).sqrt());
    }

    #[test]
    fn ma_neg_autocorrelation() {
        let v = gen_noise(NoiseKind::MaNeg, 100_000, 0, &mut substream(11, &[])).unwrap();
        assert!((lag1_autocorr(&v) + 0.4).abs() < 0.01);
    }

    #[test]
    fn arch_has_heavy_tails() {
        let v = gen_noise(NoiseKind::Arch, 100_000, 200, &mut substream(12, &[])).unwrap();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let m2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let m4 = v.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
        assert!(m4 / (m2 * m2) > 3.0);
    }
}
