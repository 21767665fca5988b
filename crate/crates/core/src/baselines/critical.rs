//! Simulated quantiles of the no-constant Dickey-Fuller t statistic.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::series::{fit_ar1, Series};

pub const MIN_PATHS: usize = 10_000;
pub const DEFAULT_PATHS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0x00df_c417;
pub const DEFAULT_SIZES: [f64; 4] = [0.01, 0.025, 0.05, 0.10];

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValueTable {
    pub n: usize,
    pub paths: usize,
    pub seed: u64,
    /// `(size, quantile)` sorted by size.
    pub entries: Vec<(f64, f64)>,
}

fn check_sizes(sizes: &[f64]) -> Result<()> {
    match sizes.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
        Some(s) => Err(Error::InvalidParameter(format!("size {s} outside (0, 1)"))),
        None => Ok(()),
    }
}

/// DF t statistics of `paths` Gaussian random walks `y_1..y_n` with `y_0 = 0`.
fn simulate_statistics(n: usize, paths: usize, seed: u64) -> Result<Vec<f64>> {
    let mut stats = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = substream(seed, &[p as u64]);
            let mut acc = 0.0;
            let y: Vec<f64> = (0..n)
                .map(|_| {
                    acc += rng.sample::<f64, _>(StandardNormal);
                    acc
                })
                .collect();
            Ok(fit_ar1(&Series::new(y)?)?.t_stat)
        })
        .collect::<Result<Vec<f64>>>()?;
    stats.sort_by(f64::total_cmp);
    Ok(stats)
}

/// Empirical quantile `sorted[ceil(size * len) - 1]`.
fn empirical_quantile(sorted: &[f64], size: f64) -> f64 {
    let k = ((size * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

impl CriticalValueTable {
    pub fn simulate(n: usize, paths: usize, seed: u64, sizes: &[f64]) -> Result<Self> {
        if paths < MIN_PATHS {
            return Err(Error::InvalidParameter(format!(
                "paths = {paths} is below the minimum of {MIN_PATHS}"
            )));
        }
        if n < 3 {
            return Err(Error::TooShort {
                required: 3,
                actual: n,
            });
        }
        check_sizes(sizes)?;
        let stats = simulate_statistics(n, paths, seed)?;
        let mut entries: Vec<(f64, f64)> = sizes
            .iter()
            .map(|&s| (s, empirical_quantile(&stats, s)))
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        entries.dedup_by(|a, b| a.0 == b.0);
        Ok(Self {
            n,
            paths,
            seed,
            entries,
        })
    }

    pub fn quantile(&self, size: f64) -> Result<f64> {
        self.entries
            .iter()
            .find(|(s, _)| *s == size)
            .map(|(_, q)| *q)
            .ok_or(Error::MissingCriticalValue(size))
    }

    pub fn covers(&self, sizes: &[f64]) -> bool {
        sizes.iter().all(|s| self.quantile(*s).is_ok())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# df-critical-values n={} paths={} seed={}\nsize,quantile\n",
            self.n, self.paths, self.seed
        );
        for (s, q) in &self.entries {
            let _ = writeln!(out, "{s},{q}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = lines
            .next()
            .map(|(_, l)| l)
            .and_then(|l| l.strip_prefix("# df-critical-values "))
            .ok_or_else(|| Error::Parse("line 1: missing critical-value header".into()))?;
        let (mut n, mut paths, mut seed) = (None, None, None);
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line 1: malformed field '{field}'")))?;
            let bad = || Error::Parse(format!("line 1: bad value for {key}"));
            match key {
                "n" => n = Some(value.parse().map_err(|_| bad())?),
                "paths" => paths = Some(value.parse().map_err(|_| bad())?),
                "seed" => seed = Some(value.parse().map_err(|_| bad())?),
                _ => return Err(Error::Parse(format!("line 1: unknown field '{key}'"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("line 1: missing {k}"));
        let mut entries = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line == "size,quantile" {
                continue;
            }
            let bad = || Error::Parse(format!("line {}: expected 'size,quantile'", i + 1));
            let (s, q) = line.split_once(',').ok_or_else(bad)?;
            entries.push((
                s.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ));
        }
        Ok(Self {
            n: n.ok_or_else(|| missing("n"))?,
            paths: paths.ok_or_else(|| missing("paths"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            entries,
        })
    }

    /// Reads a cached table at `path`, regenerating and rewriting it when it
    /// is absent, unreadable, or was built with different parameters.
    pub fn load_or_create(
        path: &Path,
        n: usize,
        paths: usize,
        seed: u64,
        sizes: &[f64],
    ) -> Result<Self> {
        if let Ok(text) = fs::read_to_string(path) {
            if let Ok(table) = Self::from_text(&text) {
                if table.n == n && table.paths == paths && table.seed == seed && table.covers(sizes)
                {
                    return Ok(table);
                }
            }
        }
        let table = Self::simulate(n, paths, seed, sizes)?;
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, table.to_text())?;
        Ok(table)
    }
}

pub fn df_critical_value(size: f64, n: usize, paths: usize, seed: u64) -> Result<f64> {
    CriticalValueTable::simulate(n, paths, seed, &[size])?.quantile(size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_percent_point() {
        let q = df_critical_value(0.05, 100, 100_000, 11).unwrap();
        assert!((-2.00..=-1.90).contains(&q), "{q}");
    }

    /// Median from sums of a walk driven by a separately seeded generator,
    /// `t = sum y_{t-1} dy_t / (s sqrt(sum y_{t-1}^2))`.
    fn reference_median(n: usize, paths: usize) -> f64 {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(0x0dd);
        let mut t: Vec<f64> = (0..paths)
            .map(|_| {
                let e: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let mut y = 0.0;
                let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
                for (i, de) in e.iter().enumerate() {
                    if i > 0 {
                        sxy += y * de;
                        sxx += y * y;
                        syy += de * de;
                    }
                    y += de;
                }
                let b = sxy / sxx;
                let s2 = (syy - b * sxy) / (n as f64 - 2.0);
                b / (s2 / sxx).sqrt()
            })
            .collect();
        t.sort_by(f64::total_cmp);
        t[paths / 2]
    }

    #[test]
    fn median_matches_reference() {
        let q = df_critical_value(0.5, 100, 40_000, 12).unwrap();
        let want = reference_median(100, 40_000);
        assert!((q - want).abs() < 0.05, "{q} vs {want}");
        assert!((-0.6..=-0.35).contains(&q), "{q}");
    }

    #[test]
    fn quantiles_are_monotone_and_reproducible() {
        let a = CriticalValueTable::simulate(50, 10_000, 5, &[0.10, 0.01, 0.05]).unwrap();
        let q: Vec<f64> = a.entries.iter().map(|e| e.1).collect();
        assert!(q[0] < q[1] && q[1] < q[2]);
        let b = CriticalValueTable::simulate(50, 10_000, 5, &[0.01, 0.05, 0.10]).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn too_few_paths_refused() {
        assert!(matches!(
            CriticalValueTable::simulate(100, 10, 1, &[0.05]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn missing_size_is_an_error() {
        let t = CriticalValueTable {
            n: 10,
            paths: 10_000,
            seed: 0,
            entries: vec![(0.05, -1.9)],
        };
        assert_eq!(t.quantile(0.10), Err(Error::MissingCriticalValue(0.10)));
    }

    #[test]
    fn text_round_trip() {
        let t = CriticalValueTable {
            n: 100,
            paths: 100_000,
            seed: 7,
            entries: vec![(0.01, -2.58123456789), (0.05, -1.9412)],
        };
        assert_eq!(CriticalValueTable::from_text(&t.to_text()).unwrap(), t);
        assert!(CriticalValueTable::from_text("size,quantile\n").is_err());
    }

    #[test]
    fn cache_is_reused_and_regenerated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cv").join("df_100.txt");
        let a = CriticalValueTable::load_or_create(&path, 100, 10_000, 1, &[0.05]).unwrap();
        let bytes = fs::read_to_string(&path).unwrap();
        let b = CriticalValueTable::load_or_create(&path, 100, 10_000, 1, &[0.05]).unwrap();
        assert_eq!(a, b);
        assert_eq!(bytes, fs::read_to_string(&path).unwrap());
        let c = CriticalValueTable::load_or_create(&path, 100, 10_000, 2, &[0.05]).unwrap();
        assert_eq!(c.seed, 2);
        assert!(fs::read_to_string(&path).unwrap().contains("seed=2"));
    }
}
