//! Monte Carlo size and power study over (test, noise, varphi) cells.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::acov::BandwidthRule;
use crate::baselines::critical::{CriticalValueTable, DEFAULT_PATHS, DEFAULT_SEED};
use crate::baselines::{adf_test, arb_adf_test, cbb_pp_test, default_k_max, fpp_test};
use crate::dgp::{gen_series, DgpSpec, NoiseKind, DEFAULT_BURN_IN, VARPHI_GRID};
use crate::error::{Error, Result};
use crate::lpb::{lpb_test, MIN_LENGTH};
use crate::result::{Method, TestResult};
use crate::rng::{derive_seed, stable_hash, substream};
use crate::series::Series;

pub const DEFAULT_MASTER_SEED: u64 = 20_190_601;
const SERIES_TAG: u64 = 0x5e71e5;
const TEST_TAG: u64 = 0x7e57;

/// Failed reps tolerated per cell, as a fraction of reps.
pub const FAILURE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub tests: Vec<Method>,
    pub noises: Vec<NoiseKind>,
    pub varphis: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub b: usize,
    pub size: f64,
    pub master_seed: u64,
    pub parallelism: usize,
    /// Share one simulated series per (noise, varphi, rep) across tests.
    pub common_random_numbers: bool,
    pub burn_in: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            tests: Method::ALL.to_vec(),
            noises: NoiseKind::ALL.to_vec(),
            varphis: VARPHI_GRID.to_vec(),
            n: 100,
            reps: 600,
            b: 500,
            size: 0.05,
            master_seed: DEFAULT_MASTER_SEED,
            parallelism: std::thread::available_parallelism().map_or(1, |p| p.get()),
            common_random_numbers: true,
            burn_in: DEFAULT_BURN_IN,
        }
    }
}

fn parse_list<T>(key: &str, value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).map_err(|e| Error::Parse(format!("key '{key}': {e}"))))
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("key '{key}': cannot parse '{}'", value.trim())))
}

impl McConfig {
    pub const KEYS: [&'static str; 9] = [
        "tests",
        "noises",
        "varphis",
        "n",
        "reps",
        "B",
        "size",
        "master_seed",
        "parallelism",
    ];

    /// Parses `key = value` lines over the defaults. Blank lines and `#`
    /// comments are skipped; lists are comma-separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", i + 1)))?;
            let key = key.trim();
            match key {
                "tests" => cfg.tests = parse_list(key, value, str::parse)?,
                "noises" => cfg.noises = parse_list(key, value, str::parse)?,
                "varphis" => cfg.varphis = parse_list(key, value, |s| parse_num(key, s))?,
                "n" => cfg.n = parse_num(key, value)?,
                "reps" => cfg.reps = parse_num(key, value)?,
                "B" => cfg.b = parse_num(key, value)?,
                "size" => cfg.size = parse_num(key, value)?,
                "master_seed" => cfg.master_seed = parse_num(key, value)?,
                "parallelism" => cfg.parallelism = parse_num(key, value)?,
                _ => return Err(Error::Parse(format!("line {}: unknown key '{key}'", i + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.tests.is_empty() || self.noises.is_empty() || self.varphis.is_empty() {
            return bad("tests, noises and varphis must be non-empty".into());
        }
        if self.n < MIN_LENGTH {
            return bad(format!("n = {} is below {MIN_LENGTH}", self.n));
        }
        if self.reps == 0 || self.b == 0 || self.parallelism == 0 {
            return bad("reps, B and parallelism must be positive".into());
        }
        if !(self.size > 0.0 && self.size < 1.0) {
            return bad(format!("size = {} outside (0, 1)", self.size));
        }
        if let Some(v) = self.varphis.iter().find(|v| !(**v <= 0.0 && **v >= -1.0)) {
            return bad(format!("varphi = {v} outside [-1, 0]"));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let join = |it: Vec<String>| it.join(",");
        format!(
            "tests = {}\nnoises = {}\nvarphis = {}\nn = {}\nreps = {}\nB = {}\nsize = {}\nmaster_seed = {}\nparallelism = {}\n",
            join(self.tests.iter().map(|m| m.name().to_string()).collect()),
            join(self.noises.iter().map(|k| k.name().to_string()).collect()),
            join(self.varphis.iter().map(|v| v.to_string()).collect()),
            self.n,
            self.reps,
            self.b,
            self.size,
            self.master_seed,
            self.parallelism
        )
    }

    fn needs_critical_values(&self) -> bool {
        self.tests.iter().any(|m| !m.is_bootstrap())
    }
}

/// Stable id of a (method, noise, varphi) cell.
pub fn cell_id(method: Method, noise: NoiseKind, varphi: f64) -> u64 {
    stable_hash(format!("{}|{}|{}", method.name(), noise.name(), varphi).as_bytes())
}

fn series_seed_path(
    cfg: &McConfig,
    method: Method,
    noise: NoiseKind,
    varphi: f64,
    rep: usize,
) -> [u64; 3] {
    if cfg.common_random_numbers {
        let key = stable_hash(format!("{}|{}", noise.name(), varphi).as_bytes());
        [SERIES_TAG, key, rep as u64]
    } else {
        [cell_id(method, noise, varphi), rep as u64, SERIES_TAG]
    }
}

/// Series for one rep of a cell.
pub fn rep_series(
    cfg: &McConfig,
    method: Method,
    noise: NoiseKind,
    varphi: f64,
    rep: usize,
) -> Result<Series> {
    let spec = DgpSpec {
        noise,
        varphi,
        n: cfg.n,
        burn_in: cfg.burn_in,
    };
    gen_series(
        &spec,
        &mut substream(
            cfg.master_seed,
            &series_seed_path(cfg, method, noise, varphi, rep),
        ),
    )
}

/// Bootstrap seed for one rep of a cell.
pub fn rep_test_seed(
    cfg: &McConfig,
    method: Method,
    noise: NoiseKind,
    varphi: f64,
    rep: usize,
) -> u64 {
    derive_seed(
        cfg.master_seed,
        &[cell_id(method, noise, varphi), rep as u64, TEST_TAG],
    )
}

/// Runs one test with the study's default lag caps. `rule` applies to the
/// flat-top methods.
pub fn run_method(
    method: Method,
    y: &Series,
    replicates: usize,
    size: f64,
    seed: u64,
    rule: BandwidthRule,
    cv: Option<&CriticalValueTable>,
) -> Result<TestResult> {
    let need_cv = || cv.ok_or(Error::MissingCriticalValue(size));
    match method {
        Method::Adf => adf_test(y, default_k_max(y.len()), size, need_cv()?),
        Method::ArbAdf => arb_adf_test(y, replicates, size, default_k_max(y.len()), seed),
        Method::Fpp => fpp_test(y, size, rule, need_cv()?),
        Method::LpbPp => lpb_test(y, replicates, size, rule, seed),
        Method::CbbPp => cbb_pp_test(y, replicates, size, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCell {
    pub method: Method,
    pub noise: NoiseKind,
    pub varphi: f64,
    pub rejections: usize,
    pub reps: usize,
    pub seed_root: u64,
}

impl McCell {
    pub fn rate(&self) -> f64 {
        self.rejections as f64 / self.reps as f64
    }
}

/// Runs `reps` replications of `test(series, seed) -> reject` for one cell.
pub fn run_cell_with<F>(
    method: Method,
    noise: NoiseKind,
    varphi: f64,
    cfg: &McConfig,
    test: F,
) -> Result<McCell>
where
    F: Fn(&Series, u64) -> Result<bool> + Sync,
{
    let outcomes: Vec<Result<bool>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let y = rep_series(cfg, method, noise, varphi, rep)?;
            test(&y, rep_test_seed(cfg, method, noise, varphi, rep))
        })
        .collect();
    let mut rejections = 0;
    let mut completed = 0;
    let mut last = None;
    for o in outcomes {
        match o {
            Ok(r) => {
                completed += 1;
                rejections += usize::from(r);
            }
            Err(e) => last = Some(e),
        }
    }
    let failures = cfg.reps - completed;
    if failures as f64 > FAILURE_TOLERANCE * cfg.reps as f64 || completed == 0 {
        return Err(Error::CellFailure {
            cell: format!("{}/{}/{}", method.name(), noise.name(), varphi),
            failures,
            reps: cfg.reps,
            last: last.map_or_else(String::new, |e| e.to_string()),
        });
    }
    Ok(McCell {
        method,
        noise,
        varphi,
        rejections,
        reps: completed,
        seed_root: derive_seed(cfg.master_seed, &[cell_id(method, noise, varphi)]),
    })
}

pub fn run_cell(
    method: Method,
    noise: NoiseKind,
    varphi: f64,
    cfg: &McConfig,
    cv: Option<&CriticalValueTable>,
) -> Result<McCell> {
    run_cell_with(method, noise, varphi, cfg, |y, seed| {
        Ok(run_method(
            method,
            y,
            cfg.b,
            cfg.size,
            seed,
            BandwidthRule::default(),
            cv,
        )?
        .reject)
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct McTable {
    pub cells: Vec<McCell>,
    /// Cells that aborted, with the reason.
    pub errors: Vec<String>,
}

pub const CSV_HEADER: &str = "method,noise,varphi,rate,reps,seed_root";

impl McTable {
    pub fn get(&self, method: Method, noise: NoiseKind, varphi: f64) -> Option<&McCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.noise == noise && c.varphi == varphi)
    }

    pub fn rate(&self, method: Method, noise: NoiseKind, varphi: f64) -> Option<f64> {
        self.get(method, noise, varphi).map(McCell::rate)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.method.name(),
                c.noise.name(),
                c.varphi,
                c.rate(),
                c.reps,
                c.seed_root
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => {
                return Err(Error::Parse(format!(
                    "line 1: expected header '{CSV_HEADER}'"
                )))
            }
        }
        let mut cells = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", i + 1));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(bad("field count"));
            }
            let rate: f64 = f[3].parse().map_err(|_| bad("rate"))?;
            let reps: usize = f[4].parse().map_err(|_| bad("reps"))?;
            cells.push(McCell {
                method: f[0].parse().map_err(|_| bad("method"))?,
                noise: f[1].parse().map_err(|_| bad("noise"))?,
                varphi: f[2].parse().map_err(|_| bad("varphi"))?,
                rejections: (rate * reps as f64).round() as usize,
                reps,
                seed_root: f[5].parse().map_err(|_| bad("seed_root"))?,
            });
        }
        Ok(Self {
            cells,
            errors: Vec::new(),
        })
    }

    /// Rates laid out with one row per (method, varphi) and one column per
    /// noise.
    pub fn to_grid(&self, cfg: &McConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# n={} reps={} B={} size={} master_seed={}",
            cfg.n, cfg.reps, cfg.b, cfg.size, cfg.master_seed
        );
        let _ = write!(out, "{:<8} {:>6}", "method", "varphi");
        for k in &cfg.noises {
            let _ = write!(out, " {:>7}", k.name());
        }
        out.push('\n');
        for &m in &cfg.tests {
            for &v in &cfg.varphis {
                let _ = write!(out, "{:<8} {:>6.2}", m.label(), v);
                for &k in &cfg.noises {
                    match self.rate(m, k, v) {
                        Some(r) => {
                            let _ = write!(out, " {r:>7.3}");
                        }
                        None => {
                            let _ = write!(out, " {:>7}", "-");
                        }
                    }
                }
                out.push('\n');
            }
        }
        for e in &self.errors {
            let _ = writeln!(out, "# failed: {e}");
        }
        out
    }
}

/// Runs every cell on a pool of `cfg.parallelism` threads. Cells that abort
/// are reported in `errors` and omitted from `cells`.
pub fn run_table_with(cfg: &McConfig, cv: Option<&CriticalValueTable>) -> Result<McTable> {
    cfg.validate()?;
    let work = || {
        let keys: Vec<(Method, NoiseKind, f64)> = cfg
            .tests
            .iter()
            .flat_map(|&m| {
                cfg.noises
                    .iter()
                    .flat_map(move |&k| cfg.varphis.iter().map(move |&v| (m, k, v)))
            })
            .collect();
        let results: Vec<Result<McCell>> = keys
            .par_iter()
            .map(|&(m, k, v)| run_cell(m, k, v, cfg, cv))
            .collect();
        let mut table = McTable::default();
        for r in results {
            match r {
                Ok(c) => table.cells.push(c),
                Err(e) => table.errors.push(e.to_string()),
            }
        }
        table
    };
    match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
    {
        Ok(pool) => Ok(pool.install(work)),
        Err(_) => Ok(work()),
    }
}

/// Like [`run_table_with`], simulating critical values first when a
/// critical-value test is requested.
pub fn run_table(cfg: &McConfig) -> Result<McTable> {
    let cv = if cfg.needs_critical_values() {
        Some(CriticalValueTable::simulate(
            cfg.n,
            DEFAULT_PATHS,
            DEFAULT_SEED,
            &[cfg.size],
        )?)
    } else {
        None
    };
    run_table_with(cfg, cv.as_ref())
}

/// Writes `<path>` as CSV and `<path>.grid.txt` as the human-readable grid.
pub fn write_outputs(table: &McTable, cfg: &McConfig, path: &Path) -> Result<(PathBuf, PathBuf)> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, table.to_csv())?;
    let mut grid = path.as_os_str().to_owned();
    grid.push(".grid.txt");
    let grid = PathBuf::from(grid);
    fs::write(&grid, table.to_grid(cfg))?;
    Ok((path.to_path_buf(), grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> McConfig {
        McConfig {
            tests: vec![Method::LpbPp, Method::CbbPp],
            noises: vec![NoiseKind::Iid, NoiseKind::MaNeg],
            varphis: vec![0.0, -0.1],
            n: 40,
            reps: 12,
            b: 19,
            parallelism: 1,
            ..McConfig::default()
        }
    }

    #[test]
    fn defaults_match_protocol() {
        let c = McConfig::default();
        assert_eq!((c.n, c.reps, c.b, c.size), (100, 600, 500, 0.05));
        assert_eq!(c.tests.len() * c.noises.len() * c.varphis.len(), 180);
    }

    #[test]
    fn always_reject_stub() {
        let cell = run_cell_with(Method::LpbPp, NoiseKind::Iid, 0.0, &small(), |_, _| {
            Ok(true)
        })
        .unwrap();
        assert_eq!(cell.rate(), 1.0);
        assert_eq!(cell.reps, 12);
    }

    #[test]
    fn failures_within_tolerance_are_dropped() {
        let cfg = McConfig {
            reps: 200,
            ..small()
        };
        let bad_seed = rep_test_seed(&cfg, Method::LpbPp, NoiseKind::Iid, 0.0, 3);
        let one_fails = |_: &Series, seed: u64| {
            if seed == bad_seed {
                Err(Error::DegenerateRegressor)
            } else {
                Ok(true)
            }
        };
        let cell = run_cell_with(Method::LpbPp, NoiseKind::Iid, 0.0, &cfg, one_fails).unwrap();
        assert_eq!((cell.rejections, cell.reps), (199, 199));
    }

    #[test]
    fn failures_beyond_tolerance_abort() {
        let cfg = McConfig {
            reps: 200,
            ..small()
        };
        let bad: Vec<u64> = (0..3)
            .map(|r| rep_test_seed(&cfg, Method::LpbPp, NoiseKind::Iid, 0.0, r))
            .collect();
        let three_fail = |_: &Series, seed: u64| {
            if bad.contains(&seed) {
                Err(Error::DegenerateRegressor)
            } else {
                Ok(false)
            }
        };
        let r = run_cell_with(Method::LpbPp, NoiseKind::Iid, 0.0, &cfg, three_fail);
        assert!(matches!(
            r,
            Err(Error::CellFailure {
                failures: 3,
                reps: 200,
                ..
            })
        ));
    }

    #[test]
    fn common_series_across_tests() {
        let cfg = small();
        let a = rep_series(&cfg, Method::Adf, NoiseKind::Iid, 0.0, 3).unwrap();
        let b = rep_series(&cfg, Method::LpbPp, NoiseKind::Iid, 0.0, 3).unwrap();
        assert_eq!(a, b);
        let indep = McConfig {
            common_random_numbers: false,
            ..cfg
        };
        let c = rep_series(&indep, Method::Adf, NoiseKind::Iid, 0.0, 3).unwrap();
        let d = rep_series(&indep, Method::LpbPp, NoiseKind::Iid, 0.0, 3).unwrap();
        assert_ne!(c, d);
    }

    #[test]
    fn config_parse() {
        let cfg = McConfig::parse(
            "# smoke\ntests = lpb-pp, FPP\nnoises = iid,ma_neg\nvarphis = 0,-0.1\nn = 50\nreps = 20\nB = 50\nsize = 0.1\nmaster_seed = 9\nparallelism = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.tests, vec![Method::LpbPp, Method::Fpp]);
        assert_eq!(cfg.varphis, vec![0.0, -0.1]);
        assert_eq!(
            (cfg.n, cfg.reps, cfg.b, cfg.master_seed, cfg.parallelism),
            (50, 20, 50, 9, 2)
        );
        assert_eq!(McConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn config_errors_name_the_key() {
        let e = McConfig::parse("reps = 10\nbogus = 3\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("bogus"), "{e}");
        let e = McConfig::parse("tests = adf, kpss\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("tests") && e.contains("kpss"), "{e}");
        assert!(McConfig::parse("varphis = 0.2\n").is_err());
    }

    #[test]
    fn empty_table_csv_is_header_only() {
        let t = McTable::default();
        assert_eq!(t.to_csv(), format!("{CSV_HEADER}\n"));
        assert_eq!(McTable::from_csv(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn csv_round_trip() {
        let t = McTable {
            cells: vec![
                McCell {
                    method: Method::ArbAdf,
                    noise: NoiseKind::Arch,
                    varphi: -0.06,
                    rejections: 7,
                    reps: 600,
                    seed_root: u64::MAX,
                },
                McCell {
                    method: Method::Fpp,
                    noise: NoiseKind::MaNeg,
                    varphi: 0.0,
                    rejections: 163,
                    reps: 599,
                    seed_root: 1,
                },
            ],
            errors: Vec::new(),
        };
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(McTable::from_csv(&csv).unwrap(), t);
        assert!(McTable::from_csv("method,noise\n").is_err());
    }

    #[test]
    fn parallelism_invariance() {
        let one = run_table(&small()).unwrap();
        let four = run_table(&McConfig {
            parallelism: 4,
            ..small()
        })
        .unwrap();
        assert_eq!(one.cells.len(), 8);
        assert!(one.errors.is_empty());
        assert_eq!(one.to_csv(), four.to_csv());
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small();
        let t = McTable {
            cells: vec![McCell {
                method: Method::LpbPp,
                noise: NoiseKind::Iid,
                varphi: 0.0,
                rejections: 3,
                reps: 12,
                seed_root: 5,
            }],
            errors: vec![],
        };
        let (csv, grid) = write_outputs(&t, &cfg, &dir.path().join("out/table.csv")).unwrap();
        assert_eq!(
            McTable::from_csv(&fs::read_to_string(csv).unwrap()).unwrap(),
            t
        );
        let g = fs::read_to_string(grid).unwrap();
        assert!(g.contains("LPB-PP") && g.contains("0.250"));
    }
}
