use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use urtest::acov::BandwidthRule;
use urtest::baselines::critical::{
    CriticalValueTable, DEFAULT_PATHS, DEFAULT_SEED, DEFAULT_SIZES, MIN_PATHS,
};
use urtest::mc::{self, McConfig, DEFAULT_MASTER_SEED};
use urtest::result::Method;
use urtest::series::Series;
use urtest::Error;

/// Unit-root tests for a single series, and the Monte Carlo size and power
/// study.
#[derive(Parser)]
#[command(name = "urtest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test one series for a unit root. Input: one number per line, `#` comments allowed.
    Test {
        /// Input file
        input: PathBuf,
        /// adf, arb-adf, fpp, lpb-pp or cbb-pp
        #[arg(long, default_value = "lpb-pp", value_parser = parse_method)]
        method: Method,
        /// Bootstrap replicates
        #[arg(long = "B", default_value_t = 500)]
        b: usize,
        /// Nominal size
        #[arg(long, default_value_t = 0.05)]
        size: f64,
        /// `adaptive` or `fixed:<exponent>`
        #[arg(long, default_value = "adaptive", value_parser = parse_bandwidth)]
        bandwidth: BandwidthRule,
        /// Bootstrap seed
        #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
    },
    /// Run a Monte Carlo study from a config file and write `<out>` (CSV) and `<out>.grid.txt`.
    Simulate {
        /// Study config (`key = value` lines)
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path
        #[arg(long, default_value = "table3.csv")]
        out: PathBuf,
        /// Draw separate series for each test instead of sharing them
        #[arg(long, default_value_t = false)]
        independent_streams: bool,
    },
    /// Simulate Dickey-Fuller critical values and write them as a cache file.
    Critvals {
        /// Series length
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Simulated random walks (at least 10000)
        #[arg(long, default_value_t = DEFAULT_PATHS)]
        paths: usize,
        /// Simulation seed
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Comma-separated sizes
        #[arg(long, default_value = "0.01,0.025,0.05,0.1", value_delimiter = ',')]
        sizes: Vec<f64>,
        /// Output path
        #[arg(long, default_value = "df_critical_values.txt")]
        out: PathBuf,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_bandwidth(s: &str) -> Result<BandwidthRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl fmt::Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EmptyInput
            | Error::TooShort { .. }
            | Error::DegenerateRegressor
            | Error::ZeroResidualVariance
            | Error::ZeroVariance
            | Error::InsufficientData(_)
            | Error::NotPositiveDefinite
            | Error::SingularFactor { .. }
            | Error::EigenFailure
            | Error::ReplicateFailure { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// One finite real per line; blank lines and `#` comments are skipped.
fn read_series(path: &Path) -> Result<Vec<f64>, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                return Err(Failure::usage(format!(
                    "{}: line {}: expected a finite number, found '{line}'",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(values)
}

fn cache_path(n: usize, paths: usize, seed: u64) -> PathBuf {
    let dir = std::env::var_os("URTEST_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("urtest-cache"));
    dir.join(format!("df_n{n}_paths{paths}_seed{seed}.txt"))
}

fn critical_values(n: usize, size: f64) -> Result<CriticalValueTable, Failure> {
    let mut sizes = DEFAULT_SIZES.to_vec();
    if !sizes.contains(&size) {
        sizes.push(size);
    }
    let path = cache_path(n, DEFAULT_PATHS, DEFAULT_SEED);
    Ok(CriticalValueTable::load_or_create(
        &path,
        n,
        DEFAULT_PATHS,
        DEFAULT_SEED,
        &sizes,
    )?)
}

fn cmd_test(
    input: &Path,
    method: Method,
    b: usize,
    size: f64,
    rule: BandwidthRule,
    seed: u64,
) -> Result<(), Failure> {
    if !(size > 0.0 && size < 1.0) {
        return Err(Failure::usage(format!("--size {size} outside (0, 1)")));
    }
    if b == 0 {
        return Err(Failure::usage("--B must be at least 1"));
    }
    let values = read_series(input)?;
    let y = Series::new(values)?;
    if y.len() < urtest::lpb::MIN_LENGTH {
        return Err(Error::TooShort {
            required: urtest::lpb::MIN_LENGTH,
            actual: y.len(),
        }
        .into());
    }
    let cv = if method.is_bootstrap() {
        None
    } else {
        Some(critical_values(y.len(), size)?)
    };
    let r = mc::run_method(method, &y, b, size, seed, rule, cv.as_ref())?;
    println!("method: {}", method.label());
    println!("n: {}", y.len());
    println!("statistic: {}", r.statistic);
    if let Some(p) = r.p_value {
        println!("p_value: {p}");
    }
    if let Some(c) = r.critical_value {
        println!("critical_value: {c}");
    }
    println!("size: {size}");
    if method.is_bootstrap() {
        println!("seed: {seed}");
    }
    for (k, v) in &r.nuisance {
        println!("{k}: {v}");
    }
    let decision = if r.reject {
        "reject unit root"
    } else {
        "do not reject unit root"
    };
    println!("decision: {decision}");
    println!("REJECT={}", u8::from(r.reject));
    Ok(())
}

fn cmd_simulate(config: &Path, out: &Path, independent: bool) -> Result<(), Failure> {
    let text = fs::read_to_string(config)
        .map_err(|e| Failure::usage(format!("{}: {e}", config.display())))?;
    let mut cfg =
        McConfig::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", config.display())))?;
    cfg.common_random_numbers = !independent;
    let cv = if cfg.tests.iter().any(|m| !m.is_bootstrap()) {
        Some(critical_values(cfg.n, cfg.size)?)
    } else {
        None
    };
    let started = std::time::Instant::now();
    let table = mc::run_table_with(&cfg, cv.as_ref())?;
    let (csv, grid) = mc::write_outputs(&table, &cfg, out)?;
    eprintln!(
        "{} cells, {} failed, {:.1}s; wrote {} and {}",
        table.cells.len(),
        table.errors.len(),
        started.elapsed().as_secs_f64(),
        csv.display(),
        grid.display()
    );
    print!("{}", table.to_grid(&cfg));
    if table.errors.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            message: table.errors.join("\n"),
        })
    }
}

fn cmd_critvals(
    n: usize,
    paths: usize,
    seed: u64,
    sizes: &[f64],
    out: &Path,
) -> Result<(), Failure> {
    if paths < MIN_PATHS {
        return Err(Failure::usage(format!(
            "--paths {paths} is below the minimum of {MIN_PATHS}"
        )));
    }
    let table = CriticalValueTable::simulate(n, paths, seed, sizes).map_err(Failure::usage)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Failure::usage)?;
    }
    let text = table.to_text();
    fs::write(out, &text).map_err(|e| Failure::usage(format!("{}: {e}", out.display())))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Test {
            input,
            method,
            b,
            size,
            bandwidth,
            seed,
        } => cmd_test(input, *method, *b, *size, *bandwidth, *seed),
        Command::Simulate {
            config,
            out,
            independent_streams,
        } => cmd_simulate(config, out, *independent_streams),
        Command::Critvals {
            n,
            paths,
            seed,
            sizes,
            out,
        } => cmd_critvals(*n, *paths, *seed, sizes, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("urtest: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
