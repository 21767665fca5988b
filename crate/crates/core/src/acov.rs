//! Sample autocovariances, the flat-top trapezoid taper, adaptive bandwidth
//! selection, and the eigenvalue-floored banded covariance matrix used to
//! whiten and re-color residuals.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Sample autocovariances `gamma[h] = n^-1 sum_{t>h} v_t v_{t-h}` for
/// `h = 0..=max_lag`, computed from a vector of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovSeq {
    pub gamma: Vec<f64>,
    pub n: usize,
}

impl AutocovSeq {
    /// Wraps precomputed autocovariances for a sample of size `n`.
    pub fn new(gamma: Vec<f64>, n: usize) -> Result<Self> {
        if gamma.is_empty() || n == 0 {
            return Err(Error::EmptyInput);
        }
        if gamma.len() > n {
            return Err(Error::InvalidParameter(format!(
                "{} lags exceed sample size {n}",
                gamma.len()
            )));
        }
        if !(gamma[0] >= 0.0) {
            return Err(Error::InvalidParameter(
                "gamma[0] must be non-negative".into(),
            ));
        }
        Ok(Self { gamma, n })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma[0]
    }

    /// Autocorrelation at lag `h`; lags past `n - 1` are zero.
    fn rho(&self, h: usize) -> Result<f64> {
        if h >= self.n {
            return Ok(0.0);
        }
        match self.gamma.get(h) {
            Some(g) => Ok(g / self.gamma[0]),
            None => Err(Error::InsufficientLags {
                required: h + 1,
                available: self.gamma.len(),
            }),
        }
    }
}

/// Raw (uncentered) autocovariances of `v`. Centering is the caller's job.
pub fn sample_autocov(v: &[f64], max_lag: usize) -> Result<AutocovSeq> {
    let n = v.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if max_lag >= n {
        return Err(Error::InvalidParameter(format!(
            "max_lag {max_lag} must be below length {n}"
        )));
    }
    let gamma = (0..=max_lag)
        .map(|h| v[h..].iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect();
    Ok(AutocovSeq { gamma, n })
}

/// Flat-top taper. Only the trapezoid shape is provided: weight 1 on
/// `|x| <= 1`, `2 - |x|` on `1 < |x| <= 2`, zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    #[default]
    Trapezoid,
}

impl Kernel {
    /// Support cutoff `c_kappa`.
    pub fn cutoff(&self) -> f64 {
        match self {
            Kernel::Trapezoid => 2.0,
        }
    }

    pub fn weight(&self, x: f64) -> f64 {
        let a = x.abs();
        match self {
            Kernel::Trapezoid => {
                if a <= 1.0 {
                    1.0
                } else if a <= 2.0 {
                    2.0 - a
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn kernel_weight(x: f64, k: Kernel) -> f64 {
    k.weight(x)
}

/// Number of consecutive small autocorrelations required by the adaptive rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunLength {
    /// `max(5, ceil(sqrt(log10 n)))`
    Default,
    Constant(usize),
}

impl RunLength {
    pub fn at(&self, n: usize) -> usize {
        match *self {
            RunLength::Default => 5.max(((n as f64).log10().max(0.0)).sqrt().ceil() as usize),
            RunLength::Constant(k) => k.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// Smallest `l` followed by `K_n` autocorrelations all below
    /// `c * sqrt(log n / n)`, capped at `n / 4`.
    Adaptive { c: f64, run: RunLength },
    /// `l = ceil(n^exponent)`.
    Fixed { exponent: f64 },
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule::Adaptive {
            c: 2.0,
            run: RunLength::Default,
        }
    }
}

impl std::str::FromStr for BandwidthRule {
    type Err = Error;

    /// `adaptive` or `fixed:<exponent>` with the exponent in `(0, 1)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("adaptive") {
            return Ok(BandwidthRule::default());
        }
        let bad = || {
            Error::Parse(format!(
                "bandwidth '{s}': expected 'adaptive' or 'fixed:<exponent>'"
            ))
        };
        let exp: f64 = s
            .strip_prefix("fixed:")
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?;
        if !(exp > 0.0 && exp < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth exponent {exp} outside (0, 1)"
            )));
        }
        Ok(BandwidthRule::Fixed { exponent: exp })
    }
}

pub fn select_bandwidth(acov: &AutocovSeq, rule: BandwidthRule) -> Result<usize> {
    let n = acov.n;
    match rule {
        BandwidthRule::Fixed { exponent } => Ok(((n as f64).powf(exponent).ceil() as usize).max(1)),
        BandwidthRule::Adaptive { c, run } => {
            if n < 8 {
                return Err(Error::TooShort {
                    required: 8,
                    actual: n,
                });
            }
            if acov.gamma0() <= 0.0 {
                return Err(Error::ZeroVariance);
            }
            let nf = n as f64;
            let threshold = c * (nf.ln() / nf).sqrt();
            let k_n = run.at(n);
            let cap = (n / 4).max(1);
            for l in 1..=cap {
                let mut quiet = true;
                for k in 1..=k_n {
                    if acov.rho(l + k)?.abs() >= threshold {
                        quiet = false;
                        break;
                    }
                }
                if quiet {
                    return Ok(l);
                }
            }
            Ok(cap)
        }
    }
}

/// The eigenvalue-floored tapered covariance estimate with its Cholesky
/// factor.
#[derive(Debug, Clone)]
pub struct SigmaHat {
    /// Tapered matrix before flooring.
    pub tapered: DMatrix<f64>,
    pub matrix: DMatrix<f64>,
    /// Lower-triangular `L` with `L L' = matrix`.
    pub chol: DMatrix<f64>,
    /// Eigenvalues of `matrix` (after flooring), ascending.
    pub eigenvalues: Vec<f64>,
    pub bandwidth: usize,
    pub floor_value: f64,
    pub floored_count: usize,
    /// `n^-1 1' matrix 1`: variance of the scaled bootstrap partial sum.
    pub sigma_star_sq: f64,
}

pub fn build_sigma_hat(acov: &AutocovSeq, l: usize, kernel: Kernel) -> Result<SigmaHat> {
    if l == 0 {
        return Err(Error::InvalidParameter(
            "bandwidth must be at least 1".into(),
        ));
    }
    let g0 = acov.gamma0();
    if g0 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let n = acov.n;
    let mut band = vec![0.0; n];
    for (h, b) in band.iter_mut().enumerate() {
        let w = kernel.weight(h as f64 / l as f64);
        if w != 0.0 {
            let g = acov.gamma.get(h).ok_or(Error::InsufficientLags {
                required: h + 1,
                available: acov.gamma.len(),
            })?;
            *b = w * g;
        }
    }
    let tapered = DMatrix::from_fn(n, n, |i, j| band[i.abs_diff(j)]);

    let eig =
        SymmetricEigen::try_new(tapered.clone(), f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let floor_value = g0 / n as f64;
    let mut floored_count = 0;
    let floored: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&d| {
            if d < floor_value {
                floored_count += 1;
                floor_value
            } else {
                d
            }
        })
        .collect();

    // Without flooring T D T' is the tapered matrix itself.
    let matrix = if floored_count == 0 {
        tapered.clone()
    } else {
        let t = &eig.eigenvectors;
        let mut scaled = t.clone();
        for (j, d) in floored.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*d);
        }
        let m = &scaled * t.transpose();
        (&m + m.transpose()) * 0.5
    };

    let mut eigenvalues = floored;
    eigenvalues.sort_by(f64::total_cmp);
    let mut sigma = assemble(tapered, matrix, eigenvalues)?;
    sigma.bandwidth = l;
    sigma.floor_value = floor_value;
    sigma.floored_count = floored_count;
    Ok(sigma)
}

fn assemble(
    tapered: DMatrix<f64>,
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
) -> Result<SigmaHat> {
    let n = matrix.nrows();
    let chol = matrix
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?
        .unpack();
    let sigma_star_sq = matrix.sum() / n as f64;
    Ok(SigmaHat {
        tapered,
        matrix,
        chol,
        eigenvalues,
        bandwidth: 0,
        floor_value: 0.0,
        floored_count: 0,
        sigma_star_sq,
    })
}

impl SigmaHat {
    /// Wraps an arbitrary symmetric positive definite matrix, skipping the
    /// taper and the floor. Useful for fixed-covariance experiments.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter(
                "matrix must be square and non-empty".into(),
            ));
        }
        let eig =
            SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        assemble(matrix.clone(), matrix, eigenvalues)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_matrix(DMatrix::identity(n, n)).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Solves `L e = v` by forward substitution.
    pub fn whiten(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: v.len(),
            });
        }
        let l = self.chol.as_slice();
        let mut out = v.to_vec();
        for j in 0..n {
            let d = l[j * n + j];
            if !(d > 0.0) {
                return Err(Error::SingularFactor { index: j });
            }
            out[j] /= d;
            let e = out[j];
            let col = &l[j * n..(j + 1) * n];
            for i in j + 1..n {
                out[i] -= col[i] * e;
            }
        }
        Ok(out)
    }

    /// Returns `L eps`.
    pub fn color(&self, eps: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if eps.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: eps.len(),
            });
        }
        let l = self.chol.as_slice();
        let mut out = vec![0.0; n];
        for (j, &e) in eps.iter().enumerate() {
            let col = &l[j * n..(j + 1) * n];
            for i in j..n {
                out[i] += col[i] * e;
            }
        }
        Ok(out)
    }
}

pub fn whiten(s: &SigmaHat, v: &[f64]) -> Result<Vec<f64>> {
    s.whiten(v)
}

pub fn color(s: &SigmaHat, eps: &[f64]) -> Result<Vec<f64>> {
    s.color(eps)
}
