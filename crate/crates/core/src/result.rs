use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The five unit-root tests compared in the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Adf,
    ArbAdf,
    Fpp,
    LpbPp,
    CbbPp,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Adf,
        Method::ArbAdf,
        Method::Fpp,
        Method::LpbPp,
        Method::CbbPp,
    ];

    /// Lower-case command-line name, e.g. `lpb-pp`.
    pub fn name(&self) -> &'static str {
        match self {
            Method::Adf => "adf",
            Method::ArbAdf => "arb-adf",
            Method::Fpp => "fpp",
            Method::LpbPp => "lpb-pp",
            Method::CbbPp => "cbb-pp",
        }
    }

    /// Table label, e.g. `LPB-PP`.
    pub fn label(&self) -> &'static str {
        match self {
            Method::Adf => "ADF",
            Method::ArbAdf => "ARB-ADF",
            Method::Fpp => "FPP",
            Method::LpbPp => "LPB-PP",
            Method::CbbPp => "CBB-PP",
        }
    }

    pub fn is_bootstrap(&self) -> bool {
        matches!(self, Method::ArbAdf | Method::LpbPp | Method::CbbPp)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown test `{s}`")))
    }
}

/// Replicated `(phi*, t*)` pairs with their p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRun {
    pub phi_reps: Vec<f64>,
    pub t_reps: Vec<f64>,
    pub phi_observed: f64,
    pub t_observed: f64,
    pub p_phi: f64,
    pub p_t: f64,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    /// Bootstrap p-value; `None` for critical-value tests.
    pub p_value: Option<f64>,
    /// Critical value used by ADF and FPP.
    pub critical_value: Option<f64>,
    pub reject: bool,
    /// Decision of the coefficient-based bootstrap variant.
    pub reject_phi: Option<bool>,
    /// Named diagnostics: lag order, bandwidth, long-run variance, ...
    pub nuisance: BTreeMap<String, f64>,
    pub bootstrap: Option<BootstrapRun>,
}

impl TestResult {
    pub fn nuisance(&self, key: &str) -> Option<f64> {
        self.nuisance.get(key).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("LPB-PP".parse::<Method>().unwrap(), Method::LpbPp);
        assert!("kpss".parse::<Method>().is_err());
    }
}
