//! Convergence tables.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    GlobalL2,
    LocalL2,
    MaterialDerivative,
    StabIntegral,
    WeightedL2,
    DualNorm,
    Estimator,
}

/// Column order of the CSV.
pub const ERROR_KINDS: [ErrorKind; 7] = [
    ErrorKind::GlobalL2,
    ErrorKind::LocalL2,
    ErrorKind::MaterialDerivative,
    ErrorKind::StabIntegral,
    ErrorKind::WeightedL2,
    ErrorKind::DualNorm,
    ErrorKind::Estimator,
];

impl ErrorKind {
    pub fn column(self) -> &'static str {
        match self {
            Self::GlobalL2 => "err_global_L2",
            Self::LocalL2 => "err_local_L2",
            Self::MaterialDerivative => "err_matderiv",
            Self::StabIntegral => "stab_seminorm_int",
            Self::WeightedL2 => "weighted_L2",
            Self::DualNorm => "dual_norm",
            Self::Estimator => "estimator",
        }
    }

    fn index(self) -> usize {
        ERROR_KINDS.iter().position(|&k| k == self).expect("listed")
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for ErrorKind {
    type Err = Error;

    /// Accepts the CSV column name or a short alias.
    fn from_str(s: &str) -> Result<Self> {
        let k = match s {
            "global" | "err_global_L2" => Self::GlobalL2,
            "local" | "err_local_L2" => Self::LocalL2,
            "matderiv" | "err_matderiv" => Self::MaterialDerivative,
            "stab" | "stab_seminorm_int" => Self::StabIntegral,
            "weighted" | "weighted_L2" => Self::WeightedL2,
            "dual" | "dual_norm" => Self::DualNorm,
            "estimator" => Self::Estimator,
            other => return Err(Error::InvalidArgument(format!("unknown error measure `{other}`"))),
        };
        Ok(k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub nele: usize,
    pub h: f64,
    pub dt: f64,
    values: [Option<f64>; 7],
    pub failure: Option<String>,
}

impl LevelRecord {
    pub fn new(nele: usize, h: f64, dt: f64) -> Self {
        Self { nele, h, dt, values: [None; 7], failure: None }
    }

    pub fn failed(nele: usize, msg: String) -> Self {
        Self { nele, h: f64::NAN, dt: f64::NAN, values: [None; 7], failure: Some(msg) }
    }

    pub fn set(&mut self, kind: ErrorKind, value: f64) {
        self.values[kind.index()] = Some(value);
    }

    pub fn get(&self, kind: ErrorKind) -> Option<f64> {
        self.values[kind.index()]
    }
}

/// `log(e_c / e_f) / log(h_c / h_f)`, undefined for non-positive errors.
pub fn convergence_rates(h: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    h.windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] > 0.0 && e[1] > 0.0).then(|| (e[0] / e[1]).ln() / (h[0] / h[1]).ln()))
        .collect()
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_rate(h: &[f64], errors: &[f64]) -> Option<f64> {
    if h.len() < 2 || errors.iter().any(|&e| !(e > 0.0)) {
        return None;
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub coarse: usize,
    pub fine: usize,
    pub rates: Vec<(ErrorKind, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub kinds: Vec<ErrorKind>,
    /// Sorted by `h` descending.
    pub levels: Vec<LevelRecord>,
}

impl ErrorReport {
    pub fn new(mut kinds: Vec<ErrorKind>, levels: Vec<LevelRecord>) -> Self {
        kinds.sort();
        kinds.dedup();
        Self { kinds, levels }
    }

    pub fn has_failures(&self) -> bool {
        self.levels.iter().any(|l| l.failure.is_some())
    }

    pub fn level(&self, nele: usize) -> Option<&LevelRecord> {
        self.levels.iter().find(|l| l.nele == nele)
    }

    pub fn values(&self, kind: ErrorKind) -> Vec<f64> {
        self.levels.iter().map(|l| l.get(kind).unwrap_or(f64::NAN)).collect()
    }

    /// Rates between consecutive levels; pairs with a failed level are skipped.
    pub fn rates(&self) -> Vec<RateRow> {
        self.levels
            .windows(2)
            .filter(|w| w[0].failure.is_none() && w[1].failure.is_none())
            .map(|w| RateRow {
                coarse: w[0].nele,
                fine: w[1].nele,
                rates: self
                    .kinds
                    .iter()
                    .map(|&k| {
                        let r = match (w[0].get(k), w[1].get(k)) {
                            (Some(a), Some(b)) => convergence_rates(&[w[0].h, w[1].h], &[a, b])[0],
                            _ => None,
                        };
                        (k, r)
                    })
                    .collect(),
            })
            .collect()
    }

    /// Least-squares rate over all successful levels.
    pub fn fitted_rate(&self, kind: ErrorKind) -> Option<f64> {
        let ok: Vec<&LevelRecord> = self.levels.iter().filter(|l| l.failure.is_none()).collect();
        let e: Option<Vec<f64>> = ok.iter().map(|l| l.get(kind)).collect();
        fitted_rate(&ok.iter().map(|l| l.h).collect::<Vec<_>>(), &e?)
    }

    /// `nele,h,dt,<error columns>` followed by a `# rates` block. Columns
    /// that were not selected stay empty.
    pub fn to_csv(&self) -> String {
        let cols: Vec<&str> = ERROR_KINDS.iter().map(|k| k.column()).collect();
        let mut out = format!("nele,h,dt,{}\n", cols.join(","));
        let cell = |v: Option<f64>| v.map(|v| format!("{v:.10e}")).unwrap_or_default();
        for l in &self.levels {
            if let Some(msg) = &l.failure {
                let _ = writeln!(out, "# nele={} failed: {}", l.nele, msg.replace('\n', " "));
                let _ = writeln!(out, "{},,{}", l.nele, ",".repeat(ERROR_KINDS.len()));
                continue;
            }
            let cells: Vec<String> = ERROR_KINDS.iter().map(|&k| cell(l.get(k))).collect();
            let _ = writeln!(out, "{},{:.10e},{:.10e},{}", l.nele, l.h, l.dt, cells.join(","));
        }
        out.push_str("\n# rates\n");
        let _ = writeln!(out, "nele_coarse,nele_fine,{}", cols.join(","));
        for row in self.rates() {
            let cells: Vec<String> = ERROR_KINDS
                .iter()
                .map(|k| row.rates.iter().find(|(r, _)| r == k).and_then(|(_, v)| *v))
                .map(|v| v.map(|v| format!("{v:.4}")).unwrap_or_default())
                .collect();
            let _ = writeln!(out, "{},{},{}", row.coarse, row.fine, cells.join(","));
        }
        out
    }
}
