//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use crate::analysis::ErrorKind;
use crate::error::{Error, Result};
use crate::operators::CipVariant;
use crate::scenarios::{Scenario, StudyConfig, WeightParams};

const KEYS: [&str; 13] = [
    "scenario",
    "degree",
    "nele",
    "gamma",
    "theta",
    "variant",
    "K",
    "r0",
    "x0",
    "output",
    "errors",
    "stride",
    "compare_unstabilized",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub degree: usize,
    pub neles: Vec<usize>,
    pub gamma: f64,
    pub theta: f64,
    pub variant: CipVariant,
    pub weight: WeightParams,
    pub output: PathBuf,
    pub errors: Vec<ErrorKind>,
    /// Snapshot stride for single runs; 0 keeps the first and last state.
    pub stride: usize,
    pub compare_unstabilized: bool,
}

impl RunConfig {
    pub fn scenario(&self) -> Result<Scenario> {
        self.scenario.parse()
    }

    pub fn study(&self) -> StudyConfig {
        let mut cfg = StudyConfig::new(self.degree, self.neles.clone())
            .with_gamma(self.gamma)
            .with_errors(&self.errors)
            .with_weight(self.weight);
        cfg.theta = self.theta;
        cfg.variant = self.variant;
        cfg
    }

    /// Checks the value invariants; also run by [`parse_config`].
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.gamma >= 0.0) {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return bad(format!("theta must lie in [1/2, 1], got {}", self.theta));
        }
        if !matches!(self.degree, 1 | 2) {
            return bad(format!("degree must be 1 or 2, got {}", self.degree));
        }
        if self.neles.is_empty() || self.neles.contains(&0) {
            return bad("nele values must be positive".into());
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut scenario = None;
    let mut degree = None;
    let mut neles = None;
    let mut gamma = None;
    let mut cfg = RunConfig {
        scenario: String::new(),
        degree: 0,
        neles: Vec::new(),
        gamma: 0.0,
        theta: 0.5,
        variant: CipVariant::default(),
        weight: WeightParams::default(),
        output: PathBuf::from("output"),
        errors: vec![ErrorKind::GlobalL2],
        stride: 0,
        compare_unstabilized: false,
    };
    let mut seen = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Config { line, msg };
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        if !KEYS.contains(&key) {
            return Err(err(format!("unknown key `{key}`")));
        }
        if seen.contains(&key) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        seen.push(key);
        let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("`{key}`: not a number: `{v}`")));
        let int = |v: &str| v.parse::<usize>().map_err(|_| err(format!("`{key}`: not a non-negative integer: `{v}`")));
        match key {
            "scenario" => scenario = Some(value.to_string()),
            "degree" => degree = Some(int(value)?),
            "nele" => neles = Some(value.split(',').map(|v| int(v.trim())).collect::<Result<Vec<_>>>()?),
            "gamma" => {
                let g = num(value)?;
                if !(g >= 0.0) {
                    return Err(err(format!("gamma must be >= 0, got {value}")));
                }
                gamma = Some(g);
            }
            "theta" => {
                cfg.theta = num(value)?;
                if !(0.5..=1.0).contains(&cfg.theta) {
                    return Err(err(format!("theta must lie in [1/2, 1], got {value}")));
                }
            }
            "variant" => cfg.variant = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "K" => cfg.weight.k = num(value)?,
            "r0" => cfg.weight.r0 = num(value)?,
            "x0" => {
                let c: Vec<f64> = value.split(',').map(|v| num(v.trim())).collect::<Result<_>>()?;
                let [x, y] = c[..] else {
                    return Err(err(format!("`x0` needs two coordinates, got `{value}`")));
                };
                cfg.weight.center = Some([x, y]);
            }
            "output" => cfg.output = PathBuf::from(value),
            "errors" => {
                cfg.errors = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|e: Error| err(e.to_string())))
                    .collect::<Result<_>>()?
            }
            "stride" => cfg.stride = int(value)?,
            "compare_unstabilized" => {
                cfg.compare_unstabilized = value.parse().map_err(|_| err(format!("expected true/false, got `{value}`")))?
            }
            _ => unreachable!("key list checked above"),
        }
    }
    cfg.scenario = scenario.ok_or_else(|| Error::MissingKey("scenario".into()))?;
    cfg.degree = degree.ok_or_else(|| Error::MissingKey("degree".into()))?;
    cfg.neles = neles.ok_or_else(|| Error::MissingKey("nele".into()))?;
    cfg.gamma = gamma.ok_or_else(|| Error::MissingKey("gamma".into()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = "# smooth disc\nscenario = rotating_disc_smooth\ndegree = 1\nnele = 40,80,160\ngamma = 0.01\n";

    #[test]
    fn minimal_sweep_uses_defaults() {
        let c = parse_config_str(SWEEP).unwrap();
        assert_eq!(c.neles, vec![40, 80, 160]);
        assert_eq!((c.gamma, c.theta, c.variant), (0.01, 0.5, CipVariant::AbsBeta));
        let no_gamma = SWEEP.replace("gamma = 0.01\n", "");
        assert!(matches!(parse_config_str(&no_gamma), Err(Error::MissingKey(k)) if k == "gamma"));
        assert_eq!(c.scenario().unwrap().name, "rotating_disc_smooth");
    }

    #[test]
    fn all_keys() {
        let text = format!(
            "{SWEEP}theta=1 # trailing comment\nvariant = abs_beta_n\nK = 4\nr0 = 0.3\nx0 = 0.5, 0\n\
             output = out/a\nerrors = global,local,dual\nstride = 5\ncompare_unstabilized = true\n"
        );
        let c = parse_config_str(&text).unwrap();
        assert_eq!(c.gamma, 0.01);
        assert_eq!(c.theta, 1.0);
        assert_eq!(c.variant, CipVariant::AbsBetaNormal);
        assert_eq!(c.weight.center, Some([0.5, 0.0]));
        assert_eq!((c.weight.k, c.weight.r0), (4.0, 0.3));
        assert_eq!(c.errors, vec![ErrorKind::GlobalL2, ErrorKind::LocalL2, ErrorKind::DualNorm]);
        assert!(c.compare_unstabilized && c.stride == 5);
        let s = c.study();
        assert_eq!((s.gamma, s.theta, s.variant), (0.01, 1.0, CipVariant::AbsBetaNormal));
    }

    #[test]
    fn rejections() {
        let line_of = |text: &str| match parse_config_str(text) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line_of(&SWEEP.replace("0.01", "-1")), 5);
        assert_eq!(line_of(&format!("{SWEEP}thetta = 1\n")), 6);
        assert_eq!(line_of(&format!("{SWEEP}theta = 0.4\n")), 6);
        assert_eq!(line_of("scenario = x\ndegree = one\n"), 2);
        assert_eq!(line_of("nele 40\n"), 1);
        assert_eq!(line_of(&format!("{SWEEP}degree = 2\n")), 6);
        assert!(matches!(parse_config_str("degree = 1\nnele = 4\n"), Err(Error::MissingKey(k)) if k == "scenario"));
        assert!(matches!(parse_config_str("scenario = a\ndegree = 1\n"), Err(Error::MissingKey(k)) if k == "nele"));
        assert!(parse_config_str("scenario = a\ndegree = 3\nnele = 4\n").is_err());
    }
}
