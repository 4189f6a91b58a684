//! Scenario files: flat `key = value` lines, `#` starts a comment.
//!
//! Powers take a unit suffix (`p_d_dbm` or `p_d_w`, `sigma2_d_dbm` or
//! `sigma2_d_w`) and exactly one spelling of each must be present. Lists are
//! comma separated; an empty right-hand side is an empty list.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use urcwet_core::model::{db_to_linear, dbm_to_watts};
use urcwet_core::{Evaluator, SystemParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("keys `{0}` and `{1}` are mutually exclusive")]
    Conflict(&'static str, &'static str),
    #[error("key `{key}`: cannot parse `{value}` as {expected}")]
    Value {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("{0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

const KNOWN_KEYS: &[&str] = &[
    "m",
    "eta",
    "p_d_dbm",
    "p_d_w",
    "d",
    "alpha",
    "kappa",
    "kappa_db",
    "sigma2_d_dbm",
    "sigma2_d_w",
    "t_c",
    "k_bits",
    "eps_target",
    "eps_targets",
    "k_list",
    "n",
    "v",
    "n_min",
    "n_max",
    "n_step",
    "delta",
    "delta_list",
    "mc_samples",
    "seed",
    "v_max",
    "evaluator",
    "certify",
    "grid_m",
    "grid_k",
    "grid_n",
    "grid_eps",
    "output",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: SystemParams,
    pub k_bits: Option<u64>,
    pub eps_targets: Vec<f64>,
    pub k_list: Vec<u64>,
    pub n: Option<u64>,
    pub v: Option<u64>,
    pub n_min: u64,
    pub n_max: u64,
    pub n_step: u64,
    pub deltas: Vec<u64>,
    pub mc_samples: u64,
    pub seed: u64,
    pub v_max: u64,
    pub evaluator: Evaluator,
    pub certify: bool,
    pub grid: ValidationGrid,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationGrid {
    pub m: Vec<f64>,
    pub k: Vec<u64>,
    pub n: Vec<u64>,
    pub eps: Vec<f64>,
}

impl Default for ValidationGrid {
    fn default() -> Self {
        Self {
            m: vec![1.0, 2.0, 3.0],
            k: vec![96, 216, 320],
            n: vec![100, 300, 1000],
            eps: vec![0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-5],
        }
    }
}

impl ValidationGrid {
    pub fn is_empty(&self) -> bool {
        self.m.is_empty() || self.k.is_empty() || self.n.is_empty() || self.eps.is_empty()
    }
}

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line: i + 1,
                    key: key.to_string(),
                });
            }
            if map.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: i + 1,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self(map))
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|s| parse_f64(key, s)).transpose()
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.raw(key).map(|s| parse_u64(key, s)).transpose()
    }

    fn req_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    /// Value of whichever of two alternative keys is present.
    fn either(&self, a: &'static str, b: &'static str) -> Result<Option<(&'static str, f64)>> {
        match (self.f64(a)?, self.f64(b)?) {
            (Some(_), Some(_)) => Err(ConfigError::Conflict(a, b)),
            (Some(x), None) => Ok(Some((a, x))),
            (None, Some(x)) => Ok(Some((b, x))),
            (None, None) => Ok(None),
        }
    }

    fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key).map(|s| split_list(s).map(|x| parse_f64(key, x)).collect()).transpose()
    }

    fn list_u64(&self, key: &str) -> Result<Option<Vec<u64>>> {
        self.raw(key).map(|s| split_list(s).map(|x| parse_u64(key, x)).collect()).transpose()
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| ConfigError::Value {
        key: key.to_string(),
        value: s.to_string(),
        expected: "a finite real",
    })
}

fn parse_u64(key: &str, s: &str) -> Result<u64> {
    let bad = || ConfigError::Value {
        key: key.to_string(),
        value: s.to_string(),
        expected: "a non-negative integer",
    };
    if let Ok(x) = s.parse::<u64>() {
        return Ok(x);
    }
    // allow exponent notation such as 1e6
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) => Ok(x as u64),
        _ => Err(bad()),
    }
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::Value {
            key: key.to_string(),
            value: s.to_string(),
            expected: "a boolean",
        }),
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let e = Entries::parse(text)?;

        let p_d = match e.either("p_d_dbm", "p_d_w")? {
            Some(("p_d_dbm", x)) => dbm_to_watts(x),
            Some((_, x)) => x,
            None => return Err(ConfigError::Missing("p_d_dbm".into())),
        };
        let sigma2_d = match e.either("sigma2_d_dbm", "sigma2_d_w")? {
            Some(("sigma2_d_dbm", x)) => dbm_to_watts(x),
            Some((_, x)) => x,
            None => return Err(ConfigError::Missing("sigma2_d_dbm".into())),
        };
        let kappa = match e.either("kappa", "kappa_db")? {
            Some(("kappa_db", x)) => db_to_linear(x),
            Some((_, x)) => x,
            None => return Err(ConfigError::Missing("kappa".into())),
        };
        let params = SystemParams {
            m: e.req_f64("m")?,
            eta: e.req_f64("eta")?,
            p_d,
            d: e.req_f64("d")?,
            alpha: e.req_f64("alpha")?,
            kappa,
            sigma2_d,
            t_c: e.req_f64("t_c")?,
        };
        params.validate().map_err(|err| ConfigError::Invalid(err.to_string()))?;

        let eps_targets = match (e.f64("eps_target")?, e.list_f64("eps_targets")?) {
            (Some(_), Some(_)) => return Err(ConfigError::Conflict("eps_target", "eps_targets")),
            (Some(x), None) => vec![x],
            (None, Some(xs)) => xs,
            (None, None) => Vec::new(),
        };
        if let Some(x) = eps_targets.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(ConfigError::Invalid(format!("eps targets must lie in (0, 1), got {x}")));
        }

        let evaluator = match e.raw("evaluator") {
            Some(s) => s.parse::<Evaluator>().map_err(|_| ConfigError::Value {
                key: "evaluator".into(),
                value: s.to_string(),
                expected: "an evaluator name",
            })?,
            None => Evaluator::ClosedForm,
        };
        let certify = e.raw("certify").map(|s| parse_bool("certify", s)).transpose()?.unwrap_or(true);

        let defaults = ValidationGrid::default();
        let grid = ValidationGrid {
            m: e.list_f64("grid_m")?.unwrap_or(defaults.m),
            k: e.list_u64("grid_k")?.unwrap_or(defaults.k),
            n: e.list_u64("grid_n")?.unwrap_or(defaults.n),
            eps: e.list_f64("grid_eps")?.unwrap_or(defaults.eps),
        };

        let cfg = Self {
            params,
            k_bits: e.u64("k_bits")?,
            eps_targets,
            k_list: e.list_u64("k_list")?.unwrap_or_default(),
            n: e.u64("n")?,
            v: e.u64("v")?,
            n_min: e.u64("n_min")?.unwrap_or(100),
            n_max: e.u64("n_max")?.unwrap_or(5000),
            n_step: e.u64("n_step")?.unwrap_or(1),
            deltas: match (e.u64("delta")?, e.list_u64("delta_list")?) {
                (Some(_), Some(_)) => return Err(ConfigError::Conflict("delta", "delta_list")),
                (Some(x), None) => vec![x],
                (None, Some(xs)) => xs,
                (None, None) => Vec::new(),
            },
            mc_samples: e.u64("mc_samples")?.unwrap_or(1_000_000),
            seed: e.u64("seed")?.unwrap_or(1),
            v_max: e.u64("v_max")?.unwrap_or(1_000_000_000),
            evaluator,
            certify,
            grid,
            output: e.raw("output").filter(|s| !s.is_empty()).map(PathBuf::from),
        };
        if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
            return Err(ConfigError::Invalid(format!(
                "need 1 <= n_min <= n_max, got n_min = {}, n_max = {}",
                cfg.n_min, cfg.n_max
            )));
        }
        if cfg.n_step == 0 || cfg.v_max == 0 {
            return Err(ConfigError::Invalid("n_step and v_max must be >= 1".into()));
        }
        Ok(cfg)
    }

    pub fn require_k(&self) -> Result<u64> {
        match self.k_bits {
            Some(0) => Err(ConfigError::Invalid("k_bits must be >= 1".into())),
            Some(k) => Ok(k),
            None => Err(ConfigError::Missing("k_bits".into())),
        }
    }

    pub fn require_targets(&self) -> Result<&[f64]> {
        if self.eps_targets.is_empty() {
            Err(ConfigError::Missing("eps_target".into()))
        } else {
            Ok(&self.eps_targets)
        }
    }

    pub fn require_deltas(&self) -> Result<&[u64]> {
        if self.deltas.is_empty() {
            Err(ConfigError::Missing("delta_list".into()))
        } else if self.deltas.iter().any(|&d| d < 2) {
            Err(ConfigError::Invalid("every delay must be >= 2 channel uses".into()))
        } else {
            Ok(&self.deltas)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "m = 3\neta = 0.5\np_d_dbm = 30\nd = 12\nalpha = 3\nkappa = 1e3\n\
                        sigma2_d_dbm = -110\nt_c = 3e-6\n";

    #[test]
    fn reference_values_round_trip() {
        let cfg = ScenarioConfig::parse(BASE).unwrap();
        let r = SystemParams::reference();
        assert_eq!(cfg.params.m, r.m);
        assert!((cfg.params.p_d - r.p_d).abs() < 1e-15);
        assert!((cfg.params.sigma2_d / r.sigma2_d - 1.0).abs() < 1e-12);
        assert_eq!(cfg.n_min, 100);
        assert_eq!(cfg.evaluator, Evaluator::ClosedForm);
    }

    #[test]
    fn comments_and_lists() {
        let text = format!("{BASE}# a comment\nk_list = 96, 128 ,216 # inline\neps_targets = 1e-3,1e-5\n");
        let cfg = ScenarioConfig::parse(&text).unwrap();
        assert_eq!(cfg.k_list, vec![96, 128, 216]);
        assert_eq!(cfg.eps_targets, vec![1e-3, 1e-5]);
    }

    #[test]
    fn missing_key_is_named() {
        let text = BASE.replace("m = 3\n", "");
        let err = ScenarioConfig::parse(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Missing(ref k) if k == "m"));
        assert!(err.to_string().contains("`m`"));
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        let err = ScenarioConfig::parse(&format!("{BASE}colour = red\n")).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 9, .. }));
        let err = ScenarioConfig::parse(&format!("{BASE}d = 10\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { .. }));
    }

    #[test]
    fn power_spellings_are_exclusive() {
        let err = ScenarioConfig::parse(&format!("{BASE}p_d_w = 1\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Conflict("p_d_dbm", "p_d_w")));
        let watts = BASE.replace("p_d_dbm = 30", "p_d_w = 1").replace("kappa = 1e3", "kappa_db = 30");
        let cfg = ScenarioConfig::parse(&watts).unwrap();
        assert_eq!(cfg.params.p_d, 1.0);
        assert!((cfg.params.kappa - 1e3).abs() < 1e-9);
    }

    #[test]
    fn integers_accept_exponent_form() {
        let cfg = ScenarioConfig::parse(&format!("{BASE}mc_samples = 1e6\n")).unwrap();
        assert_eq!(cfg.mc_samples, 1_000_000);
        assert!(ScenarioConfig::parse(&format!("{BASE}mc_samples = 1.5\n")).is_err());
    }

    #[test]
    fn empty_list_is_empty() {
        let cfg = ScenarioConfig::parse(&format!("{BASE}grid_n =\n")).unwrap();
        assert!(cfg.grid.is_empty());
    }

    #[test]
    fn out_of_range_params_rejected() {
        let err = ScenarioConfig::parse(&BASE.replace("eta = 0.5", "eta = 1.5")).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }
}
