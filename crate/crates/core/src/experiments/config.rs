//! Flat `key = value` configuration with figure presets.
//!
//! Grids accept a single number, a comma list (`0.5,1,1.2`), `log:a:b:n`
//! (n log-spaced points from a to b) or `lin:a:b:n`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{EstimationBudget, Observable};
use crate::liouvillian::{ModelParams, Variant};

pub type ConfigMap = BTreeMap<String, String>;

/// Every recognised key.
pub const KEYS: &[&str] = &[
    "preset",
    "variant",
    "chi",
    "kappa",
    "omega",
    "lambda",
    "gamma",
    "delta",
    "omega_c",
    "n",
    "t",
    "total_time",
    "mode",
    "engine",
    "observable",
    "oracle_check",
    "oracle_dim",
    "fit",
    "workers",
    "format",
    "out",
];

/// Repetition accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// ν = 1.
    Figure,
    /// ν = Tγ.
    Budget,
}

impl FromStr for BudgetMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "figure" => Ok(Self::Figure),
            "budget" => Ok(Self::Budget),
            _ => Err(Error::Config(format!("mode must be figure or budget, got `{s}`"))),
        }
    }
}

/// Precision engine of a χ-scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Gaussian,
    HomodyneP,
    Decay,
    Oracle,
}

impl FromStr for EngineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "homodyne_p" | "homodyne" => Ok(Self::HomodyneP),
            "decay" => Ok(Self::Decay),
            "oracle" => Ok(Self::Oracle),
            _ => Err(Error::Config(format!("unknown engine `{s}`"))),
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::HomodyneP => "homodyne_p",
            Self::Decay => "decay",
            Self::Oracle => "oracle",
        })
    }
}

/// Scaling regime of `scaling-fit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitRegime {
    /// Lossless superposition, δχ = 1/((2N²−N)√(Tt)).
    PureKerr,
    /// Decay at the optimal interrogation time.
    DecayOptimal,
    /// One-photon drive at small χ over an Ω grid.
    OnePhoton,
    /// Two-photon drive, χ sweep at fixed Λ.
    TwoPhoton,
}

impl FromStr for FitRegime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure_kerr" => Ok(Self::PureKerr),
            "decay_optimal" | "decay_top" => Ok(Self::DecayOptimal),
            "one_photon" => Ok(Self::OnePhoton),
            "two_photon" => Ok(Self::TwoPhoton),
            _ => Err(Error::Config(format!("unknown fit regime `{s}`"))),
        }
    }
}

impl std::fmt::Display for FitRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PureKerr => "pure_kerr",
            Self::DecayOptimal => "decay_optimal",
            Self::OnePhoton => "one_photon",
            Self::TwoPhoton => "two_photon",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("format must be csv or json, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub variant: Variant,
    pub chi: Vec<f64>,
    pub kappa: Vec<f64>,
    pub omega: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub omega_c: f64,
    pub n: Vec<usize>,
    /// Interrogation times; empty selects an automatic grid.
    pub t: Vec<f64>,
    pub total_time: f64,
    pub mode: BudgetMode,
    pub engines: Vec<EngineKind>,
    pub observable: Observable,
    pub oracle_check: bool,
    pub oracle_dim: Option<usize>,
    pub fit: FitRegime,
    pub workers: Option<usize>,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

/// Defaults of a named figure recipe.
pub fn preset(name: &str) -> Result<ConfigMap> {
    let pairs: &[(&str, &str)] = match name {
        "default" => &[],
        "fig1" => &[("n", "100"), ("gamma", "0.1"), ("total_time", "100"), ("t", "log:1e-4:1:121")],
        "fig2" => &[
            ("variant", "one-photon"),
            ("gamma", "1"),
            ("omega", "100"),
            ("delta", "0"),
            ("chi", "log:1e-6:1:61"),
            ("mode", "figure"),
        ],
        "fig3" => &[
            ("variant", "two-photon"),
            ("gamma", "1"),
            ("lambda", "0.1"),
            ("omega", "0"),
            ("delta", "0"),
            ("chi", "log:1e-4:10:51"),
            ("mode", "figure"),
        ],
        "fig4" => &[
            ("variant", "general"),
            ("gamma", "10"),
            ("omega", "100"),
            ("lambda", "0"),
            ("kappa", "0,0.5,1"),
            ("delta", "0"),
            ("chi", "log:1e-4:1:41"),
            ("mode", "figure"),
        ],
        "fig5" => &[
            ("variant", "general"),
            ("gamma", "10"),
            ("omega", "0"),
            ("lambda", "0.5"),
            ("kappa", "0.5,1,1.2"),
            ("delta", "0"),
            ("chi", "log:1e-4:10:41"),
            ("mode", "figure"),
        ],
        _ => return Err(Error::Config(format!("unknown preset `{name}`"))),
    };
    Ok(pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = normalize_key(k.trim());
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key `{}`", lineno + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn load_config_file(path: &Path) -> Result<ConfigMap> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Preset defaults, then `file`, then `flags`.
pub fn merge(file: &ConfigMap, flags: &ConfigMap) -> Result<ConfigMap> {
    let name = flags
        .get("preset")
        .or_else(|| file.get("preset"))
        .map(String::as_str)
        .unwrap_or("default");
    let mut merged = preset(name)?;
    merged.extend(file.iter().map(|(k, v)| (k.clone(), v.clone())));
    merged.extend(flags.iter().map(|(k, v)| (k.clone(), v.clone())));
    Ok(merged)
}

fn number(key: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("{key}: `{s}` is not finite")));
    }
    Ok(v)
}

/// Expands a grid expression.
pub fn parse_grid(key: &str, s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let spaced = |body: &str, log: bool| -> Result<Vec<f64>> {
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("{key}: expected a:b:n in `{s}`")));
        }
        let (a, b) = (number(key, parts[0])?, number(key, parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{key}: bad point count in `{s}`")))?;
        if n == 0 {
            return Err(Error::Config(format!("{key}: empty grid")));
        }
        if log && !(a > 0.0 && b > 0.0) {
            return Err(Error::Config(format!("{key}: log grid needs positive ends")));
        }
        Ok((0..n)
            .map(|i| {
                let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                if log {
                    (a.ln() + f * (b.ln() - a.ln())).exp()
                } else {
                    a + f * (b - a)
                }
            })
            .collect())
    };
    let grid = if let Some(body) = s.strip_prefix("log:") {
        spaced(body, true)?
    } else if let Some(body) = s.strip_prefix("lin:") {
        spaced(body, false)?
    } else {
        s.split(',').map(|p| number(key, p)).collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() {
        return Err(Error::Config(format!("{key}: empty grid")));
    }
    Ok(grid)
}

fn bool_value(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: `{s}` is not a boolean"))),
    }
}

impl ScanConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        for k in map.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let grid = |k: &str, default: &str| parse_grid(k, get(k).unwrap_or(default));
        let variant = get("variant")
            .unwrap_or("general")
            .parse::<Variant>()
            .map_err(|e| Error::Config(e.to_string()))?;
        let n = grid("n", "2")?
            .into_iter()
            .map(|v| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::Config(format!("n: `{v}` is not a positive integer")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let engines = get("engine")
            .unwrap_or("homodyne_p")
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<EngineKind>>>()?;
        let oracle_dim = match get("oracle_dim") {
            Some(s) if s.trim() != "auto" => Some(
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&d| d >= 2)
                    .ok_or_else(|| Error::Config(format!("oracle_dim: `{s}` must be an integer >= 2")))?,
            ),
            _ => None,
        };
        let workers = match get("workers") {
            Some(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&w| w >= 1)
                    .ok_or_else(|| Error::Config(format!("workers: `{s}` must be a positive integer")))?,
            ),
            None => None,
        };
        let cfg = Self {
            variant,
            chi: grid("chi", "1e-6")?,
            kappa: grid("kappa", "0")?,
            omega: grid("omega", "0")?,
            lambda: grid("lambda", "0")?,
            gamma: grid("gamma", "1")?,
            delta: grid("delta", "0")?,
            omega_c: number("omega_c", get("omega_c").unwrap_or("0"))?,
            n,
            t: match get("t") {
                Some(s) if s.trim() != "auto" => parse_grid("t", s)?,
                _ => Vec::new(),
            },
            total_time: number("total_time", get("total_time").unwrap_or("1"))?,
            mode: get("mode").unwrap_or("figure").parse()?,
            engines,
            observable: get("observable").unwrap_or("p").parse()?,
            oracle_check: bool_value("oracle_check", get("oracle_check").unwrap_or("false"))?,
            oracle_dim,
            fit: get("fit").unwrap_or("pure_kerr").parse()?,
            workers,
            format: get("format").unwrap_or("csv").parse()?,
            output: get("out").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |k: &str, v: &[f64]| {
            if v.iter().all(|&x| x > 0.0) {
                Ok(())
            } else {
                Err(Error::Config(format!("{k} must be positive")))
            }
        };
        let nonneg = |k: &str, v: &[f64]| {
            if v.iter().all(|&x| x >= 0.0) {
                Ok(())
            } else {
                Err(Error::Config(format!("{k} must be non-negative")))
            }
        };
        positive("gamma", &self.gamma)?;
        positive("t", &self.t)?;
        nonneg("kappa", &self.kappa)?;
        nonneg("omega", &self.omega)?;
        nonneg("lambda", &self.lambda)?;
        if !(self.total_time > 0.0) {
            return Err(Error::Config("total_time must be positive".into()));
        }
        if self.engines.is_empty() {
            return Err(Error::Config("no engine selected".into()));
        }
        Ok(())
    }

    /// Parameter points (κ, Ω, Λ, γ, Δ) of the grid, χ left at zero.
    pub fn base_points(&self) -> Vec<ModelParams> {
        let mut out = Vec::new();
        for &kappa in &self.kappa {
            for &omega_drive in &self.omega {
                for &lambda_drive in &self.lambda {
                    for &gamma in &self.gamma {
                        for &delta in &self.delta {
                            out.push(ModelParams {
                                omega_c: self.omega_c,
                                delta,
                                gamma,
                                kappa,
                                omega_drive,
                                lambda_drive,
                                ..Default::default()
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Steady-state budget for the configured mode.
    pub fn steady_budget(&self, gamma: f64) -> Result<EstimationBudget> {
        match self.mode {
            BudgetMode::Figure => EstimationBudget::single_shot(1.0 / gamma),
            BudgetMode::Budget => EstimationBudget::steady_state(self.total_time, gamma),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("x", "2").unwrap(), vec![2.0]);
        assert_eq!(parse_grid("x", "0.5, 1,1.2").unwrap(), vec![0.5, 1.0, 1.2]);
        let g = parse_grid("x", "log:1e-3:1:4").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[1] - 1e-2).abs() < 1e-15 && (g[3] - 1.0).abs() < 1e-15);
        assert_eq!(parse_grid("x", "lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("x", "log:0:1:3").is_err());
        assert!(parse_grid("x", "abc").is_err());
        assert!(parse_grid("x", "lin:0:1:0").is_err());
    }

    #[test]
    fn flags_override_file_override_preset() {
        let file = parse_config_text("preset = fig2\n# comment\nomega = 50\ngamma=2 # trailing\n").unwrap();
        let mut flags = ConfigMap::new();
        flags.insert("gamma".into(), "3".into());
        let cfg = ScanConfig::from_map(&merge(&file, &flags).unwrap()).unwrap();
        assert_eq!(cfg.omega, vec![50.0]);
        assert_eq!(cfg.gamma, vec![3.0]);
        assert_eq!(cfg.chi.len(), 61);
        assert_eq!(cfg.variant, Variant::OnePhoton);
    }

    #[test]
    fn invalid_configs() {
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("novalue").is_err());
        let mut m = ConfigMap::new();
        m.insert("gamma".into(), "-1".into());
        assert!(ScanConfig::from_map(&m).is_err());
        let mut m = ConfigMap::new();
        m.insert("n".into(), "2.5".into());
        assert!(ScanConfig::from_map(&m).is_err());
        let mut m = ConfigMap::new();
        m.insert("engine".into(), "magic".into());
        assert!(ScanConfig::from_map(&m).is_err());
        assert!(merge(&ConfigMap::new(), &[("preset".to_string(), "fig9".to_string())].into()).is_err());
    }
}
