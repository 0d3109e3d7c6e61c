//! Run settings: command line flags overlaid by an optional TOML file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    Hilbert,
    RandomHilbert,
}

/// `a=<exp>`: the power weight `(1+|x|)^a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct WeightSpec {
    pub a: f64,
}

impl FromStr for WeightSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let value = s
            .trim()
            .strip_prefix("a=")
            .ok_or_else(|| format!("weight spec `{s}` must look like a=<exp>"))?;
        let a = value.parse().map_err(|e| format!("weight exponent `{value}`: {e}"))?;
        Ok(Self { a })
    }
}

impl TryFrom<String> for WeightSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<WeightSpec> for String {
    fn from(w: WeightSpec) -> String {
        format!("a={}", w.a)
    }
}

/// `d=<deg>`: the monomial phase `y^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PhaseSpec {
    pub d: usize,
}

impl FromStr for PhaseSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let value = s
            .trim()
            .strip_prefix("d=")
            .ok_or_else(|| format!("phase spec `{s}` must look like d=<deg>"))?;
        let d = value.parse().map_err(|e| format!("phase degree `{value}`: {e}"))?;
        Ok(Self { d })
    }
}

impl TryFrom<String> for PhaseSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<PhaseSpec> for String {
    fn from(p: PhaseSpec) -> String {
        format!("d={}", p.d)
    }
}

/// Every tunable of every experiment. Unset values fall back to
/// [`Settings::resolve`] defaults.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true)]
    pub k_min: Option<u32>,
    #[arg(long, global = true)]
    pub k_max: Option<u32>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Power weight `(1+|x|)^a`, written `a=<exp>`.
    #[arg(long, global = true)]
    pub weight: Option<WeightSpec>,
    /// Monomial phase `y^d`, written `d=<deg>`.
    #[arg(long, global = true)]
    pub phase: Option<PhaseSpec>,
    /// Threshold constant of the concentration experiment.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Bad-set exponent.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Operator tested by `domination`.
    #[arg(long, global = true, value_enum)]
    pub operator: Option<Operator>,
    /// Mesh points per wavelength of the phase.
    #[arg(long, global = true)]
    pub ppw: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// A TOML run file: the settings plus an optional experiment name.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub experiment: Option<String>,
    #[serde(flatten)]
    pub settings: Settings,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))
    }
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

/// Fully resolved settings, echoed into every output.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub alpha: f64,
    pub p: f64,
    pub r: f64,
    pub k_min: u32,
    pub k_max: u32,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub weight: WeightSpec,
    pub phase: PhaseSpec,
    pub c: f64,
    pub eps: f64,
    pub operator: Operator,
    pub ppw: f64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Settings {
    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &Settings) -> Settings {
        overlay!(
            self, top, alpha, p, r, k_min, k_max, n, trials, seed, weight, phase, c, eps, operator, ppw, out, format
        );
        self
    }

    /// `default_format` applies when neither flags nor config pick one.
    pub fn resolve(&self, default_format: Format) -> Result<Resolved, String> {
        let out = Resolved {
            alpha: self.alpha.unwrap_or(0.5),
            p: self.p.unwrap_or(2.0),
            r: self.r.unwrap_or(1.5),
            k_min: self.k_min.unwrap_or(4),
            k_max: self.k_max.unwrap_or(8),
            n: self.n.unwrap_or(1024),
            trials: self.trials.unwrap_or(100),
            seed: self.seed.unwrap_or(1),
            weight: self.weight.unwrap_or(WeightSpec { a: 0.0 }),
            phase: self.phase.unwrap_or(PhaseSpec { d: 2 }),
            c: self.c.unwrap_or(10.0),
            eps: self.eps.unwrap_or(0.5),
            operator: self.operator.unwrap_or(Operator::RandomHilbert),
            ppw: self.ppw.unwrap_or(16.0),
            format: self.format.unwrap_or(default_format),
            out: self.out.clone(),
        };
        if out.k_min > out.k_max {
            return Err(format!("k-min = {} exceeds k-max = {}", out.k_min, out.k_max));
        }
        if out.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        Ok(out)
    }
}
