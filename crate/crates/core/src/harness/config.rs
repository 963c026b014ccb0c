//! Experiment configuration and its flat `key=value` text form.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bandwidth::DEFAULT_PILOT;
use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::kernel::{Kernel, KernelFamily};
use crate::market::{AsianConfig, AsianScheme, GbmParams, Payoff};
use crate::randomization::RandomizerKind;

pub const DEFAULT_REPLICATIONS: usize = 200;
pub const DEFAULT_REFERENCE_N: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PayoffKind {
    Digital,
    Vanilla,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandwidthSpec {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: GbmParams<f64>,
    pub payoff: PayoffKind,
    pub strike: f64,
    /// Path-average state instead of the terminal value.
    pub asian: Option<AsianConfig>,
    pub estimator: EstimatorId,
    pub kernel: KernelFamily,
    /// Randomizer of the general kernel estimators; `uniform`/`exponential` fix their own.
    pub randomizer: RandomizerKind,
    /// Tilt of the truncated exponential randomizer; `None` lets the pilot optimize it.
    pub theta: Option<f64>,
    /// Randomizer radius; `None` ties it to the kernel support, `ε = Mh`.
    pub epsilon: Option<f64>,
    /// `None` means automatic selection for kernel estimators and nothing otherwise.
    pub bandwidth: Option<BandwidthSpec>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub fd_alpha: f64,
    pub fd_eps: f64,
    pub pilot_n: usize,
    /// Fit the lognormal law of the pilot states instead of using the model law.
    pub plugin_law: bool,
    /// Sample size of the finite-difference reference used when no closed form exists.
    pub reference_n: usize,
    pub reference_eps: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: GbmParams::reference_setup(),
            payoff: PayoffKind::Digital,
            strike: 120.0,
            asian: None,
            estimator: EstimatorId::UniformOpt,
            kernel: KernelFamily::Poly2,
            randomizer: RandomizerKind::Uniform,
            theta: None,
            epsilon: None,
            bandwidth: None,
            n: 100_000,
            reps: DEFAULT_REPLICATIONS,
            seed: 1,
            antithetic: false,
            fd_alpha: 0.5,
            fd_eps: 0.5,
            pilot_n: DEFAULT_PILOT,
            plugin_law: false,
            reference_n: DEFAULT_REFERENCE_N,
            reference_eps: 0.5,
        }
    }
}

/// Keys accepted by [`ExperimentConfig::set`]; the CLI flags use the same names.
pub const KEYS: &[&str] = &[
    "model.spot",
    "model.rate",
    "model.vol",
    "model.maturity",
    "payoff",
    "strike",
    "asian-steps",
    "asian-scheme",
    "estimator",
    "kernel",
    "randomizer",
    "theta",
    "epsilon",
    "alpha",
    "fd-eps",
    "bandwidth",
    "n",
    "reps",
    "seed",
    "antithetic",
    "pilot-n",
    "plugin-law",
    "reference-n",
    "reference-eps",
];

fn real(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::InvalidConfig(format!("{key}: `{v}` is not a number")))
}

/// Accepts `100000` as well as `1e5`.
fn count(key: &str, v: &str) -> Result<usize> {
    if let Ok(n) = v.parse::<usize>() {
        return Ok(n);
    }
    let x = real(key, v)?;
    if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(53) {
        Ok(x as usize)
    } else {
        Err(Error::InvalidConfig(format!("{key}: `{v}` is not a non-negative integer")))
    }
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("{key}: `{v}` is not a boolean"))),
    }
}

fn optional_real(key: &str, v: &str) -> Result<Option<f64>> {
    if v == "auto" || v == "none" {
        Ok(None)
    } else {
        real(key, v).map(Some)
    }
}

pub fn parse_kernel(v: &str) -> Result<KernelFamily> {
    match v {
        "p2" => Ok(KernelFamily::Poly2),
        "p4" => Ok(KernelFamily::Poly4),
        "p6" => Ok(KernelFamily::Poly6),
        _ => Err(Error::InvalidConfig(format!("kernel: `{v}` is not one of p2, p4, p6"))),
    }
}

pub fn kernel_name(k: KernelFamily) -> &'static str {
    match k {
        KernelFamily::Poly2 => "p2",
        KernelFamily::Poly4 => "p4",
        KernelFamily::Poly6 => "p6",
        KernelFamily::Custom => "custom",
    }
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let v = v.trim();
        match key {
            "model.spot" => self.model.spot = real(key, v)?,
            "model.rate" => self.model.rate = real(key, v)?,
            "model.vol" => self.model.vol = real(key, v)?,
            "model.maturity" => self.model.maturity = real(key, v)?,
            "payoff" => {
                self.payoff = match v {
                    "digital" => PayoffKind::Digital,
                    "vanilla" => PayoffKind::Vanilla,
                    "identity" => PayoffKind::Identity,
                    _ => return Err(Error::InvalidConfig(format!("payoff: `{v}` is not one of digital, vanilla, identity"))),
                }
            }
            "strike" => self.strike = real(key, v)?,
            "asian-steps" => {
                let steps = count(key, v)?;
                self.asian = match (steps, self.asian) {
                    (0, _) => None,
                    (steps, Some(a)) => Some(AsianConfig { steps, ..a }),
                    (steps, None) => Some(AsianConfig { steps, ..AsianConfig::default() }),
                };
            }
            "asian-scheme" => {
                let scheme = match v {
                    "trapezoid" => AsianScheme::Trapezoid,
                    "left" => AsianScheme::LeftRiemann,
                    _ => return Err(Error::InvalidConfig(format!("asian-scheme: `{v}` is not trapezoid or left"))),
                };
                let base = self.asian.unwrap_or_default();
                self.asian = Some(AsianConfig { scheme, ..base });
            }
            "estimator" => self.estimator = EstimatorId::parse(v)?,
            "kernel" => self.kernel = parse_kernel(v)?,
            "randomizer" => {
                self.randomizer = match v {
                    "uniform" => RandomizerKind::Uniform,
                    "exponential" => RandomizerKind::TruncExp,
                    _ => return Err(Error::InvalidConfig(format!("randomizer: `{v}` is not uniform or exponential"))),
                }
            }
            "theta" => self.theta = optional_real(key, v)?,
            "epsilon" => self.epsilon = optional_real(key, v)?,
            "alpha" => self.fd_alpha = real(key, v)?,
            "fd-eps" => self.fd_eps = real(key, v)?,
            "bandwidth" => {
                self.bandwidth = Some(match v {
                    "auto" => BandwidthSpec::Auto,
                    _ => BandwidthSpec::Fixed(real(key, v)?),
                })
            }
            "n" => self.n = count(key, v)?,
            "reps" => self.reps = count(key, v)?,
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("seed: `{v}` is not a 64-bit integer")))?
            }
            "antithetic" => self.antithetic = flag(key, v)?,
            "pilot-n" => self.pilot_n = count(key, v)?,
            "plugin-law" => self.plugin_law = flag(key, v)?,
            "reference-n" => self.reference_n = count(key, v)?,
            "reference-eps" => self.reference_eps = real(key, v)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key=value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The `key=value` form; [`ExperimentConfig::from_text`] parses it back to an equal config.
    pub fn to_text(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("model.spot", self.model.spot.to_string());
        map.insert("model.rate", self.model.rate.to_string());
        map.insert("model.vol", self.model.vol.to_string());
        map.insert("model.maturity", self.model.maturity.to_string());
        map.insert(
            "payoff",
            match self.payoff {
                PayoffKind::Digital => "digital",
                PayoffKind::Vanilla => "vanilla",
                PayoffKind::Identity => "identity",
            }
            .to_string(),
        );
        map.insert("strike", self.strike.to_string());
        match self.asian {
            Some(a) => {
                map.insert("asian-steps", a.steps.to_string());
                map.insert(
                    "asian-scheme",
                    match a.scheme {
                        AsianScheme::Trapezoid => "trapezoid",
                        AsianScheme::LeftRiemann => "left",
                    }
                    .to_string(),
                );
            }
            None => {
                map.insert("asian-steps", "0".to_string());
            }
        }
        map.insert("estimator", self.estimator.as_str().to_string());
        map.insert("kernel", kernel_name(self.kernel).to_string());
        map.insert(
            "randomizer",
            match self.randomizer {
                RandomizerKind::Uniform => "uniform",
                RandomizerKind::TruncExp => "exponential",
            }
            .to_string(),
        );
        let opt = |v: Option<f64>| v.map_or("auto".to_string(), |x| x.to_string());
        map.insert("theta", opt(self.theta));
        map.insert("epsilon", opt(self.epsilon));
        map.insert("alpha", self.fd_alpha.to_string());
        map.insert("fd-eps", self.fd_eps.to_string());
        if let Some(b) = self.bandwidth {
            map.insert(
                "bandwidth",
                match b {
                    BandwidthSpec::Auto => "auto".to_string(),
                    BandwidthSpec::Fixed(h) => h.to_string(),
                },
            );
        }
        map.insert("n", self.n.to_string());
        map.insert("reps", self.reps.to_string());
        map.insert("seed", self.seed.to_string());
        map.insert("antithetic", self.antithetic.to_string());
        map.insert("pilot-n", self.pilot_n.to_string());
        map.insert("plugin-law", self.plugin_law.to_string());
        map.insert("reference-n", self.reference_n.to_string());
        map.insert("reference-eps", self.reference_eps.to_string());
        map.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Reads JSON (a config or a run manifest) or the flat text form.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.trim_start().starts_with('{') {
            let mut value: serde_json::Value = serde_json::from_str(&text)?;
            // a run manifest nests the config
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            let cfg: ExperimentConfig = serde_json::from_value(value)?;
            cfg.validate()?;
            Ok(cfg)
        } else {
            Self::from_text(&text)
        }
    }

    pub fn validate(&self) -> Result<()> {
        GbmParams::new(self.model.spot, self.model.rate, self.model.vol, self.model.maturity)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if self.n == 0 || self.reps == 0 {
            return Err(Error::InvalidConfig(format!(
                "need N ≥ 1 and R ≥ 1, got N = {}, R = {}",
                self.n, self.reps
            )));
        }
        if self.bandwidth == Some(BandwidthSpec::Auto) && !self.estimator.is_kernel() {
            return Err(Error::InvalidConfig(format!(
                "automatic bandwidth needs a kernel estimator, got `{}`",
                self.estimator.as_str()
            )));
        }
        if let Some(BandwidthSpec::Fixed(h)) = self.bandwidth {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
            }
        }
        if self.kernel == KernelFamily::Custom {
            return Err(Error::InvalidConfig("custom kernels are not available from a config".into()));
        }
        if !(self.strike.is_finite()) {
            return Err(Error::InvalidConfig("strike must be finite".into()));
        }
        if self.asian.is_some_and(|a| a.steps == 0) {
            return Err(Error::InvalidConfig("asian-steps must be positive".into()));
        }
        Ok(())
    }

    pub fn payoff(&self) -> Payoff<f64> {
        match self.payoff {
            PayoffKind::Digital => Payoff::DigitalCall { strike: self.strike },
            PayoffKind::Vanilla => Payoff::VanillaCall { strike: self.strike },
            PayoffKind::Identity => Payoff::Identity,
        }
    }

    pub fn kernel(&self) -> Kernel<f64> {
        Kernel::builtin(self.kernel)
    }

    /// Randomizer family actually used by the configured estimator.
    pub fn randomizer_kind(&self) -> RandomizerKind {
        match self.estimator {
            EstimatorId::UniformOpt => RandomizerKind::Uniform,
            EstimatorId::ExponentialOpt => RandomizerKind::TruncExp,
            _ => self.randomizer,
        }
    }

    pub fn with_estimator(&self, estimator: EstimatorId) -> Self {
        ExperimentConfig {
            estimator,
            ..self.clone()
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        ExperimentConfig { n, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("payoff=vanilla\nn=1e4\n# comment\nbandwidth = 2.5\nasian-steps=12\ntheta=0.3\nseed=99").unwrap();
        assert_eq!(cfg.payoff, PayoffKind::Vanilla);
        assert_eq!(cfg.n, 10_000);
        assert_eq!(cfg.bandwidth, Some(BandwidthSpec::Fixed(2.5)));
        assert_eq!(cfg.asian.unwrap().steps, 12);
        assert_eq!(cfg.theta, Some(0.3));
        assert_eq!(ExperimentConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn every_key_is_accepted() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_text();
        for line in text.lines() {
            let key = line.split('=').next().unwrap();
            assert!(KEYS.contains(&key), "{key}");
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_text("n=0").is_err());
        assert!(ExperimentConfig::from_text("estimator=lr\nbandwidth=auto").is_err());
        assert!(ExperimentConfig::from_text("colour=blue").is_err());
        assert!(ExperimentConfig::from_text("n=1.5").is_err());
        assert!(ExperimentConfig::from_text("just text").is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig {
            asian: Some(AsianConfig::default()),
            bandwidth: Some(BandwidthSpec::Auto),
            ..ExperimentConfig::default()
        };
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&json).unwrap(), cfg);
    }
}
