use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hawkes_cluster::kernel::Kernel;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Kernel family and parameters as written in config files and flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    Exponential { alpha: f64, beta: f64 },
    #[serde(alias = "power-law")]
    Powerlaw { c: f64, d: f64 },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel, CliError> {
        let k = match *self {
            KernelSpec::Exponential { alpha, beta } => Kernel::exponential(alpha, beta),
            KernelSpec::Powerlaw { c, d } => Kernel::power_law(c, d),
        };
        k.map_err(|e| CliError::Config(format!("invalid kernel {self}: {e}")))
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, KernelSpec::Exponential { .. })
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Exponential { alpha, beta } => write!(f, "exponential({alpha},{beta})"),
            KernelSpec::Powerlaw { c, d } => write!(f, "powerlaw({c},{d})"),
        }
    }
}

/// Parses `exponential(3,4)`, `exp(3,4)`, `powerlaw(1,2)` or `pow(1,2)`.
impl FromStr for KernelSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CliError::Config(format!("cannot parse kernel {s:?}; expected e.g. exp(3,4) or powerlaw(1,2)"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let args = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [a, b] = nums[..] else { return Err(bad()) };
        match s[..open].trim().to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(KernelSpec::Exponential { alpha: a, beta: b }),
            "pow" | "powerlaw" | "power-law" => Ok(KernelSpec::Powerlaw { c: a, d: b }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Parking,
    Branching,
    DassiosZhao,
    PoissonRace,
    Theorem2,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::Parking, Method::Branching, Method::DassiosZhao, Method::PoissonRace, Method::Theorem2];

    pub fn name(self) -> &'static str {
        match self {
            Method::Parking => "parking",
            Method::Branching => "branching",
            Method::DassiosZhao => "dassios-zhao",
            Method::PoissonRace => "poisson-race",
            Method::Theorem2 => "theorem2",
        }
    }

    pub fn needs_exponential(self) -> bool {
        matches!(self, Method::DassiosZhao | Method::Theorem2)
    }

    pub fn supports_conditioning(self) -> bool {
        matches!(self, Method::Parking | Method::Theorem2)
    }

    /// Whether the method produces event epochs (the closed-form duration
    /// sampler yields only `N` and `τ`).
    pub fn has_epochs(self) -> bool {
        !matches!(self, Method::Theorem2)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            _ => Err(CliError::Config(format!("unknown format {s:?}; expected csv or jsonl"))),
        }
    }
}

/// A validated simulation campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub kernel: KernelSpec,
    pub method: Method,
    pub reps: u64,
    #[serde(default)]
    pub cond_size: Option<u64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub summary: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_seed() -> u64 {
    1
}

/// Optional fields as they arrive from a JSON config file; flags fill gaps
/// and override.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub kernel: Option<KernelSpec>,
    pub method: Option<Method>,
    pub reps: Option<u64>,
    pub cond_size: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config file: {e}")))
    }

    /// Fields set in `over` win.
    pub fn merge(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            kernel: over.kernel.or(self.kernel),
            method: over.method.or(self.method),
            reps: over.reps.or(self.reps),
            cond_size: over.cond_size.or(self.cond_size),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            summary: over.summary.or(self.summary),
            format: over.format.or(self.format),
            threads: over.threads.or(self.threads),
        }
    }

    pub fn finish(self) -> Result<RunConfig, CliError> {
        let cfg = RunConfig {
            kernel: self.kernel.ok_or_else(|| CliError::Config("no kernel given".into()))?,
            method: self.method.unwrap_or(Method::Parking),
            reps: self.reps.unwrap_or(1000),
            cond_size: self.cond_size,
            seed: self.seed.unwrap_or_else(default_seed),
            out: self.out,
            summary: self.summary,
            format: self.format.unwrap_or_default(),
            threads: self.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.kernel.build()?;
        if self.method.needs_exponential() && !self.kernel.is_exponential() {
            return Err(CliError::Config(format!(
                "method {} applies only to the exponential kernel, got {}",
                self.method, self.kernel
            )));
        }
        if self.reps == 0 {
            return Err(CliError::Config("replication count must be at least 1".into()));
        }
        match self.cond_size {
            Some(0) => return Err(CliError::Config("conditioned size must be at least 1".into())),
            Some(_) if !self.method.supports_conditioning() => {
                return Err(CliError::Config(format!(
                    "method {} cannot condition on the cluster size; use parking or theorem2",
                    self.method
                )))
            }
            _ => {}
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("thread count must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_strings_parse() {
        assert_eq!("exp(3,4)".parse::<KernelSpec>().unwrap(), KernelSpec::Exponential { alpha: 3.0, beta: 4.0 });
        assert_eq!("powerlaw( 1 , 2 )".parse::<KernelSpec>().unwrap(), KernelSpec::Powerlaw { c: 1.0, d: 2.0 });
        assert!("exp(3)".parse::<KernelSpec>().is_err());
        assert!("gauss(1,2)".parse::<KernelSpec>().is_err());
    }

    #[test]
    fn config_json_round_trips() {
        let text = r#"{"kernel":{"family":"powerlaw","c":1,"d":2},"method":"branching","reps":5}"#;
        let cfg = PartialConfig::from_json(text).unwrap().finish().unwrap();
        assert_eq!(cfg.kernel, KernelSpec::Powerlaw { c: 1.0, d: 2.0 });
        assert_eq!(cfg.method, Method::Branching);
        assert_eq!(cfg.seed, 1);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn incompatible_combinations_are_rejected() {
        let base = PartialConfig {
            kernel: Some(KernelSpec::Powerlaw { c: 1.0, d: 2.0 }),
            method: Some(Method::DassiosZhao),
            ..Default::default()
        };
        assert!(matches!(base.clone().finish(), Err(CliError::Config(_))));
        let cond = PartialConfig { method: Some(Method::Branching), cond_size: Some(3), ..base.clone() };
        assert!(cond.finish().is_err());
        let zero = PartialConfig { method: Some(Method::Parking), reps: Some(0), ..base };
        assert!(zero.finish().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = PartialConfig { reps: Some(10), seed: Some(3), ..Default::default() };
        let flags = PartialConfig { reps: Some(20), ..Default::default() };
        let merged = file.merge(flags);
        assert_eq!((merged.reps, merged.seed), (Some(20), Some(3)));
    }
}
