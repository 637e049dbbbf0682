use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use morsebott::exact_algebra::Coefficients;
use morsebott::flow_engine::{CriticalSet, DetectOptions, Tolerances};
use morsebott::landscape::{lookup_with, Landscape};
use morsebott::perturbation::Auxiliary;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Perturbation size used when the landscape has no catalog bound.
const FALLBACK_EPSILON_MAX: f64 = 0.02;

/// Coefficient ring as spelled on the command line and in configs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoeffFlag {
    #[default]
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "z2")]
    Z2,
}

impl CoeffFlag {
    pub fn coefficients(self) -> Coefficients {
        match self {
            CoeffFlag::Z => Coefficients::Integers,
            CoeffFlag::Z2 => Coefficients::Mod2,
        }
    }
}

impl FromStr for CoeffFlag {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "z" | "Z" => Ok(CoeffFlag::Z),
            "z2" | "Z2" => Ok(CoeffFlag::Z2),
            other => Err(CliError::Config(format!(
                "coefficients must be `z` or `z2`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for CoeffFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffFlag::Z => "z",
            CoeffFlag::Z2 => "z2",
        })
    }
}

fn default_delta() -> f64 {
    1.0
}

/// One run, as a single JSON document:
///
/// ```json
/// { "landscape": "sphere_zsq", "epsilon": 0.01, "epsilon_sweep": [0.02, 0.01],
///   "delta": 1.0, "coefficients": "z", "seed": 0, "out_dir": "out",
///   "tolerances": { "haus_tol": 0.05 } }
/// ```
///
/// Only `landscape` is required. Tolerances not listed keep their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub landscape: String,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
    /// Defaults to half the catalog bound `ε_max`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Defaults to `ε_max, ε_max/2, ε_max/4`.
    #[serde(default)]
    pub epsilon_sweep: Vec<f64>,
    /// Scale `δ` of the auxiliary function `δ(1 + cos u)` on every circle.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub coefficients: CoeffFlag,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn for_landscape(name: &str) -> Self {
        Self {
            landscape: name.to_string(),
            overrides: BTreeMap::new(),
            epsilon: None,
            epsilon_sweep: Vec::new(),
            delta: default_delta(),
            coefficients: CoeffFlag::Z,
            seed: 0,
            out_dir: None,
            tolerances: Tolerances::default(),
        }
    }

    /// Parses and validates a config document.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let c: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::Config(format!("`{name}` must be positive and finite")))
            }
        };
        positive("delta", self.delta)?;
        if let Some(e) = self.epsilon {
            positive("epsilon", e)?;
        }
        for &e in &self.epsilon_sweep {
            positive("epsilon_sweep", e)?;
        }
        if self.overrides.values().any(|v| !v.is_finite()) {
            return Err(CliError::Config("overrides must be finite".into()));
        }
        self.tolerances.validate().map_err(CliError::from)
    }

    pub fn landscape(&self) -> Result<Landscape, CliError> {
        lookup_with(&self.landscape, &self.overrides).map_err(CliError::from)
    }

    fn epsilon_max(l: &Landscape) -> f64 {
        l.epsilon_max.unwrap_or(FALLBACK_EPSILON_MAX)
    }

    pub fn epsilon_for(&self, l: &Landscape) -> f64 {
        self.epsilon.unwrap_or(Self::epsilon_max(l) / 2.0)
    }

    /// The sweep, sorted from largest to smallest.
    pub fn sweep_for(&self, l: &Landscape) -> Vec<f64> {
        let mut s = if self.epsilon_sweep.is_empty() {
            let e = Self::epsilon_max(l);
            vec![e, e / 2.0, e / 4.0]
        } else {
            self.epsilon_sweep.clone()
        };
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn detect_options(&self) -> DetectOptions {
        DetectOptions {
            seed: self.seed,
            ..DetectOptions::default()
        }
    }

    pub fn auxiliaries(&self, set: &CriticalSet) -> Vec<Auxiliary> {
        vec![
            Auxiliary {
                scale: self.delta,
                phase: 0.0,
            };
            set.circles.len()
        ]
    }
}
