//! Simulation grid configuration and its layered resolution.
//!
//! Values are resolved in increasing precedence: built-in defaults, a JSON
//! config file, `key=value` overrides, then explicit command-line flags.
//! Every layer is a flat JSON object with the field names of
//! [`SimulationConfig`]; unknown keys are rejected.

use std::collections::HashSet;

use causal_averaging_core::discovery::Method;
use causal_averaging_core::synth::{DgpKind, EffectSize};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Result, RunnerError};

pub const DEFAULT_MASTER_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub sample_sizes: Vec<usize>,
    #[serde(with = "names")]
    pub dgp_kinds: Vec<DgpKind>,
    #[serde(with = "names")]
    pub effect_sizes: Vec<EffectSize>,
    pub lambdas: Vec<f64>,
    #[serde(with = "names")]
    pub methods: Vec<Method>,
    pub reps: usize,
    pub bootstrap_m: usize,
    pub master_seed: u64,
    /// Worker threads; `None` lets the pool pick one per core.
    pub threads: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            sample_sizes: vec![10, 50, 100, 500],
            dgp_kinds: DgpKind::ALL.to_vec(),
            effect_sizes: EffectSize::ALL.to_vec(),
            lambdas: vec![0.1, 0.9],
            methods: Method::ALL.to_vec(),
            reps: 100,
            bootstrap_m: 100,
            master_seed: DEFAULT_MASTER_SEED,
            threads: None,
        }
    }
}

/// Fields holding lists; scalar overrides for them are wrapped.
pub const LIST_KEYS: [&str; 5] = [
    "sample_sizes",
    "dgp_kinds",
    "effect_sizes",
    "lambdas",
    "methods",
];

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        fn nonempty_unique<T: std::fmt::Debug>(
            name: &str,
            v: &[T],
            key: impl Fn(&T) -> String,
        ) -> Result<()> {
            if v.is_empty() {
                return Err(RunnerError::Config(format!("{name} must not be empty")));
            }
            let mut seen = HashSet::new();
            for item in v {
                if !seen.insert(key(item)) {
                    return Err(RunnerError::Config(format!("{name} lists {item:?} twice")));
                }
            }
            Ok(())
        }
        nonempty_unique("sample_sizes", &self.sample_sizes, |n| n.to_string())?;
        nonempty_unique("dgp_kinds", &self.dgp_kinds, |k| k.as_str().into())?;
        nonempty_unique("effect_sizes", &self.effect_sizes, |k| k.as_str().into())?;
        nonempty_unique("lambdas", &self.lambdas, |l| l.to_bits().to_string())?;
        nonempty_unique("methods", &self.methods, |m| m.as_str().into())?;
        if self.sample_sizes.contains(&0) {
            return Err(RunnerError::Config("sample sizes must be positive".into()));
        }
        if self.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(RunnerError::Config(
                "lambdas must be finite and non-negative".into(),
            ));
        }
        if self.reps == 0 {
            return Err(RunnerError::Config("reps must be at least 1".into()));
        }
        if self.bootstrap_m == 0 {
            return Err(RunnerError::Config("bootstrap_m must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(RunnerError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.sample_sizes.len()
            * self.dgp_kinds.len()
            * self.effect_sizes.len()
            * self.lambdas.len()
            * self.methods.len()
    }

    pub fn run_count(&self) -> usize {
        self.cell_count() * self.reps
    }
}

/// Accumulates configuration layers over the defaults.
#[derive(Debug, Clone)]
pub struct ConfigBuilder {
    layers: Map<String, Value>,
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        let Value::Object(layers) =
            serde_json::to_value(SimulationConfig::default()).expect("defaults serialize")
        else {
            unreachable!("config serializes to an object")
        };
        ConfigBuilder { layers }
    }
}

impl ConfigBuilder {
    /// Overlays a JSON document: either a flat config object or a run
    /// manifest, whose `config` member is used.
    pub fn merge_json(&mut self, text: &str) -> Result<&mut Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| RunnerError::Config(format!("config file is not valid JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(RunnerError::Config(
                "config file must hold a JSON object".into(),
            ));
        };
        if obj.contains_key("version") {
            if let Some(Value::Object(inner)) = obj.remove("config") {
                obj = inner;
            }
        }
        for (k, v) in obj {
            self.layers.insert(k, v);
        }
        Ok(self)
    }

    /// Applies one `key=value` override. The value is read as JSON when it
    /// parses and as a bare string otherwise; comma-separated values become
    /// lists.
    pub fn set_str(&mut self, assignment: &str) -> Result<&mut Self> {
        let Some((key, raw)) = assignment.split_once('=') else {
            return Err(RunnerError::Config(format!(
                "override `{assignment}` is not key=value"
            )));
        };
        let key = key.trim();
        let value = parse_loose(raw.trim());
        self.set(key, value);
        Ok(self)
    }

    pub fn set(&mut self, key: &str, value: Value) -> &mut Self {
        let value = if LIST_KEYS.contains(&key) && !value.is_array() {
            Value::Array(vec![value])
        } else {
            value
        };
        self.layers.insert(key.to_string(), value);
        self
    }

    pub fn build(&self) -> Result<SimulationConfig> {
        let cfg: SimulationConfig = serde_json::from_value(Value::Object(self.layers.clone()))
            .map_err(|e| RunnerError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_loose(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(|p| parse_loose(p.trim())).collect());
    }
    Value::String(raw.to_string())
}

/// Enums that travel through config files and CSV by name.
pub trait Named: Sized + Copy {
    const EXPECTED: &'static str;
    fn name(self) -> &'static str;
    fn from_name(s: &str) -> Option<Self>;
}

impl Named for DgpKind {
    const EXPECTED: &'static str = "heteroskedastic, nonlinear";
    fn name(self) -> &'static str {
        self.as_str()
    }
    fn from_name(s: &str) -> Option<Self> {
        DgpKind::parse(s)
    }
}

impl Named for EffectSize {
    const EXPECTED: &'static str = "large, small";
    fn name(self) -> &'static str {
        self.as_str()
    }
    fn from_name(s: &str) -> Option<Self> {
        EffectSize::parse(s)
    }
}

impl Named for Method {
    const EXPECTED: &'static str = "ANM, Regression";
    fn name(self) -> &'static str {
        self.as_str()
    }
    fn from_name(s: &str) -> Option<Self> {
        Method::parse(s)
    }
}

pub fn parse_named<T: Named>(s: &str) -> std::result::Result<T, String> {
    T::from_name(s).ok_or_else(|| format!("unknown value `{s}`, expected one of: {}", T::EXPECTED))
}

mod names {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{parse_named, Named};

    pub fn serialize<T: Named, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.name()))
    }

    pub fn deserialize<'de, T: Named, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_named(s).map_err(D::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_the_full_grid() {
        let cfg = ConfigBuilder::default().build().unwrap();
        assert_eq!(cfg, SimulationConfig::default());
        assert_eq!(cfg.run_count(), 6400);
    }

    #[test]
    fn layers_override_in_order() {
        let mut b = ConfigBuilder::default();
        b.merge_json(r#"{"reps": 3, "sample_sizes": [10, 50]}"#)
            .unwrap();
        b.set_str("reps=5").unwrap();
        b.set_str("methods=anm").unwrap();
        let cfg = b.build().unwrap();
        assert_eq!(cfg.reps, 5);
        assert_eq!(cfg.sample_sizes, vec![10, 50]);
        assert_eq!(cfg.methods, vec![Method::Anm]);
    }

    #[test]
    fn comma_lists_and_strings() {
        let mut b = ConfigBuilder::default();
        b.set_str("lambdas=0,0.5").unwrap();
        b.set_str("dgp_kinds=nonlinear").unwrap();
        let cfg = b.build().unwrap();
        assert_eq!(cfg.lambdas, vec![0.0, 0.5]);
        assert_eq!(cfg.dgp_kinds, vec![DgpKind::Nonlinear]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut b = ConfigBuilder::default();
        b.merge_json(r#"{"repetitions": 3}"#).unwrap();
        assert!(matches!(b.build(), Err(RunnerError::Config(_))));
        let mut b = ConfigBuilder::default();
        b.set_str("dgp_kinds=linear").unwrap();
        let err = b.build().unwrap_err().to_string();
        assert!(err.contains("heteroskedastic, nonlinear"), "{err}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        for bad in [
            "reps=0",
            "bootstrap_m=0",
            "lambdas=-1",
            "sample_sizes=[]",
            "threads=0",
            "sample_sizes=10,10",
        ] {
            let mut b = ConfigBuilder::default();
            b.set_str(bad).unwrap();
            assert!(b.build().is_err(), "{bad}");
        }
        assert!(ConfigBuilder::default().set_str("reps").is_err());
    }

    #[test]
    fn manifest_round_trips() {
        let cfg = SimulationConfig {
            reps: 2,
            ..Default::default()
        };
        let manifest = serde_json::json!({"version": "0.1.0", "master_seed": 1, "config": cfg});
        let mut b = ConfigBuilder::default();
        b.merge_json(&manifest.to_string()).unwrap();
        assert_eq!(b.build().unwrap(), cfg);
    }
}
