//! Experiment configuration: a JSON file whose keys mirror the command-line
//! flags, with flags taking precedence.

use std::path::PathBuf;

use cflab::cfspace::MeasureValue;
use cflab::groups::{GroupDescriptor, GroupKind};
use cflab::io::{group_from_value, IoError};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Json(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// All settings of one run. Group, scheme, elements and sets are kept as
/// raw JSON until the group is known.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<Value>,
    /// Path of a scheme file, or an inline scheme object.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max: Option<u64>,
    /// Constant Følner tolerance as an exact rational such as `"1/10"`; the
    /// default schedule is `1/(n+2)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Fills every unset field from `base`.
    pub fn or(self, base: ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            group: self.group.or(base.group),
            scheme: self.scheme.or(base.scheme),
            depth: self.depth.or(base.depth),
            radii: self.radii.or(base.radii),
            budget: self.budget.or(base.budget),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            level: self.level.or(base.level),
            l_max: self.l_max.or(base.l_max),
            eps: self.eps.or(base.eps),
            elements: self.elements.or(base.elements),
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            out: self.out.or(base.out),
        }
    }

    /// Checks field ranges and that the group, when given, is valid.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == Some(0) {
            return Err(ConfigError::Invalid("trials must be positive".into()));
        }
        if let Some(e) = &self.eps {
            eps_of(e)?;
        }
        if self.depth == Some(0) {
            return Err(ConfigError::Invalid("depth must be at least 1".into()));
        }
        if let Some(g) = &self.group {
            group_of(g)?;
        }
        match &self.scheme {
            None | Some(Value::String(_)) | Some(Value::Object(_)) => {}
            Some(_) => return Err(ConfigError::Invalid("scheme: expected a path or an inline scheme".into())),
        }
        Ok(())
    }
}

/// A positive exact tolerance.
pub fn eps_of(s: &str) -> Result<MeasureValue, ConfigError> {
    let bad = || ConfigError::Invalid(format!("eps: expected a positive rational such as 1/10, got `{s}`"));
    let e: MeasureValue = s.trim().parse().map_err(|_| bad())?;
    if e <= MeasureValue::from_integer(0.into()) {
        return Err(bad());
    }
    Ok(e)
}

/// Parses and validates a JSON config file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// A group given as descriptor JSON or as a short name: `Z`, `Z^d`,
/// `sum:o1,o2,…` (cyclic orders), `heisenberg`.
pub fn group_of(v: &Value) -> Result<GroupDescriptor, ConfigError> {
    match v {
        Value::String(s) => group_shorthand(s),
        other => Ok(group_from_value(other, "group")?),
    }
}

fn group_shorthand(s: &str) -> Result<GroupDescriptor, ConfigError> {
    let bad = || ConfigError::Invalid(format!("group: unknown group `{s}`"));
    let t = s.trim().to_ascii_lowercase();
    if t.starts_with('{') {
        let v: Value = serde_json::from_str(&t).map_err(|e| ConfigError::Json(e.to_string()))?;
        return Ok(group_from_value(&v, "group")?);
    }
    if t == "z" {
        return Ok(GroupDescriptor::integers());
    }
    if let Some(d) = t.strip_prefix("z^") {
        let d: usize = d.parse().map_err(|_| bad())?;
        if d == 0 || d > cflab::io::DIM_LIMIT as usize {
            return Err(bad());
        }
        return Ok(GroupDescriptor::lattice(d));
    }
    if let Some(o) = t.strip_prefix("sum:") {
        let orders = o.split(',').map(|x| x.trim().parse::<u32>().map_err(|_| bad())).collect::<Result<Vec<_>, _>>()?;
        return GroupDescriptor::new(GroupKind::DirectSum { orders }).map_err(|e| ConfigError::Invalid(format!("group: {e}")));
    }
    if t == "heisenberg" {
        return Ok(GroupDescriptor::heisenberg());
    }
    Err(bad())
}

/// Radii given as `a,b,c`, `lo..hi` or `lo..=hi`.
pub fn parse_radii(s: &str) -> Result<Vec<u64>, ConfigError> {
    let bad = || ConfigError::Invalid(format!("radii: cannot read `{s}`"));
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let (hi, inclusive) = match hi.strip_prefix('=') {
            Some(h) => (h, true),
            None => (hi, false),
        };
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        let hi = if inclusive { hi } else { hi.checked_sub(1).ok_or_else(bad)? };
        if hi < lo || hi - lo > 1_000_000 {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_groups() {
        assert_eq!(group_shorthand("Z").unwrap(), GroupDescriptor::integers());
        assert_eq!(group_shorthand("Z^2").unwrap(), GroupDescriptor::lattice(2));
        assert_eq!(group_shorthand("sum:2").unwrap(), GroupDescriptor::direct_sum(vec![2]).unwrap());
        assert_eq!(group_shorthand("heisenberg").unwrap(), GroupDescriptor::heisenberg());
        assert!(group_shorthand("free").is_err());
        assert!(group_shorthand("sum:1").is_err());
        assert!(group_shorthand("Z^0").is_err());
    }

    #[test]
    fn radii_forms() {
        assert_eq!(parse_radii("0,2,5").unwrap(), vec![0, 2, 5]);
        assert_eq!(parse_radii("1..4").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_radii("1..=4").unwrap(), vec![1, 2, 3, 4]);
        assert!(parse_radii("4..1").is_err());
        assert!(parse_radii("x").is_err());
    }

    #[test]
    fn config_files() {
        let cfg = parse_config(r#"{"group": "Z", "depth": 3, "radii": [0, 1], "seed": 4}"#).unwrap();
        assert_eq!(cfg.depth, Some(3));
        assert!(parse_config(r#"{"depht": 3}"#).is_err());
        assert!(parse_config(r#"{"trials": 0}"#).is_err());
        assert!(parse_config(r#"{"eps": "1/10"}"#).is_ok());
        assert!(parse_config(r#"{"eps": "-1/10"}"#).is_err());
        assert!(parse_config(r#"{"eps": "1/0"}"#).is_err());
        assert!(parse_config(r#"{"group": "nope"}"#).is_err());
        let flags = ExperimentConfig { depth: Some(5), ..Default::default() };
        assert_eq!(flags.or(cfg).depth, Some(5));
    }
}
