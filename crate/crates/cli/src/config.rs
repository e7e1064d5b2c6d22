//! Config ingestion: JSON file, dotted `--set` overrides, defaults.
//!
//! The file's top level carries the scenario keys directly, plus optional
//! `sim`, `sweep` and `modes` sections. Precedence is flags over file over
//! defaults; `--set` edits the merged JSON tree before deserialization, so
//! `--set sim.n_packets=50000` and `--set arrival_rate_pps=0` both work.

use std::fmt;
use std::fs;
use std::path::Path;

use delaylab_core::scenario::{normalize_config, RawScenarioConfig, ScenarioParams};
use delaylab_core::sweep::AxisSpec;
use delaylab_core::{DispersionMode, ModeFlags, SimSettings, TwVarianceMode};
use serde::Deserialize;
use serde_json::Value;

/// Fixed default seed so plain invocations are reproducible.
pub const DEFAULT_SEED: u64 = 0xD1CE;

#[derive(Debug)]
pub struct ConfigFailure(pub String);

impl fmt::Display for ConfigFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigFailure {}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigFailure> {
    Err(ConfigFailure(msg.into()))
}

/// `sim` section of the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n_packets: Option<u64>,
    pub warmup: Option<u64>,
    pub seed: Option<u64>,
    pub replications: Option<u32>,
}

/// `sweep` section of the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
}

/// `modes` section of the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    pub dispersion: Option<DispersionMode>,
    pub tw_variance: Option<TwVarianceMode>,
    pub exclusion_zone: Option<bool>,
    pub frozen_topology: Option<bool>,
}

/// Parsed and merged configuration, before command-specific flag overrides.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub params: ScenarioParams,
    pub sim: Option<SimSection>,
    pub sweep: Option<SweepSection>,
    pub modes: ModesSection,
}

/// Apply one dotted override to a JSON tree, creating objects on the way.
/// The value parses as JSON when it can (numbers, booleans, arrays) and
/// falls back to a string.
fn apply_override(tree: &mut Value, key_value: &str) -> Result<(), ConfigFailure> {
    let Some((path, raw_value)) = key_value.split_once('=') else {
        return fail(format!("override `{key_value}` is not KEY=VALUE"));
    };
    if path.is_empty() {
        return fail(format!("override `{key_value}` has an empty key"));
    }
    let value: Value =
        serde_json::from_str(raw_value).unwrap_or_else(|_| Value::String(raw_value.to_string()));
    let mut node = tree;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            ConfigFailure(format!("`{}` is not an object", segments[..i].join(".")))
        })?;
        if i == segments.len() - 1 {
            obj.insert(segment.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(segment.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("segments is non-empty");
}

/// Load the config file (if any), apply overrides, merge onto the defaults,
/// and validate. Errors name the offending field or key.
pub fn load(
    config_path: Option<&Path>,
    overrides: &[String],
) -> Result<LoadedConfig, ConfigFailure> {
    let mut tree: Value = match config_path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigFailure(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| ConfigFailure(format!("{} is not valid JSON: {e}", path.display())))?
        }
        None => Value::Object(Default::default()),
    };
    if !tree.is_object() {
        return fail("config root must be a JSON object");
    }
    for kv in overrides {
        apply_override(&mut tree, kv)?;
    }

    let obj = tree.as_object_mut().expect("checked above");
    let sim: Option<SimSection> = match obj.remove("sim") {
        Some(Value::Null) | None => None,
        Some(v) => Some(
            serde_json::from_value(v).map_err(|e| ConfigFailure(format!("sim section: {e}")))?,
        ),
    };
    let sweep: Option<SweepSection> = match obj.remove("sweep") {
        Some(Value::Null) | None => None,
        Some(v) => Some(
            serde_json::from_value(v).map_err(|e| ConfigFailure(format!("sweep section: {e}")))?,
        ),
    };
    let modes: ModesSection = match obj.remove("modes") {
        Some(Value::Null) | None => ModesSection::default(),
        Some(v) => {
            serde_json::from_value(v).map_err(|e| ConfigFailure(format!("modes section: {e}")))?
        }
    };

    let file_scenario: RawScenarioConfig = serde_json::from_value(Value::Object(obj.clone()))
        .map_err(|e| ConfigFailure(e.to_string()))?;
    let merged = RawScenarioConfig::defaults().merged(&file_scenario);
    let params = normalize_config(&merged).map_err(|e| ConfigFailure(e.to_string()))?;

    Ok(LoadedConfig {
        params,
        sim,
        sweep,
        modes,
    })
}

impl LoadedConfig {
    /// Sim settings with file values over defaults.
    pub fn sim_settings(&self) -> SimSettings {
        let section = self.sim.clone().unwrap_or_default();
        let defaults = SimSettings {
            seed: DEFAULT_SEED,
            ..SimSettings::default()
        };
        SimSettings {
            n_packets: section.n_packets.unwrap_or(defaults.n_packets),
            warmup: section.warmup.unwrap_or(defaults.warmup),
            seed: section.seed.unwrap_or(defaults.seed),
            replications: section.replications.unwrap_or(defaults.replications),
        }
    }

    /// Mode flags with file values over defaults.
    pub fn mode_flags(&self) -> ModeFlags {
        ModeFlags {
            dispersion: self.modes.dispersion.unwrap_or_default(),
            tw_variance: self.modes.tw_variance.unwrap_or_default(),
            exclusion_zone: self.modes.exclusion_zone.unwrap_or(false),
            frozen_topology: self.modes.frozen_topology.unwrap_or(false),
        }
    }
}
