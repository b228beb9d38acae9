//! Settings shared by command-line flags and config files.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use ucp_core::grid::Scale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    ClosedForm,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Linear,
    Log,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Scale {
        match s {
            ScaleArg::Linear => Scale::Linear,
            ScaleArg::Log => Scale::Log,
        }
    }
}

/// Every option is optional so a config file and flags can be layered.
/// Field names double as config-file keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Total span of the potential.
    #[arg(long = "L", global = true)]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,

    /// Barrier height (V0 for the scaling study).
    #[arg(long = "V", global = true, allow_hyphen_values = true)]
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    /// Stage.
    #[arg(long = "G", global = true)]
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub stage: Option<u32>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmin: Option<f64>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<f64>,

    /// Number of k samples.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nk: Option<usize>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleArg>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,

    /// First stage of a saturation scan.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gmin: Option<u32>,

    /// Last stage of a saturation scan.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gmax: Option<u32>,

    /// `min,max,n` for the grid command.
    #[arg(long = "alpha-range", global = true, allow_hyphen_values = true)]
    #[serde(rename = "alpha-range", skip_serializing_if = "Option::is_none")]
    pub alpha_range: Option<String>,

    #[arg(long = "beta-range", global = true, allow_hyphen_values = true)]
    #[serde(rename = "beta-range", skip_serializing_if = "Option::is_none")]
    pub beta_range: Option<String>,

    #[arg(long = "rho-range", global = true)]
    #[serde(rename = "rho-range", skip_serializing_if = "Option::is_none")]
    pub rho_range: Option<String>,

    /// Comma-separated wavenumbers for the grid command.
    #[arg(long = "k", global = true)]
    #[serde(rename = "k", skip_serializing_if = "Option::is_none")]
    pub k_list: Option<String>,
}

impl Settings {
    /// `self` wins wherever it has a value.
    pub fn overlay(&self, base: &Settings) -> Result<Settings> {
        let mut merged = to_map(base)?;
        merged.extend(to_map(self)?);
        Ok(serde_json::from_value(Value::Object(merged))?)
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(&text).with_context(|| format!("parsing JSON config {}", path.display()));
        }
        let mut map = Map::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), n + 1))?;
            map.insert(key.trim().to_string(), parse_scalar(value.trim()));
        }
        serde_json::from_value(Value::Object(map)).with_context(|| format!("parsing config {}", path.display()))
    }

    /// JSON when the path ends in `.json`, key=value lines otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = if path.extension().is_some_and(|e| e == "json") {
            serde_json::to_string_pretty(self)? + "\n"
        } else {
            self.key_values()?.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
        };
        fs::write(path, text).with_context(|| format!("writing config {}", path.display()))
    }

    /// Set options in declaration order, strings unquoted.
    pub fn key_values(&self) -> Result<Vec<(String, String)>> {
        Ok(to_map(self)?
            .into_iter()
            .map(|(k, v)| {
                let text = match v {
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, text)
            })
            .collect())
    }
}

fn to_map(s: &Settings) -> Result<Map<String, Value>> {
    match serde_json::to_value(s)? {
        Value::Object(map) => Ok(map),
        _ => bail!("settings did not serialize to an object"),
    }
}

fn parse_scalar(text: &str) -> Value {
    match serde_json::from_str::<Value>(text) {
        Ok(v @ (Value::Number(_) | Value::Bool(_))) => v,
        _ => Value::String(text.to_string()),
    }
}

/// Parses `min,max,n`.
pub fn parse_range(text: &str, what: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        bail!("{what}: expected min,max,n but got {text:?}");
    }
    let min = parts[0].parse().with_context(|| format!("{what}: bad min"))?;
    let max = parts[1].parse().with_context(|| format!("{what}: bad max"))?;
    let n = parts[2].parse().with_context(|| format!("{what}: bad count"))?;
    Ok((min, max, n))
}

pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("{what}: bad value {p:?}")))
        .collect()
}
