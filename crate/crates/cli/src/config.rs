//! Configuration resolution. Each command has a resolved record with
//! concrete defaults; values are layered as
//! defaults < `CAYLEY_SPECTRA_SEED` < config file < command-line flags,
//! and the merged object is deserialized with unknown keys rejected.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use cayley_spectra::molecule::{DEFAULT_FIXED_POINT_TOL, DEFAULT_RESONANCE_TOL};
use cayley_spectra::spectra::DEFAULT_CLUSTER_TOL;

use crate::CliError;

pub const SEED_ENV: &str = "CAYLEY_SPECTRA_SEED";
pub const DEFAULT_SEED: u64 = 7;

pub const COMMANDS: [&str; 9] =
    ["group", "graph", "spectrum", "irreps", "pairings", "fundamental", "truncate", "flow", "molecule"];

/// A parsed config file: an object with an optional shared `seed` and one
/// optional section per command.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    root: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        let Value::Object(root) = value else {
            return Err(CliError::usage("config file must be a JSON object"));
        };
        for (key, v) in &root {
            if key == "seed" {
                continue;
            }
            if !COMMANDS.contains(&key.as_str()) {
                return Err(CliError::usage(format!("unknown config key {key:?}; expected \"seed\" or a command name")));
            }
            if !v.is_object() {
                return Err(CliError::usage(format!("config section {key:?} must be an object")));
            }
        }
        Ok(ConfigFile { root })
    }
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| CliError::usage(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Merge the layers for `command` into `T`. `seeded` commands take the
/// environment and top-level file seed.
pub fn resolve<T, A>(command: &str, file: Option<&ConfigFile>, cli: &A, seeded: bool) -> Result<T, CliError>
where
    T: Default + Serialize + DeserializeOwned,
    A: Serialize,
{
    let Value::Object(mut merged) = serde_json::to_value(T::default()).map_err(CliError::io)? else {
        unreachable!("config records serialize to objects")
    };
    if seeded {
        if let Some(seed) = env_seed()? {
            merged.insert("seed".into(), seed.into());
        }
    }
    if let Some(file) = file {
        if seeded {
            if let Some(seed) = file.root.get("seed") {
                merged.insert("seed".into(), seed.clone());
            }
        }
        if let Some(Value::Object(section)) = file.root.get(command) {
            merged.extend(section.clone());
        }
    }
    if let Value::Object(flags) = serde_json::to_value(cli).map_err(CliError::io)? {
        merged.extend(flags.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::usage(format!("invalid {command} configuration: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupConfig {
    pub group: String,
    pub out: Option<String>,
}

impl Default for GroupConfig {
    fn default() -> Self {
        GroupConfig { group: "ip".into(), out: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphConfig {
    pub group: String,
    /// `dot` or `json`.
    pub format: String,
    pub out: Option<String>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { group: "ip".into(), format: "dot".into(), out: None }
    }
}

/// Shared by `spectrum`, `irreps` and `pairings`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// `adjacency`, `c60`, `squared:<irrep>` or `random`.
    pub model: String,
    pub seed: u64,
    /// Word-distance support of the `random` model.
    pub support_range: usize,
    pub cluster_tol: f64,
    pub out: Option<String>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            model: "adjacency".into(),
            seed: DEFAULT_SEED,
            support_range: 2,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FundamentalConfig {
    pub irrep: String,
    /// `squared` or `truncate`.
    pub method: String,
    pub metric: String,
    pub epsilon: f64,
    pub sign: String,
    /// Truncation grid size; `None` keeps the default grid.
    pub samples: Option<usize>,
    pub out: Option<String>,
}

impl Default for FundamentalConfig {
    fn default() -> Self {
        FundamentalConfig {
            irrep: "Hg".into(),
            method: "squared".into(),
            metric: "angular".into(),
            epsilon: 1e-3,
            sign: "plus".into(),
            samples: None,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncateConfig {
    /// One label or `all`.
    pub irrep: String,
    pub metric: String,
    pub epsilon: f64,
    pub sign: String,
    pub samples: Option<usize>,
    pub gap_tol: f64,
    pub cluster_tol: f64,
    pub out_dir: String,
}

impl Default for TruncateConfig {
    fn default() -> Self {
        TruncateConfig {
            irrep: "all".into(),
            metric: "angular".into(),
            epsilon: 1e-3,
            sign: "plus".into(),
            samples: None,
            gap_tol: 1e-6,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            out_dir: "results/truncate".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowCliConfig {
    /// `all`, or a comma list such as `Ag-Hg,T1g-Gg` (a repeated irrep
    /// gives the same-irrep control).
    pub pairs: String,
    /// `K`, `disorder` or `none`.
    pub perturb: String,
    pub s: f64,
    pub width: f64,
    pub seed: u64,
    pub samples: usize,
    pub threshold: f64,
    pub refine_tol: f64,
    pub cluster_tol: f64,
    /// Lowest eigenvalue curves drawn per plot.
    pub plot_levels: usize,
    pub out_dir: String,
}

impl Default for FlowCliConfig {
    fn default() -> Self {
        FlowCliConfig {
            pairs: "all".into(),
            perturb: "K".into(),
            s: 0.1,
            width: 1.0,
            seed: DEFAULT_SEED,
            samples: 401,
            threshold: 1e-3,
            refine_tol: 1e-6,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            plot_levels: 10,
            out_dir: "results/flow".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MoleculeConfig {
    /// Seed pose `x,y,z,ax,ay,az,angle`.
    pub seed: String,
    pub kernel: String,
    /// `start:end:count` in ω.
    pub sweep: String,
    pub force_site: usize,
    pub fixed_point_tol: f64,
    pub resonance_tol: f64,
    pub out_dir: String,
}

impl Default for MoleculeConfig {
    fn default() -> Self {
        MoleculeConfig {
            seed: "0.3,0.7,1.9,0.2,-0.4,1.0,0.37".into(),
            kernel: "exp:r0=1.0".into(),
            sweep: "0:3:300".into(),
            force_site: 0,
            fixed_point_tol: DEFAULT_FIXED_POINT_TOL,
            resonance_tol: DEFAULT_RESONANCE_TOL,
            out_dir: "results/molecule".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn file(v: Value) -> ConfigFile {
        let Value::Object(root) = v else { panic!() };
        ConfigFile { root }
    }

    #[test]
    fn layers_override_in_order() {
        let f = file(json!({"seed": 11, "flow": {"s": 0.2, "samples": 51}}));
        let cfg: FlowCliConfig = resolve("flow", Some(&f), &json!({"samples": 21, "pairs": null}), true).unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.s, 0.2);
        assert_eq!(cfg.samples, 21);
        assert_eq!(cfg.pairs, "all");
    }

    #[test]
    fn unknown_section_key_is_rejected() {
        let f = file(json!({"flow": {"bogus": 1}}));
        let err = resolve::<FlowCliConfig, _>("flow", Some(&f), &json!({}), true).unwrap_err();
        assert!(err.message.contains("bogus"), "{}", err.message);
    }

    #[test]
    fn unseeded_commands_ignore_the_shared_seed() {
        let f = file(json!({"seed": 3}));
        let cfg: MoleculeConfig = resolve("molecule", Some(&f), &json!({}), false).unwrap();
        assert_eq!(cfg, MoleculeConfig::default());
    }
}
