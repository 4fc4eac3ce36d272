//! JSON configuration with one block per command.

use std::path::{Path, PathBuf};

use cohesive_core::experiments::{default_c_exponent, default_ladder, FigureParams, SweepTolerances};
use cohesive_core::law::LawSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Validate,
    Law,
    Ode,
    Critical,
    Sweep,
    Sharp,
    Figures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Law => "law",
            Command::Ode => "ode",
            Command::Critical => "critical",
            Command::Sweep => "sweep",
            Command::Sharp => "sharp",
            Command::Figures => "figures",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RegimeName {
    Prefractured,
    Fractured,
    Elastic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub command: Option<Command>,
    pub out: Option<PathBuf>,
    pub law: Option<LawSpec>,
    #[serde(default)]
    pub validate: ValidateBlock,
    #[serde(default)]
    pub table: TableBlock,
    #[serde(default)]
    pub ode: OdeBlock,
    #[serde(default)]
    pub critical: CriticalBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub sharp: SharpBlock,
    #[serde(default)]
    pub figures: FigureParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateBlock {
    pub grid_size: usize,
}

impl Default for ValidateBlock {
    fn default() -> Self {
        Self { grid_size: 2000 }
    }
}

/// Parameters of the `law` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableBlock {
    pub points: usize,
}

impl Default for TableBlock {
    fn default() -> Self {
        Self { points: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeBlock {
    pub alpha: Option<f64>,
    pub m: Option<f64>,
    pub t_max: f64,
    pub tol: f64,
}

impl Default for OdeBlock {
    fn default() -> Self {
        Self {
            alpha: None,
            m: None,
            t_max: 50.0,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriticalBlock {
    pub eps: Option<f64>,
    pub c: Option<f64>,
    #[serde(rename = "L")]
    pub length: f64,
    pub tol: f64,
}

impl Default for CriticalBlock {
    fn default() -> Self {
        Self {
            eps: None,
            c: None,
            length: 1.0,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub regime: Option<RegimeName>,
    /// Fixed `c` of the pre-fractured regime.
    pub c0: f64,
    /// Elongation of the elastic regime.
    pub a: Option<f64>,
    pub c_exponent: f64,
    pub eps_list: Vec<f64>,
    #[serde(rename = "L")]
    pub length: f64,
    pub tolerances: SweepTolerances,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            regime: None,
            c0: 0.3,
            a: None,
            c_exponent: default_c_exponent(),
            eps_list: default_ladder(),
            length: 1.0,
            tolerances: SweepTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SharpBlock {
    pub a: Option<f64>,
    #[serde(rename = "L")]
    pub length: f64,
    pub kmax: usize,
}

impl Default for SharpBlock {
    fn default() -> Self {
        Self {
            a: None,
            length: 1.0,
            kmax: 1,
        }
    }
}

impl CliConfig {
    /// Parses a config, reporting the path of the offending key on failure.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
            path: e.path().to_string(),
            msg: e.inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: ".".into(),
            msg: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_blocks_and_defaults() {
        let cfg = CliConfig::from_json(
            r#"{"command":"critical","law":{"family":"prototype_q","sigma_c":1.0,"q":1.0},
                "critical":{"eps":1e-3,"c":0.3}}"#,
        )
        .unwrap();
        assert_eq!(cfg.command, Some(Command::Critical));
        assert_eq!(cfg.critical.eps, Some(1e-3));
        assert_eq!(cfg.critical.length, 1.0);
        assert_eq!(cfg.sweep.eps_list, default_ladder());
    }

    #[test]
    fn unknown_key_reports_its_path() {
        let err = CliConfig::from_json(r#"{"sweep":{"tolerances":{"shot":1e-9}}}"#).unwrap_err();
        match err {
            CliError::Config { path, msg } => {
                assert_eq!(path, "sweep.tolerances.shot");
                assert!(msg.contains("shot"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_type_reports_its_path() {
        let err = CliConfig::from_json(r#"{"critical":{"eps":"small"}}"#).unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "critical.eps"), "{err:?}");
    }
}
