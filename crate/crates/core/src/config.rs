//! TOML scenario files.
//!
//! Every section and key is optional; omitted values take the defaults of
//! [`Scenario::default`]. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::channel::ChannelParams;
use crate::energy::EnergyParams;
use crate::error::ModelError;
use crate::frame::{BchCode, FrameConstants};
use crate::metrics::{QosSpec, SystemModel};
use crate::optimizer::SolverConfig;
use crate::reliability::ReliabilityMode;
use crate::sim::{distance_grid, Scenario, StaticStrategy, DEFAULT_STRATEGIES};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("{key}: {message}")]
    Key { key: String, message: String },
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ModelSection {
    reliability: ReliabilityMode,
    psdu_code: BchCode,
    phr_code: BchCode,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            reliability: ReliabilityMode::default(),
            psdu_code: BchCode::PSDU_DEFAULT,
            phr_code: BchCode::PHR_DEFAULT,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepSection {
    start: f64,
    stop: f64,
    step: f64,
    /// Explicit list; overrides start/stop/step.
    distances: Option<Vec<f64>>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            start: 1.0,
            stop: 10.0,
            step: 0.1,
            distances: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CurvesSection {
    distance: f64,
}

impl Default for CurvesSection {
    fn default() -> Self {
        CurvesSection { distance: 8.4 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScenarioFile {
    seed: u64,
    shadowing: bool,
    channel: ChannelParams,
    energy: EnergyParams,
    frame: FrameConstants,
    model: ModelSection,
    qos: QosSpec,
    solver: SolverConfig,
    sweep: SweepSection,
    strategies: Vec<StaticStrategy>,
    curves: CurvesSection,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            seed: 0,
            shadowing: false,
            channel: ChannelParams::default(),
            energy: EnergyParams::default(),
            frame: FrameConstants::default(),
            model: ModelSection::default(),
            qos: QosSpec::default(),
            solver: SolverConfig::default(),
            sweep: SweepSection::default(),
            strategies: DEFAULT_STRATEGIES.to_vec(),
            curves: CurvesSection::default(),
        }
    }
}

impl ScenarioFile {
    fn into_scenario(self) -> Scenario {
        let distances = match self.sweep.distances {
            Some(d) => d,
            None => distance_grid(self.sweep.start, self.sweep.stop, self.sweep.step),
        };
        Scenario {
            system: SystemModel {
                channel: self.channel,
                energy: self.energy,
                frame: self.frame,
                psdu_code: self.model.psdu_code,
                phr_code: self.model.phr_code,
                reliability: self.model.reliability,
            },
            qos: self.qos,
            solver: self.solver,
            distances,
            strategies: self.strategies,
            seed: self.seed,
            shadowing: self.shadowing,
            curve_distance: self.curves.distance,
        }
    }
}

/// Parse and validate a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))?;
    let file: ScenarioFile =
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            ConfigError::Key {
                key: e.path().to_string(),
                message: e.inner().message().to_string(),
            }
        })?;
    if let Some(d) = &file.sweep.distances {
        if d.is_empty() {
            return Err(ConfigError::Key {
                key: "sweep.distances".into(),
                message: "must not be empty".into(),
            });
        }
    }
    let scenario = file.into_scenario();
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_error(text: &str) -> String {
        match parse_scenario(text) {
            Err(ConfigError::Key { key, .. }) => key,
            other => panic!("expected a key error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_the_default_scenario() {
        assert_eq!(parse_scenario("").unwrap(), Scenario::default());
    }

    #[test]
    fn sections_override_defaults() {
        let s = parse_scenario(
            r#"
            seed = 42
            shadowing = true
            [channel]
            sigma = 2.0
            [energy]
            eps_p = 10e-12
            [qos]
            n_s = 10
            [solver]
            n_t_max = 4095
            step_rule = "constant"
            [sweep]
            distances = [2.0, 3.5]
            [model]
            reliability = "strict"
            [[strategies]]
            n_cpb = 16
            n_t = 1000
            "#,
        )
        .unwrap();
        assert_eq!((s.seed, s.shadowing), (42, true));
        assert_eq!(s.system.channel.sigma, 2.0);
        assert_eq!(s.system.energy.eps_p, 10e-12);
        assert_eq!(s.qos.n_s, 10);
        assert_eq!(s.solver.n_t_max, 4095);
        assert_eq!(s.distances, vec![2.0, 3.5]);
        assert_eq!(s.system.reliability, ReliabilityMode::Strict);
        assert_eq!(s.strategies, vec![StaticStrategy::new(16, 1000)]);
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_error("[channel]\nsigma = \"loud\""), "channel.sigma");
        assert_eq!(key_error("[energy]\nwatts = 3"), "energy.watts");
        assert_eq!(
            key_error("[[strategies]]\nn_cpb = 2\nn_t = -5"),
            "strategies[0].n_t"
        );
        assert_eq!(key_error("[sweep]\ndistances = []"), "sweep.distances");
        assert!(matches!(
            parse_scenario("[qos"),
            Err(ConfigError::Syntax(_))
        ));
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let err = parse_scenario("[qos]\nn_s = 65").unwrap_err();
        assert!(err.to_string().contains("qos.n_s"), "{err}");
        let err = parse_scenario("[[strategies]]\nn_cpb = 3\nn_t = 2616").unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Invalid(ModelError::UnknownMode(3))
        ));
        let err = parse_scenario("[solver]\nalpha0 = -1.0").unwrap_err();
        assert!(err.to_string().contains("solver.alpha0"), "{err}");
    }

    #[test]
    fn shipped_default_config_matches_the_builtin_defaults() {
        let text = include_str!("../../../configs/default.toml");
        assert_eq!(parse_scenario(text).unwrap(), Scenario::default());
    }
}
