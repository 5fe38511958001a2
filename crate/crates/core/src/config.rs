//! TOML run configuration: `[scene]`, `[weights]`, `[agent]`, `[episode]`,
//! `[demos]`, `[train]`, `[robustness]` and `[ablation]` sections.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ddpg::AgentConfig;
use crate::error::{Error, Result};
use crate::harness::{AblationSpec, RobustnessSpec};
use crate::reward::WeightConfig;
use crate::sim::SceneConfig;
use crate::train::{DemoConfig, EpisodeConfig, TrainConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneConfig,
    pub weights: WeightConfig,
    pub agent: AgentConfig,
    pub episode: EpisodeConfig,
    pub demos: DemoConfig,
    pub train: TrainConfig,
    pub robustness: RobustnessSpec,
    pub ablation: AblationSpec,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse `path`; relative demo file paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for f in &mut cfg.demos.files {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Scene with defaults filled in, so the config is self-describing.
    pub fn resolved(&self) -> RunConfig {
        RunConfig { scene: self.scene.resolved(), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.resolved().validate()?;
        self.weights.validate()?;
        self.agent.validate()?;
        self.episode.validate()?;
        self.train.validate()?;
        self.robustness.validate()?;
        self.ablation.validate()?;
        Ok(())
    }
}
