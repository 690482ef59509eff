//! Run configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::descent::StepSchedule;
use crate::error::{NavError, Result};
use crate::experiments::{generate_egg_world, generate_elliptical_world, EggWorldParams, EllipticalWorldParams};
use crate::geometry::{load_world, World};
use crate::potentials::PotentialSpec;
use crate::sensors::{RigConfig, SensorRig};

/// Where the worlds come from. Generated sources produce `count` worlds
/// with generator seeds `params.seed, params.seed + 1, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorldSource {
    File {
        path: PathBuf,
    },
    Elliptical {
        #[serde(default = "one")]
        count: usize,
        #[serde(default)]
        params: EllipticalWorldParams,
    },
    Egg {
        #[serde(default = "one")]
        count: usize,
        #[serde(default)]
        params: EggWorldParams,
    },
}

fn one() -> usize {
    1
}

fn default_starts() -> usize {
    5
}

fn default_max_steps() -> usize {
    100
}

fn default_stop_radius() -> f64 {
    0.2
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_schedule() -> StepSchedule {
    StepSchedule { eps0: 5e-2, zeta: 5e-3 }
}

fn default_ladder() -> Vec<f64> {
    vec![8.0, 16.0, 32.0, 64.0]
}

fn default_grid() -> usize {
    8
}

/// Options of the `bias-diag` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasConfig {
    /// Points per axis of the probe grid over the workspace's bounding square.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Orders for the decay fits.
    #[serde(default = "default_ladder")]
    pub ks: Vec<f64>,
    /// Monte Carlo draws per point; `0` skips sampling.
    #[serde(default)]
    pub draws: usize,
    /// Request the closed form, which needs the circle-fit estimator.
    #[serde(default = "yes")]
    pub closed_form: bool,
    /// Also tabulate saddle quotients over `ks`.
    #[serde(default)]
    pub quotients: bool,
}

fn yes() -> bool {
    true
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self { grid: default_grid(), ks: default_ladder(), draws: 0, closed_form: true, quotients: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub world: WorldSource,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub rig: RigConfig,
    #[serde(default = "default_schedule")]
    pub schedule: StepSchedule,
    /// Random start points per world, used when `start_points` is empty.
    #[serde(default = "default_starts")]
    pub starts: usize,
    /// Explicit start points, shared by every world.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub start_points: Vec<Vec<f64>>,
    /// Noise seeds per start.
    #[serde(default = "one")]
    pub seeds: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_stop_radius")]
    pub stop_radius: f64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Also run the deterministic baseline.
    #[serde(default = "yes")]
    pub baseline: bool,
    /// Orders for the deviation-versus-`k` table of `montecarlo`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_sweep: Vec<f64>,
    #[serde(default)]
    pub bias: BiasConfig,
    /// Draw `φ` contours in plots.
    #[serde(default)]
    pub contours: bool,
}

fn field_err(field: &str, message: impl Into<String>) -> NavError {
    NavError::Config { field: field.into(), message: message.into() }
}

impl RunConfig {
    /// Parses a config file. Relative world paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
            field_err(&format!("{}:{}:{}", path.display(), e.line(), e.column()), e.to_string())
        })?;
        if let WorldSource::File { path: p } = &mut cfg.world {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        PotentialSpec::new(self.potential.kind, self.potential.k).map_err(|e| field_err("potential.k", e.to_string()))?;
        StepSchedule::new(self.schedule.eps0, self.schedule.zeta).map_err(|e| field_err("schedule", e.to_string()))?;
        self.sensor_rig()?;
        if self.starts == 0 && self.start_points.is_empty() {
            return Err(field_err("starts", "need at least one start"));
        }
        if self.seeds == 0 {
            return Err(field_err("seeds", "need at least one seed"));
        }
        if !(self.stop_radius >= 0.0) {
            return Err(field_err("stop_radius", "must be non-negative"));
        }
        match &self.world {
            WorldSource::File { path } if !path.exists() => {
                return Err(field_err("world.path", format!("{} does not exist", path.display())))
            }
            WorldSource::Elliptical { count: 0, .. } | WorldSource::Egg { count: 0, .. } => {
                return Err(field_err("world.count", "need at least one world"))
            }
            _ => {}
        }
        if self.k_sweep.iter().any(|k| !(*k > 0.0)) {
            return Err(field_err("k_sweep", "orders must be positive"));
        }
        if self.bias.ks.iter().any(|k| !(*k > 0.0)) {
            return Err(field_err("bias.ks", "orders must be positive"));
        }
        if self.bias.grid == 0 {
            return Err(field_err("bias.grid", "must be positive"));
        }
        Ok(())
    }

    pub fn sensor_rig(&self) -> Result<SensorRig> {
        SensorRig::from_config(&self.rig)
    }

    pub fn step_schedule(&self) -> Result<StepSchedule> {
        StepSchedule::new(self.schedule.eps0, self.schedule.zeta)
    }

    pub fn worlds(&self) -> Result<Vec<World>> {
        match &self.world {
            WorldSource::File { path } => Ok(vec![load_world(path)?]),
            WorldSource::Elliptical { count, params } => (0..*count as u64)
                .map(|i| generate_elliptical_world(&EllipticalWorldParams { seed: params.seed + i, ..params.clone() }))
                .collect(),
            WorldSource::Egg { count, params } => (0..*count as u64)
                .map(|i| generate_egg_world(&EggWorldParams { seed: params.seed + i, ..params.clone() }))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"world": {"source": "elliptical"}, "potential": {"kind": "rimon_koditschek", "k": 7}}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.starts, 5);
        assert_eq!(cfg.seeds, 1);
        assert_eq!(cfg.max_steps, 100);
        assert_eq!(cfg.schedule, StepSchedule { eps0: 0.05, zeta: 0.005 });
        assert_eq!(cfg.rig.range_c, 7.0);
        assert_eq!(cfg.worlds().unwrap().len(), 1);
    }

    #[test]
    fn bad_fields_are_named() {
        let mut cfg: RunConfig = serde_json::from_str(
            r#"{"world": {"source": "egg", "count": 2}, "potential": {"kind": "log_barrier", "k": 10}}"#,
        )
        .unwrap();
        cfg.seeds = 0;
        assert!(matches!(cfg.validate(), Err(NavError::Config { field, .. }) if field == "seeds"));
        let err = serde_json::from_str::<RunConfig>(r#"{"world": {"source": "moon"}, "potential": {}}"#);
        assert!(err.is_err());
    }

    #[test]
    fn missing_world_file_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        std::fs::write(
            &p,
            r#"{"world": {"source": "file", "path": "nope.json"}, "potential": {"kind": "rimon_koditschek", "k": 7}}"#,
        )
        .unwrap();
        assert!(matches!(RunConfig::load(&p), Err(NavError::Config { field, .. }) if field == "world.path"));
    }
}
