//! Scenario configuration: every model, planner and simulation parameter,
//! loadable from a TOML-formatted `.cfg` file.
//!
//! The defaults reproduce the self-driving-car / pedestrian running example.
//! Start positions, grid extent and the proximity radius `rho` are not part of
//! that example's published parameter list; the defaults for them here are
//! this crate's own choices.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;
use crate::human::{Awareness, HumanObjectives};
use crate::planner::RobotObjectives;
use crate::state::{Action, ActionSet, AgentState, Dynamics};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

impl ConfigError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Dotted name of the offending field, when known.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

/// Which collision-probability computation the planner constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// First-collision probabilities via the survival recursion.
    #[default]
    Exact,
    /// Per-step marginal occupancy on the collision set (an upper bound).
    Marginal,
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMode::Exact => "exact",
            BoundMode::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// `eps ~ N(0, sigma * I)` drawn every step.
    #[default]
    Gaussian,
    /// Deterministic bias `eps0`, decaying once the danger signal is on.
    ConstantBias,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Switch {
    On,
    #[default]
    Off,
}

impl Switch {
    pub fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    #[serde(default)]
    pub dynamics: Dynamics,
    pub start: AgentState,
    pub goal: AgentState,
    pub action_set: ActionSet,
    pub theta_1: f64,
    pub theta_2: f64,
    /// Prediction horizon in steps.
    pub t_r: usize,
    pub p_th: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanConfig {
    #[serde(default)]
    pub dynamics: Dynamics,
    pub start: AgentState,
    pub goal: AgentState,
    pub action_set: ActionSet,
    pub theta_3: f64,
    pub theta_4: f64,
    pub theta_5: f64,
    pub theta_6: f64,
    /// Reference walking velocity in the `theta_4` term.
    pub v_ref: Vec<f64>,
    pub gamma: f64,
    pub omega_h: f64,
    pub beta_true: u8,
    /// Variance of each component of the Gaussian estimation error.
    pub sigma: f64,
    /// Initial estimation bias, one entry per robot state axis.
    pub eps0: Vec<f64>,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionConfig {
    pub grid: Grid,
    pub rho: f64,
    #[serde(default)]
    pub bound_mode: BoundMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    /// `P0(beta = 0)`
    pub beta_0: f64,
    /// `P0(beta = 1)`
    pub beta_1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub max_steps: usize,
    pub rng_seed: u64,
    #[serde(default)]
    pub human_randomness: Switch,
    #[serde(default)]
    pub noise_mode: NoiseMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub robot: RobotConfig,
    pub human: HumanConfig,
    pub prediction: PredictionConfig,
    pub prior: PriorConfig,
    pub simulation: SimulationConfig,
}

/// Parameters accepted by [`ScenarioConfig::set_param`].
pub const SWEEPABLE_PARAMS: &[&str] = &[
    "theta_1",
    "theta_2",
    "t_r",
    "p_th",
    "theta_3",
    "theta_4",
    "theta_5",
    "theta_6",
    "gamma",
    "omega_h",
    "beta_true",
    "sigma",
    "eta",
    "rho",
    "prior_aware",
    "max_steps",
    "rng_seed",
    "human_randomness",
];

impl Default for ScenarioConfig {
    fn default() -> Self {
        let v_r = 2.0;
        let v_h = 0.5;
        let robot_actions = ActionSet::new(vec![
            Action::new([0.0, 0.0]),
            Action::new([0.0, v_r / 2.0]),
            Action::new([0.0, v_r]),
        ])
        .expect("static action set");
        let human_actions = ActionSet::new(
            [-2.0 * v_h, -v_h, 0.0, v_h, 2.0 * v_h]
                .iter()
                .map(|&u| Action::new([u, 0.0]))
                .collect(),
        )
        .expect("static action set");
        ScenarioConfig {
            robot: RobotConfig {
                dynamics: Dynamics::Integrator,
                start: AgentState::new([0.0, 0.0]),
                goal: AgentState::new([0.0, 80.0]),
                action_set: robot_actions,
                theta_1: 1.0,
                theta_2: 0.5,
                t_r: 5,
                p_th: 0.1,
            },
            human: HumanConfig {
                dynamics: Dynamics::Integrator,
                start: AgentState::new([40.0, 10.0]),
                goal: AgentState::new([5.0, 10.0]),
                action_set: human_actions,
                theta_3: 2.5,
                theta_4: 8e-3,
                theta_5: 300.0,
                theta_6: 6e-3,
                v_ref: vec![v_h, 0.0],
                gamma: 1000.0,
                omega_h: 0.1,
                beta_true: 1,
                sigma: 1.0,
                eps0: vec![0.0, 0.0],
                eta: 0.5,
            },
            prediction: PredictionConfig {
                grid: Grid::new(vec![-20.0, 10.0], vec![v_h, 1.0], vec![131, 1])
                    .expect("static grid"),
                rho: 2.0,
                bound_mode: BoundMode::Exact,
            },
            prior: PriorConfig {
                beta_0: 0.5,
                beta_1: 0.5,
            },
            simulation: SimulationConfig {
                max_steps: 200,
                rng_seed: 0,
                human_randomness: Switch::Off,
                noise_mode: NoiseMode::Gaussian,
            },
        }
    }
}

fn check(cond: bool, field: &str, reason: &str) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, reason))
    }
}

fn finite(x: f64) -> bool {
    x.is_finite()
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.robot;
        let h = &self.human;
        let p = &self.prediction;

        let rdim = r.start.dim();
        check(
            rdim > 0 && r.start.is_finite(),
            "robot.start",
            "must be a finite, non-empty vector",
        )?;
        check(
            r.goal.dim() == rdim && r.goal.is_finite(),
            "robot.goal",
            "must be finite and match robot.start",
        )?;
        check(
            r.action_set.dim() == rdim,
            "robot.action_set",
            "action dimension must match robot.start",
        )?;
        check(
            finite(r.theta_1) && r.theta_1 > 0.0,
            "robot.theta_1",
            "must be > 0",
        )?;
        check(
            finite(r.theta_2) && r.theta_2 >= 0.0,
            "robot.theta_2",
            "must be >= 0",
        )?;
        check(r.t_r >= 1, "robot.t_r", "horizon must be at least one step")?;
        // Exhaustive enumeration over |U_R|^(T_R+1) sequences.
        let sequences = (r.action_set.len() as f64).powi(r.t_r as i32 + 1);
        check(
            sequences <= 1e7,
            "robot.t_r",
            "too many action sequences to enumerate",
        )?;
        check(
            (0.0..=1.0).contains(&r.p_th),
            "robot.p_th",
            "must lie in [0, 1]",
        )?;

        let hdim = h.start.dim();
        check(
            hdim > 0 && h.start.is_finite(),
            "human.start",
            "must be a finite, non-empty vector",
        )?;
        check(
            h.goal.dim() == hdim && h.goal.is_finite(),
            "human.goal",
            "must be finite and match human.start",
        )?;
        check(
            h.action_set.dim() == hdim,
            "human.action_set",
            "action dimension must match human.start",
        )?;
        for (name, v) in [
            ("human.theta_3", h.theta_3),
            ("human.theta_4", h.theta_4),
            ("human.theta_5", h.theta_5),
            ("human.theta_6", h.theta_6),
        ] {
            check(finite(v) && v > 0.0, name, "must be > 0")?;
        }
        check(
            h.v_ref.len() == hdim && h.v_ref.iter().all(|v| v.is_finite()),
            "human.v_ref",
            "must be finite and match human.start",
        )?;
        check(
            finite(h.gamma) && h.gamma > 0.0,
            "human.gamma",
            "must be > 0",
        )?;
        check(
            (0.0..=1.0).contains(&h.omega_h),
            "human.omega_h",
            "must lie in [0, 1]",
        )?;
        check(h.beta_true <= 1, "human.beta_true", "must be 0 or 1")?;
        check(
            finite(h.sigma) && h.sigma >= 0.0,
            "human.sigma",
            "must be >= 0",
        )?;
        check(
            h.eps0.len() == rdim && h.eps0.iter().all(|v| v.is_finite()),
            "human.eps0",
            "must be finite with one entry per robot axis",
        )?;
        check(finite(h.eta) && h.eta > 0.0, "human.eta", "must be > 0")?;

        let grid = &p.grid;
        check(
            grid.dim() == hdim,
            "prediction.grid",
            "dimension must match human.start",
        )?;
        check(
            finite(p.rho) && p.rho > 0.0,
            "prediction.rho",
            "must be > 0",
        )?;
        check(
            rdim == hdim,
            "robot.start",
            "robot and human must share a position space",
        )?;
        for axis in 0..hdim {
            let size = grid.cell_size()[axis];
            for a in &h.action_set {
                let ratio = a.components()[axis] / size;
                check(
                    ratio == ratio.round(),
                    "prediction.grid",
                    "cell size must divide every human action step",
                )?;
            }
        }
        let start_cell = grid
            .locate(h.start.coords())
            .map_err(|_| ConfigError::invalid("human.start", "lies outside prediction.grid"))?;
        check(
            grid.center_of(start_cell) == h.start.coords(),
            "human.start",
            "must be a grid cell center",
        )?;

        let prior = &self.prior;
        check(
            (0.0..=1.0).contains(&prior.beta_0),
            "prior.beta_0",
            "must lie in [0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&prior.beta_1),
            "prior.beta_1",
            "must lie in [0, 1]",
        )?;
        check(
            (prior.beta_0 + prior.beta_1 - 1.0).abs() <= 1e-12,
            "prior",
            "beta_0 + beta_1 must equal 1",
        )?;

        check(
            self.simulation.max_steps >= 1,
            "simulation.max_steps",
            "must be >= 1",
        )?;
        Ok(())
    }

    /// Overrides a single scalar parameter by name and re-validates.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        let key = name.rsplit('.').next().unwrap_or(name);
        let as_count = |v: f64| -> Result<usize, ConfigError> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(ConfigError::invalid(key, "expects a non-negative integer"))
            }
        };
        match key {
            "theta_1" => self.robot.theta_1 = value,
            "theta_2" => self.robot.theta_2 = value,
            "t_r" => self.robot.t_r = as_count(value)?,
            "p_th" => self.robot.p_th = value,
            "theta_3" => self.human.theta_3 = value,
            "theta_4" => self.human.theta_4 = value,
            "theta_5" => self.human.theta_5 = value,
            "theta_6" => self.human.theta_6 = value,
            "gamma" => self.human.gamma = value,
            "omega_h" => self.human.omega_h = value,
            "beta_true" => {
                let b = as_count(value)?;
                self.human.beta_true = u8::try_from(b).unwrap_or(u8::MAX);
            }
            "sigma" => self.human.sigma = value,
            "eta" => self.human.eta = value,
            "rho" => self.prediction.rho = value,
            "prior_aware" => {
                self.prior.beta_1 = value;
                self.prior.beta_0 = 1.0 - value;
            }
            "max_steps" => self.simulation.max_steps = as_count(value)?,
            "rng_seed" => self.simulation.rng_seed = as_count(value)? as u64,
            "human_randomness" => {
                self.simulation.human_randomness = match as_count(value)? {
                    0 => Switch::Off,
                    1 => Switch::On,
                    _ => return Err(ConfigError::invalid(key, "expects 0 or 1")),
                }
            }
            _ => return Err(ConfigError::UnknownParameter(name.to_string())),
        }
        self.validate()
    }

    pub fn human_objectives(&self) -> HumanObjectives {
        HumanObjectives {
            theta_3: self.human.theta_3,
            theta_4: self.human.theta_4,
            theta_5: self.human.theta_5,
            theta_6: self.human.theta_6,
            goal: self.human.goal.clone(),
            v_ref: self.human.v_ref.clone(),
        }
    }

    pub fn robot_objectives(&self) -> RobotObjectives {
        RobotObjectives {
            theta_1: self.robot.theta_1,
            theta_2: self.robot.theta_2,
            goal: self.robot.goal.clone(),
        }
    }

    pub fn beta_true(&self) -> Awareness {
        if self.human.beta_true == 1 {
            Awareness::Aware
        } else {
            Awareness::Unaware
        }
    }
}
