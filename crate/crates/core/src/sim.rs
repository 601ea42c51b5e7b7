//! Closed-loop episodes and parameter sweeps.
//!
//! Each tick: observe both agents, plan (which evaluates the predictive
//! mixtures, forecasts occupancy and scores collision profiles), commit the
//! robot action and danger signal, let the simulated human act, update the
//! belief from the observed human action, then advance both agents at once.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::belief::{Belief, BeliefError};
use crate::config::{ConfigError, ScenarioConfig};
use crate::human::{
    simulate_human_action, Awareness, EstimationNoise, HumanObjectives, HumanPolicy,
};
use crate::planner::{PlanError, PlanResult, Planner};
use crate::prediction::{OccupancyForecast, PredictionError};
use crate::state::{within_radius, Action, AgentState};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("planning failed at step {t}: {source}")]
    Plan {
        t: u64,
        #[source]
        source: PlanError,
    },
    #[error("belief update failed at step {t}: {source}")]
    Belief {
        t: u64,
        #[source]
        source: BeliefError,
    },
    #[error("forecast failed at step {t}: {source}")]
    Forecast {
        t: u64,
        #[source]
        source: PredictionError,
    },
    #[error("step {requested} is beyond the end of the episode ({len} steps)")]
    StepOutOfRange { requested: u64, len: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    RobotReachedGoal,
    HumanReachedGoal,
    BothReached,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::RobotReachedGoal => "robot_reached_goal",
            Outcome::HumanReachedGoal => "human_reached_goal",
            Outcome::BothReached => "both_reached",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything observed and decided during one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    /// Robot state at the start of the tick.
    pub x_r: AgentState,
    /// Human state at the start of the tick.
    pub x_h: AgentState,
    pub u_r: Action,
    pub u_h: Action,
    pub d_r: bool,
    /// Belief `P(beta = 1)` after this tick's observation.
    pub p_aware: f64,
    /// Planned collision probabilities for steps `t+1..=t+T_R`.
    pub collision_profile: Vec<f64>,
    /// The human's estimate of the robot position this tick.
    pub x_r_est_human: AgentState,
    pub fallback_used: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub records: Vec<StepRecord>,
    pub outcome: Outcome,
    /// Number of ticks until the robot first reached its goal.
    pub steps_to_robot_goal: Option<u64>,
    pub final_robot: AgentState,
    pub final_human: AgentState,
}

fn at_goal(x: &AgentState, goal: &AgentState, axes: &[usize]) -> bool {
    axes.iter()
        .all(|&i| (x.coords()[i] - goal.coords()[i]).abs() <= 1e-9)
}

/// A running closed-loop episode.
pub struct Episode {
    cfg: ScenarioConfig,
    planner: Planner,
    objectives: HumanObjectives,
    beta_true: Awareness,
    noise: EstimationNoise,
    rng: ChaCha8Rng,
    robot_axes: Vec<usize>,
    human_axes: Vec<usize>,
    x_r: AgentState,
    x_h: AgentState,
    belief: Belief,
    t: u64,
    records: Vec<StepRecord>,
    steps_to_robot_goal: Option<u64>,
    outcome: Option<Outcome>,
}

impl Episode {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let belief =
            Belief::new(cfg.prior.beta_0, cfg.prior.beta_1).map_err(|_| ConfigError::Invalid {
                field: "prior".into(),
                reason: "not a distribution".into(),
            })?;
        let robot_axes = cfg.robot.action_set.movement_axes();
        let x_r = cfg.robot.start.clone();
        let steps_to_robot_goal = at_goal(&x_r, &cfg.robot.goal, &robot_axes).then_some(0);
        Ok(Self {
            planner: Planner::from_config(cfg),
            objectives: cfg.human_objectives(),
            beta_true: cfg.beta_true(),
            noise: EstimationNoise {
                mode: cfg.simulation.noise_mode,
                sigma: cfg.human.sigma,
                eps0: cfg.human.eps0.clone(),
                eta: cfg.human.eta,
                t_d: None,
            },
            rng: ChaCha8Rng::seed_from_u64(cfg.simulation.rng_seed),
            human_axes: cfg.human.action_set.movement_axes(),
            robot_axes,
            x_r,
            x_h: cfg.human.start.clone(),
            belief,
            t: 0,
            records: Vec::new(),
            steps_to_robot_goal,
            outcome: None,
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn planner(&self) -> &Planner {
        &self.planner
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn belief(&self) -> Belief {
        self.belief
    }

    pub fn robot(&self) -> &AgentState {
        &self.x_r
    }

    pub fn human(&self) -> &AgentState {
        &self.x_h
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    /// The plan the robot would commit to at the current tick.
    pub fn current_plan(&self) -> Result<PlanResult, SimError> {
        self.planner
            .plan(&self.x_r, &self.x_h, &self.belief)
            .map_err(|source| SimError::Plan { t: self.t, source })
    }

    /// Unconditional occupancy forecast along the current plan.
    pub fn current_forecast(&self) -> Result<OccupancyForecast, SimError> {
        let plan = self.current_plan()?;
        let horizon = self.planner.horizon();
        self.planner
            .model()
            .propagate_occupancy(&self.x_h, &plan.trajectory[..=horizon], &self.belief)
            .map_err(|source| SimError::Forecast { t: self.t, source })
    }

    /// Executes one tick. Does nothing once the episode has ended.
    pub fn step(&mut self) -> Result<Option<&StepRecord>, SimError> {
        if self.outcome.is_some() {
            return Ok(None);
        }
        let t = self.t;
        let plan = self.current_plan()?;

        if plan.d_r && self.noise.t_d.is_none() {
            self.noise.t_d = Some(t);
        }

        let human_actions = &self.cfg.human.action_set;
        let policy = HumanPolicy {
            objectives: &self.objectives,
            actions: human_actions,
            beta_true: self.beta_true,
            omega_h: self.cfg.human.omega_h,
            randomness: self.cfg.simulation.human_randomness.is_on(),
        };
        let choice = simulate_human_action(
            &self.x_h,
            &self.x_r,
            t,
            plan.d_r,
            &self.noise,
            &policy,
            &mut self.rng,
        );
        let u_h = human_actions
            .get(choice.action_index)
            .expect("valid index")
            .clone();

        // Likelihoods use the robot's actual position.
        let model = self.planner.model();
        let likelihood = |beta| {
            model
                .mixture(&self.x_h, &self.x_r, beta)
                .map_err(|source| SimError::Forecast { t, source })
        };
        let l0 = likelihood(Awareness::Unaware)?;
        let l1 = likelihood(Awareness::Aware)?;
        // An observation both hypotheses rule out carries no evidence.
        self.belief = match self.belief.update(choice.action_index, [&l0, &l1]) {
            Ok(b) => b,
            Err(BeliefError::DegenerateEvidence) => self.belief,
            Err(source) => return Err(SimError::Belief { t, source }),
        };

        let record = StepRecord {
            t,
            x_r: self.x_r.clone(),
            x_h: self.x_h.clone(),
            u_r: plan.first_action.clone(),
            u_h: u_h.clone(),
            d_r: plan.d_r,
            p_aware: self.belief.p_aware(),
            collision_profile: plan.collision_profile.future().to_vec(),
            x_r_est_human: choice.robot_estimate,
            fallback_used: plan.fallback_used,
        };

        self.x_r = self.cfg.robot.dynamics.apply(&self.x_r, &plan.first_action);
        self.x_h = self.cfg.human.dynamics.apply(&self.x_h, &u_h);
        self.t += 1;
        self.records.push(record);

        let robot_home = at_goal(&self.x_r, &self.cfg.robot.goal, &self.robot_axes);
        let human_home = at_goal(&self.x_h, &self.cfg.human.goal, &self.human_axes);
        if robot_home && self.steps_to_robot_goal.is_none() {
            self.steps_to_robot_goal = Some(self.t);
        }
        if within_radius(
            self.x_r.coords(),
            self.x_h.coords(),
            self.cfg.prediction.rho,
        ) {
            self.outcome = Some(Outcome::Collision);
        } else if robot_home && human_home {
            self.outcome = Some(Outcome::BothReached);
        } else if self.t >= self.cfg.simulation.max_steps as u64 {
            self.outcome = Some(if self.steps_to_robot_goal.is_some() {
                Outcome::RobotReachedGoal
            } else if human_home {
                Outcome::HumanReachedGoal
            } else {
                Outcome::Timeout
            });
        }
        Ok(self.records.last())
    }

    pub fn run(mut self) -> Result<EpisodeResult, SimError> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(self.finish())
    }

    /// Consumes the episode; an unfinished episode reports a timeout.
    pub fn finish(self) -> EpisodeResult {
        EpisodeResult {
            outcome: self.outcome.unwrap_or(Outcome::Timeout),
            records: self.records,
            steps_to_robot_goal: self.steps_to_robot_goal,
            final_robot: self.x_r,
            final_human: self.x_h,
        }
    }
}

pub fn run_episode(cfg: &ScenarioConfig) -> Result<EpisodeResult, SimError> {
    Episode::new(cfg)?.run()
}

/// Replays an episode up to tick `step` and returns the forecast the robot
/// computed there.
pub fn forecast_at_step(cfg: &ScenarioConfig, step: u64) -> Result<OccupancyForecast, SimError> {
    let mut episode = Episode::new(cfg)?;
    while episode.t() < step {
        if episode.is_done() {
            return Err(SimError::StepOutOfRange {
                requested: step,
                len: episode.t(),
            });
        }
        episode.step()?;
    }
    if episode.is_done() {
        return Err(SimError::StepOutOfRange {
            requested: step,
            len: episode.t(),
        });
    }
    episode.current_forecast()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub replication: usize,
    pub seed: u64,
    /// Entropy of the initial forecast at depths `1..=T_R`.
    pub entropy: Vec<f64>,
    pub episode: EpisodeResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub value: f64,
    pub runs: usize,
    pub collision_rate: f64,
    pub both_reached_rate: f64,
    pub robot_goal_rate: f64,
    /// Mean over runs where the robot reached its goal.
    pub mean_steps_to_robot_goal: Option<f64>,
    pub mean_entropy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn summaries(&self) -> Vec<SweepSummary> {
        let mut values: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !values.iter().any(|v| v.to_bits() == r.value.to_bits()) {
                values.push(r.value);
            }
        }
        values
            .into_iter()
            .map(|value| {
                let rows: Vec<&SweepRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.value.to_bits() == value.to_bits())
                    .collect();
                let n = rows.len() as f64;
                let rate = |pred: &dyn Fn(&SweepRow) -> bool| {
                    rows.iter().filter(|r| pred(r)).count() as f64 / n
                };
                let steps: Vec<f64> = rows
                    .iter()
                    .filter_map(|r| r.episode.steps_to_robot_goal)
                    .map(|s| s as f64)
                    .collect();
                let depth = rows.first().map_or(0, |r| r.entropy.len());
                SweepSummary {
                    value,
                    runs: rows.len(),
                    collision_rate: rate(&|r| r.episode.outcome == Outcome::Collision),
                    both_reached_rate: rate(&|r| r.episode.outcome == Outcome::BothReached),
                    robot_goal_rate: rate(&|r| r.episode.steps_to_robot_goal.is_some()),
                    mean_steps_to_robot_goal: (!steps.is_empty())
                        .then(|| steps.iter().sum::<f64>() / steps.len() as f64),
                    mean_entropy: (0..depth)
                        .map(|k| rows.iter().map(|r| r.entropy[k]).sum::<f64>() / n)
                        .collect(),
                }
            })
            .collect()
    }
}

/// Runs `replications` episodes per value; replication `i` uses the
/// configured `rng_seed + i`.
pub fn run_sweep(
    base: &ScenarioConfig,
    parameter: &str,
    values: &[f64],
    replications: usize,
) -> Result<SweepReport, SimError> {
    let mut jobs = Vec::with_capacity(values.len() * replications);
    for &value in values {
        for rep in 0..replications {
            let mut cfg = base.clone();
            cfg.set_param(parameter, value)?;
            let seed = cfg.simulation.rng_seed.wrapping_add(rep as u64);
            cfg.simulation.rng_seed = seed;
            jobs.push((value, rep, seed, cfg));
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(value, replication, seed, cfg)| {
            let episode = Episode::new(&cfg)?;
            let forecast = episode.current_forecast()?;
            let entropy = (1..=forecast.horizon)
                .map(|k| forecast.entropy(k))
                .collect();
            Ok(SweepRow {
                value,
                replication,
                seed,
                entropy,
                episode: episode.run()?,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(SweepReport {
        parameter: parameter.to_string(),
        rows,
    })
}
