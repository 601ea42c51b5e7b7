//! Danger-aware planning for a robot sharing space with a person.
//!
//! The robot keeps a belief over whether the person accounts for the robot
//! when choosing actions, forecasts the person's occupancy under both
//! hypotheses and plans over a finite horizon subject to a collision
//! chance constraint. When that constraint binds it raises a danger signal
//! whose effect on the person is simulated in [`sim`].

pub mod belief;
pub mod cli;
pub mod config;
pub mod grid;
pub mod human;
pub mod output;
pub mod planner;
pub mod prediction;
pub mod sim;
pub mod state;

pub use belief::{update_belief, Belief, BeliefError};
pub use config::{BoundMode, ConfigError, NoiseMode, ScenarioConfig, Switch};
pub use grid::{CellIndex, Grid, GridError};
pub use human::{ActionDistribution, Awareness, HumanObjectives};
pub use planner::{PlanError, PlanResult, Planner, RobotObjectives};
pub use prediction::{CollisionProfile, OccupancyForecast, PredictionError, PredictiveModel};
pub use sim::{run_episode, run_sweep, EpisodeResult, Outcome, SimError, StepRecord};
pub use state::{Action, ActionSet, AgentState, Dynamics};
