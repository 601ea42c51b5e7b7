//! Occupancy forecasting and collision probabilities.
//!
//! The human's future position is a distribution over grid cells, pushed
//! forward one step at a time through the human dynamics with the predictive
//! action mixture. One chain is kept per awareness hypothesis; the belief only
//! weights the chains on readout, since `beta` is held fixed over the horizon.
//!
//! Collision probabilities come in two flavors:
//!
//! * **exact** – probability that the *first* collision happens at step `k`.
//!   At each step the colliding mass is extracted as a hazard, the survival
//!   mass `S_k` shrinks by `(1 - h_k)` and the remaining occupancy is
//!   renormalized before the next push. This is the chained product of
//!   conditionals, computed recursively.
//! * **marginal** – occupancy mass on the collision set at step `k`, ignoring
//!   earlier steps. Never smaller than the exact value.
//!
//! Mass that would leave the grid goes to a sink cell (index `N_c`), which is
//! absorbing and never collides.

use thiserror::Error;

use crate::belief::Belief;
use crate::config::{BoundMode, ScenarioConfig};
use crate::grid::{CellIndex, Grid, GridError};
use crate::human::{
    boltzmann_into, goal_cost, safety_cost, ActionDistribution, Awareness, HumanObjectives,
};
use crate::state::{ActionSet, AgentState, Dynamics};

/// Survival mass below which the exact recursion stops extracting hazards.
pub const SURVIVAL_FLOOR: f64 = 1e-15;

#[derive(Debug, Error, PartialEq)]
pub enum PredictionError {
    #[error("human state is not on the prediction grid: {0}")]
    OffGrid(#[from] GridError),
    #[error("robot trajectory must contain at least two states")]
    ShortTrajectory,
}

/// Human model as seen by the robot, specialized to a grid.
#[derive(Debug, Clone)]
pub struct PredictiveModel {
    grid: Grid,
    actions: ActionSet,
    objectives: HumanObjectives,
    gamma: f64,
    omega_h: f64,
    rho: f64,
    n_actions: usize,
    /// `[cell * n_actions + a]` -> destination cell, `None` when off-grid.
    targets: Vec<Option<usize>>,
    centers: Vec<Vec<f64>>,
    goal_costs: Vec<f64>,
    unaware_mixture: Vec<f64>,
}

impl PredictiveModel {
    pub fn new(
        grid: Grid,
        actions: ActionSet,
        objectives: HumanObjectives,
        gamma: f64,
        omega_h: f64,
        rho: f64,
        dynamics: Dynamics,
    ) -> Self {
        let n_actions = actions.len();
        let n = grid.len();
        let centers: Vec<Vec<f64>> = (0..n).map(|c| grid.center_of(c)).collect();
        let mut targets = Vec::with_capacity(n * n_actions);
        let mut goal_costs = Vec::with_capacity(n * n_actions);
        for center in &centers {
            let x = AgentState::new(center.clone());
            for a in &actions {
                targets.push(grid.locate(dynamics.apply(&x, a).coords()).ok());
                goal_costs.push(goal_cost(center, a.components(), &objectives));
            }
        }
        let mut model = Self {
            grid,
            actions,
            objectives,
            gamma,
            omega_h,
            rho,
            n_actions,
            targets,
            centers,
            goal_costs,
            unaware_mixture: Vec::new(),
        };
        let mut cache = vec![0.0; n * n_actions];
        for c in 0..n {
            model.mixture_uncached(
                c,
                &[],
                Awareness::Unaware,
                &mut cache[c * n_actions..(c + 1) * n_actions],
            );
        }
        model.unaware_mixture = cache;
        model
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self::new(
            cfg.prediction.grid.clone(),
            cfg.human.action_set.clone(),
            cfg.human_objectives(),
            cfg.human.gamma,
            cfg.human.omega_h,
            cfg.prediction.rho,
            cfg.human.dynamics,
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    /// Number of occupancy entries including the sink.
    pub fn n_slots(&self) -> usize {
        self.grid.len() + 1
    }

    pub fn sink(&self) -> usize {
        self.grid.len()
    }

    fn mixture_uncached(&self, cell: usize, x_r: &[f64], beta: Awareness, out: &mut [f64]) {
        let base = cell * self.n_actions;
        let mut costs = [0.0; 16];
        let mut heap;
        let costs: &mut [f64] = if self.n_actions <= costs.len() {
            &mut costs[..self.n_actions]
        } else {
            heap = vec![0.0; self.n_actions];
            &mut heap
        };
        costs.copy_from_slice(&self.goal_costs[base..base + self.n_actions]);
        if beta == Awareness::Aware {
            let center = &self.centers[cell];
            for (c, a) in costs.iter_mut().zip(&self.actions) {
                *c += safety_cost(center, a.components(), x_r, &self.objectives);
            }
        }
        boltzmann_into(costs, self.gamma, out);
        let floor = self.omega_h * (1.0 / self.n_actions as f64);
        for p in out.iter_mut() {
            *p = (1.0 - self.omega_h) * *p + floor;
        }
    }

    /// Predictive action mixture at a cell center.
    pub fn mixture_into(&self, cell: usize, x_r: &[f64], beta: Awareness, out: &mut [f64]) {
        match beta {
            Awareness::Unaware => {
                let base = cell * self.n_actions;
                out.copy_from_slice(&self.unaware_mixture[base..base + self.n_actions]);
            }
            Awareness::Aware => self.mixture_uncached(cell, x_r, beta, out),
        }
    }

    /// Predictive action mixture at an arbitrary on-grid human state.
    pub fn mixture(
        &self,
        x_h: &AgentState,
        x_r: &AgentState,
        beta: Awareness,
    ) -> Result<ActionDistribution, PredictionError> {
        let cell = self.grid.locate(x_h.coords())?;
        let mut out = vec![0.0; self.n_actions];
        self.mixture_into(cell, x_r.coords(), beta, &mut out);
        Ok(ActionDistribution::new(out))
    }

    /// One step of the occupancy recursion for a single awareness chain.
    pub(crate) fn push(&self, occ: &[f64], x_r: &[f64], beta: Awareness) -> Vec<f64> {
        let sink = self.sink();
        let mut next = vec![0.0; occ.len()];
        let mut probs = vec![0.0; self.n_actions];
        for (cell, &mass) in occ[..sink].iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            self.mixture_into(cell, x_r, beta, &mut probs);
            let base = cell * self.n_actions;
            for (a, &p) in probs.iter().enumerate() {
                let to = self.targets[base + a].unwrap_or(sink);
                next[to] += mass * p;
            }
        }
        next[sink] += occ[sink];
        next
    }

    /// Flat indices of the grid cells whose center is within `rho` of `x_r`.
    pub fn collision_cells(&self, x_r: &[f64]) -> Vec<usize> {
        self.grid.cells_within(x_r, self.rho)
    }

    fn point_mass(&self, x_h: &AgentState) -> Result<Vec<f64>, PredictionError> {
        let cell = self.grid.locate(x_h.coords())?;
        let mut occ = vec![0.0; self.n_slots()];
        occ[cell] = 1.0;
        Ok(occ)
    }

    /// Unconditional forecast over `trajectory.len() - 1` steps. Entry `k` of
    /// the trajectory is the robot position used to predict the human's move
    /// from step `k` to `k + 1`.
    pub fn propagate_occupancy(
        &self,
        x_h_now: &AgentState,
        trajectory: &[AgentState],
        belief: &Belief,
    ) -> Result<OccupancyForecast, PredictionError> {
        if trajectory.len() < 2 {
            return Err(PredictionError::ShortTrajectory);
        }
        let start = self.point_mass(x_h_now)?;
        let horizon = trajectory.len() - 1;
        let mut chains: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        for beta in Awareness::BOTH {
            if belief.weight(beta) == 0.0 {
                continue;
            }
            let rows = &mut chains[beta.index()];
            rows.push(start.clone());
            for k in 0..horizon {
                let next = self.push(&rows[k], trajectory[k].coords(), beta);
                rows.push(next);
            }
        }
        Ok(OccupancyForecast {
            horizon,
            n_slots: self.n_slots(),
            weights: [belief.p_unaware(), belief.p_aware()],
            chains,
            survival: None,
        })
    }

    /// First-collision profile via the survival recursion.
    pub fn collision_profile_exact(
        &self,
        x_h_now: &AgentState,
        trajectory: &[AgentState],
        belief: &Belief,
    ) -> Result<CollisionProfile, PredictionError> {
        Ok(self
            .conditioned(x_h_now, trajectory, belief, BoundMode::Exact)?
            .0)
    }

    /// Marginal-bound profile computed directly from the trajectory.
    pub fn collision_profile_marginal(
        &self,
        x_h_now: &AgentState,
        trajectory: &[AgentState],
        belief: &Belief,
    ) -> Result<CollisionProfile, PredictionError> {
        Ok(self
            .conditioned(x_h_now, trajectory, belief, BoundMode::Marginal)?
            .0)
    }

    pub fn collision_profile(
        &self,
        mode: BoundMode,
        x_h_now: &AgentState,
        trajectory: &[AgentState],
        belief: &Belief,
    ) -> Result<CollisionProfile, PredictionError> {
        Ok(self.conditioned(x_h_now, trajectory, belief, mode)?.0)
    }

    /// Collision-conditioned forecast: row `k` holds the mass that has not
    /// collided by step `k`, so its total is the survival `S_k`.
    pub fn conditioned_forecast(
        &self,
        x_h_now: &AgentState,
        trajectory: &[AgentState],
        belief: &Belief,
    ) -> Result<OccupancyForecast, PredictionError> {
        Ok(self
            .conditioned(x_h_now, trajectory, belief, BoundMode::Exact)?
            .1)
    }

    fn conditioned(
        &self,
        x_h_now: &AgentState,
        trajectory: &[AgentState],
        belief: &Belief,
        mode: BoundMode,
    ) -> Result<(CollisionProfile, OccupancyForecast), PredictionError> {
        if trajectory.len() < 2 {
            return Err(PredictionError::ShortTrajectory);
        }
        let horizon = trajectory.len() - 1;
        let mut rollout = Rollout::start(self, x_h_now, belief, mode)?;
        let mut p_coll = vec![0.0; horizon + 1];
        let mut chains: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        let mut survival: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        let record =
            |rollout: &Rollout, chains: &mut [Vec<Vec<f64>>; 2], survival: &mut [Vec<f64>; 2]| {
                for (i, chain) in rollout.chains.iter().enumerate() {
                    if let Some(c) = chain {
                        chains[i].push(c.occ.iter().map(|m| m * c.survival).collect());
                        survival[i].push(c.survival);
                    }
                }
            };
        record(&rollout, &mut chains, &mut survival);
        for k in 1..=horizon {
            p_coll[k] = rollout.advance(self, trajectory[k - 1].coords(), trajectory[k].coords());
            record(&rollout, &mut chains, &mut survival);
        }
        let profile = rollout.profile(p_coll);
        let forecast = OccupancyForecast {
            horizon,
            n_slots: self.n_slots(),
            weights: [belief.p_unaware(), belief.p_aware()],
            chains,
            survival: (mode == BoundMode::Exact).then_some(survival),
        };
        Ok((profile, forecast))
    }
}

/// Cells whose center lies within `rho` of the robot position.
pub fn collision_cells(x_r: &AgentState, grid: &Grid, rho: f64) -> Vec<CellIndex> {
    grid.cells_within(x_r.coords(), rho)
        .into_iter()
        .map(|c| grid.unflatten(c))
        .collect()
}

/// Marginal-bound profile read off an unconditional forecast.
pub fn collision_profile_marginal(
    forecast: &OccupancyForecast,
    trajectory: &[AgentState],
    grid: &Grid,
    rho: f64,
) -> CollisionProfile {
    let mut p_coll = vec![0.0; forecast.horizon + 1];
    for (k, p) in p_coll.iter_mut().enumerate().skip(1) {
        let cells = grid.cells_within(trajectory[k].coords(), rho);
        *p = forecast.mass_on(k, &cells);
    }
    CollisionProfile {
        mode: BoundMode::Marginal,
        p_coll,
        survival: None,
        saturated: false,
    }
}

#[derive(Debug, Clone)]
struct Chain {
    beta: Awareness,
    weight: f64,
    /// Occupancy conditioned on no collision so far (sums to one).
    occ: Vec<f64>,
    survival: f64,
    saturated: bool,
}

/// Incremental evaluation of a collision profile along a robot trajectory;
/// cloning a rollout lets callers share work across common prefixes.
#[derive(Debug, Clone)]
pub(crate) struct Rollout {
    mode: BoundMode,
    chains: [Option<Chain>; 2],
}

impl Rollout {
    pub(crate) fn start(
        model: &PredictiveModel,
        x_h_now: &AgentState,
        belief: &Belief,
        mode: BoundMode,
    ) -> Result<Self, PredictionError> {
        let occ = model.point_mass(x_h_now)?;
        let chain = |beta: Awareness| {
            let weight = belief.weight(beta);
            (weight > 0.0).then(|| Chain {
                beta,
                weight,
                occ: occ.clone(),
                survival: 1.0,
                saturated: false,
            })
        };
        Ok(Self {
            mode,
            chains: [chain(Awareness::Unaware), chain(Awareness::Aware)],
        })
    }

    /// Moves the human one step (using `x_r_prev`) and returns the
    /// belief-weighted collision probability against `x_r_next`.
    pub(crate) fn advance(
        &mut self,
        model: &PredictiveModel,
        x_r_prev: &[f64],
        x_r_next: &[f64],
    ) -> f64 {
        let cells = model.collision_cells(x_r_next);
        let mut total = 0.0;
        for chain in self.chains.iter_mut().flatten() {
            if chain.saturated {
                continue;
            }
            chain.occ = model.push(&chain.occ, x_r_prev, chain.beta);
            let hazard: f64 = cells.iter().map(|&c| chain.occ[c]).sum();
            let p = match self.mode {
                BoundMode::Marginal => hazard,
                BoundMode::Exact => {
                    let p = chain.survival * hazard;
                    for &c in &cells {
                        chain.occ[c] = 0.0;
                    }
                    chain.survival *= 1.0 - hazard;
                    if chain.survival < SURVIVAL_FLOOR {
                        chain.saturated = true;
                    } else {
                        let keep = 1.0 - hazard;
                        for m in chain.occ.iter_mut() {
                            *m /= keep;
                        }
                    }
                    p
                }
            };
            total += chain.weight * p;
        }
        total
    }

    pub(crate) fn profile(&self, p_coll: Vec<f64>) -> CollisionProfile {
        let survival = (self.mode == BoundMode::Exact).then(|| {
            self.chains
                .iter()
                .flatten()
                .map(|c| c.weight * c.survival)
                .sum()
        });
        CollisionProfile {
            mode: self.mode,
            p_coll,
            survival,
            saturated: self.chains.iter().flatten().any(|c| c.saturated),
        }
    }
}

/// Collision probability per horizon step; entry 0 is the current step and
/// is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionProfile {
    pub mode: BoundMode,
    pub p_coll: Vec<f64>,
    /// Belief-weighted probability of no collision over the whole horizon
    /// (exact mode only).
    pub survival: Option<f64>,
    /// Set when some chain's survival fell below [`SURVIVAL_FLOOR`].
    pub saturated: bool,
}

impl CollisionProfile {
    pub fn horizon(&self) -> usize {
        self.p_coll.len().saturating_sub(1)
    }

    pub fn max(&self) -> f64 {
        self.p_coll.iter().copied().fold(0.0, f64::max)
    }

    pub fn satisfies(&self, p_th: f64) -> bool {
        self.p_coll.iter().all(|&p| p <= p_th)
    }

    /// Values for steps `1..=horizon`.
    pub fn future(&self) -> &[f64] {
        &self.p_coll[1..]
    }
}

/// Per-step, per-hypothesis occupancy over grid cells plus the sink.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyForecast {
    pub horizon: usize,
    /// Grid cells plus one sink slot.
    pub n_slots: usize,
    /// `[P_t(beta = 0), P_t(beta = 1)]`
    pub weights: [f64; 2],
    /// `chains[beta][k]`; empty for a hypothesis with zero weight.
    pub chains: [Vec<Vec<f64>>; 2],
    /// `survival[beta][k]` in collision-conditioned mode.
    pub survival: Option<[Vec<f64>; 2]>,
}

impl OccupancyForecast {
    pub fn sink(&self) -> usize {
        self.n_slots - 1
    }

    /// Belief-weighted occupancy at step `k`, including the sink slot.
    pub fn combined(&self, k: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.n_slots];
        for (w, chain) in self.weights.iter().zip(&self.chains) {
            if let Some(r) = chain.get(k) {
                for (o, m) in row.iter_mut().zip(r) {
                    *o += w * m;
                }
            }
        }
        row
    }

    pub fn row_total(&self, k: usize) -> f64 {
        self.combined(k).iter().sum()
    }

    pub fn mass_on(&self, k: usize, cells: &[usize]) -> f64 {
        let mut total = 0.0;
        for (w, chain) in self.weights.iter().zip(&self.chains) {
            if let Some(r) = chain.get(k) {
                total += w * cells.iter().map(|&c| r[c]).sum::<f64>();
            }
        }
        total
    }

    /// Shannon entropy (nats) of the combined row at step `k`.
    pub fn entropy(&self, k: usize) -> f64 {
        self.combined(k)
            .iter()
            .filter(|&&p| p > 0.0)
            .fold(0.0, |h, &p| h - p * p.ln())
    }
}
