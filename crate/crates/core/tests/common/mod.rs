//! Shared fixtures and brute-force oracles for the integration tests.
//!
//! The oracles below re-derive every quantity from the model formulas with
//! their own arithmetic and enumerate human action sequences explicitly; they
//! never call into the occupancy recursion under test.

#![allow(dead_code)]

use std::path::PathBuf;

use hri_core::prediction::PredictiveModel;
use hri_core::{
    Action, ActionSet, AgentState, Belief, Dynamics, Grid, HumanObjectives, ScenarioConfig,
};
use rand::Rng;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

pub fn scenario(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(scenario_path(name)).expect("bundled scenario loads")
}

pub const BUNDLED: [&str; 5] = [
    "concerned.cfg",
    "unconcerned.cfg",
    "late_aware_eps5.cfg",
    "late_aware_eps10.cfg",
    "omega_sweep.cfg",
];

/// A small randomized prediction problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub origin: Vec<f64>,
    pub cell: Vec<f64>,
    pub counts: Vec<usize>,
    /// Human actions as multiples of the cell size on each axis.
    pub steps: Vec<Vec<i32>>,
    pub x_h: Vec<f64>,
    /// Robot positions `x_R[0..=T]`.
    pub traj: Vec<Vec<f64>>,
    pub theta: [f64; 4],
    pub goal: Vec<f64>,
    pub v_ref: Vec<f64>,
    pub gamma: f64,
    pub omega: f64,
    pub rho: f64,
    pub p_aware: f64,
}

fn pick<R: Rng>(rng: &mut R, options: &[f64]) -> f64 {
    options[rng.random_range(0..options.len())]
}

impl Instance {
    /// Up to 25 cells, horizon up to `max_horizon`, up to 5 actions.
    pub fn random<R: Rng>(rng: &mut R, max_horizon: usize) -> Self {
        let two_d = rng.random_bool(0.4);
        let counts = if two_d {
            vec![rng.random_range(2..=5), rng.random_range(2..=5)]
        } else {
            vec![rng.random_range(3..=25)]
        };
        let dim = counts.len();
        let cell: Vec<f64> = (0..dim).map(|_| pick(rng, &[0.5, 1.0, 0.25])).collect();
        let origin: Vec<f64> = (0..dim)
            .map(|_| pick(rng, &[-2.0, 0.0, 1.5, -0.75]))
            .collect();

        let n_actions = rng.random_range(1..=5);
        let mut steps: Vec<Vec<i32>> = Vec::new();
        while steps.len() < n_actions {
            let s: Vec<i32> = (0..dim).map(|_| rng.random_range(-2..=2)).collect();
            if !steps.contains(&s) {
                steps.push(s);
            }
        }

        let start: Vec<usize> = counts.iter().map(|&c| rng.random_range(0..c)).collect();
        let x_h: Vec<f64> = (0..dim)
            .map(|i| origin[i] + start[i] as f64 * cell[i])
            .collect();
        let span: Vec<f64> = (0..dim).map(|i| counts[i] as f64 * cell[i]).collect();
        let horizon = rng.random_range(1..=max_horizon);
        let traj = (0..=horizon)
            .map(|_| {
                (0..dim)
                    .map(|i| origin[i] - 1.0 + rng.random::<f64>() * (span[i] + 2.0))
                    .collect()
            })
            .collect();
        let goal = (0..dim)
            .map(|i| origin[i] + rng.random::<f64>() * span[i])
            .collect();
        let v_ref = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        Instance {
            origin,
            cell,
            counts,
            steps,
            x_h,
            traj,
            theta: [
                rng.random_range(0.05..3.0),
                rng.random_range(0.001..1.0),
                rng.random_range(0.5..20.0),
                rng.random_range(0.05..2.0),
            ],
            goal,
            v_ref,
            gamma: pick(rng, &[0.3, 1.0, 3.0, 10.0]),
            omega: pick(rng, &[0.0, 0.1, 0.35, 1.0]),
            rho: rng.random_range(0.2..2.5),
            p_aware: pick(rng, &[0.0, 0.3, 0.5, 0.9, 1.0]),
        }
    }

    pub fn horizon(&self) -> usize {
        self.traj.len() - 1
    }

    pub fn action_vectors(&self) -> Vec<Vec<f64>> {
        self.steps
            .iter()
            .map(|s| {
                s.iter()
                    .zip(&self.cell)
                    .map(|(&k, &c)| k as f64 * c)
                    .collect()
            })
            .collect()
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.origin.clone(), self.cell.clone(), self.counts.clone()).unwrap()
    }

    pub fn objectives(&self) -> HumanObjectives {
        HumanObjectives {
            theta_3: self.theta[0],
            theta_4: self.theta[1],
            theta_5: self.theta[2],
            theta_6: self.theta[3],
            goal: AgentState::new(self.goal.clone()),
            v_ref: self.v_ref.clone(),
        }
    }

    pub fn model(&self) -> PredictiveModel {
        let actions =
            ActionSet::new(self.action_vectors().into_iter().map(Action::new).collect()).unwrap();
        PredictiveModel::new(
            self.grid(),
            actions,
            self.objectives(),
            self.gamma,
            self.omega,
            self.rho,
            Dynamics::Integrator,
        )
    }

    pub fn belief(&self) -> Belief {
        Belief::new(1.0 - self.p_aware, self.p_aware).unwrap()
    }

    pub fn trajectory(&self) -> Vec<AgentState> {
        self.traj
            .iter()
            .map(|p| AgentState::new(p.clone()))
            .collect()
    }

    pub fn human(&self) -> AgentState {
        AgentState::new(self.x_h.clone())
    }

    /// Cell index of `x` on this grid, or `None` when outside it.
    fn cell_of(&self, x: &[f64]) -> Option<Vec<i64>> {
        let mut idx = Vec::with_capacity(x.len());
        for (i, &xi) in x.iter().enumerate() {
            let k = ((xi - self.origin[i]) / self.cell[i]).round() as i64;
            if k < 0 || k >= self.counts[i] as i64 {
                return None;
            }
            idx.push(k);
        }
        Some(idx)
    }

    fn center(&self, idx: &[i64]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(i, &k)| self.origin[i] + k as f64 * self.cell[i])
            .collect()
    }

    fn colliding(&self, idx: &[i64], x_r: &[f64]) -> bool {
        let c = self.center(idx);
        let d2: f64 = c.iter().zip(x_r).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 <= self.rho * self.rho
    }

    /// Mixture probabilities straight from the cost definitions.
    pub fn mixture(&self, x: &[f64], x_r: &[f64], aware: bool) -> Vec<f64> {
        let [t3, t4, t5, t6] = self.theta;
        let acts = self.action_vectors();
        let costs: Vec<f64> = acts
            .iter()
            .map(|u| {
                let mut to_goal = 0.0;
                let mut pace = 0.0;
                let mut dist2 = 0.0;
                for i in 0..x.len() {
                    let next = x[i] + u[i];
                    to_goal += (next - self.goal[i]).powi(2);
                    pace += (u[i] - self.v_ref[i]).powi(2);
                    dist2 += (next - x_r[i]).powi(2);
                }
                let safety = if aware {
                    t5 * (-t6 * dist2.sqrt()).exp()
                } else {
                    0.0
                };
                t3 * to_goal + t4 * pace + safety
            })
            .collect();
        let lo = costs.iter().cloned().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = costs
            .iter()
            .map(|c| (-self.gamma * (c - lo)).exp())
            .collect();
        let z: f64 = w.iter().sum();
        let n = acts.len() as f64;
        w.iter()
            .map(|wi| (1.0 - self.omega) * wi / z + self.omega / n)
            .collect()
    }

    /// First-collision and per-step marginal collision probabilities by
    /// enumerating every human action sequence. Entry 0 of each is zero.
    pub fn enumerate(&self) -> (Vec<f64>, Vec<f64>) {
        let horizon = self.horizon();
        let mut first = vec![0.0; horizon + 1];
        let mut marginal = vec![0.0; horizon + 1];
        let start = self
            .cell_of(&self.x_h)
            .expect("instance starts on the grid");
        for (aware, weight) in [(false, 1.0 - self.p_aware), (true, self.p_aware)] {
            if weight == 0.0 {
                continue;
            }
            self.walk(&start, 0, weight, false, aware, &mut first, &mut marginal);
        }
        (first, marginal)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        idx: &[i64],
        k: usize,
        prob: f64,
        collided: bool,
        aware: bool,
        first: &mut [f64],
        marginal: &mut [f64],
    ) {
        if k == self.horizon() {
            return;
        }
        let x = self.center(idx);
        let probs = self.mixture(&x, &self.traj[k], aware);
        for (u, p) in self.action_vectors().iter().zip(probs) {
            let next: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + b).collect();
            let q = prob * p;
            match self.cell_of(&next) {
                // Off the grid the human can no longer collide.
                None => {}
                Some(n) => {
                    let hit = self.colliding(&n, &self.traj[k + 1]);
                    if hit {
                        marginal[k + 1] += q;
                        if !collided {
                            first[k + 1] += q;
                        }
                    }
                    self.walk(&n, k + 1, q, collided || hit, aware, first, marginal);
                }
            }
        }
    }
}

/// `k`-fold convolution of a uniform kernel over integer offsets with a unit
/// mass at `start`, on an unbounded line.
pub fn uniform_convolution(
    offsets: &[i64],
    start: i64,
    k: usize,
) -> std::collections::BTreeMap<i64, f64> {
    let mut dist = std::collections::BTreeMap::from([(start, 1.0)]);
    let w = 1.0 / offsets.len() as f64;
    for _ in 0..k {
        let mut next = std::collections::BTreeMap::new();
        for (&x, &m) in &dist {
            for &o in offsets {
                *next.entry(x + o).or_insert(0.0) += m * w;
            }
        }
        dist = next;
    }
    dist
}
