//! Human decision model.
//!
//! Two views of the same objectives live here. The robot's *predictive* model
//! is a mixture of a Boltzmann-rational distribution over actions and a
//! uniform distribution. The *simulated* human instead takes the exact argmin
//! of its objective, evaluated against a noisy estimate of the robot position.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::NoiseMode;
use crate::state::{distance, ActionSet, AgentState};

/// Danger-awareness coefficient `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Awareness {
    Unaware = 0,
    Aware = 1,
}

impl Awareness {
    pub const BOTH: [Awareness; 2] = [Awareness::Unaware, Awareness::Aware];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanObjectives {
    pub theta_3: f64,
    pub theta_4: f64,
    pub theta_5: f64,
    pub theta_6: f64,
    pub goal: AgentState,
    pub v_ref: Vec<f64>,
}

/// `theta_3 * |x + u - g|^2 + theta_4 * |u - v_ref|^2`
pub fn goal_cost(x_h: &[f64], u_h: &[f64], obj: &HumanObjectives) -> f64 {
    let g = obj.goal.coords();
    let mut to_goal = 0.0;
    let mut pace = 0.0;
    for i in 0..x_h.len() {
        let e = x_h[i] + u_h[i] - g[i];
        to_goal += e * e;
        let v = u_h[i] - obj.v_ref[i];
        pace += v * v;
    }
    obj.theta_3 * to_goal + obj.theta_4 * pace
}

/// `theta_5 * exp(-theta_6 * dist)`, with `dist` measured from the human's
/// post-action position to the (estimated) robot position.
pub fn safety_cost(x_h: &[f64], u_h: &[f64], x_r_est: &[f64], obj: &HumanObjectives) -> f64 {
    let post: Vec<f64> = x_h.iter().zip(u_h).map(|(x, u)| x + u).collect();
    obj.theta_5 * (-obj.theta_6 * distance(&post, x_r_est)).exp()
}

/// Probabilities aligned with the ordering of the human's action set.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution(Vec<f64>);

impl ActionDistribution {
    pub fn new(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// Softmax of `-gamma * cost` with max-subtraction, written into `out`.
pub(crate) fn boltzmann_into(costs: &[f64], gamma: f64, out: &mut [f64]) {
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for (o, &c) in out.iter_mut().zip(costs) {
        *o = (-gamma * (c - min)).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Total deliberate cost of each action for the given awareness.
pub fn action_costs(
    x_h: &[f64],
    x_r: &[f64],
    beta: Awareness,
    obj: &HumanObjectives,
    actions: &ActionSet,
) -> Vec<f64> {
    actions
        .iter()
        .map(|a| {
            let u = a.components();
            let mut c = goal_cost(x_h, u, obj);
            if beta == Awareness::Aware {
                c += safety_cost(x_h, u, x_r, obj);
            }
            c
        })
        .collect()
}

/// Boltzmann-rational action distribution. With `beta = Unaware` the safety
/// term is never evaluated, so the result does not depend on `x_r` at all.
pub fn deliberate_distribution(
    x_h: &AgentState,
    x_r: &AgentState,
    beta: Awareness,
    obj: &HumanObjectives,
    gamma: f64,
    actions: &ActionSet,
) -> ActionDistribution {
    let costs = action_costs(x_h.coords(), x_r.coords(), beta, obj, actions);
    let mut probs = vec![0.0; costs.len()];
    boltzmann_into(&costs, gamma, &mut probs);
    ActionDistribution(probs)
}

/// `(1 - omega) * deliberate + omega * uniform`.
pub fn mixture_distribution(
    deliberate: &ActionDistribution,
    omega_h: f64,
    actions: &ActionSet,
) -> ActionDistribution {
    let floor = omega_h * (1.0 / actions.len() as f64);
    ActionDistribution(
        deliberate
            .0
            .iter()
            .map(|p| (1.0 - omega_h) * p + floor)
            .collect(),
    )
}

/// The human's error in estimating the robot position.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationNoise {
    pub mode: NoiseMode,
    /// Per-component variance for [`NoiseMode::Gaussian`].
    pub sigma: f64,
    pub eps0: Vec<f64>,
    pub eta: f64,
    /// Step at which the danger signal first switched on.
    pub t_d: Option<u64>,
}

impl EstimationNoise {
    /// Deterministic bias at step `t`: `eps0 * exp(-eta * (t - t_d))` while
    /// the signal is on, `eps0` otherwise.
    pub fn bias_at(&self, t: u64, signal_on: bool) -> Vec<f64> {
        let decay = match (signal_on, self.t_d) {
            (true, Some(t_d)) if t >= t_d => (-self.eta * (t - t_d) as f64).exp(),
            _ => 1.0,
        };
        self.eps0.iter().map(|e| e * decay).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, t: u64, signal_on: bool, rng: &mut R) -> Vec<f64> {
        match self.mode {
            NoiseMode::ConstantBias => self.bias_at(t, signal_on),
            NoiseMode::Gaussian => {
                if self.sigma == 0.0 {
                    return vec![0.0; self.eps0.len()];
                }
                let normal = Normal::new(0.0, self.sigma.sqrt()).expect("finite sigma");
                (0..self.eps0.len()).map(|_| normal.sample(rng)).collect()
            }
        }
    }
}

/// Per-call inputs of the simulated human.
#[derive(Debug, Clone, Copy)]
pub struct HumanPolicy<'a> {
    pub objectives: &'a HumanObjectives,
    pub actions: &'a ActionSet,
    pub beta_true: Awareness,
    pub omega_h: f64,
    pub randomness: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanChoice {
    pub action_index: usize,
    pub robot_estimate: AgentState,
    pub random: bool,
}

/// Index of the lowest-cost action; ties go to the lowest index.
pub fn argmin_action(
    x_h: &[f64],
    x_r_est: &[f64],
    beta: Awareness,
    obj: &HumanObjectives,
    actions: &ActionSet,
) -> usize {
    let costs = action_costs(x_h, x_r_est, beta, obj, actions);
    let mut best = 0;
    for (i, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = i;
        }
    }
    best
}

/// One decision of the ground-truth human at step `t`.
pub fn simulate_human_action<R: Rng + ?Sized>(
    x_h: &AgentState,
    x_r_true: &AgentState,
    t: u64,
    signal_on: bool,
    noise: &EstimationNoise,
    policy: &HumanPolicy<'_>,
    rng: &mut R,
) -> HumanChoice {
    let eps = noise.sample(t, signal_on, rng);
    let robot_estimate = x_r_true.offset(&eps);
    if policy.randomness && policy.omega_h > 0.0 && rng.random::<f64>() < policy.omega_h {
        let action_index = rng.random_range(0..policy.actions.len());
        return HumanChoice {
            action_index,
            robot_estimate,
            random: true,
        };
    }
    let action_index = argmin_action(
        x_h.coords(),
        robot_estimate.coords(),
        policy.beta_true,
        policy.objectives,
        policy.actions,
    );
    HumanChoice {
        action_index,
        robot_estimate,
        random: false,
    }
}
