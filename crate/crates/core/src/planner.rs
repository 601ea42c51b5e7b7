//! Chance-constrained receding-horizon planning by exhaustive enumeration.
//!
//! Every robot action sequence of length `T_R + 1` is scored by the summed
//! stage cost and checked against `P_Coll[k] <= P_th` for every horizon step.
//! Enumeration walks the prefix tree of sequences so that the occupancy
//! recursion is shared by all sequences with a common prefix; the result is
//! identical to scoring each sequence independently.
//!
//! The danger signal is on exactly when the chance constraint is active, i.e.
//! when the unconstrained minimizer violates it somewhere on the horizon.

use rayon::prelude::*;
use thiserror::Error;

use crate::belief::Belief;
use crate::config::{BoundMode, ScenarioConfig};
use crate::prediction::{CollisionProfile, PredictionError, PredictiveModel, Rollout};
use crate::state::{Action, ActionSet, AgentState, Dynamics};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Prediction(#[from] PredictionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotObjectives {
    pub theta_1: f64,
    pub theta_2: f64,
    pub goal: AgentState,
}

/// `theta_1 * |x + u - g|^2 + theta_2 * |u|^2`
pub fn robot_stage_cost(x_r: &[f64], u_r: &[f64], obj: &RobotObjectives) -> f64 {
    let g = obj.goal.coords();
    let mut to_goal = 0.0;
    let mut effort = 0.0;
    for i in 0..x_r.len() {
        let e = x_r[i] + u_r[i] - g[i];
        to_goal += e * e;
        effort += u_r[i] * u_r[i];
    }
    obj.theta_1 * to_goal + obj.theta_2 * effort
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// Indices into the robot action set, one per step `t..=t+T_R`.
    pub action_indices: Vec<usize>,
    pub actions: Vec<Action>,
    pub first_action: Action,
    /// Danger signal status.
    pub d_r: bool,
    pub collision_profile: CollisionProfile,
    pub objective_value: f64,
    pub feasible: bool,
    pub fallback_used: bool,
    /// Robot positions `t..=t+T_R+1` along the chosen plan.
    pub trajectory: Vec<AgentState>,
}

#[derive(Debug, Clone)]
pub struct Planner {
    objectives: RobotObjectives,
    actions: ActionSet,
    dynamics: Dynamics,
    horizon: usize,
    p_th: f64,
    mode: BoundMode,
    model: PredictiveModel,
}

/// Best candidate found so far in one subtree.
#[derive(Debug, Clone)]
struct Candidate {
    cost: f64,
    /// Secondary key for the fallback search.
    worst: f64,
    indices: Vec<usize>,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (self.cost, &self.indices) < (other.cost, &other.indices)
    }

    fn safer_than(&self, other: &Candidate) -> bool {
        (self.worst, self.cost, &self.indices) < (other.worst, other.cost, &other.indices)
    }
}

fn pick(
    a: Option<Candidate>,
    b: Option<Candidate>,
    better: impl Fn(&Candidate, &Candidate) -> bool,
) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

struct Search<'a> {
    planner: &'a Planner,
    /// Constraint enforced while descending; `None` explores everything and
    /// records the worst step for the fallback ordering.
    p_th: Option<f64>,
}

impl Search<'_> {
    fn descend(
        &self,
        depth: usize,
        position: &AgentState,
        rollout: &Rollout,
        cost: f64,
        worst: f64,
        prefix: &mut Vec<usize>,
    ) -> Option<Candidate> {
        let p = self.planner;
        let mut best: Option<Candidate> = None;
        for (i, a) in p.actions.iter().enumerate() {
            let stage = robot_stage_cost(position.coords(), a.components(), &p.objectives);
            let next = p.dynamics.apply(position, a);
            prefix.push(i);
            let found = if depth == p.horizon {
                // The last action never reaches a constrained step.
                Some(Candidate {
                    cost: cost + stage,
                    worst,
                    indices: prefix.clone(),
                })
            } else {
                let mut r = rollout.clone();
                let pk = r.advance(&p.model, position.coords(), next.coords());
                match self.p_th {
                    Some(th) if pk > th => None,
                    _ => self.descend(depth + 1, &next, &r, cost + stage, worst.max(pk), prefix),
                }
            };
            prefix.pop();
            best = match self.p_th {
                Some(_) => pick(best, found, Candidate::better_than),
                None => pick(best, found, Candidate::safer_than),
            };
        }
        best
    }

    fn run(&self, x_r: &AgentState, root: &Rollout) -> Option<Candidate> {
        let p = self.planner;
        // Split on the first action; the reduction is order independent.
        let per_branch: Vec<Option<Candidate>> = (0..p.actions.len())
            .into_par_iter()
            .map(|i| {
                let a = p.actions.get(i).expect("index in range");
                let stage = robot_stage_cost(x_r.coords(), a.components(), &p.objectives);
                let next = p.dynamics.apply(x_r, a);
                let mut prefix = vec![i];
                if p.horizon == 0 {
                    return Some(Candidate {
                        cost: stage,
                        worst: 0.0,
                        indices: prefix,
                    });
                }
                let mut r = root.clone();
                let pk = r.advance(&p.model, x_r.coords(), next.coords());
                match self.p_th {
                    Some(th) if pk > th => None,
                    _ => self.descend(1, &next, &r, stage, pk, &mut prefix),
                }
            })
            .collect();
        let better = |a: &Candidate, b: &Candidate| match self.p_th {
            Some(_) => a.better_than(b),
            None => a.safer_than(b),
        };
        per_branch
            .into_iter()
            .fold(None, |acc, c| pick(acc, c, better))
    }
}

impl Planner {
    pub fn new(
        objectives: RobotObjectives,
        actions: ActionSet,
        dynamics: Dynamics,
        horizon: usize,
        p_th: f64,
        mode: BoundMode,
        model: PredictiveModel,
    ) -> Self {
        Self {
            objectives,
            actions,
            dynamics,
            horizon,
            p_th,
            mode,
            model,
        }
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self::new(
            cfg.robot_objectives(),
            cfg.robot.action_set.clone(),
            cfg.robot.dynamics,
            cfg.robot.t_r,
            cfg.robot.p_th,
            cfg.prediction.bound_mode,
            PredictiveModel::from_config(cfg),
        )
    }

    pub fn model(&self) -> &PredictiveModel {
        &self.model
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn mode(&self) -> BoundMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: BoundMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn robot_actions(&self) -> &ActionSet {
        &self.actions
    }

    /// Robot positions `x_R[t..=t+len]` produced by an index sequence.
    pub fn rollout_positions(&self, x_r: &AgentState, indices: &[usize]) -> Vec<AgentState> {
        let mut out = Vec::with_capacity(indices.len() + 1);
        out.push(x_r.clone());
        for &i in indices {
            let next = self.dynamics.apply(
                out.last().expect("non-empty"),
                &self.actions.get(i).expect("valid index").clone(),
            );
            out.push(next);
        }
        out
    }

    pub fn sequence_cost(&self, x_r: &AgentState, indices: &[usize]) -> f64 {
        let positions = self.rollout_positions(x_r, indices);
        indices
            .iter()
            .zip(&positions)
            .map(|(&i, x)| {
                robot_stage_cost(
                    x.coords(),
                    self.actions.get(i).expect("valid index").components(),
                    &self.objectives,
                )
            })
            .sum()
    }

    /// Collision profile of an index sequence under the configured mode.
    pub fn sequence_profile(
        &self,
        x_r: &AgentState,
        x_h: &AgentState,
        belief: &Belief,
        indices: &[usize],
    ) -> Result<CollisionProfile, PredictionError> {
        let positions = self.rollout_positions(x_r, indices);
        self.model
            .collision_profile(self.mode, x_h, &positions[..=self.horizon], belief)
    }

    fn unconstrained_minimizer(&self, x_r: &AgentState) -> Vec<usize> {
        // Stage costs do not depend on the human, so a plain search suffices.
        fn go(
            p: &Planner,
            depth: usize,
            x: &AgentState,
            cost: f64,
            prefix: &mut Vec<usize>,
            best: &mut Option<(f64, Vec<usize>)>,
        ) {
            for (i, a) in p.actions.iter().enumerate() {
                let c = cost + robot_stage_cost(x.coords(), a.components(), &p.objectives);
                prefix.push(i);
                if depth == p.horizon {
                    if best.as_ref().is_none_or(|(b, _)| c < *b) {
                        *best = Some((c, prefix.clone()));
                    }
                } else {
                    let next = p.dynamics.apply(x, a);
                    go(p, depth + 1, &next, c, prefix, best);
                }
                prefix.pop();
            }
        }
        let mut best = None;
        go(self, 0, x_r, 0.0, &mut Vec::new(), &mut best);
        best.expect("non-empty action set").1
    }

    pub fn plan(
        &self,
        x_r: &AgentState,
        x_h: &AgentState,
        belief: &Belief,
    ) -> Result<PlanResult, PlanError> {
        let root = Rollout::start(&self.model, x_h, belief, self.mode)?;

        let unconstrained = self.unconstrained_minimizer(x_r);
        let unconstrained_profile = self.sequence_profile(x_r, x_h, belief, &unconstrained)?;
        let constraint_active = !unconstrained_profile.satisfies(self.p_th);

        let (indices, feasible, profile) = if !constraint_active {
            (unconstrained, true, unconstrained_profile)
        } else {
            let feasible = Search {
                planner: self,
                p_th: Some(self.p_th),
            }
            .run(x_r, &root);
            match feasible {
                Some(c) => {
                    let profile = self.sequence_profile(x_r, x_h, belief, &c.indices)?;
                    (c.indices, true, profile)
                }
                None => {
                    let c = Search {
                        planner: self,
                        p_th: None,
                    }
                    .run(x_r, &root)
                    .expect("non-empty action set");
                    let profile = self.sequence_profile(x_r, x_h, belief, &c.indices)?;
                    (c.indices, false, profile)
                }
            }
        };

        let actions: Vec<Action> = indices
            .iter()
            .map(|&i| self.actions.get(i).expect("valid index").clone())
            .collect();
        Ok(PlanResult {
            objective_value: self.sequence_cost(x_r, &indices),
            trajectory: self.rollout_positions(x_r, &indices),
            first_action: actions[0].clone(),
            action_indices: indices,
            actions,
            d_r: constraint_active,
            collision_profile: profile,
            feasible,
            fallback_used: !feasible,
        })
    }
}
