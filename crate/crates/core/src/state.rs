//! Agent states, actions, finite action sets and single-step dynamics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Position of an agent as a fixed-dimension real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentState(Vec<f64>);

impl AgentState {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self(coords.into())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Componentwise `self + offset`.
    pub fn offset(&self, offset: &[f64]) -> AgentState {
        debug_assert_eq!(self.0.len(), offset.len());
        AgentState(self.0.iter().zip(offset).map(|(a, b)| a + b).collect())
    }

    pub fn distance(&self, other: &AgentState) -> f64 {
        distance(&self.0, &other.0)
    }
}

impl From<Vec<f64>> for AgentState {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Per-step displacement chosen by an agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Action(Vec<f64>);

impl Action {
    pub fn new(components: impl Into<Vec<f64>>) -> Self {
        Self(components.into())
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

impl From<Vec<f64>> for Action {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ActionSetError {
    #[error("action set is empty")]
    Empty,
    #[error("action {index} duplicates an earlier action")]
    Duplicate { index: usize },
    #[error("action {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("action {index} has a non-finite component")]
    NonFinite { index: usize },
}

/// Ordered, duplicate-free, non-empty list of actions. The ordering is
/// significant: it fixes tie-breaking everywhere an argmin is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Action>", into = "Vec<Action>")]
pub struct ActionSet {
    actions: Vec<Action>,
}

impl ActionSet {
    pub fn new(actions: Vec<Action>) -> Result<Self, ActionSetError> {
        let first = actions.first().ok_or(ActionSetError::Empty)?;
        let dim = first.dim();
        for (index, a) in actions.iter().enumerate() {
            if a.dim() != dim {
                return Err(ActionSetError::DimensionMismatch {
                    index,
                    found: a.dim(),
                    expected: dim,
                });
            }
            if a.0.iter().any(|c| !c.is_finite()) {
                return Err(ActionSetError::NonFinite { index });
            }
            if actions[..index].contains(a) {
                return Err(ActionSetError::Duplicate { index });
            }
        }
        Ok(Self { actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.actions[0].dim()
    }

    pub fn get(&self, index: usize) -> Option<&Action> {
        self.actions.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Action> {
        self.actions.iter()
    }

    /// Index of `action` by exact comparison.
    pub fn index_of(&self, action: &Action) -> Option<usize> {
        self.actions.iter().position(|a| a == action)
    }

    pub fn contains(&self, action: &Action) -> bool {
        self.index_of(action).is_some()
    }

    /// Axes along which at least one action moves. The remaining axes are
    /// frozen for the owning agent.
    pub fn movement_axes(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&axis| self.actions.iter().any(|a| a.0[axis] != 0.0))
            .collect()
    }
}

impl TryFrom<Vec<Action>> for ActionSet {
    type Error = ActionSetError;

    fn try_from(actions: Vec<Action>) -> Result<Self, Self::Error> {
        Self::new(actions)
    }
}

impl From<ActionSet> for Vec<Action> {
    fn from(set: ActionSet) -> Self {
        set.actions
    }
}

impl<'a> IntoIterator for &'a ActionSet {
    type Item = &'a Action;
    type IntoIter = std::slice::Iter<'a, Action>;

    fn into_iter(self) -> Self::IntoIter {
        self.actions.iter()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StepError {
    #[error("action is not a member of the agent's action set")]
    NotInActionSet,
    #[error("state has dimension {state}, action has dimension {action}")]
    DimensionMismatch { state: usize, action: usize },
}

/// Deterministic single-step transition map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    /// `x[t+1] = x[t] + u[t]`
    #[default]
    Integrator,
}

impl Dynamics {
    /// Applies the transition without an action-set membership check.
    pub fn apply(&self, state: &AgentState, action: &Action) -> AgentState {
        match self {
            Dynamics::Integrator => state.offset(action.components()),
        }
    }

    pub fn step(
        &self,
        state: &AgentState,
        action: &Action,
        actions: &ActionSet,
    ) -> Result<AgentState, StepError> {
        if state.dim() != action.dim() {
            return Err(StepError::DimensionMismatch {
                state: state.dim(),
                action: action.dim(),
            });
        }
        if !actions.contains(action) {
            return Err(StepError::NotInActionSet);
        }
        Ok(self.apply(state, action))
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Closed-ball membership used for every proximity test, both when
/// forecasting and when scoring realized episodes.
pub fn within_radius(a: &[f64], b: &[f64], rho: f64) -> bool {
    squared_distance(a, b) <= rho * rho
}

#[cfg(test)]
mod tests {
    use super::*;

    fn robot_actions() -> ActionSet {
        ActionSet::new(vec![
            Action::new([0.0, 0.0]),
            Action::new([0.0, 1.0]),
            Action::new([0.0, 2.0]),
        ])
        .unwrap()
    }

    fn pedestrian_actions() -> ActionSet {
        ActionSet::new(
            [-1.0, -0.5, 0.0, 0.5, 1.0]
                .iter()
                .map(|&v| Action::new([v, 0.0]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn integrator_adds_action() {
        let d = Dynamics::Integrator;
        let next = d
            .step(
                &AgentState::new([0.0, 0.0]),
                &Action::new([0.0, 2.0]),
                &robot_actions(),
            )
            .unwrap();
        assert_eq!(next, AgentState::new([0.0, 2.0]));

        let next = d
            .step(
                &AgentState::new([40.0, 10.0]),
                &Action::new([-0.5, 0.0]),
                &pedestrian_actions(),
            )
            .unwrap();
        assert_eq!(next, AgentState::new([39.5, 10.0]));
    }

    #[test]
    fn zero_action_is_a_fixed_point() {
        let d = Dynamics::Integrator;
        let stop = Action::new([0.0, 0.0]);
        let mut s = AgentState::new([3.25, -7.5]);
        let start = s.clone();
        for _ in 0..100 {
            s = d.step(&s, &stop, &robot_actions()).unwrap();
        }
        assert_eq!(s, start);
    }

    #[test]
    fn step_rejects_foreign_action() {
        let err = Dynamics::Integrator
            .step(
                &AgentState::new([0.0, 0.0]),
                &Action::new([0.0, 3.0]),
                &robot_actions(),
            )
            .unwrap_err();
        assert_eq!(err, StepError::NotInActionSet);
    }

    #[test]
    fn action_set_validation() {
        assert_eq!(ActionSet::new(vec![]).unwrap_err(), ActionSetError::Empty);
        let dup = ActionSet::new(vec![Action::new([1.0]), Action::new([1.0])]).unwrap_err();
        assert_eq!(dup, ActionSetError::Duplicate { index: 1 });
        let mixed = ActionSet::new(vec![Action::new([1.0]), Action::new([1.0, 0.0])]).unwrap_err();
        assert!(matches!(
            mixed,
            ActionSetError::DimensionMismatch { index: 1, .. }
        ));
    }

    #[test]
    fn movement_axes_skip_frozen_components() {
        assert_eq!(robot_actions().movement_axes(), vec![1]);
        assert_eq!(pedestrian_actions().movement_axes(), vec![0]);
    }

    #[test]
    fn step_is_bitwise_deterministic() {
        let s = AgentState::new([0.1, 0.7]);
        let a = Action::new([0.0, 1.0]);
        let x = Dynamics::Integrator.apply(&s, &a);
        let y = Dynamics::Integrator.apply(&s, &a);
        assert_eq!(
            x.coords().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            y.coords().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
