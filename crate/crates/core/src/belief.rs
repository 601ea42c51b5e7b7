//! Online Bayesian belief over the danger-awareness coefficient.

use thiserror::Error;

use crate::human::{ActionDistribution, Awareness};

#[derive(Debug, Error, PartialEq)]
pub enum BeliefError {
    #[error("observed action has zero likelihood under every awareness hypothesis")]
    DegenerateEvidence,
    #[error("observed action index {index} is outside a distribution of {len} actions")]
    BadIndex { index: usize, len: usize },
    #[error("belief masses ({unaware}, {aware}) do not form a distribution")]
    Invalid { unaware: f64, aware: f64 },
}

/// `P_t(beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Belief {
    p_unaware: f64,
    p_aware: f64,
}

impl Default for Belief {
    fn default() -> Self {
        Self {
            p_unaware: 0.5,
            p_aware: 0.5,
        }
    }
}

impl Belief {
    pub fn new(p_unaware: f64, p_aware: f64) -> Result<Self, BeliefError> {
        let ok = p_unaware >= 0.0
            && p_aware >= 0.0
            && p_unaware.is_finite()
            && p_aware.is_finite()
            && (p_unaware + p_aware - 1.0).abs() <= 1e-12;
        if ok {
            Ok(Self { p_unaware, p_aware })
        } else {
            Err(BeliefError::Invalid {
                unaware: p_unaware,
                aware: p_aware,
            })
        }
    }

    /// `P_t(beta = 1)`
    pub fn p_aware(&self) -> f64 {
        self.p_aware
    }

    /// `P_t(beta = 0)`
    pub fn p_unaware(&self) -> f64 {
        self.p_unaware
    }

    pub fn weight(&self, beta: Awareness) -> f64 {
        match beta {
            Awareness::Unaware => self.p_unaware,
            Awareness::Aware => self.p_aware,
        }
    }

    /// Bayes' rule with the likelihood of the observed action under each
    /// hypothesis; `likelihoods` is indexed by [`Awareness::index`].
    pub fn update(
        &self,
        observed_action: usize,
        likelihoods: [&ActionDistribution; 2],
    ) -> Result<Belief, BeliefError> {
        for l in likelihoods {
            if observed_action >= l.len() {
                return Err(BeliefError::BadIndex {
                    index: observed_action,
                    len: l.len(),
                });
            }
        }
        let joint_unaware = likelihoods[0].get(observed_action) * self.p_unaware;
        let joint_aware = likelihoods[1].get(observed_action) * self.p_aware;
        let evidence = joint_unaware + joint_aware;
        if evidence == 0.0 || !evidence.is_finite() {
            return Err(BeliefError::DegenerateEvidence);
        }
        Ok(Belief {
            p_unaware: joint_unaware / evidence,
            p_aware: joint_aware / evidence,
        })
    }
}

/// Free-function form of [`Belief::update`].
pub fn update_belief(
    prior: &Belief,
    observed_action: usize,
    likelihoods: [&ActionDistribution; 2],
) -> Result<Belief, BeliefError> {
    prior.update(observed_action, likelihoods)
}
