//! The curiosity-driven exploration core: reward, page registry with
//! transition counts, Q-network, exploration memory with recent/random
//! sampling, Boltzmann action selection, and the session loop.

mod env;
mod explore;
mod memory;
mod qnet;
mod registry;
mod select;

pub use env::{EnvDescriptor, EnvError, EnvStep, Environment, OutcomeKind};
pub use explore::{
    explore, run_session, ActionCandidate, ChoiceContext, DqnParams, DqnPolicy, EpisodeLog,
    ExplorationPolicy, MetaRecord, PolicyChoice, QSummary, SessionConfig, StepRecord,
};
pub use memory::{ExplorationMemory, Transition};
pub use qnet::{QNetwork, TrainSample};
pub use registry::{PageRegistry, RegisterOutcome, RegistryEntry};
pub use select::{select_action, SelectionOutcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("no applicable actions (m = 0)")]
    NoApplicableActions,
    #[error("executed count {executed} exceeds applicable count {applicable}")]
    ExecutedExceedsApplicable { executed: usize, applicable: usize },
    #[error("source page visit count must be at least 1")]
    ZeroVisits,
    #[error("dimension mismatch: expected input of {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training diverged (non-finite loss)")]
    TrainingDiverged,
    #[error("empty training batch")]
    EmptyBatch,
    #[error("batch size {0} must be even")]
    OddBatchSize(usize),
    #[error("memory holds {have} transitions, {need} required")]
    InsufficientMemory { have: usize, need: usize },
    #[error("no candidate actions to select from")]
    NoCandidates,
    #[error(transparent)]
    Action(#[from] crate::actions::ActionError),
    #[error(transparent)]
    Embed(#[from] crate::embedding::EmbedError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Curiosity reward for a transition: `(1 - n/m) / sqrt(N)`.
///
/// `applicable` (m) and `executed` (n) describe the destination page;
/// `source_visits` (N) counts how many times the source page has been
/// reached. Bounded in [0, 1]; zero exactly when the destination is fully
/// explored.
pub fn reward(applicable: usize, executed: usize, source_visits: u64) -> Result<f64, AgentError> {
    if applicable == 0 {
        return Err(AgentError::NoApplicableActions);
    }
    if executed > applicable {
        return Err(AgentError::ExecutedExceedsApplicable {
            executed,
            applicable,
        });
    }
    if source_visits == 0 {
        return Err(AgentError::ZeroVisits);
    }
    let exploration_rate = executed as f64 / applicable as f64;
    Ok((1.0 - exploration_rate) / (source_visits as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_page_first_visit_is_one() {
        assert_eq!(reward(10, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn hand_case_eight_three_four() {
        assert!((reward(8, 3, 4).unwrap() - 0.3125).abs() < 1e-15);
    }

    #[test]
    fn fully_explored_page_is_zero() {
        assert_eq!(reward(5, 5, 1).unwrap(), 0.0);
    }

    #[test]
    fn zero_applicable_is_an_error() {
        assert!(matches!(reward(0, 0, 1), Err(AgentError::NoApplicableActions)));
    }

    #[test]
    fn bounds_and_monotonicity() {
        for m in 1..=12usize {
            for n in 0..=m {
                let mut prev = f64::INFINITY;
                for visits in 1..=30u64 {
                    let r = reward(m, n, visits).unwrap();
                    assert!((0.0..=1.0).contains(&r));
                    assert!(r <= prev + 1e-15, "not non-increasing in N");
                    assert_eq!(r == 0.0, n == m, "reward is zero iff n == m");
                    prev = r;
                }
                if n == m {
                    assert_eq!(reward(m, n, 1).unwrap(), 0.0);
                } else {
                    assert!(reward(m, n, 1).unwrap() > 0.0);
                }
            }
        }
    }
}
