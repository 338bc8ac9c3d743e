//! The interactive environment, the UCB learners and α-regret bookkeeping.

mod env;
mod runner;
mod scenarios;
mod trials;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::KernelError;
use crate::nystrom::NystromError;
use crate::objectives::ObjectiveError;
use crate::offline::OfflineError;

pub use env::{
    distorted_signal, distortion, Arrival, BaselineKind, BaselineMode, Context, ContextObjective, Environment,
    FeedbackMode, FeedbackRecord, Noise, ObjectiveConstants, Scenario,
};
pub use runner::{run, RoundRow, RegretTrace, RunConfig};
pub use scenarios::{grouped_trace, sessions_scenario, Family, SessionSpec};
pub use trials::{aggregate, run_trials, AggregateRow, TrialResults};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BanditError {
    #[error("item {item} was already selected for context {context}")]
    AlreadySelected { context: usize, item: usize },
    #[error("context {context} has no remaining candidates")]
    PoolExhausted { context: usize },
    #[error("context {context} has no BP decomposition, so separate feedback is unavailable")]
    MissingSeparateFeedback { context: usize },
    #[error("context {context} has no per-context horizon")]
    MissingHorizon { context: usize },
    #[error("exact baseline for context objective {objective} at size {k} needs {count} evaluations")]
    InfeasibleBaseline { objective: usize, k: usize, count: u128 },
    #[error("{kind} regret is unavailable: {reason}")]
    UnavailableRegret { kind: &'static str, reason: String },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("at least one seed is required")]
    NoSeeds,
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Offline(#[from] OfflineError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Nystrom(#[from] NystromError),
}

pub type Result<T> = std::result::Result<T, BanditError>;

/// Learners and offline references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// UCB on monolithic feedback with the sketched posterior.
    MnnUcb,
    /// UCB on distorted separate feedback, modular lower bound known.
    MnnUcbSeparate,
    /// UCB on distorted separate feedback without the modular lower bound.
    MnnUcbSeparateNoL1,
    /// UCB that only observes the submodular part of the gain.
    SmUcbAblation,
    /// MNN-UCB with the dense exact posterior in place of the sketch.
    MnnUcbExact,
    /// Greedy with the true oracle.
    OfflineGreedy,
    /// Distorted greedy with the true oracle and `k = T_q`.
    OfflineDistorted,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::MnnUcb,
        Algorithm::MnnUcbSeparate,
        Algorithm::MnnUcbSeparateNoL1,
        Algorithm::SmUcbAblation,
        Algorithm::MnnUcbExact,
        Algorithm::OfflineGreedy,
        Algorithm::OfflineDistorted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MnnUcb => "mnn_ucb",
            Algorithm::MnnUcbSeparate => "mnn_ucb_separate",
            Algorithm::MnnUcbSeparateNoL1 => "mnn_ucb_separate_no_l1",
            Algorithm::SmUcbAblation => "sm_ucb_ablation",
            Algorithm::MnnUcbExact => "mnn_ucb_exact",
            Algorithm::OfflineGreedy => "offline_greedy",
            Algorithm::OfflineDistorted => "offline_distorted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn feedback_mode(self) -> FeedbackMode {
        match self {
            Algorithm::MnnUcbSeparate | Algorithm::MnnUcbSeparateNoL1 => FeedbackMode::Separate,
            Algorithm::SmUcbAblation => FeedbackMode::SubmodularOnly,
            _ => FeedbackMode::Monolithic,
        }
    }

    /// Regret notion reported by default for this algorithm.
    pub fn default_regret(self, bp: bool) -> RegretKind {
        match self {
            Algorithm::MnnUcbSeparate | Algorithm::OfflineDistorted if bp => RegretKind::Bp2,
            Algorithm::MnnUcbSeparateNoL1 if bp => RegretKind::Bp3,
            _ if bp => RegretKind::Bp,
            _ => RegretKind::Ws,
        }
    }
}

/// Which approximation ratio scales the offline comparator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretKind {
    /// `alpha_bp`.
    Bp,
    /// `alpha_dist`.
    Bp2,
    /// `alpha_dist_weak`.
    Bp3,
    /// `alpha_ws`.
    Ws,
}

impl RegretKind {
    pub const ALL: [RegretKind; 4] = [RegretKind::Bp, RegretKind::Bp2, RegretKind::Bp3, RegretKind::Ws];

    pub fn name(self) -> &'static str {
        match self {
            RegretKind::Bp => "bp",
            RegretKind::Bp2 => "bp2",
            RegretKind::Bp3 => "bp3",
            RegretKind::Ws => "ws",
        }
    }

    pub fn index(self) -> usize {
        match self {
            RegretKind::Bp => 0,
            RegretKind::Bp2 => 1,
            RegretKind::Bp3 => 2,
            RegretKind::Ws => 3,
        }
    }
}
