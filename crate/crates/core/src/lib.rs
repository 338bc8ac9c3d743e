pub mod bandit;
pub mod cli;
pub mod config;
pub mod kernels;
pub mod nystrom;
pub mod objectives;
pub mod offline;
pub mod output;
pub mod ratings;

use thiserror::Error;

use bandit::BanditError;
use config::ConfigError;
use kernels::KernelError;
use nystrom::NystromError;
use objectives::ObjectiveError;
use offline::OfflineError;
use ratings::RatingsError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Offline(#[from] OfflineError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Nystrom(#[from] NystromError),
    #[error(transparent)]
    Bandit(#[from] BanditError),
    #[error(transparent)]
    Ratings(#[from] RatingsError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes used by the `bpb` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
}

fn objective_code(e: &ObjectiveError) -> i32 {
    match e {
        ObjectiveError::GroundSetTooLarge { .. } => exit::INFEASIBLE,
        ObjectiveError::AllSingletonsZero => exit::NUMERICAL,
        _ => exit::CONFIG,
    }
}

fn offline_code(e: &OfflineError) -> i32 {
    match e {
        OfflineError::SearchSpaceTooLarge { .. } => exit::INFEASIBLE,
        OfflineError::Objective(e) => objective_code(e),
        _ => exit::CONFIG,
    }
}

fn kernel_code(e: &KernelError) -> i32 {
    match e {
        KernelError::NotPsd(_) => exit::NUMERICAL,
        KernelError::InvalidParameter(_) | KernelError::DimensionMismatch { .. } => exit::CONFIG,
        _ => exit::NUMERICAL,
    }
}

fn nystrom_code(e: &NystromError) -> i32 {
    match e {
        NystromError::InvalidParameter(_) => exit::CONFIG,
        NystromError::Kernel(e) => kernel_code(e),
        _ => exit::NUMERICAL,
    }
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => exit::CONFIG,
            Error::Objective(e) => objective_code(e),
            Error::Offline(e) => offline_code(e),
            Error::Kernel(e) => kernel_code(e),
            Error::Nystrom(e) => nystrom_code(e),
            Error::Bandit(e) => match e {
                BanditError::InfeasibleBaseline { .. } => exit::INFEASIBLE,
                BanditError::AlreadySelected { .. } | BanditError::PoolExhausted { .. } => exit::NUMERICAL,
                BanditError::Objective(e) => objective_code(e),
                BanditError::Offline(e) => offline_code(e),
                BanditError::Kernel(e) => kernel_code(e),
                BanditError::Nystrom(e) => nystrom_code(e),
                _ => exit::CONFIG,
            },
            Error::Ratings(RatingsError::Io { .. }) => exit::IO,
            Error::Ratings(_) => exit::CONFIG,
            Error::Io { .. } | Error::Csv(_) | Error::Json(_) => exit::IO,
        }
    }
}
