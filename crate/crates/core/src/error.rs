use thiserror::Error;

use crate::gf::GfError;
use crate::model::{ConfigError, ModelError};

/// Failures that indicate a broken configuration or an implementation bug.
/// A user that simply cannot decode is reported through
/// [`crate::delivery::DecodeFailure`] instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error("exhaustive sweep needs {needed} episodes, over the budget of {budget}; use random mode")]
    BudgetExceeded { needed: String, budget: u64 },
}
