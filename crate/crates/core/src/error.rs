use thiserror::Error;

use crate::pci::GenericityReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("cloud is not principally generic (gap {:.3e}, smallest eigenvalue {:.3e}, threshold {:.3e}); use lac or emd instead", .0.gap, .0.smallest, .0.threshold_used)]
    NotGeneric(GenericityReport),

    #[error("input too large for exhaustive oracle: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("random generation failed after {0} attempts")]
    GenerationFailure(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
