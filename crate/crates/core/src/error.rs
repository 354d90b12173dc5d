use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("code distance must be at least 2, got {0}")]
    DistanceTooSmall(usize),
    #[error("invalid noise model: {0}")]
    InvalidModel(String),
    #[error("matching graph has an odd number of nodes ({0})")]
    OddNodeCount(usize),
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error("incomplete syndrome records: {0}")]
    IncompleteRecords(String),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot fit slope: {0}")]
    SlopeFit(String),
}
