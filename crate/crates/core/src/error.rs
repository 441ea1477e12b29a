use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("permutation is reducible: top and bottom prefixes of length {0} coincide")]
    Reducible(usize),
    #[error("invalid lengths: {0}")]
    InvalidLengths(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("point {0} is a discontinuity of the map")]
    Singularity(String),
    #[error("connection at step {step}: {detail}")]
    Connection { step: usize, detail: String },
    #[error("precision exhausted at step {step}: relative error bound {bound:e} exceeds tolerance")]
    PrecisionExhausted { step: usize, bound: f64 },
    #[error("path too short: {0}")]
    Depth(String),
    #[error("return time {0} exceeds the iteration cap")]
    ReturnTimeCap(u64),
    #[error("Oseledets splitting is indeterminate: {0}")]
    Indeterminate(String),
    #[error("instance is not admissible: {0}")]
    NotAdmissible(String),
    #[error("boundary condition violated: {0}")]
    Boundary(String),
    #[error("insufficient decay: {0}")]
    Decay(String),
    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
