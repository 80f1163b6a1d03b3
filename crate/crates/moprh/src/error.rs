use thiserror::Error;

#[derive(Debug, Error)]
pub enum MoprhError {
    #[error("matrix of dim {dim} is singular to working tolerance")]
    SingularMatrix { dim: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("moment table regularity failure at degree {n} (condition estimate {cond:.3e})")]
    RegularityFailure { n: usize, cond: f64 },
    #[error("weight decay check failed at contour endpoints (max endpoint norm {norm:.3e})")]
    DecayFailure { norm: f64 },
    #[error("evaluation point too close to the contour (distance {dist:.3e}, clearance {clearance:.3e})")]
    ContourClearance { dist: f64, clearance: f64 },
    #[error("ODE step control failed: {0}")]
    StepControl(String),
    #[error("lattice step {n}: gamma block singular (singularity event)")]
    LatticeSingularity { n: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("series truncation order {have} insufficient, need {need}")]
    TruncationOrder { have: usize, need: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
