use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("hypotheses violated at k = {k}: h1 = {h1}, h2 = {h2}")]
    HypothesisViolated { k: f64, h1: bool, h2: bool },
    #[error("degenerate double root of W (|W'| = {0:e})")]
    DegenerateRoot(f64),
    #[error("gap function does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("normalizer denominator is singular (|den| = {0:e})")]
    SingularNormalizer(f64),
    #[error("cubic coefficient too small to classify (Re c11 = {re_c11:e}, Re c22 = {re_c22:e})")]
    DegenerateCubic { re_c11: f64, re_c22: f64 },
    #[error("{name} = {value:e} lies on a classification boundary")]
    BoundaryCase { name: &'static str, value: f64 },
    #[error("unfolding case {0} is not VIa")]
    WrongCase(String),
    #[error("point ({0}, {1}) lies on a bifurcation line")]
    OnBoundary(f64, f64),
    #[error("d0 - b0*c0 vanishes")]
    DegenerateDet,
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InvalidParams(_) => "InvalidParams",
            Self::HypothesisViolated { .. } => "HypothesisViolated",
            Self::DegenerateRoot(_) => "DegenerateRoot",
            Self::NoSignChange { .. } => "NoSignChange",
            Self::SingularNormalizer(_) => "SingularNormalizer",
            Self::DegenerateCubic { .. } => "DegenerateCubic",
            Self::BoundaryCase { .. } => "BoundaryCase",
            Self::WrongCase(_) => "WrongCase",
            Self::OnBoundary(..) => "OnBoundary",
            Self::DegenerateDet => "DegenerateDet",
            Self::NonFiniteState { .. } => "NonFiniteState",
            Self::InsufficientData(_) => "InsufficientData",
        }
    }
}
