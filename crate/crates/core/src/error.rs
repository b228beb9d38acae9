use std::fmt;

use thiserror::Error;

/// A violated invariant of [`crate::UcpSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecViolation {
    /// Span must be finite and positive.
    Length(f64),
    /// Barrier height must be finite.
    Height(f64),
    /// Scaling parameter must be finite and strictly greater than one.
    Rho(f64),
    /// Alpha and beta must be finite.
    NonFiniteExponent { alpha: f64, beta: f64 },
    /// Alpha and beta may not both be zero.
    AlphaBetaZero,
    /// The removal exponent `alpha + beta * g` is not positive at stage `g`.
    StageIllFormed { stage: u32, exponent: f64 },
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpecViolation::Length(l) => write!(f, "L must be finite and > 0 (got {l})"),
            SpecViolation::Height(v) => write!(f, "V must be finite (got {v})"),
            SpecViolation::Rho(r) => write!(f, "rho must be finite and > 1 (got {r})"),
            SpecViolation::NonFiniteExponent { alpha, beta } => {
                write!(f, "alpha and beta must be finite (got alpha={alpha}, beta={beta})")
            }
            SpecViolation::AlphaBetaZero => write!(f, "alpha and beta cannot both be zero"),
            SpecViolation::StageIllFormed { stage, exponent } => write!(
                f,
                "alpha+beta*G <= 0 at stage G={stage} (alpha+beta*G = {exponent}); \
                 the potential is not well formed beyond stage {}",
                stage.saturating_sub(1)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UcpError {
    #[error("invalid spec: {0}")]
    InvalidSpec(SpecViolation),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("oracle infeasible: stage {stage} exceeds the oracle cap of {cap} (use the closed form)")]
    OracleInfeasible { stage: u32, cap: u32 },
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
}

impl From<SpecViolation> for UcpError {
    fn from(v: SpecViolation) -> Self {
        UcpError::InvalidSpec(v)
    }
}

pub type Result<T> = std::result::Result<T, UcpError>;

pub(crate) fn invalid_arg(msg: impl Into<String>) -> UcpError {
    UcpError::InvalidArgument(msg.into())
}
