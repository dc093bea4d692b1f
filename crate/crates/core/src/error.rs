use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports.
///
/// Variants are split so that callers can distinguish bad input
/// ([`Error::is_validation`]) from numerical non-convergence.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0} instead of 1")]
    WrongTrace(f64),
    #[error("Bloch vector norm {0} exceeds 1")]
    OutsideBall(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("efficiency {0} is outside [0, 1]")]
    Efficiency(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("noise draw has {got} increments, model has {expected} channels")]
    NoiseLength { expected: usize, got: usize },
    #[error("state too close to the pole z = {pole} for {what}")]
    Pole { pole: i8, what: &'static str },
    #[error("denominator of {0} vanishes")]
    Singular(&'static str),
    #[error("{0} has no closed-form evolution law")]
    NoEvolutionLaw(String),
    #[error("series truncated at {n_max} terms: tail {tail:e} vs head {head:e}")]
    Truncation { n_max: usize, tail: f64, head: f64 },
    #[error("series density error estimate {estimate:e} exceeds tolerance")]
    SeriesAccuracy { estimate: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("degree cap {cap} exceeded by {what}")]
    DegreeCap { cap: usize, what: String },
    #[error("Lie closure did not converge within depth {depth} (rank {rank})")]
    ClosureDepth { depth: usize, rank: usize },
    #[error("mismatched input: {0}")]
    Mismatch(String),
}

impl Error {
    /// True for errors caused by the numerics rather than by the input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::Truncation { .. }
                | Error::SeriesAccuracy { .. }
                | Error::Quadrature(_)
                | Error::ClosureDepth { .. }
                | Error::DegreeCap { .. }
        )
    }

    pub fn is_validation(&self) -> bool {
        !self.is_non_convergence()
    }
}
