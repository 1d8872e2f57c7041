use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the forward model and the detection algorithms.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("conformal map inversion did not converge at z = {z} (residual {residual:e})")]
    InversionFailed { z: Complex64, residual: f64 },

    #[error("derivative of the conformal map vanishes at w = {0}")]
    CriticalPoint(Complex64),

    #[error("point {0} lies on the branch cut")]
    OnBranchCut(Complex64),

    #[error("velocity is identically zero")]
    ZeroVelocity,

    #[error("geometry operator has rank {rank} < 3 with N = {n}")]
    RankDeficient { rank: usize, n: usize },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    /// The potential vanishes (to threshold) so nothing can be recovered from it.
    #[error("stealth potential: {0}")]
    Stealth(String),

    #[error("angle only determined modulo 2π/{gcd}")]
    NotCoprime { gcd: u64 },

    #[error("no level-set crossing along ray {ray} of member {member}")]
    NoRoot { member: usize, ray: usize },

    #[error("tracking diverged at t = {t}")]
    Diverged { t: f64 },

    #[error("{0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by malformed or out-of-contract inputs.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::SizeGuard(_) | Error::ZeroVelocity)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
