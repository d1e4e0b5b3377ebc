use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("model is not asymptotically stable (spectral abscissa {margin:.3e})")]
    Unstable { margin: f64 },

    #[error("outside the Bogoliubov oracle domain: kappa+ G-^2 - kappa- G+^2 = {denominator:.3e} <= 0")]
    OracleDomain { denominator: f64 },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("eigenvalue solver did not converge")]
    EigenSolver,

    #[error("quadrature did not converge: error estimate {estimate:.3e} above tolerance {tolerance:.3e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("unphysical covariance matrix: {0}")]
    Unphysical(String),

    #[error("trajectory {trajectory} diverged at step {step}")]
    Divergence { trajectory: u64, step: u64 },

    #[error("invalid sweep: {0}")]
    Sweep(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the physics of the requested point
    /// (instability, oracle validity) rather than by bad input or numerics.
    pub fn is_physics_domain(&self) -> bool {
        matches!(self, Error::Unstable { .. } | Error::OracleDomain { .. })
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::EigenSolver
                | Error::Quadrature { .. }
                | Error::Unphysical(_)
                | Error::Divergence { .. }
        )
    }
}
