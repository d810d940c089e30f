use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("support points do not span an affine space of full dimension")]
    DegenerateHull,

    #[error("automatic face lattice needs dim <= 3 (got {dim}); supply the faces explicitly")]
    UnsupportedDimension { dim: usize },

    #[error("point lies outside the polytope (signed distance {distance:e})")]
    OutsidePolytope { distance: f64 },

    #[error("Newton solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("convolution support would reach {atoms} atoms (cap {cap})")]
    AtomBlowup { atoms: usize, cap: usize },

    #[error("derivative of multi-index {0:?} is not available")]
    MissingDerivative(alloc::vec::Vec<usize>),

    #[error("slope fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("grid too coarse: trapezoid mass drift {drift:e}")]
    GridTooCoarse { drift: f64 },

    #[error("only {hits} hits at N = {n}; need at least 20")]
    InsufficientHits { n: usize, hits: usize },

    #[error("quadrature orders disagree: relative difference {rel_diff:e}")]
    QuadratureFailure { rel_diff: f64 },

    #[error("support is not a lattice set")]
    NotLattice,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
