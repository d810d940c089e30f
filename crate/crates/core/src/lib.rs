//! Bernstein measures and Bernstein approximations on convex polytopes.
//!
//! A finitely supported Bernstein measure on a polytope `P = conv(S)` is the
//! exponential family
//!
//! ```text
//! B(x) = Σ_α m_α(x) δ_α,   m_α(x) = c(α) e^{⟨α,τ(x)⟩} / Σ_β c(β) e^{⟨β,τ(x)⟩}
//! ```
//!
//! where `τ(x)` inverts the softmax moment map. The Bernstein approximation
//! `B_N(f)(x)` integrates `f` against the law of the mean of `N` independent
//! draws from `B(x)`.
//!
//! ## Modules
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`polytope`] | weighted supports, face lattices, point location |
//! | [`family`] | moment map, Newton inverse, masses, Legendre potential, `A`/`K` |
//! | [`convolution`] | dilated convolution powers, `B_N(f)`, central moments |
//! | [`cumulants`] | joint cumulants and the polynomial-in-`N` coefficients |
//! | [`expansion`] | the operators `L_ν` and remainder slopes |
//! | [`smooth`] | the smooth Todd-density measure on `[0,1]` |
//! | [`ldp`] | large-deviation rate functions |
//! | [`bergman`] | Bergman-Bernstein measures and balance checks |
//! | [`quadrature`] | Gauss-Legendre and simplex rules, polytope triangulation |
//!
//! The crate is `no_std` and needs only `alloc`. IO, file formats and the
//! command-line front end live in the `bernstein-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bergman;
pub mod catalog;
pub mod convolution;
pub mod cumulants;
pub mod expansion;
pub mod family;
pub mod ldp;
pub mod linalg;
pub mod polytope;
pub mod presets;
pub mod quadrature;
pub mod smooth;

mod error;

pub use error::{Error, Result};

pub use bergman::{BalanceReport, BergmanContext, QuadratureConfig, RiemannCheck};
pub use catalog::TestFunction;
pub use convolution::{
    bernstein_apply, central_moment_direct, convolution_power, path_weights, ConvolutionPower,
    LatticeTable, DEFAULT_MAX_ATOMS,
};
pub use cumulants::{
    expansion_coefficients, recursion_check, single_step_cumulants, CumulantTable, MultiIndex,
};
pub use expansion::{
    apply_operator, expansion_remainder, order_estimate, DerivativeOracle, ExpansionTable,
};
pub use family::{DiscreteMeasure, ExpFamily, MomentMatrices, NewtonConfig};
pub use ldp::{empirical_decay_check, rate_closed, rate_legendre, DecayMethod, ExtendedReal};
pub use polytope::{Face, FaceLattice, WeightedSupport, TOL_GEOM};
pub use presets::Preset;
pub use smooth::{GridDensity1D, ToddFamily, ToddPowerGrid};
