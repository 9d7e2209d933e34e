//! Numerical workbench for function-space norms, integral operators, and
//! level-set functionals on rectangular lattices.
//!
//! The crate builds up, layer by layer:
//!
//! * [`field`] — lattices, sampled analytic test functions, discrete calculus;
//! * [`dyadic`] — shifted dyadic cube systems with exact cube arithmetic;
//! * [`weights`] — power-type weights and Muckenhoupt constants;
//! * [`operators`] — ball averages, maximal functions, fractional integrals;
//! * [`spaces`] — a catalog of ball Banach function space norms;
//! * [`levelset`] — the level-set measure field and the weak/strong
//!   difference-quotient functionals, with their gradient limit;
//! * [`harness`] — configurable verification experiments with reports.

pub mod dyadic;
pub mod error;
pub mod field;
pub mod harness;
pub mod levelset;
pub mod operators;
pub mod quad;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
pub use field::{FunctionSpec, GridFunction, Lattice};
pub use spaces::SpaceSpec;
pub use weights::WeightSpec;
