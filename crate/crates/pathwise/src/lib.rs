//! Pathwise integration for cadlag drivers of finite p-variation.
//!
//! Drivers are sampled as [`SamplePath`]s with an explicit jump registry.
//! Jumps are either traversed in fictitious time (geometric solutions) or
//! applied as first-order increments (forward solutions).

pub mod area;
pub mod cli;
pub mod error;
pub mod field;
pub mod levy;
pub mod param;
pub mod path;
pub mod pvar;
pub mod rough;
pub mod solver;
pub mod special;
pub mod tensor;
pub mod young;

pub use error::{Error, Result};
pub use path::{Jump, SamplePath, Skeleton};
pub use pvar::{pvar_brute, pvar_control, pvar_exact, ControlFunction, PVarResult};
