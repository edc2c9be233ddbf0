//! Phase-space quasi-distributions for quantum mechanics on a noncommutative
//! phase space: extended symplectic forms, closed-form Gaussian calculus,
//! grid star products, and the Wigner / noncommutative Wigner / Liouville tests.

pub mod criteria;
pub mod error;
pub mod gausspoly;
pub mod linalg;
pub mod measures;
pub mod starcalc;
pub mod symplectic;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
