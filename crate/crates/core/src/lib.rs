//! Exact Jack polynomial algebra in the elementary-symmetric basis and the
//! null distribution of `1 - l_n / l_1` for singular beta-Wishart matrices.

pub mod dist;
pub mod error;
pub mod esym;
pub mod jack;
pub mod mc;
pub mod partition;
pub mod rational;
pub mod snapshot;
pub mod special;

pub use error::{Error, Result};
pub use esym::EPolynomial;
pub use jack::JackExpansion;
pub use partition::Partition;
pub use rational::Rational;
