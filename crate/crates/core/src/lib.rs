//! Quantum estimation of the Kerr nonlinearity of driven-dissipative
//! oscillators: Lindblad dynamics, closed-form steady-state moments,
//! quantum Fisher information engines and scaling experiments.

pub mod decay;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod fock;
pub mod liouvillian;
pub mod moments;
pub mod special;

pub use error::{Error, Result};
