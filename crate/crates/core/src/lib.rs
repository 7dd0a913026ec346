//! Classical simulation of duality quantum computing.
//!
//! Generalized gates `Σ c_i U_i` are realized both directly and through
//! divider/combiner circuits with post-selection. On top of that machinery
//! sit two Hamiltonian simulation pipelines, multi-product formulas and the
//! truncated Taylor series with oblivious amplitude amplification, both
//! checked against exact evolution.

pub mod error;
pub mod lcu;
pub mod numerics;
pub mod pauli;
pub mod product_formulas;
pub mod random;
pub mod taylor;
pub mod tolerance;

pub use error::{Result, SimError};
pub use numerics::{expm_hermitian, spectral_norm, tensor, DenseOperator, Statevector, C64};
pub use pauli::{HamiltonianSpec, PauliTerm};
