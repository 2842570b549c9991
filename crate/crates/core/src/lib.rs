//! Symmetric-sector machinery for `n` qudits of local dimension `d`.
//!
//! The crate builds the orthogonal projector onto the permutation-symmetric
//! subspace of `(C^d)^{⊗n}`, evaluates how much weight product states and
//! mixtures carry there, searches for the smallest such weight over
//! separable states, and turns the resulting bounds into entanglement
//! witnesses `W = Π − B·1`. Multipartite partial transposition and PPT
//! sweeps round out the toolkit.
//!
//! Basis kets are indexed big-endian: the first tensor factor is the most
//! significant digit.

pub mod combinatorics;
pub mod error;
pub mod io;
pub mod lemma_oracle;
pub mod linalg;
pub mod optimizer;
pub mod projector;
pub mod rng;
pub mod states;
pub mod witness_ppt;

pub use num_complex::Complex64;

pub use combinatorics::{Composition, Cycle, Limits, Permutation};
pub use error::{Error, Result};
pub use projector::Projector;
pub use states::{DensityMatrix, FMatrix, MixtureSpec, PureState};

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
