//! Numerical workbench for spectral flow in finite semifinite matrix models.
//!
//! A model is a block-diagonal matrix algebra `⊕ M_{n_i}` carrying the
//! weighted trace `τ(X) = Σ w_i tr(X_i)`. Because the weights are arbitrary
//! positive reals, indices and spectral flows are real-valued, which makes
//! these models the smallest setting where type II phenomena show up.
//!
//! The crate is split along the estimators it provides:
//!
//! * [`algebra`]: the model, block operators, singular value functions and
//!   the logarithmic operator-ideal norms.
//! * [`calculus`]: Hermitian functional calculus, Fréchet derivatives,
//!   divided differences, adaptive quadrature and contour integration.
//! * [`paths`]: operator paths and the bounded transform `D ↦ D(1+D²)^{-1/2}`.
//! * [`flow`]: the spectral flow oracle and all integral estimators.
//! * [`jlo`]: the doubled graded space and the JLO series route.
//! * [`sample`]: seeded generators for random operators, unitaries and paths.

pub mod algebra;
pub mod calculus;
pub mod error;
pub mod flow;
pub mod jlo;
pub mod paths;
pub mod sample;

pub use algebra::{BlockOperator, SemifiniteModel, SingularValueFunction};
pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used for the individual blocks.
pub type Mat = nalgebra::DMatrix<Complex64>;
