//! Matrix-function kernels and quadrature.

pub mod contour;
pub mod divided;
pub mod eigen;
pub mod quadrature;
pub mod scalar;

pub use contour::{contour_func_calc, contour_g_squared_derivative, Contour};
pub use divided::{
    alternating_chain_integrals, divided_difference_exp, simplex_exp_chain, simplex_exp_chain_led,
    MAX_CHAIN,
};
pub use eigen::{frechet_derivative, func_calc, EigenDecomposition};
pub use quadrature::{integrate_1d, QuadResult, QuadValue, QuadratureSpec, SemiInfinite};
