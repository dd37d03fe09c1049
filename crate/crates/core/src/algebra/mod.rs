//! The weighted block model, its operators and the singular value calculus.

mod model;
mod norms;
mod operator;
mod singular;

pub use model::{Block, SemifiniteModel};
pub use norms::{affine_norm, f_q_sup, li_q_norm, log_integral, lp_norm, trace_norm};
pub use operator::BlockOperator;
pub use singular::{singular_values, SingularValueFunction, Step};

/// Relative Hermitian defect above which symmetrization is refused.
pub const HERMITIAN_REPAIR_TOL: f64 = 1e-9;
