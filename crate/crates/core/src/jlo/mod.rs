//! The doubled graded space `ℂ²⊗ℂ²⊗H` and the JLO route to spectral flow.

mod duhamel;
mod family;
mod graded;
mod routes;
mod series;

pub use duhamel::{duhamel_coefficients, generating_function, DuhamelMethod, DuhamelResult, MAX_CIRCLE_ORDER};
pub use family::{FamilyChecks, SuperconnectionFamily};
pub use graded::{pauli, GradedModel};
pub use routes::{
    boundary_decay_check, decay_onset, rectangle_loop_closure, rho_conjugation_residual, sf_doubled_r_integral,
    sf_superconnection_integral, vertical_edge_symmetry_check, DecayTable, RectangleLoop, VerticalEdges,
};
pub use series::{cocycle_antisymmetry_check, jlo_series_sf, jlo_term, JloSeries, TermMethod};
