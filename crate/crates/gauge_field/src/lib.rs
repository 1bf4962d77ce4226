//! Vector potentials that are curl-free outside the obstacles but carry flux
//! through them, line integrals of those potentials, and gauge transformations.

mod error;
mod field;
mod flux;
mod transform;

pub use error::GaugeError;
pub use field::{canonical_flux_potential, FluxTerm, GaugeField, ScalarPotential};
pub use flux::{
    curl_residual, curl_residual_at, flux_decomposition, is_gauge_equivalent, line_integral_flux,
    FluxDecomposition, FluxRecord, FluxReport, GAUGE_EQUIVALENCE_TOL,
};
pub use transform::{apply_gauge, Bump, GaugeTransform, SmoothPhase};
