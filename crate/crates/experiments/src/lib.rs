//! End-to-end Aharonov–Bohm experiments: magnetic interference of straight and broken
//! beams, flux estimation, the mirror interferometer, the electric effect on a
//! moving domain and Madelung residuals of solver output.

mod common;
mod electric;
mod error;
mod madelung;
mod magnetic;
mod mirror;
mod oracle;
pub mod presets;

pub use common::{estimate_alpha, loop_flux, predicted_peak, probe_points, reduce_alpha, reference_field};
pub use electric::{electric_ab, hold_pulse, relative_density_difference, BackwardSpec, ElectricABSpec, ElectricReport, InitialData};
pub use error::ExperimentError;
pub use madelung::{madelung_residual, MadelungDecomposition, MadelungOptions};
pub use magnetic::{
    estimate_flux, interference_profile, flux_decomposition_study, magnetic_ab_broken, magnetic_ab_single, resonant_k, FluxStudy, FluxStudyRow,
    InterferenceReport, KSelection, Layout, MagneticABSpec, Oracle,
};
pub use mirror::{mirror_interferometer, MirrorSpec};
pub use oracle::{pde_probe_values, PdeOracle};
