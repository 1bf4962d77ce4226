//! High-frequency beam solutions of the magnetic Schrödinger equation: geometric
//! optics for the companion wave equation, transported amplitudes, and the
//! Kannai transform evaluated by quadrature or by stationary phase.

mod broken;
mod error;
mod kannai;
mod spec;
mod straight;
mod tables;

pub use broken::{BrokenBeam, BrokenSample};
pub use error::BeamError;
pub use kannai::{fresnel_integral, kannai_limit, kannai_quadrature, KannaiOptions, EPSILON_SEQUENCE};
pub use spec::{BeamSpec, Method, PathExtent, TableResolution, TimeScaling};
pub use straight::{BeamKind, BeamSolution, StraightBeam};
pub use tables::TransportTables;
