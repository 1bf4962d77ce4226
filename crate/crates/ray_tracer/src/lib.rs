//! Specular ray tracing among obstacles and mirrors, ray-centred coordinates and
//! eikonal phases of reflected ray families.

mod eikonal;
mod error;
mod frame;
mod trace;

pub use eikonal::{eikonal_phase, EikonalPhase, EikonalSample};
pub use error::RayError;
pub use frame::{RayFrame, SpacetimeRay};
pub use trace::{
    first_hit, ray_family, reflect_direction, trace_broken_ray, trace_along, BrokenRay, Hit, Leg, Reflector,
    GRAZING_TOL,
};
