//! Direct solver for iħ∂_t u = (1/2m)(−iħ∇ − (e/c)A)²u + eVu on a uniform grid with
//! Dirichlet obstacles, gauge-covariant link phases and unitary Crank–Nicolson
//! stepping. Also handles the field-free equation on a moving domain.

mod config;
mod error;
mod export;
mod links;
mod moving;
mod stepper;

pub use config::{Boundary, Scheme, SolverConfig};
pub use error::SolverError;
pub use export::{read_abwf, write_abwf, write_csv, ABWF_MAGIC, ABWF_VERSION};
pub use links::{build_all_link_phases, build_link_phases, LinkPhases};
pub use moving::{standard_tau, backward_evolve, backward_evolve_moving, evolve_moving_domain, MovingDomainSchedule, ScalarSchedule};
pub use stepper::{evolve, evolve_with_links, step, Propagator};
