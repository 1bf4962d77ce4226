use serde::{Deserialize, Serialize};

use crate::CoreError;

/// ħ, m, e, c. Defaults to the dimensionless system where all four are 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub charge: f64,
    pub light_speed: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            charge: 1.0,
            light_speed: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64, charge: f64, light_speed: f64) -> Result<Self, CoreError> {
        let c = Self {
            hbar,
            mass,
            charge,
            light_speed,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("charge", self.charge),
            ("light_speed", self.light_speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CoreError::InvalidConstants(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// e/(ħc): converts a line integral of A into a dimensionless phase.
    pub fn flux_coupling(&self) -> f64 {
        self.charge / (self.hbar * self.light_speed)
    }

    /// ħc/e: the potential scale of a unit dimensionless flux.
    pub fn flux_quantum_scale(&self) -> f64 {
        self.hbar * self.light_speed / self.charge
    }

    /// Wavenumber mk/ħ carried by a beam with velocity parameter k.
    pub fn wavenumber(&self, k: f64) -> f64 {
        self.mass * k / self.hbar
    }

    /// de Broglie wavelength 2πħ/(mk).
    pub fn wavelength(&self, k: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar / (self.mass * k)
    }
}
