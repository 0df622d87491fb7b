//! Reduction of the physical scattering setup to dimensionless numbers.
//!
//! Everything downstream is parameterized by two action ratios,
//! `s_p = pR/ħ` and `s_phi = eΦ/(ħc)`, and by the Larmor ratio
//! `rho_l = r_L/R`. Lengths and cross sections are measured in units of the
//! solenoid radius `R`. Gaussian units are assumed for the physical inputs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};

/// Physical inputs in Gaussian units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalInput {
    /// Incident momentum.
    pub p: f64,
    /// Solenoid radius.
    pub r: f64,
    /// Magnetic flux through the solenoid.
    pub phi: f64,
    pub hbar: f64,
    /// Charge magnitude.
    pub e: f64,
    /// Speed of light.
    pub c: f64,
}

impl PhysicalInput {
    fn validate(&self) -> Result<()> {
        require_positive("p", self.p)?;
        require_positive("R", self.r)?;
        require_positive("Phi", self.phi)?;
        require_positive("hbar", self.hbar)?;
        require_positive("e", self.e)?;
        require_positive("c", self.c)
    }

    /// Uniform interior field `B = Φ / (πR²)`.
    pub fn interior_field(&self) -> f64 {
        self.phi / (PI * self.r * self.r)
    }

    /// Larmor radius `r_L = pc / (eB)` in physical length units.
    pub fn larmor_radius(&self) -> f64 {
        self.p * self.c / (self.e * self.interior_field())
    }
}

/// The scattering setup expressed through dimensionless numbers only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessConfig {
    pub s_p: f64,
    pub s_phi: f64,
    pub rho_l: f64,
}

impl DimensionlessConfig {
    /// Builds a configuration from the two actions; `rho_l` follows from them.
    pub fn from_actions(s_p: f64, s_phi: f64) -> Result<Self> {
        let rho_l = rho_from_actions(s_p, s_phi)?;
        Ok(Self { s_p, s_phi, rho_l })
    }

    /// Coupling `eΦ/2πc` in units of ħ, i.e. `s_phi / 2π`.
    pub fn beta_over_hbar(&self) -> f64 {
        self.s_phi / (2.0 * PI)
    }

    /// Same setup with ħ replaced by ħ/λ: both actions grow by λ, `rho_l` is unchanged.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        Self::from_actions(lambda * self.s_p, lambda * self.s_phi)
    }
}

pub fn config_from_physical(input: &PhysicalInput) -> Result<DimensionlessConfig> {
    input.validate()?;
    let s_p = input.p * input.r / input.hbar;
    let s_phi = input.e * input.phi / (input.hbar * input.c);
    DimensionlessConfig::from_actions(s_p, s_phi)
}

/// `rho_l = π s_p / s_phi`, which is `r_L / R` for the uniform interior field.
pub fn rho_from_actions(s_p: f64, s_phi: f64) -> Result<f64> {
    require_positive("s_p", s_p)?;
    require_positive("s_phi", s_phi)?;
    Ok(PI * s_p / s_phi)
}
