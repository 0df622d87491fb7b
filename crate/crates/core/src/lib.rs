//! Scattering of charged particles by a solenoid of finite radius `R`.
//!
//! Lengths are in units of `R`. A configuration is fixed by the actions
//! `s_p = pR/ħ` and `s_phi = eΦ/(ħc)`, or classically by the Larmor ratio
//! `rho_l = π s_p / s_phi`.

pub mod bessel;
pub mod classical;
pub mod climit;
pub mod curve;
mod dd;
pub mod error;
pub mod export;
pub mod quadrature;
pub mod quantum;
pub mod trajectory;
pub mod units;
pub mod verify;

pub use error::{Error, Result};
