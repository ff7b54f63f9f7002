//! CODATA 2018 physical constants in SI units.
//!
//! Every module reads its constants from here so that results are
//! reproducible across builds; [`TABLE`] is the serializable view used for
//! provenance blocks in output files.

use std::f64::consts::PI;

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Vacuum magnetic permeability, N/A^2.
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Free-electron g-factor magnitude used as the default Landé factor of Gd³⁺.
pub const G_ELECTRON: f64 = 2.0023;

/// Named constant, for provenance output.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NamedConstant {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
}

pub const TABLE: [NamedConstant; 6] = [
    NamedConstant { name: "h", value: PLANCK, unit: "J s" },
    NamedConstant { name: "hbar", value: HBAR, unit: "J s" },
    NamedConstant { name: "k_B", value: BOLTZMANN, unit: "J/K" },
    NamedConstant { name: "mu_B", value: BOHR_MAGNETON, unit: "J/T" },
    NamedConstant { name: "mu_0", value: MU_0, unit: "N/A^2" },
    NamedConstant { name: "c", value: SPEED_OF_LIGHT, unit: "m/s" },
];

/// Converts a frequency in GHz to an angular frequency in rad/s.
#[inline]
pub fn ghz_to_rad_per_s(ghz: f64) -> f64 {
    ghz * 2.0e9 * PI
}

/// Converts an angular frequency in rad/s to GHz.
#[inline]
pub fn rad_per_s_to_ghz(omega: f64) -> f64 {
    omega / (2.0e9 * PI)
}
