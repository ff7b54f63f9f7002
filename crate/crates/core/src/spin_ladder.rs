//! Zeeman levels of a paramagnetic ion and their thermal occupation.
//!
//! Levels are indexed by the spin projection `m_s = -s, -s+1, ..., s`. The
//! default level model is linear Zeeman splitting, `E = g μ_B m_s B`, plus an
//! optional per-level zero-field offset that can carry crystal-field data.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_MAGNETON, BOLTZMANN, G_ELECTRON, HBAR};
use crate::error::{invalid, Result};

/// A half-integer quantity stored as twice its value, so that spin
/// projections can be compared and iterated exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    /// Returns `None` unless `value` is an integer multiple of 1/2.
    pub fn new(value: f64) -> Option<Self> {
        let twice = 2.0 * value;
        if twice.is_finite() && twice.fract() == 0.0 && twice.abs() < i32::MAX as f64 {
            Some(Self(twice as i32))
        } else {
            None
        }
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Static parameters of a paramagnetic spin ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    spin: HalfInteger,
    g_factor: f64,
    dipole_density: f64,
    zero_field_offsets: Option<Vec<f64>>,
}

impl SpinSystem {
    /// Lattice constant of gadolinium gallium garnet, m.
    pub const GGG_LATTICE_CONSTANT: f64 = 1.238e-9;
    /// Gd³⁺ ions per cubic GGG unit cell.
    pub const GGG_IONS_PER_CELL: f64 = 24.0;

    pub fn new(spin: HalfInteger, g_factor: f64, dipole_density: f64) -> Result<Self> {
        if spin.twice() <= 0 {
            return Err(invalid("spin", format!("s = {spin} must be positive")));
        }
        if !(g_factor.is_finite() && g_factor > 0.0) {
            return Err(invalid("g_factor", format!("{g_factor} must be positive and finite")));
        }
        if !(dipole_density.is_finite() && dipole_density > 0.0) {
            return Err(invalid(
                "dipole_density",
                format!("{dipole_density} must be positive and finite"),
            ));
        }
        Ok(Self { spin, g_factor, dipole_density, zero_field_offsets: None })
    }

    /// Gd³⁺ in GGG: s = 7/2, g = 2.0023, N/V = 24/a³ with a = 1.238 nm.
    pub fn gd_ggg() -> Self {
        Self {
            spin: HalfInteger::from_twice(7),
            g_factor: G_ELECTRON,
            dipole_density: lattice_dipole_density(
                Self::GGG_LATTICE_CONSTANT,
                Self::GGG_IONS_PER_CELL,
            ),
            zero_field_offsets: None,
        }
    }

    pub fn with_g_factor(mut self, g_factor: f64) -> Result<Self> {
        if !(g_factor.is_finite() && g_factor > 0.0) {
            return Err(invalid("g_factor", format!("{g_factor} must be positive and finite")));
        }
        self.g_factor = g_factor;
        Ok(self)
    }

    pub fn with_dipole_density(mut self, dipole_density: f64) -> Result<Self> {
        if !(dipole_density.is_finite() && dipole_density > 0.0) {
            return Err(invalid(
                "dipole_density",
                format!("{dipole_density} must be positive and finite"),
            ));
        }
        self.dipole_density = dipole_density;
        Ok(self)
    }

    /// Per-level energy offsets in joules, ordered from `m_s = -s` to `m_s = s`.
    pub fn with_zero_field_offsets(mut self, offsets: Vec<f64>) -> Result<Self> {
        if offsets.len() != self.level_count() {
            return Err(invalid(
                "zero_field_offsets",
                format!("expected {} entries, got {}", self.level_count(), offsets.len()),
            ));
        }
        if offsets.iter().any(|e| !e.is_finite()) {
            return Err(invalid("zero_field_offsets", "entries must be finite"));
        }
        self.zero_field_offsets = Some(offsets);
        Ok(self)
    }

    pub fn spin(&self) -> HalfInteger {
        self.spin
    }

    pub fn g_factor(&self) -> f64 {
        self.g_factor
    }

    /// Magnetic dipoles per cubic metre.
    pub fn dipole_density(&self) -> f64 {
        self.dipole_density
    }

    pub fn zero_field_offsets(&self) -> Option<&[f64]> {
        self.zero_field_offsets.as_deref()
    }

    /// Number of levels, `2s + 1`.
    pub fn level_count(&self) -> usize {
        self.spin.twice() as usize + 1
    }

    /// Spin projections from `-s` to `s`.
    pub fn projections(&self) -> impl Iterator<Item = HalfInteger> + '_ {
        let s2 = self.spin.twice();
        (0..=s2).map(move |k| HalfInteger::from_twice(2 * k - s2))
    }

    /// Position of `m_s` in level-ordered arrays.
    pub fn level_index(&self, m_s: HalfInteger) -> Option<usize> {
        let s2 = self.spin.twice();
        let shifted = m_s.twice() + s2;
        (shifted >= 0 && shifted <= 2 * s2 && shifted % 2 == 0).then_some((shifted / 2) as usize)
    }

    /// Level energies `g μ_B m_s B + offset` in joules, indexed from `m_s = -s`.
    ///
    /// A zero field is legal; the energies then equal the offsets.
    pub fn level_energies(&self, field: f64) -> Vec<f64> {
        let zeeman = self.g_factor * BOHR_MAGNETON * field;
        self.projections()
            .enumerate()
            .map(|(k, m)| {
                let offset = self.zero_field_offsets.as_ref().map_or(0.0, |o| o[k]);
                zeeman * m.value() + offset
            })
            .collect()
    }

    /// Angular frequency of the transition between the two lowest levels, rad/s.
    pub fn lowest_transition_frequency(&self, field: f64) -> f64 {
        let e = self.level_energies(field);
        (e[1] - e[0]) / HBAR
    }
}

/// Dipole density `ions_per_cell / a³` of a cubic lattice.
pub fn lattice_dipole_density(lattice_constant: f64, ions_per_cell: f64) -> f64 {
    ions_per_cell / lattice_constant.powi(3)
}

/// Level energies and Boltzmann populations at one field and temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalLadder {
    field: f64,
    temperature: Option<f64>,
    energies: Vec<f64>,
    populations: Vec<f64>,
    partition_function: f64,
}

impl ThermalLadder {
    /// Thermal equilibrium of `sys` at `field` (T) and `temperature` (K).
    ///
    /// `temperature = 0` gives the ground-state limit with ties split equally,
    /// and `temperature = +inf` gives equal populations. Energies are rebased
    /// to the lowest level before exponentiation, so the reported partition
    /// function is `Σ exp(-(E - E_min)/k_B T)`.
    pub fn thermal(sys: &SpinSystem, field: f64, temperature: f64) -> Result<Self> {
        if !field.is_finite() {
            return Err(invalid("field", format!("{field} is not finite")));
        }
        if temperature.is_nan() || temperature < 0.0 {
            return Err(invalid("temperature", format!("{temperature} K must be >= 0")));
        }
        let energies = sys.level_energies(field);
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);

        let weights: Vec<f64> = if temperature == 0.0 {
            let scale = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            let tie = 1e-12 * scale;
            energies.iter().map(|&e| if e - e_min <= tie { 1.0 } else { 0.0 }).collect()
        } else if temperature.is_infinite() {
            vec![1.0; energies.len()]
        } else {
            let beta = 1.0 / (BOLTZMANN * temperature);
            energies.iter().map(|&e| (-(e - e_min) * beta).exp()).collect()
        };
        let partition_function: f64 = weights.iter().sum();
        let populations = weights.iter().map(|w| w / partition_function).collect();

        Ok(Self {
            field,
            temperature: Some(temperature),
            energies,
            populations,
            partition_function,
        })
    }

    /// A ladder with externally supplied populations (no temperature).
    ///
    /// Populations must lie in `[0, 1]` and sum to one within `1e-12`.
    pub fn with_populations(field: f64, energies: Vec<f64>, populations: Vec<f64>) -> Result<Self> {
        if energies.len() != populations.len() || energies.len() < 2 {
            return Err(invalid("populations", "length must match energies and be >= 2"));
        }
        if populations.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("populations", "each entry must lie in [0, 1]"));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("populations", format!("sum is {total}, expected 1")));
        }
        Ok(Self { field, temperature: None, energies, populations, partition_function: 1.0 })
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    /// `None` for ladders built from explicit populations.
    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn partition_function(&self) -> f64 {
        self.partition_function
    }
}

/// Convenience wrapper around [`ThermalLadder::thermal`].
pub fn thermal_ladder(sys: &SpinSystem, field: f64, temperature: f64) -> Result<ThermalLadder> {
    ThermalLadder::thermal(sys, field, temperature)
}

impl From<HalfInteger> for f64 {
    fn from(h: HalfInteger) -> f64 {
        h.value()
    }
}
