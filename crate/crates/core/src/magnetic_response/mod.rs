//! Magnetic susceptibility of a thermal spin ladder.
//!
//! Each allowed `Δm_s = 1` transition contributes one Lorentzian,
//!
//! ```text
//! χ(ω) = Σ 4 g_m² / (Ω_m² − ω² − iγω),     μ_r(ω) = 1 / (1 − χ(ω)),
//! ```
//!
//! with `Ω_m = (E_m − E_{m−1})/ħ` and a coupling `g_m` that scales with the
//! thermal population difference of the two levels. The damping sign matches
//! an `e^{−iωt}` time convention, so `Im χ > 0` means absorption.

mod kubo;

pub use kubo::kubo_oracle_chi;
#[cfg(test)]
pub(crate) use kubo::spin_x_matrix;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_MAGNETON, HBAR, MU_0};
use crate::error::{invalid, Error, Result};
use crate::spin_ladder::{HalfInteger, SpinSystem, ThermalLadder};

/// Zero-temperature coupling of the lowest transition, rad/s.
///
/// `g0 = ½ μ_B g sqrt(2s (N/V) μ_0 ω_EPR / (2ħ))`; for s = 7/2 this is the
/// familiar `sqrt(7 N μ_0 ω_EPR / (2 V ħ))` form.
pub fn g0_closed_form(sys: &SpinSystem, omega_epr: f64) -> Result<f64> {
    if !(omega_epr.is_finite() && omega_epr > 0.0) {
        return Err(invalid("omega_epr", format!("{omega_epr} rad/s must be positive")));
    }
    Ok((coupling_density(sys) * omega_epr).sqrt())
}

/// `g0² / ω_EPR` for the closed-form coupling; independent of the field.
fn coupling_density(sys: &SpinSystem) -> f64 {
    let moment = BOHR_MAGNETON * sys.g_factor();
    moment * moment * sys.spin().value() * sys.dipole_density() * MU_0 / (4.0 * HBAR)
}

/// How the zero-temperature coupling is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coupling {
    /// Recomputed from the spin density at the ladder's field.
    ClosedForm,
    /// Held at a fixed value in rad/s, e.g. a fit parameter.
    Pinned(f64),
}

/// One Lorentzian term of the susceptibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Spin projection of the upper level.
    pub m_s: HalfInteger,
    /// `(E_m − E_{m−1})/ħ`, rad/s.
    pub omega: f64,
    /// `g_m`, rad/s.
    pub coupling: f64,
}

impl Transition {
    /// Oscillator strength `4 g_m²`, rad²/s².
    pub fn strength(&self) -> f64 {
        4.0 * self.coupling * self.coupling
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityModel {
    sys: SpinSystem,
    ladder: ThermalLadder,
    gamma: f64,
    g0: f64,
    coupling: Coupling,
    omega_epr: f64,
    transitions: Vec<Transition>,
}

impl SusceptibilityModel {
    /// Builds the model on an existing ladder.
    ///
    /// Fails on `gamma <= 0`, on a pinned coupling at zero EPR frequency, and
    /// on populations that oppose the level ordering of any transition.
    pub fn new(sys: &SpinSystem, ladder: ThermalLadder, gamma: f64, coupling: Coupling) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("gamma", format!("{gamma} rad/s must be positive")));
        }
        if ladder.energies().len() != sys.level_count() {
            return Err(invalid("ladder", "level count does not match the spin system"));
        }
        let e = ladder.energies();
        let omega_epr = (e[1] - e[0]) / HBAR;

        let p = ladder.populations();
        let active = (1..e.len()).any(|k| (e[k] - e[k - 1]) * (p[k - 1] - p[k]) != 0.0);
        let density = match coupling {
            Coupling::ClosedForm => coupling_density(sys),
            Coupling::Pinned(g0) => {
                if !(g0.is_finite() && g0 >= 0.0) {
                    return Err(invalid("g0", format!("{g0} rad/s must be >= 0")));
                }
                if g0 == 0.0 || !active {
                    0.0
                } else if omega_epr > 0.0 {
                    g0 * g0 / omega_epr
                } else {
                    return Err(invalid(
                        "g0",
                        "a pinned coupling needs a positive lowest transition frequency",
                    ));
                }
            }
        };
        let g0 = match coupling {
            Coupling::Pinned(g0) => g0,
            Coupling::ClosedForm => (density * omega_epr.max(0.0)).sqrt(),
        };

        let s = sys.spin().value();
        let transitions = sys
            .projections()
            .enumerate()
            .skip(1)
            .map(|(k, m_s)| {
                let m = m_s.value();
                let omega = (e[k] - e[k - 1]) / HBAR;
                let dp = p[k - 1] - p[k];
                if omega * dp < 0.0 && dp.abs() > 1e-14 {
                    return Err(Error::PopulationInversion { m_s: m, difference: dp });
                }
                let weight = (s + m) * (s - m + 1.0) / (2.0 * s);
                let g2 = (density * weight * omega * dp).max(0.0);
                Ok(Transition { m_s, omega, coupling: g2.sqrt() })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self { sys: sys.clone(), ladder, gamma, g0, coupling, omega_epr, transitions })
    }

    /// Thermal ladder at `(field, temperature)` followed by [`Self::new`].
    pub fn thermal(
        sys: &SpinSystem,
        field: f64,
        temperature: f64,
        gamma: f64,
        coupling: Coupling,
    ) -> Result<Self> {
        let ladder = ThermalLadder::thermal(sys, field, temperature)?;
        Self::new(sys, ladder, gamma, coupling)
    }

    pub fn spin_system(&self) -> &SpinSystem {
        &self.sys
    }

    pub fn ladder(&self) -> &ThermalLadder {
        &self.ladder
    }

    /// Matter damping rate, rad/s.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Zero-temperature coupling, rad/s.
    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// Lowest transition frequency at the ladder's field, rad/s.
    pub fn omega_epr(&self) -> f64 {
        self.omega_epr
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Coupling `g_m` of the transition whose upper level is `m_s`.
    pub fn coupling_g_ms(&self, m_s: HalfInteger) -> Result<f64> {
        self.transitions
            .iter()
            .find(|t| t.m_s == m_s)
            .map(|t| t.coupling)
            .ok_or(Error::LevelOutOfRange { m_s: m_s.value(), spin: self.sys.spin().value() })
    }

    pub fn chi(&self, omega: f64) -> Complex64 {
        let damping = Complex64::new(0.0, self.gamma * omega);
        self.transitions
            .iter()
            .filter(|t| t.coupling > 0.0)
            .map(|t| t.strength() / (t.omega * t.omega - omega * omega - damping))
            .sum()
    }

    pub fn mu_r(&self, omega: f64) -> Complex64 {
        (Complex64::new(1.0, 0.0) - self.chi(omega)).inv()
    }

    /// χ and μ_r on a grid of angular frequencies.
    pub fn susceptibility(&self, frequency_grid: &[f64]) -> Result<ComplexResponse> {
        validate_grid(frequency_grid)?;
        let chi_values: Vec<Complex64> = frequency_grid.iter().map(|&w| self.chi(w)).collect();
        Ok(ComplexResponse::from_chi(frequency_grid.to_vec(), chi_values))
    }
}

/// χ(ω) and μ_r(ω) on an angular-frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexResponse {
    pub frequency_grid: Vec<f64>,
    pub chi_values: Vec<Complex64>,
    pub mu_r_values: Vec<Complex64>,
}

impl ComplexResponse {
    pub(crate) fn from_chi(frequency_grid: Vec<f64>, chi_values: Vec<Complex64>) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let mu_r_values = chi_values.iter().map(|&c| (one - c).inv()).collect();
        Self { frequency_grid, chi_values, mu_r_values }
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(invalid("frequency_grid", "entries must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("frequency_grid", "must be strictly increasing"));
    }
    Ok(())
}
