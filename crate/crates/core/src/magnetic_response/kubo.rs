//! Brute-force linear-response evaluation of χ(ω), kept as a cross-check on
//! the closed-form Lorentzian sum.
//!
//! The transverse moment `d_x = −g μ_B ŝ_x/ħ` is built as an explicit
//! `(2s+1)×(2s+1)` matrix, the thermal density matrix is formed from the
//! diagonal ladder Hamiltonian, and the retarded commutator
//!
//! ```text
//! χ(ω) = −(N μ_0 / V) ∫₀^∞ dt e^{iωt} ⟨[d_x(t), d_x]⟩ / (iħ)
//! ```
//!
//! is summed over every level pair. With `⟨[d(t), d]⟩ = 2i Σ_ab ρ_a |d_ab|² sin(Ω_ab t)`
//! each `sin(Ω t)` is regularized by the damped-oscillator kernel
//! `(Ω/Ω') sin(Ω' t) e^{−γt/2}`, `Ω'² = Ω² − γ²/4`, whose transform is
//! `Ω / (Ω² − ω² − iγω)`; this matches the `−iγω` damping convention.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{validate_grid, ComplexResponse};
use crate::constants::{BOHR_MAGNETON, BOLTZMANN, HBAR, MU_0};
use crate::error::{invalid, Result};
use crate::spin_ladder::SpinSystem;

/// `ŝ_x / ħ` in the `|s, m⟩` basis ordered from `m = −s`.
pub(crate) fn spin_x_matrix(twice_s: i32) -> DMatrix<f64> {
    let dim = twice_s as usize + 1;
    let s = f64::from(twice_s) / 2.0;
    let mut sx = DMatrix::zeros(dim, dim);
    for k in 0..dim - 1 {
        let m = k as f64 - s;
        // ⟨m+1| s_+ |m⟩ = sqrt((s − m)(s + m + 1))
        let raise = ((s - m) * (s + m + 1.0)).sqrt();
        sx[(k + 1, k)] = 0.5 * raise;
        sx[(k, k + 1)] = 0.5 * raise;
    }
    sx
}

fn density_matrix_diagonal(energies: &[f64], temperature: f64) -> Vec<f64> {
    let n = energies.len();
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = if temperature.is_infinite() {
        vec![1.0; n]
    } else if temperature == 0.0 {
        energies.iter().map(|&e| if e == e_min { 1.0 } else { 0.0 }).collect()
    } else {
        energies.iter().map(|&e| (-(e - e_min) / (BOLTZMANN * temperature)).exp()).collect()
    };
    let trace: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / trace).collect()
}

/// Independent evaluation of χ(ω) on an angular-frequency grid.
pub fn kubo_oracle_chi(
    sys: &SpinSystem,
    field: f64,
    temperature: f64,
    gamma: f64,
    frequency_grid: &[f64],
) -> Result<ComplexResponse> {
    validate_grid(frequency_grid)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(invalid("gamma", format!("{gamma} rad/s must be positive")));
    }
    if temperature.is_nan() || temperature < 0.0 {
        return Err(invalid("temperature", format!("{temperature} K must be >= 0")));
    }

    let energies = sys.level_energies(field);
    let rho = density_matrix_diagonal(&energies, temperature);
    let moment = -sys.g_factor() * BOHR_MAGNETON * spin_x_matrix(sys.spin().twice());
    let dim = energies.len();

    // (weight ρ_a |d_ab|², Ω_ab) for every ordered pair with a nonzero element
    let mut components = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let d = moment[(a, b)];
            if a != b && d != 0.0 {
                components.push((rho[a] * d * d, (energies[a] - energies[b]) / HBAR));
            }
        }
    }

    let prefactor = -2.0 * sys.dipole_density() * MU_0 / HBAR;
    let chi_values = frequency_grid
        .iter()
        .map(|&w| {
            let denominator_shift = Complex64::new(-w * w, -gamma * w);
            components
                .iter()
                .map(|&(weight, omega)| weight * omega / (omega * omega + denominator_shift))
                .sum::<Complex64>()
                * prefactor
        })
        .collect();
    Ok(ComplexResponse::from_chi(frequency_grid.to_vec(), chi_values))
}
