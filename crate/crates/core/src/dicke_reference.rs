//! Quantum reference models for the coupled spin–photon system.
//!
//! [`dicke_eigenspectrum`] diagonalizes
//!
//! ```text
//! H/ħ = ω_c a†a + ω_a S_z + (2 g0/√N) S_x (a + a†)
//! ```
//!
//! in the product of a truncated Fock space and the symmetric spin-N/2
//! multiplet. [`hopfield_branches`] is the bosonic single-oscillator limit of
//! the magnetic-coupling dispersion relation, solved in closed form.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spin_ladder::SpinSystem;

/// `⟨s, −s+1| ŝ_x |s, −s⟩ / ħ = √(2s)/2`, the factor that carries each spin
/// onto an effective two-level system.
pub fn truncate_spin_to_two_level(sys: &SpinSystem) -> f64 {
    (f64::from(sys.spin().twice())).sqrt() / 2.0
}

/// Default photon-number truncation.
pub const DEFAULT_PHOTON_CUTOFF: usize = 40;
/// Default ceiling on the Hilbert-space dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;
/// Relative shift of the lowest four levels tolerated on doubling the cutoff.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeModel {
    pub n_spins: usize,
    /// rad/s.
    pub omega_cav: f64,
    /// Two-level splitting, rad/s.
    pub omega_a: f64,
    /// Collective coupling, rad/s.
    pub g0: f64,
    /// Number of Fock states kept (0 … cutoff−1 photons).
    pub photon_cutoff: usize,
    /// Keep the counter-rotating terms. Off gives the Tavis–Cummings form.
    pub counter_rotating: bool,
    pub dimension_cap: usize,
}

impl DickeModel {
    /// Resonant model with `g0 = η ω_cav`.
    pub fn resonant(n_spins: usize, omega: f64, eta: f64) -> Self {
        Self {
            n_spins,
            omega_cav: omega,
            omega_a: omega,
            g0: eta * omega,
            photon_cutoff: DEFAULT_PHOTON_CUTOFF,
            counter_rotating: true,
            dimension_cap: DEFAULT_DIMENSION_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(invalid("n_spins", "must be >= 1"));
        }
        for (name, v) in [("omega_cav", self.omega_cav), ("omega_a", self.omega_a)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("{v} rad/s must be positive")));
            }
        }
        if !(self.g0.is_finite() && self.g0 >= 0.0) {
            return Err(invalid("g0", format!("{} rad/s must be finite and >= 0", self.g0)));
        }
        if self.photon_cutoff < 2 {
            return Err(invalid("photon_cutoff", "must be >= 2"));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.photon_cutoff * (self.n_spins + 1)
    }

    /// Dense Hamiltonian in units of ω_c; index `n (N+1) + k` with `m = k − N/2`.
    fn hamiltonian(&self) -> DMatrix<f64> {
        let dim_s = self.n_spins + 1;
        let dim = self.dimension();
        let j = self.n_spins as f64 / 2.0;
        let wa = self.omega_a / self.omega_cav;
        let lambda = 2.0 * self.g0 / self.omega_cav / (self.n_spins as f64).sqrt();
        let mut h = DMatrix::zeros(dim, dim);
        let index = |n: usize, k: usize| n * dim_s + k;
        for n in 0..self.photon_cutoff {
            for k in 0..dim_s {
                let m = k as f64 - j;
                h[(index(n, k), index(n, k))] = n as f64 + wa * m;
            }
        }
        for n in 0..self.photon_cutoff - 1 {
            let a = ((n + 1) as f64).sqrt();
            for k in 0..dim_s - 1 {
                let m = k as f64 - j;
                let s_plus = ((j - m) * (j + m + 1.0)).sqrt();
                // λ S_x (a + a†) with S_x = (S₊ + S₋)/2
                let element = 0.5 * lambda * a * s_plus;
                // a† S₋ and its conjugate
                h[(index(n + 1, k), index(n, k + 1))] += element;
                h[(index(n, k + 1), index(n + 1, k))] += element;
                if self.counter_rotating {
                    // a† S₊ and its conjugate
                    h[(index(n + 1, k + 1), index(n, k))] += element;
                    h[(index(n, k), index(n + 1, k + 1))] += element;
                }
            }
        }
        h
    }

    fn lowest(&self, count: usize) -> Result<Vec<f64>> {
        let dim = self.dimension();
        if dim > self.dimension_cap {
            return Err(Error::DimensionTooLarge { dimension: dim, cap: self.dimension_cap });
        }
        let mut values: Vec<f64> = SymmetricEigen::new(self.hamiltonian()).eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values.truncate(count);
        Ok(values.into_iter().map(|v| v * self.omega_cav).collect())
    }
}

/// Converged low-lying spectrum of a Dicke model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DickeSpectrum {
    /// Ascending, rad/s.
    pub eigenvalues: Vec<f64>,
    /// Cutoff at which the gate passed.
    pub photon_cutoff: usize,
    /// Largest relative shift of the lowest four levels at the last doubling.
    pub convergence_shift: f64,
}

impl DickeSpectrum {
    /// `E₂ − E₁`, the splitting of the first excited doublet, rad/s.
    pub fn first_excited_splitting(&self) -> Option<f64> {
        (self.eigenvalues.len() >= 3).then(|| self.eigenvalues[2] - self.eigenvalues[1])
    }

    /// Excitation energies `E_k − E₀`, rad/s.
    pub fn excitations(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e - self.eigenvalues[0]).collect()
    }
}

/// Lowest `n_levels` eigenvalues, doubling the photon cutoff until the
/// lowest four move by less than [`CONVERGENCE_TOLERANCE`] relative.
pub fn dicke_eigenspectrum(model: &DickeModel, n_levels: usize) -> Result<DickeSpectrum> {
    model.validate()?;
    if n_levels == 0 {
        return Err(invalid("n_levels", "must be >= 1"));
    }
    let probe = n_levels.max(4);
    let mut current = *model;
    let mut values = current.lowest(probe)?;
    loop {
        let mut next = current;
        next.photon_cutoff *= 2;
        let refined = match next.lowest(probe) {
            Ok(v) => v,
            Err(Error::DimensionTooLarge { .. }) => {
                return Err(Error::TruncationNotConverged {
                    cutoff: current.photon_cutoff,
                    shift: f64::NAN,
                });
            }
            Err(e) => return Err(e),
        };
        let scale = values.iter().map(|v| v.abs()).fold(model.omega_cav, f64::max);
        let shift = values.iter().zip(&refined).take(4).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max);
        if shift < CONVERGENCE_TOLERANCE {
            values.truncate(n_levels);
            return Ok(DickeSpectrum { eigenvalues: values, photon_cutoff: current.photon_cutoff, convergence_shift: shift });
        }
        current = next;
        values = refined;
    }
}

/// Lossless two-branch polariton spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfieldSpectrum {
    /// rad/s.
    pub omega_lower: f64,
    /// rad/s.
    pub omega_upper: f64,
    /// Photon and matter weights of the lower branch; they sum to one.
    pub lower_fractions: (f64, f64),
    /// Photon and matter weights of the upper branch.
    pub upper_fractions: (f64, f64),
}

impl HopfieldSpectrum {
    pub fn splitting(&self) -> f64 {
        self.omega_upper - self.omega_lower
    }
}

/// Roots of `(ω² − ω_c²)(ω_m² − ω²) + 4 g² ω_c² = 0`, i.e. `ω² μ_r(ω) = ω_c²`
/// with a single undamped oscillator `χ = 4g²/(ω_m² − ω²)`.
///
/// These are the eigenvalues of `[[ω_c², 2gω_c], [2gω_c, ω_m²]]`, whose
/// eigenvectors give the mixing fractions. Fails once `2g ≥ ω_m`, where the
/// lower branch softens to zero.
pub fn hopfield_branches(omega_cav: f64, omega_matter: f64, g_eff: f64) -> Result<HopfieldSpectrum> {
    for (name, v) in [("omega_cav", omega_cav), ("omega_matter", omega_matter)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(name, format!("{v} rad/s must be positive")));
        }
    }
    if !(g_eff.is_finite() && g_eff >= 0.0) {
        return Err(invalid("g_eff", format!("{g_eff} rad/s must be finite and >= 0")));
    }
    if 2.0 * g_eff >= omega_matter {
        return Err(invalid("g_eff", "2 g_eff >= omega_matter leaves no positive lower branch"));
    }
    let a = omega_cav * omega_cav;
    let d = omega_matter * omega_matter;
    let b = 2.0 * g_eff * omega_cav;
    let half_trace = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let upper = half_trace + radius;
    // product of the roots is a d − b², avoiding cancellation in the lower root
    let lower = (a * d - b * b) / upper;

    let fractions = |x: f64| -> (f64, f64) {
        // eigenvector (b, x − a) or (x − d, b), whichever is better conditioned
        let (p, m) = if (x - a).abs() + b.abs() >= (x - d).abs() + b.abs() { (b, x - a) } else { (x - d, b) };
        let norm = p * p + m * m;
        if norm == 0.0 {
            if (x - a).abs() <= (x - d).abs() { (1.0, 0.0) } else { (0.0, 1.0) }
        } else {
            (p * p / norm, m * m / norm)
        }
    };
    let (mut lower_fractions, mut upper_fractions) = (fractions(lower), fractions(upper));
    if b == 0.0 && a == d {
        lower_fractions = (0.5, 0.5);
        upper_fractions = (0.5, 0.5);
    }
    Ok(HopfieldSpectrum { omega_lower: lower.sqrt(), omega_upper: upper.sqrt(), lower_fractions, upper_fractions })
}

/// Population-scaled coupling `g0 sqrt(P_lower − P_upper)` of the lowest pair.
pub fn thermal_coupling(g0: f64, populations: &[f64]) -> Result<f64> {
    if populations.len() < 2 {
        return Err(invalid("populations", "need at least two levels"));
    }
    Ok(g0 * (populations[0] - populations[1]).max(0.0).sqrt())
}
