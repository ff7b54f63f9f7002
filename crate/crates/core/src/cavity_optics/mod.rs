//! Normal-incidence plane-wave optics of magneto-dielectric slab stacks.
//!
//! Fields follow the `e^{−iωt}` convention. Inside each layer the refractive
//! index `n = sqrt(ε_r μ_r)` is taken on the branch with `Im n >= 0`, so waves
//! decay in absorbing media, and the relative wave impedance is `Z = μ_r / n`.

mod dispersion;

pub use dispersion::dispersion_roots;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{invalid, Result};
use crate::magnetic_response::SusceptibilityModel;

/// Refractive index of GGG in the THz range.
pub const GGG_REFRACTIVE_INDEX: f64 = 3.8;

/// Source of a layer's relative permeability.
#[derive(Debug, Clone, Default)]
pub enum Permeability {
    #[default]
    Unity,
    Spin(Arc<SusceptibilityModel>),
}

impl Permeability {
    pub fn at(&self, omega: f64) -> Complex64 {
        match self {
            Self::Unity => Complex64::new(1.0, 0.0),
            Self::Spin(model) => model.mu_r(omega),
        }
    }
}

/// An interior layer between vacuum half-spaces.
#[derive(Debug, Clone)]
pub struct Layer {
    thickness: f64,
    epsilon_r: Complex64,
    mu_r: Permeability,
}

impl Layer {
    /// A nonmagnetic dielectric of real refractive index `n`.
    pub fn dielectric(thickness: f64, n: f64) -> Result<Self> {
        Self::new(thickness, Complex64::new(n * n, 0.0), Permeability::Unity)
    }

    /// `thickness` may be zero; a zero-thickness layer is optically absent.
    pub fn new(thickness: f64, epsilon_r: Complex64, mu_r: Permeability) -> Result<Self> {
        if !(thickness.is_finite() && thickness >= 0.0) {
            return Err(invalid("thickness", format!("{thickness} m must be >= 0")));
        }
        if !(epsilon_r.re.is_finite() && epsilon_r.im.is_finite()) || epsilon_r.im < 0.0 {
            return Err(invalid("epsilon_r", "must be finite with Im(epsilon_r) >= 0"));
        }
        if epsilon_r.norm() == 0.0 {
            return Err(invalid("epsilon_r", "must be nonzero"));
        }
        Ok(Self { thickness, epsilon_r, mu_r })
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn epsilon_r(&self) -> Complex64 {
        self.epsilon_r
    }

    pub fn permeability(&self) -> &Permeability {
        &self.mu_r
    }

    /// Refractive index and relative impedance at angular frequency `omega`.
    pub fn index_and_impedance(&self, omega: f64) -> (Complex64, Complex64) {
        let mu = self.mu_r.at(omega);
        let mut n = (self.epsilon_r * mu).sqrt();
        if n.im < 0.0 || (n.im == 0.0 && n.re < 0.0) {
            n = -n;
        }
        (n, mu / n)
    }

    /// Characteristic matrix mapping `(E, ηH)` at the entry face to the exit face.
    fn characteristic_matrix(&self, omega: f64) -> [[Complex64; 2]; 2] {
        let (n, z) = self.index_and_impedance(omega);
        let phase = n * (omega * self.thickness / SPEED_OF_LIGHT);
        let (c, s) = (phase.cos(), phase.sin());
        let i = Complex64::i();
        [[c, i * z * s], [i * s / z, c]]
    }
}

fn matmul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Complex transmission and reflection amplitudes of `stack` in vacuum.
pub fn amplitudes(stack: &[Layer], omega: f64) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let p = stack
        .iter()
        .fold([[one, zero], [zero, one]], |acc, layer| matmul(layer.characteristic_matrix(omega), acc));
    let denominator = p[0][0] + p[1][1] - p[0][1] - p[1][0];
    let t = 2.0 / denominator;
    let r = (p[1][1] - p[0][1] + p[1][0] - p[0][0]) / denominator;
    (t, r)
}

/// Transmission through a layer stack on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Hz.
    pub frequency_grid: Vec<f64>,
    pub t_complex: Vec<Complex64>,
    pub r_complex: Vec<Complex64>,
    pub transmittance: Vec<f64>,
    pub reflectance: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.frequency_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequency_grid.is_empty()
    }
}

/// Transfer-matrix spectrum of `stack` between vacuum half-spaces; `frequency_grid` in Hz.
pub fn transfer_matrix_spectrum(stack: &[Layer], frequency_grid: &[f64]) -> Result<Spectrum> {
    if frequency_grid.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(invalid("frequency_grid", "entries must be finite and >= 0"));
    }
    if frequency_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("frequency_grid", "must be strictly increasing"));
    }
    let (t_complex, r_complex): (Vec<_>, Vec<_>) = frequency_grid
        .par_iter()
        .map(|&f| amplitudes(stack, 2.0 * PI * f))
        .unzip();
    Ok(Spectrum {
        frequency_grid: frequency_grid.to_vec(),
        transmittance: t_complex.iter().map(|t| t.norm_sqr()).collect(),
        reflectance: r_complex.iter().map(|r| r.norm_sqr()).collect(),
        t_complex,
        r_complex,
    })
}

/// Closed-form Fabry–Pérot quantities of a bare slab.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityDiagnostics {
    /// `j · Δf` for `j = 1..=j_max`, Hz.
    pub mode_frequencies: Vec<f64>,
    /// `c / (2nL)`, Hz.
    pub free_spectral_range: f64,
    /// `f_j sqrt(r) / (1 − r)` for each mode, Hz.
    pub linewidths: Vec<f64>,
    /// Surface reflection `|(n − 1)/(n + 1)|⁴`.
    pub surface_reflection: f64,
}

pub fn fp_diagnostics(n: f64, thickness: f64, j_max: usize) -> Result<CavityDiagnostics> {
    let geometry = CavityGeometry::new(n, thickness)?;
    let fsr = geometry.free_spectral_range();
    let r = ((n - 1.0) / (n + 1.0)).abs().powi(4);
    let mode_frequencies: Vec<f64> = (1..=j_max).map(|j| j as f64 * fsr).collect();
    let linewidths = mode_frequencies.iter().map(|f| f * r.sqrt() / (1.0 - r)).collect();
    Ok(CavityDiagnostics { mode_frequencies, free_spectral_range: fsr, linewidths, surface_reflection: r })
}

/// A self-formed Fabry–Pérot cavity: one dielectric slab in vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    refractive_index: f64,
    thickness: f64,
}

impl CavityGeometry {
    pub fn new(refractive_index: f64, thickness: f64) -> Result<Self> {
        if !(refractive_index.is_finite() && refractive_index > 1.0) {
            return Err(invalid("refractive_index", format!("{refractive_index} must exceed 1")));
        }
        if !(thickness.is_finite() && thickness > 0.0) {
            return Err(invalid("thickness", format!("{thickness} m must be positive")));
        }
        Ok(Self { refractive_index, thickness })
    }

    /// GGG slab of 180 μm, fundamental mode near 219 GHz.
    pub fn sample_one() -> Self {
        Self { refractive_index: GGG_REFRACTIVE_INDEX, thickness: 180e-6 }
    }

    /// GGG slab of 129 μm, second mode near 611 GHz.
    pub fn sample_two() -> Self {
        Self { refractive_index: GGG_REFRACTIVE_INDEX, thickness: 129e-6 }
    }

    pub fn refractive_index(&self) -> f64 {
        self.refractive_index
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    /// Hz.
    pub fn free_spectral_range(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.refractive_index * self.thickness)
    }

    /// Frequency of mode `j`, Hz.
    pub fn mode_frequency(&self, j: usize) -> f64 {
        j as f64 * self.free_spectral_range()
    }

    /// The slab with an optional spin susceptibility.
    pub fn slab(&self, model: Option<Arc<SusceptibilityModel>>) -> Layer {
        Layer {
            thickness: self.thickness,
            epsilon_r: Complex64::new(self.refractive_index.powi(2), 0.0),
            mu_r: model.map_or(Permeability::Unity, Permeability::Spin),
        }
    }
}
