//! Complex eigenfrequencies of the bulk dispersion `c²k²/ω² = ε_r μ_r(ω)`.
//!
//! With a Lorentzian-sum χ, `μ_r = 1/(1 − χ)` is rational in ω, so the
//! dispersion relation clears to a polynomial. In the scaled variable
//! `u = ω/ω_s`, `ω_s = ck/sqrt(ε_r)`:
//!
//! ```text
//! u² Π d_i − Π d_i + Σ a_i Π_{l≠i} d_l = 0,    d_i = w_i² − u² − i g u,
//! ```
//!
//! where `a_i = 4g_i²/ω_s²`, `w_i = Ω_i/ω_s`, `g = γ/ω_s`. Roots come from an
//! Aberth–Ehrlich iteration and are then polished with Newton steps on the
//! unreduced rational form.

use num_complex::Complex64;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{invalid, Error, Result};
use crate::magnetic_response::SusceptibilityModel;

const POLISH_TOLERANCE: f64 = 1e-10;

/// Polynomial with ascending complex coefficients.
#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<Complex64>);

impl Poly {
    fn constant(c: Complex64) -> Self {
        Self(vec![c])
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let zero = Complex64::new(0.0, 0.0);
        Poly(
            (0..n)
                .map(|k| self.0.get(k).copied().unwrap_or(zero) + other.0.get(k).copied().unwrap_or(zero))
                .collect(),
        )
    }

    fn scale(&self, c: Complex64) -> Poly {
        Poly(self.0.iter().map(|x| x * c).collect())
    }

    fn degree(&self) -> usize {
        self.0.len() - 1
    }

    /// Value and first derivative by Horner's rule.
    fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.0.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// All roots by Aberth–Ehrlich simultaneous iteration.
    fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        let lead = self.0[n];
        let radius = 1.0 + self.0[..n].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
            .collect();
        for _ in 0..2000 {
            let mut worst = 0.0f64;
            for i in 0..n {
                let (p, dp) = self.eval(z[i]);
                if p == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let ratio = p / dp;
                let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                z[i] -= step;
                worst = worst.max(step.norm() / z[i].norm().max(1e-300));
            }
            if worst < 1e-15 {
                break;
            }
        }
        z
    }
}

/// One resonance of the scaled rational dispersion function.
#[derive(Debug, Clone, Copy)]
struct Pole {
    strength: f64,
    omega2: f64,
}

/// Complex roots ω (rad/s) with `Re ω > 0`, sorted by real part.
///
/// `epsilon_r` is the real background permittivity of the medium and `k` the
/// wavenumber in rad/m. Degenerate transitions are merged and transitions with
/// zero coupling are dropped before the polynomial is formed.
pub fn dispersion_roots(model: &SusceptibilityModel, epsilon_r: f64, k: f64) -> Result<Vec<Complex64>> {
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid("k", format!("{k} rad/m must be positive")));
    }
    if !(epsilon_r.is_finite() && epsilon_r > 0.0) {
        return Err(invalid("epsilon_r", format!("{epsilon_r} must be positive")));
    }
    let omega_scale = SPEED_OF_LIGHT * k / epsilon_r.sqrt();
    let g = model.gamma() / omega_scale;

    let mut poles: Vec<Pole> = Vec::new();
    for t in model.transitions().iter().filter(|t| t.coupling > 0.0) {
        let w = t.omega / omega_scale;
        let a = t.strength() / (omega_scale * omega_scale);
        match poles.iter_mut().find(|p| (p.omega2 - w * w).abs() <= 1e-12 * w * w) {
            Some(p) => p.strength += a,
            None => poles.push(Pole { strength: a, omega2: w * w }),
        }
    }

    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let denominators: Vec<Poly> = poles
        .iter()
        .map(|p| Poly(vec![Complex64::new(p.omega2, 0.0), -i * g, -one]))
        .collect();
    let product = denominators.iter().fold(Poly::constant(one), |acc, d| acc.mul(d));
    let mut poly = product.mul(&Poly(vec![-one, Complex64::new(0.0, 0.0), one]));
    for (idx, pole) in poles.iter().enumerate() {
        let others = denominators
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != idx)
            .fold(Poly::constant(one), |acc, (_, d)| acc.mul(d));
        poly = poly.add(&others.scale(Complex64::new(pole.strength, 0.0)));
    }

    let rational = |u: Complex64| -> (Complex64, Complex64) {
        let mut f = u * u - 1.0;
        let mut df = 2.0 * u;
        for p in &poles {
            let d = p.omega2 - u * u - i * g * u;
            f += p.strength / d;
            df += p.strength * (2.0 * u + i * g) / (d * d);
        }
        (f, df)
    };

    let mut roots = Vec::new();
    for mut u in poly.roots() {
        for _ in 0..50 {
            let (f, df) = rational(u);
            let step = f / df;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            u -= step;
            if step.norm() <= 1e-15 * u.norm() {
                break;
            }
        }
        if u.re <= 1e-12 * u.norm() {
            continue;
        }
        let residual = rational(u).0.norm();
        if residual.is_nan() || residual > POLISH_TOLERANCE {
            return Err(Error::RootPolish { residual, tolerance: POLISH_TOLERANCE });
        }
        roots.push(u * omega_scale);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(roots)
}
