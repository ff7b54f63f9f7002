//! Least-squares fit of the zero-temperature coupling (and optionally the
//! spin linewidth) to splitting-versus-temperature data.
//!
//! The optimizer is a bounded Nelder–Mead simplex in GHz units. It runs from
//! the caller's guess first and falls back to a fixed grid of five starts when
//! that run ends on a point without a small gradient and positive curvature. Nothing is random, so identical inputs
//! give identical results.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity_optics::CavityGeometry;
use crate::constants::{ghz_to_rad_per_s, rad_per_s_to_ghz};
use crate::error::{invalid, Error, Result};
use crate::magnetic_response::Coupling;
use crate::polariton_analysis::{vrs_at_field, AnalysisSettings, Splitting, DEFAULT_RESOLUTION_FLOOR};
use crate::spin_ladder::SpinSystem;

/// One measured splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VrsPoint {
    /// K.
    pub temperature: f64,
    /// Hz.
    pub vrs: f64,
    /// One-sigma uncertainty, Hz.
    pub uncertainty: Option<f64>,
}

/// Splitting versus temperature with the sample it was measured on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VrsDataset {
    points: Vec<VrsPoint>,
    geometry: CavityGeometry,
    mode_index: usize,
    field: f64,
    resolution_floor: f64,
}

impl VrsDataset {
    /// Sorts the rows by temperature. Repeated temperatures are rejected.
    pub fn new(
        mut points: Vec<VrsPoint>,
        geometry: CavityGeometry,
        mode_index: usize,
        field: f64,
        resolution_floor: f64,
    ) -> Result<Self> {
        if mode_index == 0 {
            return Err(invalid("mode_index", "must be >= 1"));
        }
        if !(field.is_finite() && field >= 0.0) {
            return Err(invalid("field", format!("{field} T must be finite and >= 0")));
        }
        if !(resolution_floor.is_finite() && resolution_floor >= 0.0) {
            return Err(invalid("resolution_floor", "must be finite and >= 0"));
        }
        for p in &points {
            if !(p.temperature.is_finite() && p.temperature >= 0.0) {
                return Err(invalid("temperature", format!("{} K must be finite and >= 0", p.temperature)));
            }
            if !(p.vrs.is_finite() && p.vrs >= 0.0) {
                return Err(invalid("vrs", format!("{} Hz must be finite and >= 0", p.vrs)));
            }
            if let Some(u) = p.uncertainty {
                if !(u.is_finite() && u > 0.0) {
                    return Err(invalid("vrs_uncertainty", format!("{u} Hz must be positive")));
                }
            }
        }
        points.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
        if let Some(w) = points.windows(2).find(|w| w[0].temperature == w[1].temperature) {
            return Err(invalid("temperature", format!("{} K appears more than once", w[0].temperature)));
        }
        Ok(Self { points, geometry, mode_index, field, resolution_floor })
    }

    pub fn points(&self) -> &[VrsPoint] {
        &self.points
    }

    pub fn geometry(&self) -> CavityGeometry {
        self.geometry
    }

    pub fn mode_index(&self) -> usize {
        self.mode_index
    }

    /// T.
    pub fn field(&self) -> f64 {
        self.field
    }

    /// Hz.
    pub fn resolution_floor(&self) -> f64 {
        self.resolution_floor
    }

    pub fn is_censored(&self, point: &VrsPoint) -> bool {
        point.vrs < self.resolution_floor
    }

    /// Rows that enter the residual.
    pub fn uncensored(&self) -> Vec<VrsPoint> {
        self.points.iter().filter(|p| !self.is_censored(p)).copied().collect()
    }
}

/// Simulated splitting at each temperature with the field held fixed.
#[allow(clippy::too_many_arguments)]
pub fn simulate_vrs_curve(
    sys: &SpinSystem,
    geometry: &CavityGeometry,
    j: usize,
    field: f64,
    g0: f64,
    gamma: f64,
    temperatures: &[f64],
    settings: &AnalysisSettings,
) -> Result<Vec<(f64, Splitting)>> {
    if !(g0.is_finite() && g0 >= 0.0) {
        return Err(invalid("g0", format!("{g0} rad/s must be finite and >= 0")));
    }
    temperatures
        .par_iter()
        .map(|&t| {
            vrs_at_field(sys, geometry, j, field, t, Coupling::Pinned(g0), gamma, settings)
                .map(|m| (t, m.splitting))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub free_gamma: bool,
    /// rad/s.
    pub g0_initial: f64,
    /// rad/s; also the pinned value when `free_gamma` is off.
    pub gamma_initial: f64,
    /// rad/s.
    pub g0_bounds: (f64, f64),
    /// rad/s.
    pub gamma_bounds: (f64, f64),
    /// Simplex iterations per start.
    pub max_iterations: usize,
    /// Gradient of the weighted mean-square residual (GHz²/GHz) accepted as stationary.
    pub gradient_tolerance: f64,
    pub settings: AnalysisSettings,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            free_gamma: false,
            g0_initial: ghz_to_rad_per_s(30.0),
            gamma_initial: ghz_to_rad_per_s(80.0),
            g0_bounds: (ghz_to_rad_per_s(1.0), ghz_to_rad_per_s(200.0)),
            gamma_bounds: (ghz_to_rad_per_s(5.0), ghz_to_rad_per_s(400.0)),
            max_iterations: 200,
            gradient_tolerance: 0.05,
            settings: AnalysisSettings { resolution_floor: DEFAULT_RESOLUTION_FLOOR, ..AnalysisSettings::default() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    /// K.
    pub temperature: f64,
    /// Hz.
    pub observed: f64,
    /// Raw simulated peak separation, zero when the branches merge, Hz.
    pub simulated: f64,
    /// `simulated − observed`, Hz.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// rad/s.
    pub g0: f64,
    /// rad/s.
    pub gamma: f64,
    pub gamma_free: bool,
    /// Weighted RMS residual, Hz.
    pub residual_norm: f64,
    pub residuals: Vec<PointResidual>,
    /// One-sigma, rad/s.
    pub g0_uncertainty: Option<f64>,
    /// One-sigma, rad/s; only when γ is free.
    pub gamma_uncertainty: Option<f64>,
    /// Simplex iterations over all starts.
    pub iterations: usize,
    /// Projected gradient norm at the optimum, GHz.
    pub gradient_norm: f64,
    pub converged: bool,
    /// Number of starting points tried.
    pub starts: usize,
}

struct Problem<'a> {
    sys: &'a SpinSystem,
    dataset: &'a VrsDataset,
    rows: Vec<VrsPoint>,
    weights: Vec<f64>,
    options: &'a FitOptions,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Problem<'_> {
    /// Parameters in GHz: `[g0]` or `[g0, γ]`.
    fn unpack(&self, x: &[f64]) -> (f64, f64) {
        let gamma = if self.options.free_gamma { x[1] } else { rad_per_s_to_ghz(self.options.gamma_initial) };
        (ghz_to_rad_per_s(x[0]), ghz_to_rad_per_s(gamma))
    }

    fn clamp(&self, x: &mut [f64]) {
        for (k, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[k], self.upper[k]);
        }
    }

    fn simulate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (g0, gamma) = self.unpack(x);
        let temperatures: Vec<f64> = self.rows.iter().map(|p| p.temperature).collect();
        let curve = simulate_vrs_curve(
            self.sys,
            &self.dataset.geometry,
            self.dataset.mode_index,
            self.dataset.field,
            g0,
            gamma,
            &temperatures,
            &self.options.settings,
        )?;
        Ok(curve.into_iter().map(|(_, s)| s.separation_or_zero()).collect())
    }

    /// Weighted mean-square residual, GHz².
    fn objective(&self, x: &[f64]) -> Result<f64> {
        let simulated = self.simulate(x)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for ((s, p), w) in simulated.iter().zip(&self.rows).zip(&self.weights) {
            let r = (s - p.vrs) / 1e9;
            num += w * r * r;
            den += w;
        }
        Ok(num / den)
    }

    fn step(&self, k: usize) -> f64 {
        (1e-3 * (self.upper[k] - self.lower[k])).max(1e-3)
    }

    /// Central-difference gradient, one-sided at the bounds, projected onto the box.
    fn projected_gradient(&self, x: &[f64], fx: f64) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; x.len()];
        for k in 0..x.len() {
            let h = self.step(k);
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[k] = (x[k] + h).min(self.upper[k]);
            minus[k] = (x[k] - h).max(self.lower[k]);
            let fp = if plus[k] > x[k] { self.objective(&plus)? } else { fx };
            let fm = if minus[k] < x[k] { self.objective(&minus)? } else { fx };
            let g = (fp - fm) / (plus[k] - minus[k]);
            let at_lower = x[k] <= self.lower[k] && g > 0.0;
            let at_upper = x[k] >= self.upper[k] && g < 0.0;
            grad[k] = if at_lower || at_upper { 0.0 } else { g };
        }
        Ok(grad)
    }

    /// Hessian of the weighted mean-square objective, GHz²/GHz².
    fn hessian(&self, x: &[f64], fx: f64) -> Result<Vec<Vec<f64>>> {
        let n = x.len();
        let h: Vec<f64> = (0..n).map(|k| 10.0 * self.step(k)).collect();
        // keep every stencil point inside the box
        let centre: Vec<f64> = (0..n).map(|k| x[k].clamp(self.lower[k] + h[k], self.upper[k] - h[k])).collect();
        let fx = if centre == x { fx } else { self.objective(&centre)? };
        let eval = |dx: &[(usize, f64)]| -> Result<f64> {
            let mut y = centre.clone();
            for &(k, d) in dx {
                y[k] += d;
            }
            self.objective(&y)
        };
        let mut hess = vec![vec![0.0; n]; n];
        for a in 0..n {
            let fp = eval(&[(a, h[a])])?;
            let fm = eval(&[(a, -h[a])])?;
            hess[a][a] = (fp - 2.0 * fx + fm) / (h[a] * h[a]);
            for b in 0..a {
                let fpp = eval(&[(a, h[a]), (b, h[b])])?;
                let fpm = eval(&[(a, h[a]), (b, -h[b])])?;
                let fmp = eval(&[(a, -h[a]), (b, h[b])])?;
                let fmm = eval(&[(a, -h[a]), (b, -h[b])])?;
                let v = (fpp - fpm - fmp + fmm) / (4.0 * h[a] * h[b]);
                hess[a][b] = v;
                hess[b][a] = v;
            }
        }
        Ok(hess)
    }
}

struct SimplexOutcome {
    x: Vec<f64>,
    fx: f64,
    iterations: usize,
}

fn nelder_mead(problem: &Problem<'_>, start: &[f64], max_iterations: usize) -> Result<SimplexOutcome> {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for k in 0..n {
        let mut v = start.to_vec();
        let span = problem.upper[k] - problem.lower[k];
        let delta = (0.05 * span).max(0.5);
        v[k] = if v[k] + delta <= problem.upper[k] { v[k] + delta } else { v[k] - delta };
        problem.clamp(&mut v);
        simplex.push(v);
    }
    let mut values = simplex.iter().map(|v| problem.objective(v)).collect::<Result<Vec<_>>>()?;

    let mut iterations = 0;
    while iterations < max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < 1e-4 && values[n] - values[0] <= 1e-10 * (1.0 + values[0].abs()) {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
        let point = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect();
            problem.clamp(&mut p);
            p
        };

        let reflected = point(-1.0);
        let fr = problem.objective(&reflected)?;
        if fr < values[0] {
            let expanded = point(-2.0);
            let fe = problem.objective(&expanded)?;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = point(-0.5);
            let f = problem.objective(&c)?;
            (c, f)
        } else {
            let c = point(0.5);
            let f = problem.objective(&c)?;
            (c, f)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            let mut v: Vec<f64> = (0..n).map(|k| simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k])).collect();
            problem.clamp(&mut v);
            values[i] = problem.objective(&v)?;
            simplex[i] = v;
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Ok(SimplexOutcome { x: simplex[best].clone(), fx: values[best], iterations })
}

fn invert_symmetric(h: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    match h.len() {
        1 => (h[0][0] > 0.0).then(|| vec![vec![1.0 / h[0][0]]]),
        2 => {
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            (det > 0.0 && h[0][0] > 0.0).then(|| {
                vec![vec![h[1][1] / det, -h[0][1] / det], vec![-h[1][0] / det, h[0][0] / det]]
            })
        }
        _ => None,
    }
}

/// Fits g0 (and γ when `free_gamma`) to the uncensored rows of `dataset`.
///
/// Residuals are weighted by `1/σ²` when every row carries an uncertainty
/// and uniformly otherwise. Rows below the resolution floor are ignored.
pub fn fit_g0(dataset: &VrsDataset, sys: &SpinSystem, options: &FitOptions) -> Result<FitResult> {
    options.settings.validate()?;
    let check_bounds = |name: &'static str, (lo, hi): (f64, f64), guess: f64| -> Result<()> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(invalid(name, "bounds must satisfy 0 < lower < upper"));
        }
        if !(lo..=hi).contains(&guess) {
            return Err(invalid(name, "initial guess outside bounds"));
        }
        Ok(())
    };
    check_bounds("g0_bounds", options.g0_bounds, options.g0_initial)?;
    if options.free_gamma {
        check_bounds("gamma_bounds", options.gamma_bounds, options.gamma_initial)?;
    } else if !(options.gamma_initial.is_finite() && options.gamma_initial > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    if options.max_iterations == 0 {
        return Err(invalid("max_iterations", "must be >= 1"));
    }

    if dataset.points().is_empty() {
        return Err(Error::InsufficientData { available: 0, required: 3 });
    }
    let rows = dataset.uncensored();
    if rows.is_empty() {
        return Err(Error::AllCensored);
    }
    let parameters = if options.free_gamma { 2 } else { 1 };
    let required = 3.max(parameters + 1);
    if rows.len() < required {
        return Err(Error::InsufficientData { available: rows.len(), required });
    }
    let weights: Vec<f64> = if rows.iter().all(|p| p.uncertainty.is_some()) {
        rows.iter().map(|p| 1.0 / (p.uncertainty.unwrap_or(1.0) / 1e9).powi(2)).collect()
    } else {
        vec![1.0; rows.len()]
    };

    let mut lower = vec![rad_per_s_to_ghz(options.g0_bounds.0)];
    let mut upper = vec![rad_per_s_to_ghz(options.g0_bounds.1)];
    let mut guess = vec![rad_per_s_to_ghz(options.g0_initial)];
    if options.free_gamma {
        lower.push(rad_per_s_to_ghz(options.gamma_bounds.0));
        upper.push(rad_per_s_to_ghz(options.gamma_bounds.1));
        guess.push(rad_per_s_to_ghz(options.gamma_initial));
    }
    let problem = Problem { sys, dataset, rows, weights, options, lower, upper };

    let mut starts = vec![guess.clone()];
    for k in 1..=5 {
        let frac = k as f64 / 6.0;
        let s: Vec<f64> = (0..parameters)
            .map(|i| if i == 0 { problem.lower[0] + frac * (problem.upper[0] - problem.lower[0]) } else { guess[i] })
            .collect();
        starts.push(s);
    }

    let mut iterations = 0;
    let mut best: Option<(SimplexOutcome, Vec<f64>)> = None;
    let mut curvature = None;
    let mut tried = 0;
    for start in &starts {
        tried += 1;
        let mut outcome = nelder_mead(&problem, start, options.max_iterations)?;
        iterations += outcome.iterations;
        // one restart from the optimum guards against a collapsed simplex
        let restart = nelder_mead(&problem, &outcome.x, options.max_iterations)?;
        iterations += restart.iterations;
        if restart.fx <= outcome.fx {
            outcome = restart;
        }
        let grad = problem.projected_gradient(&outcome.x, outcome.fx)?;
        let stationary = grad.iter().map(|g| g * g).sum::<f64>().sqrt() <= options.gradient_tolerance;
        // a flat objective (branches outside the window) is not a minimum
        let hess = if stationary { Some(problem.hessian(&outcome.x, outcome.fx)?) } else { None };
        let curved = hess.as_ref().is_some_and(|h| (0..parameters).all(|k| h[k][k] > 0.0));
        if curved {
            best = Some((outcome, grad));
            curvature = hess;
            break;
        }
    }
    let (Some((outcome, grad)), Some(hess)) = (best, curvature) else {
        return Err(Error::NotConverged { iterations });
    };
    let simulated = problem.simulate(&outcome.x)?;
    let residuals: Vec<PointResidual> = problem
        .rows
        .iter()
        .zip(&simulated)
        .map(|(p, &s)| PointResidual { temperature: p.temperature, observed: p.vrs, simulated: s, residual: s - p.vrs })
        .collect();

    // Cov = s² (JᵀWJ)⁻¹ with JᵀWJ ≈ ½ ∇²(Σ w r²)
    let n_rows = problem.rows.len() as f64;
    let weight_sum: f64 = problem.weights.iter().sum();
    let scaled: Vec<Vec<f64>> = hess.iter().map(|r| r.iter().map(|v| 0.5 * v * weight_sum).collect()).collect();
    let dof = (n_rows - parameters as f64).max(1.0);
    let s2 = outcome.fx * weight_sum / dof;
    let sigma = invert_symmetric(&scaled).map(|inv| {
        (0..parameters).map(|k| ghz_to_rad_per_s((s2 * inv[k][k]).max(0.0).sqrt())).collect::<Vec<_>>()
    });

    let (g0, gamma) = problem.unpack(&outcome.x);
    Ok(FitResult {
        g0,
        gamma,
        gamma_free: options.free_gamma,
        residual_norm: outcome.fx.sqrt() * 1e9,
        residuals,
        g0_uncertainty: sigma.as_ref().map(|s| s[0]),
        gamma_uncertainty: if options.free_gamma { sigma.as_ref().map(|s| s[1]) } else { None },
        iterations,
        gradient_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        converged: true,
        starts: tried,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_one() -> (SpinSystem, CavityGeometry, f64) {
        let sys = SpinSystem::gd_ggg().with_g_factor(2.0).unwrap();
        let geometry = CavityGeometry::sample_one();
        let field = crate::polariton_analysis::zero_detuning_field(
            &sys,
            2.0 * std::f64::consts::PI * geometry.mode_frequency(1),
            100.0,
        )
        .unwrap();
        (sys, geometry, field)
    }

    fn point(t: f64, vrs_ghz: f64) -> VrsPoint {
        VrsPoint { temperature: t, vrs: vrs_ghz * 1e9, uncertainty: None }
    }

    #[test]
    fn dataset_sorts_and_rejects_duplicates() {
        let g = CavityGeometry::sample_one();
        let d = VrsDataset::new(vec![point(50.0, 80.0), point(1.5, 120.0)], g, 1, 7.8, 65e9).unwrap();
        assert_eq!(d.points()[0].temperature, 1.5);
        assert!(VrsDataset::new(vec![point(5.0, 80.0), point(5.0, 90.0)], g, 1, 7.8, 65e9).is_err());
        assert!(VrsDataset::new(vec![point(5.0, -1.0)], g, 1, 7.8, 65e9).is_err());
    }

    #[test]
    fn censoring_uses_the_floor() {
        let g = CavityGeometry::sample_one();
        let d = VrsDataset::new(vec![point(1.5, 120.0), point(100.0, 40.0)], g, 1, 7.8, 65e9).unwrap();
        assert_eq!(d.uncensored().len(), 1);
    }

    #[test]
    fn zero_coupling_curve_is_unresolved() {
        let (sys, g, field) = sample_one();
        let curve = simulate_vrs_curve(
            &sys,
            &g,
            1,
            field,
            0.0,
            ghz_to_rad_per_s(80.0),
            &[1.5, 50.0, 150.0],
            &AnalysisSettings::default(),
        )
        .unwrap();
        assert!(curve.iter().all(|(_, s)| s.vrs().is_none()));
    }

    #[test]
    fn all_censored_is_an_error() {
        let (sys, g, field) = sample_one();
        let d = VrsDataset::new(vec![point(1.5, 40.0), point(10.0, 30.0), point(20.0, 20.0)], g, 1, field, 65e9)
            .unwrap();
        assert_eq!(fit_g0(&d, &sys, &FitOptions::default()), Err(Error::AllCensored));
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let (sys, g, field) = sample_one();
        let d = VrsDataset::new(vec![point(1.5, 120.0), point(10.0, 110.0)], g, 1, field, 65e9).unwrap();
        assert!(matches!(fit_g0(&d, &sys, &FitOptions::default()), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn guess_outside_bounds_is_rejected() {
        let (sys, g, field) = sample_one();
        let d = VrsDataset::new(vec![point(1.5, 120.0), point(10.0, 110.0), point(20.0, 100.0)], g, 1, field, 65e9)
            .unwrap();
        let options = FitOptions { g0_initial: ghz_to_rad_per_s(500.0), ..FitOptions::default() };
        assert!(matches!(fit_g0(&d, &sys, &options), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn noiseless_round_trip() {
        let (sys, g, field) = sample_one();
        let temperatures = [1.5, 5.0, 10.0, 15.0, 20.0];
        let options = FitOptions::default();
        let truth = ghz_to_rad_per_s(47.5);
        let curve = simulate_vrs_curve(&sys, &g, 1, field, truth, options.gamma_initial, &temperatures, &options.settings)
            .unwrap();
        let points = curve.iter().map(|&(t, s)| VrsPoint { temperature: t, vrs: s.separation_or_zero(), uncertainty: None });
        let d = VrsDataset::new(points.collect(), g, 1, field, 65e9).unwrap();
        let fit = fit_g0(&d, &sys, &options).unwrap();
        assert!(fit.converged);
        assert!((rad_per_s_to_ghz(fit.g0) - 47.5).abs() < 0.5, "{fit:?}");
        assert!(fit.residual_norm < 1e9);
    }
}
