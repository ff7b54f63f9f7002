//! Polariton peaks, vacuum Rabi splitting and anticrossing maps.
//!
//! The splitting at a given field is the separation of the two most prominent
//! transmission maxima on either side of the bare cavity mode, searched in a
//! window of ±FSR/2 around that mode so neighbouring harmonics stay out.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity_optics::{transfer_matrix_spectrum, CavityGeometry, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::magnetic_response::{Coupling, SusceptibilityModel};
use crate::spin_ladder::SpinSystem;

use std::f64::consts::PI;

/// Spectrometer resolution of the reference measurements, Hz.
pub const DEFAULT_RESOLUTION_FLOOR: f64 = 65e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Hz, refined below the grid step.
    pub frequency: f64,
    pub transmittance: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    /// Sorted by frequency.
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.frequency).collect()
    }

    pub fn most_prominent(&self) -> Option<Peak> {
        self.peaks.iter().copied().max_by(|a, b| a.prominence.total_cmp(&b.prominence))
    }

    /// Most prominent peak strictly below `frequency`.
    pub fn most_prominent_below(&self, frequency: f64) -> Option<Peak> {
        self.peaks
            .iter()
            .filter(|p| p.frequency < frequency)
            .copied()
            .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
    }

    /// Most prominent peak strictly above `frequency`.
    pub fn most_prominent_above(&self, frequency: f64) -> Option<Peak> {
        self.peaks
            .iter()
            .filter(|p| p.frequency > frequency)
            .copied()
            .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
    }
}

/// Local maxima of the transmittance inside `window = (low, high)` (Hz)
/// whose topographic prominence is at least `prominence_floor`.
///
/// Positions are refined with a three-point parabola; prominence is measured
/// within the window only.
pub fn find_peaks(spectrum: &Spectrum, window: (f64, f64), prominence_floor: f64) -> Result<PeakSet> {
    let (low, high) = window;
    let f = &spectrum.frequency_grid;
    let start = f.partition_point(|&x| x < low);
    let end = f.partition_point(|&x| x <= high);
    if end < start + 3 {
        return Err(Error::EmptyWindow { low, high });
    }
    let x = &f[start..end];
    let y = &spectrum.transmittance[start..end];
    if x.windows(2).any(|w| w[1] - w[0] > 1e9) {
        log::warn!("grid step exceeds 1 GHz in [{low:e}, {high:e}] Hz; peak positions may be coarse");
    }

    let mut peaks = Vec::new();
    for i in 1..y.len() - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        let prominence = prominence_at(y, i);
        if prominence < prominence_floor {
            continue;
        }
        let (frequency, transmittance) = parabolic_vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]]);
        peaks.push(Peak { frequency, transmittance, prominence });
    }
    Ok(PeakSet { peaks })
}

fn prominence_at(y: &[f64], i: usize) -> f64 {
    let height = y[i];
    let mut left_min = height;
    for &v in y[..i].iter().rev() {
        if v > height {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = height;
    for &v in &y[i + 1..] {
        if v > height {
            break;
        }
        right_min = right_min.min(v);
    }
    height - left_min.max(right_min)
}

/// Vertex of the parabola through three points; falls back to the middle
/// point when the samples are not concave.
fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if curvature >= 0.0 {
        return (x[1], y[1]);
    }
    let vertex = (0.5 * (x[0] + x[1]) - d1 / (2.0 * curvature)).clamp(x[0], x[2]);
    let value = y[0] + d1 * (vertex - x[0]) + curvature * (vertex - x[0]) * (vertex - x[1]);
    (vertex, value)
}

/// Outcome of a splitting measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Splitting {
    /// Two peaks bracket the cavity mode and are at least one resolution floor apart.
    Resolved { lower: f64, upper: f64 },
    /// Two bracketing peaks closer than the resolution floor.
    BelowResolution { lower: f64, upper: f64 },
    /// Only one side of the cavity mode has a peak.
    SinglePeak { frequency: f64 },
    NoPeak,
}

impl Splitting {
    fn classify(lower: Option<Peak>, upper: Option<Peak>, resolution_floor: f64) -> Self {
        match (lower, upper) {
            (Some(l), Some(u)) if u.frequency - l.frequency >= resolution_floor => {
                Self::Resolved { lower: l.frequency, upper: u.frequency }
            }
            (Some(l), Some(u)) => Self::BelowResolution { lower: l.frequency, upper: u.frequency },
            (Some(p), None) | (None, Some(p)) => Self::SinglePeak { frequency: p.frequency },
            (None, None) => Self::NoPeak,
        }
    }

    /// Splitting in Hz when resolved.
    pub fn vrs(&self) -> Option<f64> {
        match *self {
            Self::Resolved { lower, upper } => Some(upper - lower),
            _ => None,
        }
    }

    /// Peak separation in Hz whenever two bracketing peaks exist.
    pub fn separation(&self) -> Option<f64> {
        match *self {
            Self::Resolved { lower, upper } | Self::BelowResolution { lower, upper } => Some(upper - lower),
            _ => None,
        }
    }

    /// Peak separation, or zero once the branches have merged into one peak.
    pub fn separation_or_zero(&self) -> f64 {
        self.separation().unwrap_or(0.0)
    }

    pub fn is_resolved(&self) -> bool {
        matches!(self, Self::Resolved { .. })
    }
}

/// Analysis knobs shared by the splitting and fitting routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    /// Splittings below this are reported unresolved, Hz.
    pub resolution_floor: f64,
    /// Maximum frequency step of simulated spectra, Hz.
    pub grid_step: f64,
    /// Minimum prominence of a transmittance peak.
    pub prominence_floor: f64,
    /// Half-width of the analysis window around the cavity mode, Hz. `None` means FSR/2.
    pub window_half_width: Option<f64>,
    /// Upper end of the zero-detuning field search, T.
    pub max_field: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            resolution_floor: DEFAULT_RESOLUTION_FLOOR,
            grid_step: 0.1e9,
            prominence_floor: 1e-3,
            window_half_width: None,
            max_field: 100.0,
        }
    }
}

impl AnalysisSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution_floor >= 0.0 && self.resolution_floor.is_finite()) {
            return Err(invalid("resolution_floor", "must be finite and >= 0"));
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(invalid("grid_step", "must be positive"));
        }
        if self.prominence_floor.is_nan() || self.prominence_floor < 0.0 {
            return Err(invalid("prominence_floor", "must be >= 0"));
        }
        if let Some(w) = self.window_half_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid("window_half_width", "must be positive"));
            }
        }
        if !(self.max_field > 0.0 && self.max_field.is_finite()) {
            return Err(invalid("max_field", "must be positive"));
        }
        Ok(())
    }

    fn half_width(&self, geometry: &CavityGeometry) -> f64 {
        self.window_half_width.unwrap_or(0.5 * geometry.free_spectral_range())
    }
}

/// Splitting of the mode at `center` (Hz) in an already computed spectrum.
pub fn analyze_splitting(
    spectrum: &Spectrum,
    center: f64,
    half_width: f64,
    settings: &AnalysisSettings,
) -> Result<(PeakSet, Splitting)> {
    let peaks = find_peaks(spectrum, (center - half_width, center + half_width), settings.prominence_floor)?;
    let splitting = Splitting::classify(
        peaks.most_prominent_below(center),
        peaks.most_prominent_above(center),
        settings.resolution_floor,
    );
    Ok((peaks, splitting))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonMetrics {
    pub splitting: Splitting,
    /// T.
    pub field: f64,
    /// Bare cavity mode, Hz.
    pub cavity_frequency: f64,
    /// Zero-temperature coupling used, rad/s.
    pub g0: f64,
    /// `g0 / ω_cav`.
    pub eta: f64,
    /// Hz.
    pub resolution_floor: f64,
}

impl PolaritonMetrics {
    /// Resolved splitting in Hz.
    pub fn vrs(&self) -> Option<f64> {
        self.splitting.vrs()
    }

    /// `Ω_VRS − 2 g0`, in Hz, when resolved.
    pub fn excess_over_two_g0(&self) -> Option<f64> {
        self.vrs().map(|v| v - 2.0 * self.g0 / (2.0 * PI))
    }
}

/// Uniform grid covering `[low, high]` with a step no larger than `max_step`.
pub fn uniform_grid(low: f64, high: f64, max_step: f64) -> Vec<f64> {
    let intervals = ((high - low) / max_step).ceil().max(2.0) as usize;
    (0..=intervals).map(|k| low + (high - low) * k as f64 / intervals as f64).collect()
}

/// Field (T) at which the lowest transition frequency meets `target_omega` (rad/s).
///
/// Scans `[0, max_field]` and refines by bisection where the detuning changes
/// sign, or by golden-section search on |detuning| when it never does.
pub fn zero_detuning_field(sys: &SpinSystem, target_omega: f64, max_field: f64) -> Result<f64> {
    if !(target_omega > 0.0 && target_omega.is_finite()) {
        return Err(invalid("target_omega", "must be positive"));
    }
    let detuning = |b: f64| sys.lowest_transition_frequency(b) - target_omega;
    const SCAN: usize = 4000;
    let fields: Vec<f64> = (0..=SCAN).map(|k| max_field * k as f64 / SCAN as f64).collect();
    let values: Vec<f64> = fields.iter().map(|&b| detuning(b)).collect();

    if let Some(k) = (0..SCAN).find(|&k| values[k] == 0.0 || values[k].signum() != values[k + 1].signum()) {
        if values[k] == 0.0 {
            return Ok(fields[k]);
        }
        let (mut lo, mut hi) = (fields[k], fields[k + 1]);
        let lo_sign = values[k].signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if detuning(mid).signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Ok(0.5 * (lo + hi));
    }

    let best = (0..=SCAN).min_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs())).unwrap_or(0);
    let (mut a, mut b) = (fields[best.saturating_sub(1)], fields[(best + 1).min(SCAN)]);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if detuning(c).abs() < detuning(d).abs() {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(0.5 * (a + b))
}

/// Simulates the slab at `field` and measures the splitting around mode `j`.
#[allow(clippy::too_many_arguments)]
pub fn vrs_at_field(
    sys: &SpinSystem,
    geometry: &CavityGeometry,
    j: usize,
    field: f64,
    temperature: f64,
    coupling: Coupling,
    gamma: f64,
    settings: &AnalysisSettings,
) -> Result<PolaritonMetrics> {
    if j == 0 {
        return Err(invalid("mode_index", "must be >= 1"));
    }
    settings.validate()?;
    let center = geometry.mode_frequency(j);
    let half_width = settings.half_width(geometry);
    let model = Arc::new(SusceptibilityModel::thermal(sys, field, temperature, gamma, coupling)?);
    let grid = uniform_grid(center - half_width, center + half_width, settings.grid_step);
    let spectrum = transfer_matrix_spectrum(&[geometry.slab(Some(model.clone()))], &grid)?;
    let (_, splitting) = analyze_splitting(&spectrum, center, half_width, settings)?;
    Ok(PolaritonMetrics {
        splitting,
        field,
        cavity_frequency: center,
        g0: model.g0(),
        eta: model.g0() / (2.0 * PI * center),
        resolution_floor: settings.resolution_floor,
    })
}

/// Tunes the field to zero detuning with mode `j` and measures the splitting there.
#[allow(clippy::too_many_arguments)]
pub fn vrs_at_zero_detuning(
    sys: &SpinSystem,
    geometry: &CavityGeometry,
    j: usize,
    temperature: f64,
    coupling: Coupling,
    gamma: f64,
    settings: &AnalysisSettings,
) -> Result<PolaritonMetrics> {
    if j == 0 {
        return Err(invalid("mode_index", "must be >= 1"));
    }
    let target = 2.0 * PI * geometry.mode_frequency(j);
    let field = zero_detuning_field(sys, target, settings.max_field)?;
    vrs_at_field(sys, geometry, j, field, temperature, coupling, gamma, settings)
}

/// Transmittance versus field and frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnticrossingMap {
    /// T.
    pub fields: Vec<f64>,
    /// Hz.
    pub frequency_grid: Vec<f64>,
    /// One row per field.
    pub transmittance: Vec<Vec<f64>>,
    /// Bare lowest-transition frequency per field, Hz.
    pub bare_epr: Vec<f64>,
    /// Bare cavity mode, Hz.
    pub bare_cavity: f64,
    /// Separation of the branches bracketing the bare-mode midpoint, Hz.
    pub branch_separation: Vec<Option<f64>>,
    /// Most prominent peak within ±FSR/2 of the bare cavity mode, Hz.
    pub dominant_peak: Vec<Option<f64>>,
}

impl AnticrossingMap {
    /// Field and value of the smallest branch separation, parabolically
    /// refined between neighbouring field samples.
    pub fn minimum_separation(&self) -> Option<(f64, f64)> {
        let (k, &best) = self
            .branch_separation
            .iter()
            .enumerate()
            .filter_map(|(k, s)| s.as_ref().map(|v| (k, v)))
            .min_by(|a, b| a.1.total_cmp(b.1))?;
        if k == 0 || k + 1 >= self.fields.len() {
            return Some((self.fields[k], best));
        }
        match (self.branch_separation[k - 1], self.branch_separation[k + 1]) {
            (Some(a), Some(c)) => {
                let x = [self.fields[k - 1], self.fields[k], self.fields[k + 1]];
                let (field, value) = parabolic_vertex(x, [-a, -best, -c]);
                Some((field, -value))
            }
            _ => Some((self.fields[k], best)),
        }
    }
}

/// Row-per-field transmittance map of mode `j` with bare-mode overlays.
#[allow(clippy::too_many_arguments)]
pub fn anticrossing_map(
    sys: &SpinSystem,
    geometry: &CavityGeometry,
    j: usize,
    fields: &[f64],
    temperature: f64,
    coupling: Coupling,
    gamma: f64,
    frequency_grid: &[f64],
    settings: &AnalysisSettings,
) -> Result<AnticrossingMap> {
    if fields.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("field_range", "must be strictly increasing"));
    }
    if j == 0 {
        return Err(invalid("mode_index", "must be >= 1"));
    }
    settings.validate()?;
    let cavity = geometry.mode_frequency(j);
    let half_width = settings.half_width(geometry);

    let rows = fields
        .par_iter()
        .map(|&field| {
            let model = Arc::new(SusceptibilityModel::thermal(sys, field, temperature, gamma, coupling)?);
            let spectrum = transfer_matrix_spectrum(&[geometry.slab(Some(model))], frequency_grid)?;
            let epr = sys.lowest_transition_frequency(field) / (2.0 * PI);
            let midpoint = 0.5 * (cavity + epr);
            let separation = match analyze_splitting(&spectrum, midpoint, half_width, settings) {
                Ok((_, s)) => s.separation(),
                Err(Error::EmptyWindow { .. }) => None,
                Err(e) => return Err(e),
            };
            let dominant = match find_peaks(&spectrum, (cavity - half_width, cavity + half_width), settings.prominence_floor) {
                Ok(p) => p.most_prominent().map(|p| p.frequency),
                Err(Error::EmptyWindow { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok((spectrum.transmittance, epr, separation, dominant))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut map = AnticrossingMap {
        fields: fields.to_vec(),
        frequency_grid: frequency_grid.to_vec(),
        transmittance: Vec::with_capacity(rows.len()),
        bare_epr: Vec::with_capacity(rows.len()),
        bare_cavity: cavity,
        branch_separation: Vec::with_capacity(rows.len()),
        dominant_peak: Vec::with_capacity(rows.len()),
    };
    for (t, epr, separation, dominant) in rows {
        map.transmittance.push(t);
        map.bare_epr.push(epr);
        map.branch_separation.push(separation);
        map.dominant_peak.push(dominant);
    }
    Ok(map)
}

/// Splitting versus temperature at a fixed field.
#[allow(clippy::too_many_arguments)]
pub fn vrs_versus_temperature(
    sys: &SpinSystem,
    geometry: &CavityGeometry,
    j: usize,
    field: f64,
    temperatures: &[f64],
    coupling: Coupling,
    gamma: f64,
    settings: &AnalysisSettings,
) -> Result<Vec<PolaritonMetrics>> {
    temperatures
        .par_iter()
        .map(|&t| vrs_at_field(sys, geometry, j, field, t, coupling, gamma, settings))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ghz_to_rad_per_s;
    use num_complex::Complex64;

    fn synthetic(f: &[f64], y: Vec<f64>) -> Spectrum {
        Spectrum {
            frequency_grid: f.to_vec(),
            t_complex: vec![Complex64::new(0.0, 0.0); f.len()],
            r_complex: vec![Complex64::new(0.0, 0.0); f.len()],
            reflectance: vec![0.0; f.len()],
            transmittance: y,
        }
    }

    fn lorentzian(f: f64, center: f64, width: f64) -> f64 {
        let x = (f - center) / (0.5 * width);
        1.0 / (1.0 + x * x)
    }

    #[test]
    fn two_lorentzians_are_located() {
        let f = uniform_grid(400e9, 900e9, 1e9);
        let y = f.iter().map(|&x| lorentzian(x, 600e9, 20e9) + lorentzian(x, 700e9, 20e9)).collect();
        let peaks = find_peaks(&synthetic(&f, y), (400e9, 900e9), 0.1).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!((peaks.peaks[0].frequency - 600e9).abs() < 0.5e9);
        assert!((peaks.peaks[1].frequency - 700e9).abs() < 0.5e9);
    }

    #[test]
    fn off_grid_peak_is_refined() {
        let f = uniform_grid(0.0, 100e9, 1e9);
        let y = f.iter().map(|&x| lorentzian(x, 42.37e9, 15e9)).collect();
        let peaks = find_peaks(&synthetic(&f, y), (0.0, 100e9), 0.1).unwrap();
        assert!((peaks.peaks[0].frequency - 42.37e9).abs() < 0.05e9);
    }

    #[test]
    fn monotonic_spectrum_has_no_peaks() {
        let f = uniform_grid(0.0, 100e9, 1e9);
        let y = f.iter().map(|&x| x / 100e9).collect();
        assert!(find_peaks(&synthetic(&f, y), (0.0, 100e9), 0.0).unwrap().is_empty());
    }

    #[test]
    fn prominence_floor_filters_ripples() {
        let f = uniform_grid(0.0, 100e9, 0.5e9);
        let y = f
            .iter()
            .map(|&x| lorentzian(x, 50e9, 20e9) + 1e-3 * (x / 3e9).sin())
            .collect();
        let peaks = find_peaks(&synthetic(&f, y), (0.0, 100e9), 0.1).unwrap();
        assert_eq!(peaks.len(), 1);
    }

    #[test]
    fn empty_window_is_an_error() {
        let f = uniform_grid(0.0, 100e9, 1e9);
        let y = vec![0.5; f.len()];
        assert!(matches!(
            find_peaks(&synthetic(&f, y), (200e9, 300e9), 0.1),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn bare_etalon_peak_sits_on_the_mode() {
        let g = CavityGeometry::sample_one();
        let f1 = g.mode_frequency(1);
        let grid = uniform_grid(f1 - 100e9, f1 + 100e9, 0.5e9);
        let s = transfer_matrix_spectrum(&[g.slab(None)], &grid).unwrap();
        let peaks = find_peaks(&s, (f1 - 100e9, f1 + 100e9), 1e-3).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks.peaks[0].frequency - f1).abs() < 0.05e9);
    }

    #[test]
    fn zero_detuning_of_sample_one() {
        let sys = SpinSystem::gd_ggg().with_g_factor(2.0).unwrap();
        let target = 2.0 * PI * CavityGeometry::sample_one().mode_frequency(1);
        let b = zero_detuning_field(&sys, target, 100.0).unwrap();
        assert!((sys.lowest_transition_frequency(b) / target - 1.0).abs() < 1e-12);
        assert!((b - 7.8).abs() < 0.1);
    }

    #[test]
    fn unreachable_target_falls_back_to_closest_field() {
        let sys = SpinSystem::gd_ggg().with_g_factor(2.0).unwrap();
        let target = ghz_to_rad_per_s(1e5);
        let b = zero_detuning_field(&sys, target, 10.0).unwrap();
        assert!((b - 10.0).abs() < 1e-6);
    }

    #[test]
    fn no_coupling_means_no_splitting() {
        let sys = SpinSystem::gd_ggg().with_g_factor(2.0).unwrap();
        let g = CavityGeometry::sample_one();
        let m = vrs_at_zero_detuning(
            &sys,
            &g,
            1,
            1.5,
            Coupling::Pinned(0.0),
            ghz_to_rad_per_s(80.0),
            &AnalysisSettings::default(),
        )
        .unwrap();
        match m.splitting {
            Splitting::SinglePeak { frequency } => assert!((frequency - g.mode_frequency(1)).abs() < 0.05e9),
            other => panic!("expected a single peak, got {other:?}"),
        }
        assert_eq!(m.vrs(), None);
    }

    #[test]
    fn splitting_classification() {
        let p = |f| Some(Peak { frequency: f, transmittance: 1.0, prominence: 1.0 });
        assert!(Splitting::classify(p(100.0), p(200.0), 65.0).is_resolved());
        assert_eq!(Splitting::classify(p(100.0), p(150.0), 65.0).separation(), Some(50.0));
        assert_eq!(Splitting::classify(p(100.0), p(150.0), 65.0).vrs(), None);
        assert_eq!(Splitting::classify(None, None, 65.0).separation_or_zero(), 0.0);
    }

    #[test]
    fn mode_zero_is_rejected() {
        let sys = SpinSystem::gd_ggg();
        let r = vrs_at_zero_detuning(
            &sys,
            &CavityGeometry::sample_one(),
            0,
            1.5,
            Coupling::ClosedForm,
            1e11,
            &AnalysisSettings::default(),
        );
        assert!(r.is_err());
    }
}
