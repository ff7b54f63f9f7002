//! Run configuration read from TOML.
//!
//! Frequencies are in GHz, lengths in metres, fields in tesla and
//! temperatures in kelvin. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use zeeman_core::cavity_optics::CavityGeometry;
use zeeman_core::constants::{ghz_to_rad_per_s, PLANCK};
use zeeman_core::magnetic_response::Coupling;
use zeeman_core::polariton_analysis::AnalysisSettings;
use zeeman_core::spin_ladder::{lattice_dipole_density, HalfInteger, SpinSystem};
use zeeman_core::vrs_fitting::FitOptions;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sample: SampleBlock,
    pub spin: SpinBlock,
    pub physics: PhysicsBlock,
    pub grid: GridBlock,
    #[serde(default)]
    pub analysis: AnalysisBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dicke: Option<DickeBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBlock {
    pub refractive_index: f64,
    /// m.
    pub thickness: f64,
    #[serde(default = "default_mode_index")]
    pub mode_index: usize,
}

fn default_mode_index() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinBlock {
    #[serde(default = "default_spin")]
    pub spin: f64,
    #[serde(default = "default_g_factor")]
    pub g_factor: f64,
    /// m⁻³.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_density: Option<f64>,
    /// m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ions_per_cell: Option<f64>,
    /// Per-level energy offsets, GHz, from m = −s upward.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_field_offsets_ghz: Option<Vec<f64>>,
}

fn default_spin() -> f64 {
    3.5
}

fn default_g_factor() -> f64 {
    zeeman_core::constants::G_ELECTRON
}

/// Either explicit values or an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Range {
    Values(Vec<f64>),
    Linear(LinearRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Values(v) => v.clone(),
            Self::Linear(r) if r.points <= 1 => vec![r.start],
            Self::Linear(r) => (0..r.points)
                .map(|k| r.start + (r.stop - r.start) * k as f64 / (r.points - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsBlock {
    /// Pinned zero-temperature coupling; closed form when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0_ghz: Option<f64>,
    pub gamma_ghz: f64,
    pub temperature: f64,
    /// Zero detuning with the selected mode when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_range: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_range: Option<Range>,
    #[serde(default = "default_true")]
    pub chi_enabled: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub f_min_ghz: f64,
    pub f_max_ghz: f64,
    pub points: usize,
}

impl GridBlock {
    /// Hz.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| 1e9 * (self.f_min_ghz + (self.f_max_ghz - self.f_min_ghz) * k as f64 / (n - 1) as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBlock {
    #[serde(default = "default_floor")]
    pub resolution_floor_ghz: f64,
    /// Half-width around the cavity mode; FSR/2 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_ghz: Option<f64>,
    #[serde(default = "default_prominence")]
    pub prominence_floor: f64,
}

fn default_floor() -> f64 {
    65.0
}

fn default_prominence() -> f64 {
    1e-3
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        Self { resolution_floor_ghz: default_floor(), window_ghz: None, prominence_floor: default_prominence() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: None, formats: default_formats() }
    }
}

impl OutputBlock {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    #[serde(default)]
    pub free_gamma: bool,
    #[serde(default = "default_g0_initial")]
    pub g0_initial_ghz: f64,
    #[serde(default = "default_g0_bounds")]
    pub g0_bounds_ghz: [f64; 2],
    #[serde(default = "default_gamma_bounds")]
    pub gamma_bounds_ghz: [f64; 2],
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_g0_initial() -> f64 {
    30.0
}

fn default_g0_bounds() -> [f64; 2] {
    [1.0, 200.0]
}

fn default_gamma_bounds() -> [f64; 2] {
    [5.0, 400.0]
}

fn default_max_iterations() -> usize {
    200
}

impl Default for FitBlock {
    fn default() -> Self {
        Self {
            free_gamma: false,
            g0_initial_ghz: default_g0_initial(),
            g0_bounds_ghz: default_g0_bounds(),
            gamma_bounds_ghz: default_gamma_bounds(),
            max_iterations: default_max_iterations(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DickeBlock {
    pub n_spins: Vec<usize>,
    pub eta: f64,
    #[serde(default = "default_cutoff")]
    pub photon_cutoff: usize,
    /// Common cavity and spin frequency; the selected cavity mode when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_ghz: Option<f64>,
}

fn default_cutoff() -> usize {
    zeeman_core::dicke_reference::DEFAULT_PHOTON_CUTOFF
}

/// A validation failure tied to a dotted key such as `grid.points`.
struct Invalid {
    key: &'static str,
    message: String,
}

fn check(ok: bool, key: &'static str, message: impl Into<String>) -> Result<(), Invalid> {
    if ok {
        Ok(())
    } else {
        Err(Invalid { key, message: message.into() })
    }
}

fn positive(value: f64, key: &'static str) -> Result<(), Invalid> {
    check(value.is_finite() && value > 0.0, key, format!("must be positive, got {value}"))
}

impl RunConfig {
    /// Parses and validates `source`; errors carry the line of the offending key.
    pub fn from_toml(source: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(source).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate().map_err(|bad| {
            let location = locate(source, bad.key).map_or_else(String::new, |line| format!("line {line}: "));
            CliError::Config(format!("{location}{}: {}", bad.key, bad.message))
        })?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), Invalid> {
        positive(self.sample.refractive_index, "sample.refractive_index")?;
        positive(self.sample.thickness, "sample.thickness")?;
        check(self.sample.mode_index >= 1, "sample.mode_index", "must be >= 1")?;

        let twice = 2.0 * self.spin.spin;
        check(
            twice >= 1.0 && twice.fract() == 0.0 && twice <= 200.0,
            "spin.spin",
            format!("must be a positive multiple of 1/2, got {}", self.spin.spin),
        )?;
        positive(self.spin.g_factor, "spin.g_factor")?;
        match (self.spin.dipole_density, self.spin.lattice_constant, self.spin.ions_per_cell) {
            (Some(d), None, None) => positive(d, "spin.dipole_density")?,
            (None, Some(a), Some(n)) => {
                positive(a, "spin.lattice_constant")?;
                positive(n, "spin.ions_per_cell")?;
            }
            (None, None, None) => {}
            (Some(_), _, _) => {
                return Err(Invalid {
                    key: "spin.dipole_density",
                    message: "give either dipole_density or lattice_constant with ions_per_cell, not both".into(),
                })
            }
            _ => {
                return Err(Invalid {
                    key: "spin.lattice_constant",
                    message: "lattice_constant and ions_per_cell must be given together".into(),
                })
            }
        }
        if let Some(offsets) = &self.spin.zero_field_offsets_ghz {
            check(
                offsets.len() as f64 == twice + 1.0,
                "spin.zero_field_offsets_ghz",
                format!("needs {} entries, got {}", twice + 1.0, offsets.len()),
            )?;
            check(offsets.iter().all(|x| x.is_finite()), "spin.zero_field_offsets_ghz", "entries must be finite")?;
        }

        if let Some(g0) = self.physics.g0_ghz {
            check(g0.is_finite() && g0 >= 0.0, "physics.g0_ghz", format!("must be >= 0, got {g0}"))?;
        }
        positive(self.physics.gamma_ghz, "physics.gamma_ghz")?;
        check(
            self.physics.temperature.is_finite() && self.physics.temperature >= 0.0,
            "physics.temperature",
            format!("must be >= 0, got {}", self.physics.temperature),
        )?;
        if let Some(b) = self.physics.field {
            check(b.is_finite() && b >= 0.0, "physics.field", format!("must be >= 0, got {b}"))?;
        }
        if let Some(range) = &self.physics.field_range {
            validate_range(range, "physics.field_range")?;
        }
        if let Some(range) = &self.physics.temperature_range {
            validate_range(range, "physics.temperature_range")?;
        }

        check(self.grid.f_min_ghz.is_finite() && self.grid.f_min_ghz >= 0.0, "grid.f_min_ghz", "must be >= 0")?;
        check(
            self.grid.f_max_ghz.is_finite() && self.grid.f_max_ghz > self.grid.f_min_ghz,
            "grid.f_max_ghz",
            format!("must exceed f_min_ghz ({})", self.grid.f_min_ghz),
        )?;
        check(self.grid.points >= 64, "grid.points", format!("must be >= 64, got {}", self.grid.points))?;

        check(
            self.analysis.resolution_floor_ghz.is_finite() && self.analysis.resolution_floor_ghz >= 0.0,
            "analysis.resolution_floor_ghz",
            "must be >= 0",
        )?;
        if let Some(w) = self.analysis.window_ghz {
            positive(w, "analysis.window_ghz")?;
        }
        check(
            self.analysis.prominence_floor.is_finite() && self.analysis.prominence_floor >= 0.0,
            "analysis.prominence_floor",
            "must be >= 0",
        )?;
        check(!self.output.formats.is_empty(), "output.formats", "must list at least one format")?;

        if let Some(fit) = &self.fit {
            let [lo, hi] = fit.g0_bounds_ghz;
            check(lo > 0.0 && hi > lo, "fit.g0_bounds_ghz", "must satisfy 0 < lower < upper")?;
            check((lo..=hi).contains(&fit.g0_initial_ghz), "fit.g0_initial_ghz", "must lie within g0_bounds_ghz")?;
            let [lo, hi] = fit.gamma_bounds_ghz;
            check(lo > 0.0 && hi > lo, "fit.gamma_bounds_ghz", "must satisfy 0 < lower < upper")?;
            if fit.free_gamma {
                check(
                    (lo..=hi).contains(&self.physics.gamma_ghz),
                    "physics.gamma_ghz",
                    "starting value must lie within fit.gamma_bounds_ghz",
                )?;
            }
            check(fit.max_iterations >= 1, "fit.max_iterations", "must be >= 1")?;
        }
        if let Some(dicke) = &self.dicke {
            check(!dicke.n_spins.is_empty(), "dicke.n_spins", "must not be empty")?;
            check(dicke.n_spins.iter().all(|&n| n >= 1), "dicke.n_spins", "entries must be >= 1")?;
            check(
                dicke.eta.is_finite() && (0.0..0.5).contains(&dicke.eta),
                "dicke.eta",
                "must lie in [0, 0.5)",
            )?;
            check(dicke.photon_cutoff >= 2, "dicke.photon_cutoff", "must be >= 2")?;
            if let Some(f) = dicke.frequency_ghz {
                positive(f, "dicke.frequency_ghz")?;
            }
        }
        Ok(())
    }

    pub fn spin_system(&self) -> Result<SpinSystem, CliError> {
        let spin = HalfInteger::new(self.spin.spin)
            .ok_or_else(|| CliError::Config(format!("spin.spin: {} is not a half-integer", self.spin.spin)))?;
        let density = match (self.spin.dipole_density, self.spin.lattice_constant, self.spin.ions_per_cell) {
            (Some(d), _, _) => d,
            (None, Some(a), Some(n)) => lattice_dipole_density(a, n),
            _ => SpinSystem::gd_ggg().dipole_density(),
        };
        let mut sys = SpinSystem::new(spin, self.spin.g_factor, density)?;
        if let Some(offsets) = &self.spin.zero_field_offsets_ghz {
            sys = sys.with_zero_field_offsets(offsets.iter().map(|f| f * 1e9 * PLANCK).collect())?;
        }
        Ok(sys)
    }

    pub fn geometry(&self) -> Result<CavityGeometry, CliError> {
        Ok(CavityGeometry::new(self.sample.refractive_index, self.sample.thickness)?)
    }

    pub fn coupling(&self) -> Coupling {
        match self.physics.g0_ghz {
            Some(g0) => Coupling::Pinned(ghz_to_rad_per_s(g0)),
            None => Coupling::ClosedForm,
        }
    }

    /// rad/s.
    pub fn gamma(&self) -> f64 {
        ghz_to_rad_per_s(self.physics.gamma_ghz)
    }

    pub fn analysis_settings(&self) -> AnalysisSettings {
        let grid = &self.grid;
        AnalysisSettings {
            resolution_floor: self.analysis.resolution_floor_ghz * 1e9,
            grid_step: 1e9 * (grid.f_max_ghz - grid.f_min_ghz) / (grid.points - 1) as f64,
            prominence_floor: self.analysis.prominence_floor,
            window_half_width: self.analysis.window_ghz.map(|w| w * 1e9),
            ..AnalysisSettings::default()
        }
    }

    pub fn fit_options(&self) -> FitOptions {
        let fit = self.fit.clone().unwrap_or_default();
        FitOptions {
            free_gamma: fit.free_gamma,
            g0_initial: ghz_to_rad_per_s(fit.g0_initial_ghz),
            gamma_initial: self.gamma(),
            g0_bounds: (ghz_to_rad_per_s(fit.g0_bounds_ghz[0]), ghz_to_rad_per_s(fit.g0_bounds_ghz[1])),
            gamma_bounds: (ghz_to_rad_per_s(fit.gamma_bounds_ghz[0]), ghz_to_rad_per_s(fit.gamma_bounds_ghz[1])),
            max_iterations: fit.max_iterations,
            settings: self.analysis_settings(),
            ..FitOptions::default()
        }
    }
}

fn validate_range(range: &Range, key: &'static str) -> Result<(), Invalid> {
    match range {
        Range::Values(v) => {
            check(!v.is_empty(), key, "must not be empty")?;
            check(v.iter().all(|x| x.is_finite() && *x >= 0.0), key, "entries must be finite and >= 0")?;
            check(v.windows(2).all(|w| w[1] > w[0]), key, "must be strictly increasing")
        }
        Range::Linear(r) => {
            check(r.points >= 1, key, "points must be >= 1")?;
            check(r.start.is_finite() && r.start >= 0.0, key, "start must be finite and >= 0")?;
            check(r.points == 1 || (r.stop.is_finite() && r.stop > r.start), key, "stop must exceed start")
        }
    }
}

/// 1-based line of `table.key` in `source`, by a plain scan of table headers.
fn locate(source: &str, dotted: &str) -> Option<usize> {
    let (table, key) = dotted.rsplit_once('.')?;
    let mut current = String::new();
    for (number, line) in source.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(header) = trimmed.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            current = header.trim().to_string();
            continue;
        }
        if current == table {
            if let Some(rest) = trimmed.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(number + 1);
                }
            }
        }
    }
    source.lines().position(|l| l.trim() == format!("[{table}]")).map(|n| n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[sample]
refractive_index = 3.8
thickness = 180e-6

[spin]
g_factor = 2.0
lattice_constant = 1.238e-9
ions_per_cell = 24

[physics]
g0_ghz = 47.5
gamma_ghz = 80
temperature = 1.5

[grid]
f_min_ghz = 50
f_max_ghz = 450
points = 2001
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.sample.mode_index, 1);
        assert_eq!(c.spin.spin, 3.5);
        assert_eq!(c.analysis.resolution_floor_ghz, 65.0);
        assert!(c.output.wants(Format::Csv) && c.output.wants(Format::Json));
        let sys = c.spin_system().unwrap();
        assert!((sys.dipole_density() - 24.0 / 1.238e-9f64.powi(3)).abs() < 1e10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("temperature = 1.5", "temperature = 1.5\ntemprature = 2");
        let err = RunConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("temprature"), "{err}");
    }

    #[test]
    fn validation_errors_name_the_line() {
        let bad = MINIMAL.replace("points = 2001", "points = 10");
        let err = RunConfig::from_toml(&bad).unwrap_err().to_string();
        let line = MINIMAL.lines().position(|l| l.starts_with("points")).unwrap() + 1;
        assert!(err.contains(&format!("line {line}")) && err.contains("grid.points"), "{err}");
    }

    #[test]
    fn density_sources_are_exclusive() {
        let bad = MINIMAL.replace("ions_per_cell = 24", "ions_per_cell = 24\ndipole_density = 1e28");
        assert!(RunConfig::from_toml(&bad).is_err());
        let half = MINIMAL.replace("ions_per_cell = 24", "");
        assert!(RunConfig::from_toml(&half).is_err());
    }

    #[test]
    fn empty_frequency_range_is_rejected() {
        let bad = MINIMAL.replace("f_max_ghz = 450", "f_max_ghz = 50");
        assert!(matches!(RunConfig::from_toml(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn ranges_accept_lists_and_linear_forms() {
        let src = MINIMAL.replace(
            "temperature = 1.5",
            "temperature = 1.5\nfield_range = { start = 0.0, stop = 9.0, points = 10 }\ntemperature_range = [1.5, 50, 100]",
        );
        let c = RunConfig::from_toml(&src).unwrap();
        assert_eq!(c.physics.field_range.unwrap().values().len(), 10);
        assert_eq!(c.physics.temperature_range.unwrap().values(), vec![1.5, 50.0, 100.0]);
    }

    #[test]
    fn json_echo_round_trips() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(c, back);
    }
}
