//! One function per subcommand. Everything leaving here is in GHz, K and T.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use zeeman_core::cavity_optics::{fp_diagnostics, transfer_matrix_spectrum, CavityGeometry, Spectrum};
use zeeman_core::constants::{rad_per_s_to_ghz, TABLE};
use zeeman_core::dicke_reference::{dicke_eigenspectrum, hopfield_branches, DickeModel};
use zeeman_core::magnetic_response::{g0_closed_form, SusceptibilityModel};
use zeeman_core::polariton_analysis::{
    analyze_splitting, anticrossing_map, find_peaks, zero_detuning_field, AnalysisSettings, Splitting,
};
use zeeman_core::spin_ladder::SpinSystem;
use zeeman_core::vrs_fitting::{fit_g0, VrsDataset};
use zeeman_core::Error as CoreError;

use crate::config::{Format, RunConfig};
use crate::dataset::read_points;
use crate::error::CliError;
use crate::output::{fmt_g, Sink};
use crate::Axis;

fn ghz(hz: f64) -> f64 {
    hz * 1e-9
}

/// Field from the config, or zero detuning with the selected mode.
fn working_field(config: &RunConfig, sys: &SpinSystem, geometry: &CavityGeometry) -> Result<f64, CliError> {
    match config.physics.field {
        Some(b) => Ok(b),
        None => {
            let target = 2.0 * PI * geometry.mode_frequency(config.sample.mode_index);
            let settings = config.analysis_settings();
            let field = zero_detuning_field(sys, target, settings.max_field)?;
            log::info!("zero-detuning field {field:.6} T");
            Ok(field)
        }
    }
}

fn half_width(settings: &AnalysisSettings, geometry: &CavityGeometry) -> f64 {
    settings.window_half_width.unwrap_or(0.5 * geometry.free_spectral_range())
}

fn model(
    config: &RunConfig,
    sys: &SpinSystem,
    field: f64,
    temperature: f64,
) -> Result<Option<Arc<SusceptibilityModel>>, CliError> {
    if !config.physics.chi_enabled {
        return Ok(None);
    }
    let m = SusceptibilityModel::thermal(sys, field, temperature, config.gamma(), config.coupling())?;
    Ok(Some(Arc::new(m)))
}

/// Splitting around `center`, or `None` when the window misses the grid.
fn splitting_near(
    spectrum: &Spectrum,
    center: f64,
    half_width: f64,
    settings: &AnalysisSettings,
) -> Result<Option<Splitting>, CliError> {
    match analyze_splitting(spectrum, center, half_width, settings) {
        Ok((_, s)) => Ok(Some(s)),
        Err(CoreError::EmptyWindow { low, high }) => {
            log::warn!("analysis window {:.3}-{:.3} GHz lies outside the grid", ghz(low), ghz(high));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn splitting_json(s: Option<Splitting>) -> Value {
    match s {
        None => Value::Null,
        Some(s) => {
            let (kind, peaks) = match s {
                Splitting::Resolved { lower, upper } => ("resolved", vec![ghz(lower), ghz(upper)]),
                Splitting::BelowResolution { lower, upper } => ("below_resolution", vec![ghz(lower), ghz(upper)]),
                Splitting::SinglePeak { frequency } => ("single_peak", vec![ghz(frequency)]),
                Splitting::NoPeak => ("no_peak", vec![]),
            };
            json!({
                "kind": kind,
                "peaks_GHz": peaks,
                "separation_GHz": s.separation().map(ghz),
                "vrs_GHz": s.vrs().map(ghz),
                "resolved": s.is_resolved(),
            })
        }
    }
}

fn provenance(config: &RunConfig) -> Value {
    json!({
        "config": config,
        "constants": TABLE,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn with_provenance(config: &RunConfig, body: Value) -> Value {
    let mut out = provenance(config);
    if let (Value::Object(out), Value::Object(body)) = (&mut out, body) {
        out.extend(body);
    }
    out
}

fn row(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| fmt_g(v)).collect()
}

pub fn spectrum(config: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let sys = config.spin_system()?;
    let geometry = config.geometry()?;
    let settings = config.analysis_settings();
    let j = config.sample.mode_index;
    let field = working_field(config, &sys, &geometry)?;
    let model = model(config, &sys, field, config.physics.temperature)?;

    let grid = config.grid.frequencies();
    let spectrum = transfer_matrix_spectrum(&[geometry.slab(model.clone())], &grid)?;
    let center = geometry.mode_frequency(j);
    let splitting = splitting_near(&spectrum, center, half_width(&settings, &geometry), &settings)?;
    let peaks = find_peaks(&spectrum, (grid[0], grid[grid.len() - 1]), settings.prominence_floor)?;

    let chi: Vec<_> = grid
        .iter()
        .map(|&f| model.as_ref().map(|m| (m.chi(2.0 * PI * f), m.mu_r(2.0 * PI * f))))
        .collect();
    let header = ["frequency_GHz", "transmittance", "reflectance", "Im_chi", "Re_mu_r", "Im_mu_r"];
    let mut columns: [Vec<f64>; 6] = Default::default();
    for (k, &f) in grid.iter().enumerate() {
        let (im_chi, re_mu, im_mu) = chi[k].map_or((0.0, 1.0, 0.0), |(c, m)| (c.im, m.re, m.im));
        let values = [ghz(f), spectrum.transmittance[k], spectrum.reflectance[k], im_chi, re_mu, im_mu];
        for (column, v) in columns.iter_mut().zip(values) {
            column.push(v);
        }
    }

    if config.output.wants(Format::Csv) {
        let rows: Vec<Vec<String>> =
            (0..grid.len()).map(|k| row(&columns.iter().map(|c| c[k]).collect::<Vec<_>>())).collect();
        sink.csv("spectrum.csv", &header, &rows)?;
    }
    let g0 = model.as_ref().map(|m| rad_per_s_to_ghz(m.g0()));
    if config.output.wants(Format::Json) {
        let data: serde_json::Map<String, Value> =
            header.iter().zip(&columns).map(|(h, c)| (h.to_string(), json!(c))).collect();
        let body = json!({
            "field_T": field,
            "temperature_K": config.physics.temperature,
            "cavity_frequency_GHz": ghz(center),
            "g0_GHz": g0,
            "peaks_GHz": peaks.frequencies().into_iter().map(ghz).collect::<Vec<_>>(),
            "splitting": splitting_json(splitting),
            "data": data,
        });
        sink.json("spectrum.json", &with_provenance(config, body))?;
    }

    say!("field {} T, cavity mode {} GHz", fmt_g(field), fmt_g(ghz(center)));
    match splitting.and_then(|s| s.separation()) {
        Some(sep) => say!(
            "peak separation {} GHz ({})",
            fmt_g(ghz(sep)),
            if splitting.is_some_and(|s| s.is_resolved()) { "resolved" } else { "below resolution floor" }
        ),
        None => say!("no splitting around the cavity mode"),
    }
    Ok(())
}

/// Axis value, transmittance row, peak separation.
type SweepRow = (f64, Vec<f64>, Option<f64>);

pub fn sweep(config: &RunConfig, sink: &Sink, axis: Axis) -> Result<(), CliError> {
    let sys = config.spin_system()?;
    let geometry = config.geometry()?;
    let settings = config.analysis_settings();
    let j = config.sample.mode_index;
    let grid = config.grid.frequencies();
    let floor = settings.resolution_floor;

    let (name, rows, extra): (&str, Vec<SweepRow>, Value) = match axis {
        Axis::Field => {
            let fields = config
                .physics
                .field_range
                .as_ref()
                .ok_or_else(|| CliError::Config("sweep --axis field needs physics.field_range".into()))?
                .values();
            if !config.physics.chi_enabled {
                return Err(CliError::Config("a field sweep needs physics.chi_enabled = true".into()));
            }
            let map = anticrossing_map(
                &sys,
                &geometry,
                j,
                &fields,
                config.physics.temperature,
                config.coupling(),
                config.gamma(),
                &grid,
                &settings,
            )?;
            let minimum = map.minimum_separation();
            let extra = json!({
                "temperature_K": config.physics.temperature,
                "cavity_frequency_GHz": ghz(map.bare_cavity),
                "bare_epr_GHz": map.bare_epr.iter().map(|&f| ghz(f)).collect::<Vec<_>>(),
                "minimum_separation": minimum.map(|(b, s)| json!({"field_T": b, "separation_GHz": ghz(s)})),
            });
            if let Some((b, s)) = minimum {
                say!("minimum branch separation {} GHz at {} T", fmt_g(ghz(s)), fmt_g(b));
            }
            let rows = map
                .fields
                .iter()
                .zip(map.transmittance)
                .zip(&map.branch_separation)
                .map(|((&b, t), &s)| (b, t, s))
                .collect();
            ("field_T", rows, extra)
        }
        Axis::Temperature => {
            let temperatures = config
                .physics
                .temperature_range
                .as_ref()
                .ok_or_else(|| CliError::Config("sweep --axis temperature needs physics.temperature_range".into()))?
                .values();
            let field = working_field(config, &sys, &geometry)?;
            let center = geometry.mode_frequency(j);
            let width = half_width(&settings, &geometry);
            let rows = temperatures
                .par_iter()
                .map(|&t| {
                    let model = model(config, &sys, field, t)?;
                    let spectrum = transfer_matrix_spectrum(&[geometry.slab(model)], &grid)?;
                    let separation = splitting_near(&spectrum, center, width, &settings)?
                        .map(|s| s.separation_or_zero());
                    Ok((t, spectrum.transmittance, separation))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let extra = json!({ "field_T": field, "cavity_frequency_GHz": ghz(center) });
            ("temperature_K", rows, extra)
        }
    };

    let summary: Vec<(f64, f64, bool)> = rows
        .iter()
        .map(|(x, _, s)| {
            let s = s.unwrap_or(0.0);
            (*x, ghz(s), s > 0.0 && s >= floor)
        })
        .collect();

    if config.output.wants(Format::Csv) {
        let map_rows: Vec<Vec<String>> = rows
            .iter()
            .flat_map(|(x, t, _)| grid.iter().zip(t).map(move |(&f, &t)| row(&[*x, ghz(f), t])))
            .collect();
        sink.csv("sweep_map.csv", &["axis_value", "frequency_GHz", "transmittance"], &map_rows)?;
        let summary_rows: Vec<Vec<String>> = summary
            .iter()
            .map(|&(x, v, resolved)| vec![fmt_g(x), fmt_g(v), u8::from(resolved).to_string()])
            .collect();
        sink.csv("sweep_summary.csv", &["axis_value", "vrs_GHz", "resolved_flag"], &summary_rows)?;
    }
    if config.output.wants(Format::Json) {
        let mut body = json!({
            "axis": name,
            "resolution_floor_GHz": ghz(floor),
            "summary": summary
                .iter()
                .map(|&(x, v, resolved)| json!({"axis_value": x, "vrs_GHz": v, "resolved": resolved}))
                .collect::<Vec<_>>(),
        });
        if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
            b.extend(e);
        }
        sink.json("sweep_summary.json", &with_provenance(config, body))?;
    }
    for (x, v, resolved) in &summary {
        say!("{name} {}  separation {} GHz{}", fmt_g(*x), fmt_g(*v), if *resolved { "" } else { "  (unresolved)" });
    }
    Ok(())
}

#[derive(Serialize)]
struct ResidualRow {
    #[serde(rename = "temperature_K")]
    temperature: f64,
    #[serde(rename = "observed_GHz")]
    observed: f64,
    #[serde(rename = "simulated_GHz")]
    simulated: f64,
    #[serde(rename = "residual_GHz")]
    residual: f64,
}

pub fn fit(config: &RunConfig, sink: &Sink, data: &Path) -> Result<(), CliError> {
    let points = read_points(data)?;
    let sys = config.spin_system()?;
    let geometry = config.geometry()?;
    let field = working_field(config, &sys, &geometry)?;
    let options = config.fit_options();
    let dataset = VrsDataset::new(points, geometry, config.sample.mode_index, field, options.settings.resolution_floor)
        .map_err(|e| match e {
            CoreError::InvalidParameter { .. } => CliError::Data(e.to_string()),
            other => other.into(),
        })?;
    let censored = dataset.points().iter().filter(|p| dataset.is_censored(p)).count();
    let result = fit_g0(&dataset, &sys, &options)?;
    if !result.converged {
        return Err(CliError::NonConvergence(format!(
            "gradient norm {} after {} iterations",
            result.gradient_norm, result.iterations
        )));
    }

    let residuals: Vec<ResidualRow> = result
        .residuals
        .iter()
        .map(|r| ResidualRow {
            temperature: r.temperature,
            observed: ghz(r.observed),
            simulated: ghz(r.simulated),
            residual: ghz(r.residual),
        })
        .collect();
    let body = json!({
        "data_file": data.display().to_string(),
        "field_T": field,
        "g0_fit_GHz": rad_per_s_to_ghz(result.g0),
        "g0_uncertainty_GHz": result.g0_uncertainty.map(rad_per_s_to_ghz),
        "gamma_GHz": rad_per_s_to_ghz(result.gamma),
        "gamma_free": result.gamma_free,
        "gamma_uncertainty_GHz": result.gamma_uncertainty.map(rad_per_s_to_ghz),
        "residual_norm_GHz": ghz(result.residual_norm),
        "residuals": residuals,
        "censored_rows": censored,
        "convergence": {
            "converged": result.converged,
            "iterations": result.iterations,
            "gradient_norm_GHz": result.gradient_norm,
            "starts": result.starts,
        },
    });
    sink.json("fit.json", &with_provenance(config, body))?;
    say!(
        "g0 = {} GHz{}, gamma = {} GHz, rms residual {} GHz",
        fmt_g(rad_per_s_to_ghz(result.g0)),
        result.g0_uncertainty.map_or(String::new(), |u| format!(" ± {}", fmt_g(rad_per_s_to_ghz(u)))),
        fmt_g(rad_per_s_to_ghz(result.gamma)),
        fmt_g(ghz(result.residual_norm)),
    );
    Ok(())
}

pub fn dicke_compare(config: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let block = config.dicke.as_ref().ok_or_else(|| CliError::Config("dicke-compare needs a [dicke] block".into()))?;
    let geometry = config.geometry()?;
    let omega = match block.frequency_ghz {
        Some(f) => 2.0 * PI * f * 1e9,
        None => 2.0 * PI * geometry.mode_frequency(config.sample.mode_index),
    };
    let hopfield = rad_per_s_to_ghz(hopfield_branches(omega, omega, block.eta * omega)?.splitting());

    let outcomes: Vec<(usize, Result<f64, CliError>)> = block
        .n_spins
        .par_iter()
        .map(|&n| {
            let model = DickeModel { photon_cutoff: block.photon_cutoff, ..DickeModel::resonant(n, omega, block.eta) };
            let split = dicke_eigenspectrum(&model, 3)
                .map_err(CliError::from)
                .and_then(|s| s.first_excited_splitting().ok_or_else(|| CliError::NonConvergence("fewer than three levels".into())))
                .map(|s| clean(rad_per_s_to_ghz(s), rad_per_s_to_ghz(omega)));
            (n, split)
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    let mut table = Vec::new();
    for (n, outcome) in outcomes {
        match outcome {
            Ok(d) => {
                let rel = if hopfield == 0.0 { if d == 0.0 { 0.0 } else { f64::INFINITY } } else { (d - hopfield).abs() / hopfield };
                rows.push(vec![n.to_string(), fmt_g(d), fmt_g(hopfield), fmt_g(rel)]);
                table.push(json!({"N": n, "dicke_splitting_GHz": d, "hopfield_splitting_GHz": hopfield, "rel_diff": rel}));
                say!("N {n:>4}  dicke {} GHz  hopfield {} GHz  rel_diff {}", fmt_g(d), fmt_g(hopfield), fmt_g(rel));
            }
            Err(e) => {
                eprintln!("zpol: N = {n}: {e}");
                rows.push(vec![n.to_string(), "nan".into(), fmt_g(hopfield), "nan".into()]);
                table.push(json!({"N": n, "error": e.to_string(), "hopfield_splitting_GHz": hopfield}));
                failures.push(n);
            }
        }
    }
    if config.output.wants(Format::Csv) {
        sink.csv("dicke_compare.csv", &["N", "dicke_splitting_GHz", "hopfield_splitting_GHz", "rel_diff"], &rows)?;
    }
    if config.output.wants(Format::Json) {
        let body = json!({
            "frequency_GHz": rad_per_s_to_ghz(omega),
            "eta": block.eta,
            "photon_cutoff": block.photon_cutoff,
            "rows": table,
        });
        sink.json("dicke_compare.json", &with_provenance(config, body))?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!("convergence gate failed for N = {failures:?}")))
    }
}

/// Rounds diagonalization noise on a degenerate pair to zero.
fn clean(split: f64, scale: f64) -> f64 {
    if split.abs() < 1e-9 * scale {
        0.0
    } else {
        split
    }
}

pub fn diagnostics(config: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let geometry = config.geometry()?;
    let sys = config.spin_system()?;
    let j = config.sample.mode_index;
    let d = fp_diagnostics(geometry.refractive_index(), geometry.thickness(), j.max(5))?;
    let target = 2.0 * PI * geometry.mode_frequency(j);
    let field = zero_detuning_field(&sys, target, config.analysis_settings().max_field)?;
    let g0 = rad_per_s_to_ghz(g0_closed_form(&sys, target)?);

    let body = json!({
        "free_spectral_range_GHz": ghz(d.free_spectral_range),
        "mode_frequencies_GHz": d.mode_frequencies.iter().map(|&f| ghz(f)).collect::<Vec<_>>(),
        "linewidths_GHz": d.linewidths.iter().map(|&f| ghz(f)).collect::<Vec<_>>(),
        "surface_reflection": d.surface_reflection,
        "mode_index": j,
        "zero_detuning_field_T": field,
        "g0_closed_form_GHz": g0,
        "eta_closed_form": g0 / ghz(geometry.mode_frequency(j)),
    });
    say!("{}", serde_json::to_string_pretty(&body).map_err(|e| CliError::Io(e.to_string()))?);
    if config.output.wants(Format::Json) {
        sink.json("diagnostics.json", &with_provenance(config, body))?;
    }
    Ok(())
}
