use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SAMPLE_ONE: &str = r#"
[sample]
refractive_index = 3.8
thickness = 180e-6
mode_index = 1

[spin]
g_factor = 2.0
lattice_constant = 1.238e-9
ions_per_cell = 24

[physics]
g0_ghz = 47.5
gamma_ghz = 80
temperature = 1.5
field = 7.8
field_range = { start = 7.0, stop = 10.0, points = 31 }
temperature_range = [1.5, 5, 10, 15, 20, 25, 30, 40, 50, 100, 200, 300]

[grid]
f_min_ghz = 50
f_max_ghz = 450
points = 4001

[dicke]
n_spins = [1, 16]
eta = 0.05
"#;

const FSR_GHZ: f64 = 219.146_533_625_731;

struct Run {
    dir: TempDir,
}

impl Run {
    fn new(config: &str) -> Self {
        let dir = TempDir::new().unwrap();
        std::fs::write(dir.path().join("run.toml"), config).unwrap();
        Self { dir }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn zpol(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_zpol"))
            .arg("--config")
            .arg(self.dir.path().join("run.toml"))
            .arg("--out")
            .arg(self.out())
            .args(args)
            .env_remove("ZPOL_OUT_DIR")
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> Output {
        let out = self.zpol(args);
        assert!(out.status.success(), "zpol {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
        out
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.out().join(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }

    fn write(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column(text: &str, k: usize) -> Vec<f64> {
    csv_rows(text).iter().map(|r| r[k].parse().unwrap()).collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn bare_slab_peaks_sit_on_the_fabry_perot_comb() {
    let run = Run::new(&SAMPLE_ONE.replace("temperature = 1.5", "temperature = 1.5\nchi_enabled = false"));
    run.ok(&["spectrum"]);
    let csv = run.read("spectrum.csv");
    assert_eq!(
        csv.lines().next().unwrap(),
        "frequency_GHz,transmittance,reflectance,Im_chi,Re_mu_r,Im_mu_r"
    );
    assert_eq!(csv.lines().count(), 4002);
    let peaks = run.json("spectrum.json")["peaks_GHz"].as_array().unwrap().clone();
    assert_eq!(peaks.len(), 2);
    for (k, p) in peaks.iter().enumerate() {
        let f = p.as_f64().unwrap();
        assert!((f - (k + 1) as f64 * FSR_GHZ).abs() < 0.05, "peak {f} GHz");
    }
    assert!(column(&csv, 3).iter().all(|&x| x == 0.0));
    assert!(column(&csv, 4).iter().all(|&x| x == 1.0));
}

#[test]
fn empty_frequency_range_is_a_config_error_with_a_line() {
    let run = Run::new(&SAMPLE_ONE.replace("f_max_ghz = 450", "f_max_ghz = 50"));
    let out = run.zpol(&["spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    let line = SAMPLE_ONE.lines().position(|l| l.starts_with("f_max_ghz")).unwrap() + 1;
    assert!(stderr(&out).contains(&format!("line {line}")), "{}", stderr(&out));
    assert!(!run.out().join("spectrum.csv").exists());
}

#[test]
fn misspelled_key_is_a_config_error() {
    let run = Run::new(&SAMPLE_ONE.replace("gamma_ghz", "gama_ghz"));
    let out = run.zpol(&["spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gama_ghz"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let run = Run::new(SAMPLE_ONE);
    std::fs::write(run.out(), "not a directory").unwrap();
    assert_eq!(run.zpol(&["diagnostics"]).status.code(), Some(5));
}

#[test]
fn sample_one_spectrum_shows_a_resolved_splitting() {
    let run = Run::new(SAMPLE_ONE);
    run.ok(&["spectrum"]);
    let s = &run.json("spectrum.json")["splitting"];
    assert_eq!(s["kind"], "resolved");
    let peaks: Vec<f64> = s["peaks_GHz"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(peaks[0] < FSR_GHZ && peaks[1] > FSR_GHZ);
    // Lossless branches at this detuning are 97 GHz apart; damping only widens the peak gap.
    let vrs = s["vrs_GHz"].as_f64().unwrap();
    assert!((95.0..135.0).contains(&vrs), "{vrs}");
}

#[test]
fn field_sweep_finds_the_anticrossing() {
    let run = Run::new(SAMPLE_ONE);
    run.ok(&["sweep", "--axis", "field"]);
    let summary = run.read("sweep_summary.csv");
    assert_eq!(summary.lines().next().unwrap(), "axis_value,vrs_GHz,resolved_flag");
    assert_eq!(csv_rows(&summary).len(), 31);
    assert_eq!(csv_rows(&run.read("sweep_map.csv")).len(), 31 * 4001);

    let json = run.json("sweep_summary.json");
    let min = &json["minimum_separation"];
    let field = min["field_T"].as_f64().unwrap();
    // The bare crossing is at 7.83 T; ultrastrong coupling pushes the gap minimum up to the
    // point where the lossless branches are closest (8.53 T for these parameters).
    assert!((8.3..8.9).contains(&field), "{field}");
    let epr: Vec<f64> = json["bare_epr_GHz"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(epr[8] < FSR_GHZ && epr[9] > FSR_GHZ);
}

#[test]
fn temperature_sweep_summary_is_nonincreasing() {
    let run = Run::new(SAMPLE_ONE);
    run.ok(&["sweep", "--axis", "temperature"]);
    let summary = run.read("sweep_summary.csv");
    let vrs = column(&summary, 1);
    assert_eq!(vrs.len(), 12);
    assert!(vrs.windows(2).all(|w| w[1] <= w[0]), "{vrs:?}");
    assert!(vrs[0] > vrs[7]);
    let flags: Vec<String> = csv_rows(&summary).iter().map(|r| r[2].clone()).collect();
    assert_eq!(flags[0], "1");
    assert_eq!(flags[11], "0");
}

#[test]
fn single_point_range_gives_one_row() {
    let run = Run::new(&SAMPLE_ONE.replace(
        "field_range = { start = 7.0, stop = 10.0, points = 31 }",
        "field_range = { start = 7.8, stop = 7.8, points = 1 }",
    ));
    run.ok(&["sweep", "--axis", "field"]);
    assert_eq!(csv_rows(&run.read("sweep_summary.csv")).len(), 1);
    assert_eq!(csv_rows(&run.read("sweep_map.csv")).len(), 4001);
}

#[test]
fn sweep_without_a_range_is_a_config_error() {
    let run = Run::new(&SAMPLE_ONE.replace("temperature_range = [", "# ["));
    assert_eq!(run.zpol(&["sweep", "--axis", "temperature"]).status.code(), Some(2));
}

fn synthetic_dataset(run: &Run) -> PathBuf {
    run.ok(&["sweep", "--axis", "temperature"]);
    let mut body = String::from("temperature_K,vrs_GHz\n");
    for r in csv_rows(&run.read("sweep_summary.csv")) {
        body.push_str(&format!("{},{}\n", r[0], r[1]));
    }
    run.write("vrs.csv", &body)
}

#[test]
fn fit_recovers_the_simulated_coupling() {
    let run = Run::new(&SAMPLE_ONE.replace("[dicke]", "[fit]\ng0_initial_ghz = 30\n\n[dicke]"));
    let data = synthetic_dataset(&run);
    run.ok(&["fit", "--data", data.to_str().unwrap()]);
    let fit = run.json("fit.json");
    let g0 = fit["g0_fit_GHz"].as_f64().unwrap();
    assert!((g0 - 47.5).abs() < 0.5, "{g0}");
    assert_eq!(fit["convergence"]["converged"], true);
    let censored = fit["censored_rows"].as_u64().unwrap() as usize;
    assert_eq!(censored, 4);
    assert_eq!(fit["residuals"].as_array().unwrap().len(), 12 - censored);
}

#[test]
fn malformed_row_is_reported_by_number() {
    let run = Run::new(SAMPLE_ONE);
    let data = run.write("bad.csv", "temperature_K,vrs_GHz\n1.5,124.8\n10,114.2\n25,eighty\n");
    let out = run.zpol(&["fit", "--data", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("row 3"), "{}", stderr(&out));
}

#[test]
fn all_censored_dataset_is_a_data_error() {
    let run = Run::new(SAMPLE_ONE);
    let data = run.write("low.csv", "temperature_K,vrs_GHz,vrs_err_GHz\n100,40,2\n200,20,2\n300,0,2\n");
    let out = run.zpol(&["fit", "--data", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("no uncensored rows"), "{}", stderr(&out));
}

#[test]
fn missing_dataset_is_an_io_error() {
    let run = Run::new(SAMPLE_ONE);
    assert_eq!(run.zpol(&["fit", "--data", "/nonexistent/vrs.csv"]).status.code(), Some(5));
}

#[test]
fn dicke_comparison_rows() {
    let run = Run::new(SAMPLE_ONE);
    run.ok(&["dicke-compare"]);
    let csv = run.read("dicke_compare.csv");
    assert_eq!(csv.lines().next().unwrap(), "N,dicke_splitting_GHz,hopfield_splitting_GHz,rel_diff");
    let rows = csv_rows(&csv);
    assert_eq!(rows[1][0], "16");
    assert!(rows[1][3].parse::<f64>().unwrap() < 0.005);

    let zero = Run::new(&SAMPLE_ONE.replace("eta = 0.05", "eta = 0.0").replace("[1, 16]", "[3]"));
    zero.ok(&["dicke-compare"]);
    assert_eq!(csv_rows(&zero.read("dicke_compare.csv"))[0], ["3", "0", "0", "0"]);
}

#[test]
fn single_spin_dicke_splitting_is_twice_the_coupling() {
    let run = Run::new(&SAMPLE_ONE.replace("eta = 0.05", "eta = 0.01\nfrequency_ghz = 200").replace("[1, 16]", "[1]"));
    run.ok(&["dicke-compare"]);
    let d = column(&run.read("dicke_compare.csv"), 1)[0];
    assert!((d / 4.0 - 1.0).abs() < 0.01, "{d}");
}

#[test]
fn dicke_gate_failure_is_reported_per_row() {
    // 41 × 50 fits under the dimension cap, the doubled cutoff does not.
    let run = Run::new(&SAMPLE_ONE.replace("eta = 0.05", "eta = 0.05\nphoton_cutoff = 50").replace("[1, 16]", "[1, 40]"));
    let out = run.zpol(&["dicke-compare"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("N = 40"), "{}", stderr(&out));
    let rows = csv_rows(&run.read("dicke_compare.csv"));
    assert_ne!(rows[0][1], "nan");
    assert_eq!(rows[1][1], "nan");
}

#[test]
fn identical_inputs_give_identical_files() {
    let a = Run::new(SAMPLE_ONE);
    let b = Run::new(SAMPLE_ONE);
    for run in [&a, &b] {
        run.ok(&["spectrum"]);
        run.ok(&["--threads", "2", "sweep", "--axis", "temperature"]);
    }
    for name in ["spectrum.csv", "sweep_map.csv", "sweep_summary.csv"] {
        assert_eq!(a.read(name), b.read(name), "{name}");
    }
}

#[test]
fn config_echo_reparses_to_the_same_run() {
    let run = Run::new(SAMPLE_ONE);
    run.ok(&["spectrum"]);
    let echo = run.json("spectrum.json")["config"].clone();
    let toml_text = toml::to_string(&echo).unwrap();

    let again = Run::new(&toml_text);
    again.ok(&["spectrum"]);
    assert_eq!(again.json("spectrum.json")["config"], echo);
    assert_eq!(again.read("spectrum.csv"), run.read("spectrum.csv"));
    let constants = run.json("spectrum.json")["constants"].clone();
    let names: Vec<&str> = constants.as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"mu_0") && names.contains(&"h"));
}

#[test]
fn output_directory_precedence() {
    let run = Run::new(&SAMPLE_ONE.replace("[dicke]", "[output]\ndir = \"from_config\"\n\n[dicke]"));
    let env_dir = run.dir.path().join("from_env");
    let bin = env!("CARGO_BIN_EXE_zpol");
    let config = run.dir.path().join("run.toml");

    let status = Command::new(bin)
        .current_dir(run.dir.path())
        .env("ZPOL_OUT_DIR", &env_dir)
        .args(["--config", config.to_str().unwrap(), "diagnostics"])
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(env_dir.join("diagnostics.json").exists());

    let status = Command::new(bin)
        .current_dir(run.dir.path())
        .env_remove("ZPOL_OUT_DIR")
        .args(["--config", config.to_str().unwrap(), "diagnostics"])
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(Path::new(&run.dir.path().join("from_config/diagnostics.json")).exists());

    run.ok(&["diagnostics"]);
    assert!(run.out().join("diagnostics.json").exists());
}

#[test]
fn diagnostics_report_the_comb_and_the_crossing() {
    let run = Run::new(SAMPLE_ONE);
    let out = run.ok(&["diagnostics"]);
    let d: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((d["free_spectral_range_GHz"].as_f64().unwrap() - FSR_GHZ).abs() < 1e-9);
    assert!((d["zero_detuning_field_T"].as_f64().unwrap() - 7.83).abs() < 0.01);
    assert_eq!(d["mode_frequencies_GHz"].as_array().unwrap().len(), 5);
}

#[test]
fn starved_fit_exits_with_the_convergence_code() {
    let run = Run::new(&SAMPLE_ONE.replace("[dicke]", "[fit]\nmax_iterations = 2\n\n[dicke]"));
    let data = synthetic_dataset(&run);
    let out = run.zpol(&["fit", "--data", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(!run.out().join("fit.json").exists());
}

#[test]
fn shipped_configs_are_valid() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["sample1.toml", "sample2.toml"] {
        let run = Run::new(&std::fs::read_to_string(root.join(name)).unwrap());
        run.ok(&["diagnostics"]);
    }
}
