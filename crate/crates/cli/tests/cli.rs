use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shadow_cli::config::{FunctionSpec, SchemeSpec};
use shadow_cli::{emit_plot_data, read_plot_data, ExperimentConfig};
use shadow_core::{meyer_diffraction, Scheme, Window};

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/sqrt2_chain.json")
}

fn shadow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadow")).args(args).output().expect("binary runs")
}

fn run_with(cmd: &str, config: &Path, out: &Path) -> Output {
    shadow(&[cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, cfg.to_json()).unwrap();
    p
}

fn peak_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn bundled_peaks_have_trivial_intensity_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with("peaks", &bundled(), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = peak_rows(&dir.path().join("peaks.csv"));
    let trivial = rows.iter().find(|r| r[1].parse::<f64>().unwrap() == 0.0).unwrap();
    let intensity: f64 = trivial[3].parse().unwrap();
    assert!((intensity - 0.5).abs() <= 1e-6);
    let plot = read_plot_data(&dir.path().join("peaks_plot.dat")).unwrap();
    assert_eq!(plot.len(), rows.len());
    assert!(plot.windows(2).all(|w| w[0].0 <= w[1].0));
    assert!(dir.path().join("peaks.json").exists());
}

#[test]
fn empty_window_gives_zero_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(&bundled()).unwrap();
    cfg.window = Window::Empty { dim: 1 };
    let o = run_with("peaks", &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    for row in peak_rows(&dir.path().join("peaks.csv")) {
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{ \"scheme\": ").unwrap();
    let o = run_with("peaks", &p, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = run_with("peaks", &dir.path().join("missing.json"), dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(&bundled()).unwrap();
    cfg.scales = vec![200.0];
    cfg.tolerances.consistency = 1e-12;
    let o = run_with("consistency", &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn runtime_error_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(&bundled()).unwrap();
    // a planar internal function on a scheme with one-dimensional internal space
    let planar: FunctionSpec = serde_json::from_str(r#"{"kind":"gaussian","sigma":0.4,"dim":2}"#).unwrap();
    cfg.test_functions = vec![FunctionSpec::gaussian(0.4), planar];
    let o = run_with("verify-poisson", &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn wrong_command_for_scheme_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(&bundled()).unwrap();
    cfg.scheme = SchemeSpec::Heisenberg;
    let o = run_with("peaks", &write_config(dir.path(), &cfg), dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::load(&bundled()).unwrap();
    cfg.scales = vec![300.0, 600.0];
    let p = write_config(a.path(), &cfg);
    for cmd in ["peaks", "autocorr"] {
        assert_eq!(run_with(cmd, &p, a.path()).status.code(), Some(0));
        assert_eq!(run_with(cmd, &p, b.path()).status.code(), Some(0));
    }
    for f in ["peaks.csv", "peaks_plot.dat", "autocorr.csv", "model_set.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sequence_diagnostic_and_poisson_pass() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["diagnose-sequence", "verify-poisson"] {
        let o = shadow(&[cmd, "--config", bundled().to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--seed", "7", "--threads", "1"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stdout));
    }
    let csv = std::fs::read_to_string(dir.path().join("sequence.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,abs_transform,bound"));
}

#[test]
fn plot_data_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = meyer_diffraction(&Scheme::sqrt2_chain(), &Window::interval(-1.0, 1.0), 6.0).unwrap();
    let p = dir.path().join("plot.dat");
    emit_plot_data(&m, &p).unwrap();
    let rows = read_plot_data(&p).unwrap();
    assert_eq!(rows.len(), m.atoms.len());
    let mut expected: Vec<(f64, f64)> = m.atoms.iter().map(|a| (a.xi1()[0], a.intensity)).collect();
    expected.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (r, e) in rows.iter().zip(&expected) {
        assert!((r.0 - e.0).abs() <= 1e-12 && (r.1 - e.1).abs() <= 1e-12);
    }

    let empty = shadow_core::PurePointMeasure { atoms: vec![], dual_radius: 1.0, tail_estimate: 0.0, covolume: 1.0 };
    emit_plot_data(&empty, &p).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 1);
    assert!(read_plot_data(&p).unwrap().is_empty());
}
