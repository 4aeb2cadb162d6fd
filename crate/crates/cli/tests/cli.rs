//! End-to-end checks of the command line: exit codes, artifact layout,
//! determinism, and the manifest being a runnable configuration.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rotopat"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rotopat_cli_{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// A coarse, fast configuration: tiny grid, two rotations.
fn small_config(out: &Path) -> String {
    format!(
        "
[geometry]
rho = 1.0
grid = 48
margin = 0.25
omega_radius = 0.3

[acquisition]
rotations = 2
transducer_half_width = 0.7853981633974483
illum_center = 3.141592653589793
illum_half_width = 0.39269908169872414

[medium]
phantom = 0.05 0.0 0.12 0.5 0.06

[solver]
tol = 1e-9
max_iterations = 4

[experiment]
seed = 9
out = {}
",
        out.display()
    )
}

#[test]
fn missing_command_and_bad_flags_exit_with_config_code() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["simulate", "--config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["frobnicate", "--config", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["simulate", "--config", "/nonexistent/path.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_are_field_precise() {
    let dir = tmp_dir("badcfg");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "[geometry]\nrho = fast\n").unwrap();
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("[geometry] rho"), "stderr: {stderr}");
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "stdout: {stdout}");
    assert!(stdout.contains("diffusion-constant: PASS"), "{stdout}");
}

#[test]
fn simulate_writes_traces_and_is_deterministic() {
    let dir = tmp_dir("sim");
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, small_config(&out_a)).unwrap();

    let run = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    for name in [
        "trace_000.bin",
        "trace_001.bin",
        "trace_000.csv",
        "sigma_true.bin",
        "sigma_true.pgm",
        "manifest.txt",
    ] {
        assert!(out_a.join(name).exists(), "missing {name}");
    }

    // identical seed and config give bit-identical data artifacts
    let run = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_b)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    for name in ["trace_000.bin", "trace_001.bin", "sigma_true.bin"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "nondeterministic {name}");
    }

    // the manifest is itself a runnable configuration
    let out_c = dir.join("c");
    let rerun = bin()
        .args(["simulate", "--config"])
        .arg(out_a.join("manifest.txt"))
        .arg("--out")
        .arg(&out_c)
        .output()
        .unwrap();
    assert_eq!(
        rerun.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&rerun.stderr)
    );
    let a = std::fs::read(out_a.join("trace_000.bin")).unwrap();
    let c = std::fs::read(out_c.join("trace_000.bin")).unwrap();
    assert_eq!(a, c, "manifest rerun diverged");
}

#[test]
fn reconstruct_runs_on_simulated_output() {
    let dir = tmp_dir("recon");
    let sim_out = dir.join("sim");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, small_config(&sim_out)).unwrap();
    let run = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));

    // point the same geometry at the simulated traces
    let rec_out = dir.join("rec");
    let rec_cfg_text = format!(
        "{}\n[experiment]\ndata = {}\nout = {}\n",
        small_config(&sim_out),
        sim_out.display(),
        rec_out.display()
    );
    let rec_cfg = dir.join("rec.cfg");
    std::fs::write(&rec_cfg, rec_cfg_text).unwrap();
    let run = bin()
        .args(["reconstruct", "--config"])
        .arg(&rec_cfg)
        .output()
        .unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    for name in [
        "history.csv",
        "sigma_hat.bin",
        "sigma_hat.pgm",
        "manifest.txt",
    ] {
        assert!(rec_out.join(name).exists(), "missing {name}");
    }
    let history = std::fs::read_to_string(rec_out.join("history.csv")).unwrap();
    assert!(history.lines().count() >= 2, "history too short: {history}");
}

#[test]
fn simulate_with_zero_phantom_writes_zero_traces() {
    let dir = tmp_dir("zero");
    let out = dir.join("zero");
    // no [medium] phantom entries: the absorption map is identically zero
    let cfg_text = format!(
        "
[geometry]
grid = 48

[acquisition]
rotations = 2
transducer_half_width = 0.7853981633974483

[experiment]
out = {}
",
        out.display()
    );
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, cfg_text).unwrap();
    let run = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    for name in ["trace_000.bin", "trace_001.bin"] {
        let bytes = std::fs::read(out.join(name)).unwrap();
        // header then little-endian f64 payload, all exactly zero
        assert!(bytes.len() > 32);
        for chunk in bytes[32..].chunks_exact(8) {
            assert_eq!(f64::from_le_bytes(chunk.try_into().unwrap()), 0.0);
        }
    }
}

#[test]
fn check_geometry_full_circle_is_stable() {
    let dir = tmp_dir("fullgeom");
    let out = dir.join("geom");
    let cfg_text = format!(
        "
[geometry]
grid = 48
omega_radius = 0.3

[acquisition]
rotations = 1
transducer_half_width = 3.2
illumination = uniform

[solver]
n_dirs = 8

[experiment]
out = {}
",
        out.display()
    );
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, cfg_text).unwrap();
    let run = bin()
        .args(["check-geometry", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let text = std::fs::read_to_string(out.join("visibility.txt")).unwrap();
    assert!(text.contains("stability_ok = true"), "{text}");
    assert!(text.contains("uniqueness_ok[0] = true"), "{text}");
}

#[test]
fn inverse_crime_round_trip_recovers_the_phantom() {
    // simulate, then reconstruct from the written traces; the recovered map
    // must land within ten percent of the truth
    let dir = tmp_dir("crime");
    let sim_out = dir.join("sim");
    let base = format!(
        "
[geometry]
grid = 96

[acquisition]
rotations = 8
transducer_half_width = 0.5235987755982988
illum_center = 3.141592653589793
illum_half_width = 0.39269908169872414

[medium]
phantom = 0.1 0.0 0.15 0.5 0.075

[solver]
tol = 1e-10
max_iterations = 20
"
    );
    let cfg = dir.join("sim.cfg");
    std::fs::write(
        &cfg,
        format!(
            "{base}
[experiment]
seed = 7
out = {}
",
            sim_out.display()
        ),
    )
    .unwrap();
    let run = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );

    let rec_out = dir.join("rec");
    let rec_cfg = dir.join("rec.cfg");
    std::fs::write(
        &rec_cfg,
        format!(
            "{base}
[experiment]
seed = 7
data = {}
out = {}
",
            sim_out.display(),
            rec_out.display()
        ),
    )
    .unwrap();
    let run = bin()
        .args(["reconstruct", "--config"])
        .arg(&rec_cfg)
        .output()
        .unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    let err_line = stdout
        .lines()
        .find(|l| l.contains("final relative l2 error"))
        .unwrap_or_else(|| panic!("no error line in: {stdout}"));
    let value: f64 = err_line.rsplit('=').next().unwrap().trim().parse().unwrap();
    assert!(value <= 0.1, "end-to-end recovery error {value}");
}

#[test]
fn check_geometry_reports_coverage() {
    let dir = tmp_dir("geom");
    let out = dir.join("geom");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, small_config(&out)).unwrap();
    let run = bin()
        .args(["check-geometry", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let text = std::fs::read_to_string(out.join("visibility.txt")).unwrap();
    assert!(text.contains("stability_ok"));
    assert!(text.contains("uniqueness_ok[0]"));
    assert!(out.join("coverage.pgm").exists());
}

#[test]
fn analyze_operator_writes_a_spectrum() {
    let dir = tmp_dir("op");
    let out = dir.join("op");
    let cfg_text = format!("{}\n[solver]\nbasis_grid = 16\n", small_config(&out));
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, cfg_text).unwrap();
    let run = bin()
        .args(["analyze-operator", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let spectrum = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert!(spectrum.starts_with("index,singular_value"));
    assert!(spectrum.lines().count() > 2);
    assert!(out.join("kappa.bin").exists());
}

#[test]
fn stability_sweep_writes_ratios() {
    let dir = tmp_dir("sweep");
    let out = dir.join("sweep");
    let cfg_text = format!(
        "{}\n[experiment]\npairs = 2\nout = {}\n",
        small_config(&out),
        out.display()
    );
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, cfg_text).unwrap();
    let run = bin()
        .args(["stability-sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let csv = std::fs::read_to_string(out.join("stability.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    let txt = std::fs::read_to_string(out.join("stability.txt")).unwrap();
    assert!(txt.contains("injectivity_violations = 0"), "{txt}");
}
