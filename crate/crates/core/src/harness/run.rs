//! Mode dispatch: build the pipeline from a configuration, run one
//! experiment, leave artifacts and a manifest in the output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::DomainMask;
use crate::harness::config::{DataSource, ExperimentConfig, Mode};
use crate::harness::io;
use crate::harness::phantom::{generate_phantom, Bump, PhantomSpec};
use crate::harness::rng::SplitMix64;
use crate::inverse::{
    analyze_kappa, poincare_constant, reconstruct, stability_experiment, LinearizedOperator,
    ReconstructionParams,
};
use crate::optics::AbsorptionMap;
use crate::rays::check_stability;
use crate::Trace64;

#[derive(Debug)]
pub struct RunSummary {
    pub mode: Mode,
    pub out_dir: PathBuf,
    pub wall_ms: u128,
    pub notes: Vec<String>,
}

/// Runs one experiment; everything lands under the configured `out` path.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let out = config
        .out
        .clone()
        .ok_or_else(|| Error::Config("[experiment] out: output directory is required".into()))?;
    fs::create_dir_all(&out)?;
    let mut notes = Vec::new();
    match config.mode {
        Mode::Simulate => run_simulate(config, &out, &mut notes)?,
        Mode::Reconstruct => run_reconstruct(config, &out, &mut notes)?,
        Mode::CheckGeometry => run_check_geometry(config, &out, &mut notes)?,
        Mode::AnalyzeOperator => run_analyze_operator(config, &out, &mut notes)?,
        Mode::StabilitySweep => run_stability_sweep(config, &out, &mut notes)?,
    }
    let wall_ms = started.elapsed().as_millis();
    write_manifest(&out, config, wall_ms)?;
    Ok(RunSummary {
        mode: config.mode,
        out_dir: out,
        wall_ms,
        notes,
    })
}

fn write_manifest(out: &Path, config: &ExperimentConfig, wall_ms: u128) -> Result<()> {
    let mut s = config.canonical();
    s.push_str("\n[manifest]\n");
    s.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("seed = {}\n", config.seed));
    s.push_str(&format!("wall_ms = {wall_ms}\n"));
    fs::write(out.join("manifest.txt"), s)?;
    Ok(())
}

fn add_trace_noise(traces: &mut [Trace64], level: f64, seed: u64) {
    if level <= 0.0 {
        return;
    }
    let mut rng = SplitMix64::new(seed ^ 0x6e6f697365);
    for tr in traces {
        let amp = tr.linf_norm();
        for v in tr.values_mut() {
            *v += level * amp * rng.next_normal();
        }
    }
}

fn simulate_traces(config: &ExperimentConfig, sigma: &AbsorptionMap<f64>) -> Result<Vec<Trace64>> {
    let model = config.build_model()?;
    let mut traces = model.measurements(sigma)?;
    add_trace_noise(&mut traces, config.noise, config.seed);
    Ok(traces)
}

fn run_simulate(config: &ExperimentConfig, out: &Path, notes: &mut Vec<String>) -> Result<()> {
    let model = config.build_model()?;
    let sigma = generate_phantom(&config.build_phantom_spec(), model.mask())?;
    let mut traces = model.measurements(&sigma)?;
    add_trace_noise(&mut traces, config.noise, config.seed);
    for (i, tr) in traces.iter().enumerate() {
        io::write_trace_raw(&out.join(format!("trace_{i:03}.bin")), tr)?;
        io::write_trace_csv(&out.join(format!("trace_{i:03}.csv")), tr)?;
    }
    io::write_field_raw(&out.join("sigma_true.bin"), sigma.field())?;
    io::write_pgm(&out.join("sigma_true.pgm"), sigma.field(), None)?;
    notes.push(format!("rotations = {}", traces.len()));
    let (n_steps, dt) = model.trace_shape();
    notes.push(format!(
        "trace samples = {n_steps} x {} (dt = {dt:.3e})",
        model.boundary().n_points()
    ));
    notes.push(format!("phantom w1inf norm = {:.6e}", sigma.w1inf_norm()));
    if model.mask().omega_node_count() > 0 {
        let c_omega = poincare_constant(model.mask())?;
        notes.push(format!(
            "smallness margin (poincare * w1inf) = {:.6e}",
            c_omega * sigma.w1inf_norm()
        ));
    }
    if config.noise > 0.0 {
        notes.push(format!("additive noise level = {:?}", config.noise));
    }
    Ok(())
}

fn run_check_geometry(
    config: &ExperimentConfig,
    out: &Path,
    notes: &mut Vec<String>,
) -> Result<()> {
    let grid = config.build_grid()?;
    let mask = config.build_mask(&grid)?;
    let setup = config.build_setup()?;
    let c = config.build_sound_speed(&grid)?;
    let param = config.build_boundary(&grid)?;
    let report = check_stability(&setup, &mask, &c, &param, config.n_dirs)?;
    let mut text = String::new();
    text.push_str(&format!("stability_ok = {}\n", report.stability_ok));
    text.push_str(&format!(
        "coverage_fraction = {:.6}\n",
        report.coverage_fraction
    ));
    text.push_str(&format!("uncovered_samples = {}\n", report.uncovered.len()));
    text.push_str(&format!("trapped_rays = {}\n", report.trapped_rays));
    for (j, ok) in report.uniqueness_ok.iter().enumerate() {
        text.push_str(&format!("uniqueness_ok[{j}] = {ok}\n"));
    }
    for s in report.uncovered.iter().take(64) {
        text.push_str(&format!(
            "uncovered: x = ({:.4}, {:.4}) direction = {:.4}\n",
            s.position[0], s.position[1], s.direction_angle
        ));
    }
    fs::write(out.join("visibility.txt"), text)?;
    io::write_pgm(
        &out.join("coverage.pgm"),
        &report.node_coverage,
        Some((0.0, 1.0)),
    )?;
    notes.push(format!("stability_ok = {}", report.stability_ok));
    notes.push(format!("coverage = {:.4}", report.coverage_fraction));
    Ok(())
}

fn run_analyze_operator(
    config: &ExperimentConfig,
    out: &Path,
    notes: &mut Vec<String>,
) -> Result<()> {
    let model = config.build_model()?;
    let background = generate_phantom(&config.build_phantom_spec(), model.mask())?;
    let lin = LinearizedOperator::new(&model, &background)?;
    let mut basis = crate::inverse::NodalBasis::coarse(model.mask(), config.basis_grid)?;
    if config.basis_radius > 0.0 {
        basis = basis.with_radius(config.basis_radius);
    }
    let (kappa, sv) = analyze_kappa(&lin, &basis)?;
    let mut csv = String::from("index,singular_value\n");
    for (i, v) in sv.iter().enumerate() {
        csv.push_str(&format!("{i},{v:.12e}\n"));
    }
    fs::write(out.join("spectrum.csv"), csv)?;
    io::write_matrix_raw(&out.join("kappa.bin"), &kappa)?;
    notes.push(format!("operator size = {0} x {0}", kappa.rows()));
    if let (Some(first), Some(last)) = (sv.first(), sv.last()) {
        notes.push(format!("largest singular value = {first:.6e}"));
        notes.push(format!("smallest singular value = {last:.6e}"));
    }
    Ok(())
}

fn run_reconstruct(config: &ExperimentConfig, out: &Path, notes: &mut Vec<String>) -> Result<()> {
    let model = config.build_model()?;
    let spec = config.build_phantom_spec();
    let has_phantom = !spec.bumps.is_empty() || spec.plateau.is_some();
    let (data, truth) = match &config.data {
        DataSource::SelfGenerated => {
            let sigma_true = generate_phantom(&spec, model.mask())?;
            let traces = simulate_traces(config, &sigma_true)?;
            (traces, Some(sigma_true))
        }
        DataSource::Dir(dir) => {
            let m = model.setup().rotation_count();
            let mut traces = Vec::with_capacity(m);
            for i in 0..m {
                let path = dir.join(format!("trace_{i:03}.bin"));
                traces.push(io::read_trace_raw(&path, model.boundary())?);
            }
            let truth = if has_phantom {
                Some(generate_phantom(&spec, model.mask())?)
            } else {
                None
            };
            (traces, truth)
        }
    };
    let params = ReconstructionParams {
        max_iterations: config.max_iterations,
        step: config.step,
        residual_tol: config.residual_tol,
        weight_floor_fraction: config.weight_floor,
        n_dirs: config.n_dirs,
    };
    let sigma0 = AbsorptionMap::zero(model.mask().clone());
    let state = reconstruct(&model, &data, &sigma0, &params, truth.as_ref())?;

    let mut csv = String::from("iteration,residual,l2_error,h1_error\n");
    for (k, rec) in state.history.iter().enumerate() {
        let l2 = rec.l2_error.map(|v| format!("{v:.9e}")).unwrap_or_default();
        let h1 = rec.h1_error.map(|v| format!("{v:.9e}")).unwrap_or_default();
        csv.push_str(&format!("{k},{:.9e},{l2},{h1}\n", rec.residual));
    }
    fs::write(out.join("history.csv"), csv)?;
    io::write_field_raw(&out.join("sigma_hat.bin"), state.sigma.field())?;
    io::write_pgm(&out.join("sigma_hat.pgm"), state.sigma.field(), None)?;

    notes.push(format!("converged = {}", state.converged));
    notes.push(format!("iterations = {}", state.iterations));
    if let Some(last) = state.history.last() {
        notes.push(format!("final residual = {:.6e}", last.residual));
        if let (Some(l2), Some(truth)) = (last.l2_error, truth.as_ref()) {
            let denom = truth.field().l2_norm();
            if denom > 0.0 {
                notes.push(format!("final relative l2 error = {:.6e}", l2 / denom));
            }
        }
    }
    Ok(())
}

fn run_stability_sweep(
    config: &ExperimentConfig,
    out: &Path,
    notes: &mut Vec<String>,
) -> Result<()> {
    let model = config.build_model()?;
    let mut rng = SplitMix64::new(config.seed);
    let pairs: Vec<_> = (0..config.pairs)
        .map(|_| {
            let a = random_absorption(&mut rng, model.mask(), config.pair_amplitude)?;
            let b = random_absorption(&mut rng, model.mask(), config.pair_amplitude)?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let report = stability_experiment(&model, &pairs)?;

    let mut csv = String::from("pair,delta_h1,data_diff_h1,ratio,background_margin\n");
    for (i, o) in report.outcomes.iter().enumerate() {
        let ratio = o.ratio.map(|r| format!("{r:.9e}")).unwrap_or_default();
        csv.push_str(&format!(
            "{i},{:.9e},{:.9e},{ratio},{:.9e}\n",
            o.delta_h1, o.data_diff_h1, o.background_margin
        ));
    }
    fs::write(out.join("stability.csv"), csv)?;

    let mut text = String::new();
    text.push_str(&format!("pairs_tested = {}\n", report.pairs_tested));
    text.push_str(&format!(
        "poincare_constant = {:.9e}\n",
        report.poincare_constant
    ));
    match report.max_ratio {
        Some(r) => text.push_str(&format!("max_ratio = {r:.9e}\n")),
        None => text.push_str("max_ratio = none\n"),
    }
    text.push_str(&format!(
        "injectivity_violations = {}\n",
        report.injectivity_violations
    ));
    fs::write(out.join("stability.txt"), text)?;

    notes.push(format!("pairs = {}", report.pairs_tested));
    if let Some(r) = report.max_ratio {
        notes.push(format!("max ratio = {r:.6e}"));
    }
    notes.push(format!(
        "injectivity violations = {}",
        report.injectivity_violations
    ));
    Ok(())
}

/// Random smooth absorption map: one or two bumps fitted inside the support.
fn random_absorption(
    rng: &mut SplitMix64,
    mask: &Arc<DomainMask<f64>>,
    amplitude_cap: f64,
) -> Result<AbsorptionMap<f64>> {
    let [ocx, ocy] = mask.omega_center();
    let omega_r = mask.omega_radius();
    let n_bumps = 1 + (rng.next_u64() % 2) as usize;
    let mut bumps = Vec::with_capacity(n_bumps);
    for _ in 0..n_bumps {
        let ang = rng.next_range(0.0, 2.0 * std::f64::consts::PI);
        let off = 0.45 * omega_r * rng.next_f64();
        let center = [ocx + off * ang.cos(), ocy + off * ang.sin()];
        let radius = (omega_r - off) * rng.next_range(0.35, 0.7);
        let amplitude = amplitude_cap * rng.next_range(0.3, 1.0);
        bumps.push(Bump {
            center,
            radius,
            amplitude,
            taper: 0.5 * radius,
        });
    }
    generate_phantom(
        &PhantomSpec {
            bumps,
            plateau: None,
        },
        mask,
    )
}

#[derive(Debug)]
pub struct SelfTestOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Quick numerical sanity checks; used by the CLI `selftest` subcommand.
pub fn selftest() -> Vec<SelfTestOutcome> {
    use crate::geometry::{
        build_cutoff, build_mask, BoundaryFn, BoundaryParametrization, Grid, ScalarField,
    };

    let mut outcomes = Vec::new();
    let mut push = |name: &'static str, pass: bool, detail: String| {
        outcomes.push(SelfTestOutcome { name, pass, detail });
    };

    // constant Dirichlet data must reproduce exactly with zero absorption
    match (|| -> Result<f64> {
        let grid = Grid::<f64>::new(48, 1.0, 0.25)?;
        let param = BoundaryParametrization::for_grid(&grid);
        let boundary = BoundaryFn::constant(&param, 1.0);
        let sol = crate::optics::solve_diffusion(&ScalarField::zeros(&grid), &boundary, 1e-12)?;
        let mask = build_mask(&grid, 0.35, [0.0, 0.0])?;
        let mut worst = 0.0f64;
        for &idx in mask.omega_nodes() {
            worst = worst.max((sol.field.values()[idx] - 1.0).abs());
        }
        Ok(worst)
    })() {
        Ok(worst) => push(
            "diffusion-constant",
            worst < 1e-8,
            format!("max deviation {worst:.3e}"),
        ),
        Err(e) => push("diffusion-constant", false, e.to_string()),
    }

    // zero source propagates to a zero trace
    match (|| -> Result<f64> {
        let grid = Grid::<f64>::new(48, 1.0, 0.25)?;
        let c = crate::acoustics::SoundSpeedMap::uniform(&grid);
        let param = BoundaryParametrization::for_grid(&grid);
        let run = crate::acoustics::propagate(&ScalarField::zeros(&grid), &c, 0.5, &param, 0.5)?;
        Ok(run.trace.linf_norm())
    })() {
        Ok(v) => push("wave-zero", v == 0.0, format!("trace max {v:.3e}")),
        Err(e) => push("wave-zero", false, e.to_string()),
    }

    // cutoff plateau and half-taper values
    match (|| -> Result<(f64, f64)> {
        let setup = ExperimentConfig::default().build_setup()?;
        let chi = build_cutoff(&setup, 0)?;
        let mid = chi.eval(1.0, 0.0);
        let half = chi.eval(2.2 - 0.05, 0.0);
        Ok((mid, half))
    })() {
        Ok((mid, half)) => push(
            "cutoff-shape",
            (mid - 1.0).abs() < 1e-12 && (half - 0.5).abs() < 1e-12,
            format!("plateau {mid:.3}, half-taper {half:.3}"),
        ),
        Err(e) => push("cutoff-shape", false, e.to_string()),
    }

    // Poincare constant of a disk, coarse tolerance
    match (|| -> Result<f64> {
        let grid = Grid::<f64>::from_spacing(1.0 / 48.0, 1.0, 0.25)?;
        let mask = build_mask(&grid, 0.35, [0.0, 0.0])?;
        let c = poincare_constant(&mask)?;
        Ok((c - 0.35 / 2.404825557695773).abs() / (0.35 / 2.404825557695773))
    })() {
        Ok(rel) => push(
            "poincare-disk",
            rel < 0.05,
            format!("relative error {rel:.3e}"),
        ),
        Err(e) => push("poincare-disk", false, e.to_string()),
    }

    // containment validation
    {
        let grid = Grid::<f64>::new(48, 1.0, 0.25).unwrap();
        let bad = build_mask(&grid, 1.0, [0.0, 0.0]).is_err();
        push(
            "mask-containment",
            bad,
            "support touching the circle must be rejected".into(),
        );
    }

    outcomes
}

/// Formats self-test outcomes as stable one-line records.
pub fn format_selftest(
    outcomes: &[SelfTestOutcome],
    mut sink: impl Write,
) -> std::io::Result<bool> {
    let mut all_pass = true;
    for o in outcomes {
        all_pass &= o.pass;
        writeln!(
            sink,
            "{}: {} ({})",
            o.name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        )?;
    }
    Ok(all_pass)
}
