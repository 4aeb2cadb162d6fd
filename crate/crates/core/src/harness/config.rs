//! Flat config files: `[section]` headers, `key = value` lines, `#` comments.
//! Unknown keys are rejected with field-precise messages; the canonical
//! echo written to manifests re-parses to the same configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use crate::acoustics::SoundSpeedMap;
use crate::error::{Error, Result};
use crate::geometry::{
    build_mask, AcquisitionSetup, ArcInterval, BoundaryParametrization, DomainMask, Grid,
    Illumination,
};
use crate::harness::phantom::{Bump, PhantomSpec};
use crate::inverse::ForwardModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Reconstruct,
    CheckGeometry,
    AnalyzeOperator,
    StabilitySweep,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "simulate" => Some(Mode::Simulate),
            "reconstruct" => Some(Mode::Reconstruct),
            "check-geometry" => Some(Mode::CheckGeometry),
            "analyze-operator" => Some(Mode::AnalyzeOperator),
            "stability-sweep" => Some(Mode::StabilitySweep),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Reconstruct => "reconstruct",
            Mode::CheckGeometry => "check-geometry",
            Mode::AnalyzeOperator => "analyze-operator",
            Mode::StabilitySweep => "stability-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum GridSize {
    Nodes(usize),
    Spacing(f64),
}

#[derive(Debug, Clone)]
pub enum RotationSpec {
    Count(usize),
    Angles(Vec<f64>),
}

#[derive(Debug, Clone)]
pub enum IllumConfig {
    Uniform {
        amplitude: f64,
    },
    Bump {
        center: f64,
        half_width: f64,
        amplitude: f64,
    },
}

#[derive(Debug, Clone)]
pub enum SpeedConfig {
    Uniform,
    Bump {
        center: [f64; 2],
        width: f64,
        amplitude: f64,
    },
}

#[derive(Debug, Clone)]
pub enum DataSource {
    SelfGenerated,
    Dir(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub rho: f64,
    pub grid: GridSize,
    pub margin: f64,
    pub omega_radius: f64,
    pub omega_center: [f64; 2],
    pub boundary_points: Option<usize>,

    pub rotations: RotationSpec,
    pub transducer_center: f64,
    pub transducer_half_width: f64,
    pub illumination: IllumConfig,
    pub recording_duration: f64,
    pub total_time: f64,
    pub taper_angle: f64,
    pub taper_time: f64,

    pub phantom_bumps: Vec<[f64; 5]>,
    pub plateau: Option<(f64, f64)>,
    pub sound_speed: SpeedConfig,

    pub tol: f64,
    pub cfl: f64,
    pub max_iterations: usize,
    pub step: f64,
    pub residual_tol: f64,
    pub weight_floor: f64,
    pub n_dirs: usize,
    pub basis_grid: usize,
    pub basis_radius: f64,

    pub mode: Mode,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub pairs: usize,
    pub pair_amplitude: f64,
    pub data: DataSource,
    pub noise: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rho: 1.0,
            grid: GridSize::Nodes(128),
            margin: 0.25,
            omega_radius: 0.35,
            omega_center: [0.0, 0.0],
            boundary_points: None,
            rotations: RotationSpec::Count(8),
            transducer_center: 0.0,
            transducer_half_width: PI / 6.0,
            illumination: IllumConfig::Bump {
                center: PI,
                half_width: PI / 8.0,
                amplitude: 1.0,
            },
            recording_duration: 2.2,
            total_time: 2.4,
            taper_angle: PI / 24.0,
            taper_time: 0.1,
            phantom_bumps: Vec::new(),
            plateau: None,
            sound_speed: SpeedConfig::Uniform,
            tol: 1e-10,
            cfl: 0.5,
            max_iterations: 50,
            step: 0.9,
            residual_tol: 1e-3,
            weight_floor: 0.05,
            n_dirs: 32,
            basis_grid: 24,
            basis_radius: 0.0,
            mode: Mode::Simulate,
            seed: 0,
            out: None,
            pairs: 10,
            pair_amplitude: 0.3,
            data: DataSource::SelfGenerated,
            noise: 0.0,
        }
    }
}

struct Raw {
    // section -> key -> list of (line, value)
    sections: BTreeMap<String, Vec<(usize, String, String)>>,
}

fn parse_raw(text: &str) -> Result<Raw> {
    let mut sections: BTreeMap<String, Vec<(usize, String, String)>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::Config(format!(
                    "line {}: unterminated section header",
                    lineno + 1
                )));
            }
            let name = line[1..line.len() - 1].trim().to_string();
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`",
                lineno + 1
            )));
        };
        let Some(section) = current.clone() else {
            return Err(Error::Config(format!(
                "line {}: key before any [section]",
                lineno + 1
            )));
        };
        sections.entry(section).or_default().push((
            lineno + 1,
            key.trim().to_string(),
            value.trim().to_string(),
        ));
    }
    Ok(Raw { sections })
}

fn field_err(section: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("[{section}] {key}: {msg}"))
}

struct SectionReader<'a> {
    name: &'a str,
    entries: Vec<(usize, String, String)>,
    used: Vec<bool>,
}

impl<'a> SectionReader<'a> {
    fn new(raw: &Raw, name: &'a str) -> Self {
        let entries = raw.sections.get(name).cloned().unwrap_or_default();
        let used = vec![false; entries.len()];
        SectionReader {
            name,
            entries,
            used,
        }
    }

    /// Consumes every occurrence of the key; the last value wins, so a
    /// section appended later overrides an earlier one.
    fn take(&mut self, key: &str) -> Option<String> {
        let mut last = None;
        for (i, (_, k, v)) in self.entries.iter().enumerate() {
            if k == key && !self.used[i] {
                self.used[i] = true;
                last = Some(v.clone());
            }
        }
        last
    }

    fn take_all(&mut self, key: &str) -> Vec<String> {
        let mut out = Vec::new();
        for (i, (_, k, v)) in self.entries.iter().enumerate() {
            if k == key && !self.used[i] {
                self.used[i] = true;
                out.push(v.clone());
            }
        }
        out
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| field_err(self.name, key, format!("expected a number, got '{v}'"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| field_err(self.name, key, format!("expected an integer, got '{v}'"))),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| field_err(self.name, key, format!("expected an integer, got '{v}'"))),
        }
    }

    fn floats(&self, key: &str, v: &str, n: usize) -> Result<Vec<f64>> {
        let parts: Vec<&str> = v.split_whitespace().collect();
        if parts.len() != n {
            return Err(field_err(
                self.name,
                key,
                format!("expected {n} numbers, got '{v}'"),
            ));
        }
        parts
            .iter()
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| field_err(self.name, key, format!("'{p}' is not a number")))
            })
            .collect()
    }

    fn finish(&self) -> Result<()> {
        for (i, (line, k, _)) in self.entries.iter().enumerate() {
            if !self.used[i] {
                return Err(Error::Config(format!(
                    "[{}] {k}: unknown key (line {line})",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw = parse_raw(text)?;
        for name in raw.sections.keys() {
            if ![
                "geometry",
                "acquisition",
                "medium",
                "solver",
                "experiment",
                "manifest",
            ]
            .contains(&name.as_str())
            {
                return Err(Error::Config(format!("unknown section [{name}]")));
            }
        }
        let mut cfg = ExperimentConfig::default();

        let mut geo = SectionReader::new(&raw, "geometry");
        cfg.rho = geo.f64("rho", cfg.rho)?;
        match (geo.take("grid"), geo.take("spacing")) {
            (Some(_), Some(_)) => {
                return Err(field_err(
                    "geometry",
                    "grid",
                    "give either `grid` or `spacing`, not both",
                ))
            }
            (Some(v), None) => {
                cfg.grid = GridSize::Nodes(v.parse().map_err(|_| {
                    field_err(
                        "geometry",
                        "grid",
                        format!("expected an integer, got '{v}'"),
                    )
                })?)
            }
            (None, Some(v)) => {
                cfg.grid = GridSize::Spacing(v.parse().map_err(|_| {
                    field_err(
                        "geometry",
                        "spacing",
                        format!("expected a number, got '{v}'"),
                    )
                })?)
            }
            (None, None) => {}
        }
        cfg.margin = geo.f64("margin", cfg.margin)?;
        cfg.omega_radius = geo.f64("omega_radius", cfg.omega_radius)?;
        if let Some(v) = geo.take("omega_center") {
            let xy = geo.floats("omega_center", &v, 2)?;
            cfg.omega_center = [xy[0], xy[1]];
        }
        if let Some(v) = geo.take("boundary_points") {
            if v != "auto" {
                cfg.boundary_points = Some(v.parse().map_err(|_| {
                    field_err(
                        "geometry",
                        "boundary_points",
                        format!("expected `auto` or an integer, got '{v}'"),
                    )
                })?);
            }
        }
        geo.finish()?;

        let mut acq = SectionReader::new(&raw, "acquisition");
        match (acq.take("rotations"), acq.take("angles")) {
            (Some(_), Some(_)) => {
                return Err(field_err(
                    "acquisition",
                    "rotations",
                    "give either `rotations` or `angles`, not both",
                ))
            }
            (Some(v), None) => {
                cfg.rotations = RotationSpec::Count(v.parse().map_err(|_| {
                    field_err(
                        "acquisition",
                        "rotations",
                        format!("expected an integer, got '{v}'"),
                    )
                })?)
            }
            (None, Some(v)) => {
                let angles: Result<Vec<f64>> = v
                    .split_whitespace()
                    .map(|p| {
                        p.parse::<f64>().map_err(|_| {
                            field_err("acquisition", "angles", format!("'{p}' is not a number"))
                        })
                    })
                    .collect();
                cfg.rotations = RotationSpec::Angles(angles?);
            }
            (None, None) => {}
        }
        cfg.transducer_center = acq.f64("transducer_center", cfg.transducer_center)?;
        cfg.transducer_half_width = acq.f64("transducer_half_width", cfg.transducer_half_width)?;
        let illum_kind = acq.take("illumination").unwrap_or_else(|| "bump".into());
        let illum_center = acq.f64("illum_center", PI)?;
        let illum_hw = acq.f64("illum_half_width", PI / 8.0)?;
        let illum_amp = acq.f64("illum_amplitude", 1.0)?;
        cfg.illumination = match illum_kind.as_str() {
            "uniform" => IllumConfig::Uniform {
                amplitude: illum_amp,
            },
            "bump" => IllumConfig::Bump {
                center: illum_center,
                half_width: illum_hw,
                amplitude: illum_amp,
            },
            other => {
                return Err(field_err(
                    "acquisition",
                    "illumination",
                    format!("expected `bump` or `uniform`, got '{other}'"),
                ))
            }
        };
        cfg.recording_duration = acq.f64("recording_duration", cfg.recording_duration)?;
        cfg.total_time = acq.f64("total_time", cfg.total_time)?;
        cfg.taper_angle = acq.f64("taper_angle", cfg.taper_angle)?;
        cfg.taper_time = acq.f64("taper_time", cfg.taper_time)?;
        acq.finish()?;

        let mut med = SectionReader::new(&raw, "medium");
        for v in med.take_all("phantom") {
            let vals = med.floats("phantom", &v, 5)?;
            cfg.phantom_bumps
                .push([vals[0], vals[1], vals[2], vals[3], vals[4]]);
        }
        if let Some(v) = med.take("plateau") {
            let vals = med.floats("plateau", &v, 2)?;
            cfg.plateau = Some((vals[0], vals[1]));
        }
        if let Some(v) = med.take("sound_speed") {
            let parts: Vec<&str> = v.split_whitespace().collect();
            cfg.sound_speed = match parts.first().copied() {
                Some("uniform") if parts.len() == 1 => SpeedConfig::Uniform,
                Some("bump") if parts.len() == 5 => {
                    let nums = med.floats("sound_speed", &parts[1..].join(" "), 4)?;
                    SpeedConfig::Bump {
                        center: [nums[0], nums[1]],
                        width: nums[2],
                        amplitude: nums[3],
                    }
                }
                _ => {
                    return Err(field_err(
                        "medium",
                        "sound_speed",
                        format!("expected `uniform` or `bump cx cy width amplitude`, got '{v}'"),
                    ))
                }
            };
        }
        med.finish()?;

        let mut sol = SectionReader::new(&raw, "solver");
        cfg.tol = sol.f64("tol", cfg.tol)?;
        cfg.cfl = sol.f64("cfl", cfg.cfl)?;
        cfg.max_iterations = sol.usize("max_iterations", cfg.max_iterations)?;
        cfg.step = sol.f64("step", cfg.step)?;
        cfg.residual_tol = sol.f64("residual_tol", cfg.residual_tol)?;
        cfg.weight_floor = sol.f64("weight_floor", cfg.weight_floor)?;
        cfg.n_dirs = sol.usize("n_dirs", cfg.n_dirs)?;
        cfg.basis_grid = sol.usize("basis_grid", cfg.basis_grid)?;
        cfg.basis_radius = sol.f64("basis_radius", cfg.basis_radius)?;
        sol.finish()?;

        let mut exp = SectionReader::new(&raw, "experiment");
        if let Some(v) = exp.take("mode") {
            cfg.mode = Mode::parse(&v).ok_or_else(|| {
                field_err(
                    "experiment",
                    "mode",
                    format!("expected one of simulate|reconstruct|check-geometry|analyze-operator|stability-sweep, got '{v}'"),
                )
            })?;
        }
        cfg.seed = exp.u64("seed", cfg.seed)?;
        if let Some(v) = exp.take("out") {
            cfg.out = Some(PathBuf::from(v));
        }
        cfg.pairs = exp.usize("pairs", cfg.pairs)?;
        cfg.pair_amplitude = exp.f64("amplitude", cfg.pair_amplitude)?;
        if let Some(v) = exp.take("data") {
            cfg.data = if v == "self" {
                DataSource::SelfGenerated
            } else {
                DataSource::Dir(PathBuf::from(v))
            };
        }
        cfg.noise = exp.f64("noise", cfg.noise)?;
        exp.finish()?;

        // [manifest] entries are metadata from a previous run; ignored

        Ok(cfg)
    }

    /// Canonical echo: parses back to the same configuration.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        s.push_str("[geometry]\n");
        s.push_str(&format!("rho = {:?}\n", self.rho));
        match self.grid {
            GridSize::Nodes(n) => s.push_str(&format!("grid = {n}\n")),
            GridSize::Spacing(h) => s.push_str(&format!("spacing = {h:?}\n")),
        }
        s.push_str(&format!("margin = {:?}\n", self.margin));
        s.push_str(&format!("omega_radius = {:?}\n", self.omega_radius));
        s.push_str(&format!(
            "omega_center = {:?} {:?}\n",
            self.omega_center[0], self.omega_center[1]
        ));
        match self.boundary_points {
            Some(n) => s.push_str(&format!("boundary_points = {n}\n")),
            None => s.push_str("boundary_points = auto\n"),
        }
        s.push_str("\n[acquisition]\n");
        match &self.rotations {
            RotationSpec::Count(m) => s.push_str(&format!("rotations = {m}\n")),
            RotationSpec::Angles(a) => {
                let list: Vec<String> = a.iter().map(|v| format!("{v:?}")).collect();
                s.push_str(&format!("angles = {}\n", list.join(" ")));
            }
        }
        s.push_str(&format!(
            "transducer_center = {:?}\n",
            self.transducer_center
        ));
        s.push_str(&format!(
            "transducer_half_width = {:?}\n",
            self.transducer_half_width
        ));
        match &self.illumination {
            IllumConfig::Uniform { amplitude } => {
                s.push_str("illumination = uniform\n");
                s.push_str(&format!("illum_amplitude = {amplitude:?}\n"));
            }
            IllumConfig::Bump {
                center,
                half_width,
                amplitude,
            } => {
                s.push_str("illumination = bump\n");
                s.push_str(&format!("illum_center = {center:?}\n"));
                s.push_str(&format!("illum_half_width = {half_width:?}\n"));
                s.push_str(&format!("illum_amplitude = {amplitude:?}\n"));
            }
        }
        s.push_str(&format!(
            "recording_duration = {:?}\n",
            self.recording_duration
        ));
        s.push_str(&format!("total_time = {:?}\n", self.total_time));
        s.push_str(&format!("taper_angle = {:?}\n", self.taper_angle));
        s.push_str(&format!("taper_time = {:?}\n", self.taper_time));
        s.push_str("\n[medium]\n");
        for b in &self.phantom_bumps {
            s.push_str(&format!(
                "phantom = {:?} {:?} {:?} {:?} {:?}\n",
                b[0], b[1], b[2], b[3], b[4]
            ));
        }
        if let Some((amp, taper)) = self.plateau {
            s.push_str(&format!("plateau = {amp:?} {taper:?}\n"));
        }
        match &self.sound_speed {
            SpeedConfig::Uniform => s.push_str("sound_speed = uniform\n"),
            SpeedConfig::Bump {
                center,
                width,
                amplitude,
            } => s.push_str(&format!(
                "sound_speed = bump {:?} {:?} {width:?} {amplitude:?}\n",
                center[0], center[1]
            )),
        }
        s.push_str("\n[solver]\n");
        s.push_str(&format!("tol = {:?}\n", self.tol));
        s.push_str(&format!("cfl = {:?}\n", self.cfl));
        s.push_str(&format!("max_iterations = {}\n", self.max_iterations));
        s.push_str(&format!("step = {:?}\n", self.step));
        s.push_str(&format!("residual_tol = {:?}\n", self.residual_tol));
        s.push_str(&format!("weight_floor = {:?}\n", self.weight_floor));
        s.push_str(&format!("n_dirs = {}\n", self.n_dirs));
        s.push_str(&format!("basis_grid = {}\n", self.basis_grid));
        s.push_str(&format!("basis_radius = {:?}\n", self.basis_radius));
        s.push_str("\n[experiment]\n");
        s.push_str(&format!("mode = {}\n", self.mode.name()));
        s.push_str(&format!("seed = {}\n", self.seed));
        if let Some(out) = &self.out {
            s.push_str(&format!("out = {}\n", out.display()));
        }
        s.push_str(&format!("pairs = {}\n", self.pairs));
        s.push_str(&format!("amplitude = {:?}\n", self.pair_amplitude));
        match &self.data {
            DataSource::SelfGenerated => s.push_str("data = self\n"),
            DataSource::Dir(d) => s.push_str(&format!("data = {}\n", d.display())),
        }
        s.push_str(&format!("noise = {:?}\n", self.noise));
        s
    }

    pub fn build_grid(&self) -> Result<Grid<f64>> {
        match self.grid {
            GridSize::Nodes(n) => Grid::new(n, self.rho, self.margin),
            GridSize::Spacing(h) => Grid::from_spacing(h, self.rho, self.margin),
        }
    }

    pub fn build_mask(&self, grid: &Grid<f64>) -> Result<DomainMask<f64>> {
        build_mask(grid, self.omega_radius, self.omega_center)
    }

    pub fn build_boundary(&self, grid: &Grid<f64>) -> Result<BoundaryParametrization<f64>> {
        match self.boundary_points {
            Some(n) => BoundaryParametrization::new(n, self.rho),
            None => Ok(BoundaryParametrization::for_grid(grid)),
        }
    }

    pub fn build_setup(&self) -> Result<AcquisitionSetup<f64>> {
        let rotations = match &self.rotations {
            RotationSpec::Count(m) => AcquisitionSetup::equispaced_rotations(*m),
            RotationSpec::Angles(a) => a.clone(),
        };
        let illumination = match &self.illumination {
            IllumConfig::Uniform { amplitude } => Illumination::Uniform {
                amplitude: *amplitude,
            },
            IllumConfig::Bump {
                center,
                half_width,
                amplitude,
            } => Illumination::CosineBump {
                arc: ArcInterval::new(*center, *half_width)?,
                amplitude: *amplitude,
            },
        };
        AcquisitionSetup::new(
            illumination,
            ArcInterval::new(self.transducer_center, self.transducer_half_width)?,
            rotations,
            self.recording_duration,
            self.total_time,
            self.taper_angle,
            self.taper_time,
        )
    }

    pub fn build_sound_speed(&self, grid: &Grid<f64>) -> Result<SoundSpeedMap<f64>> {
        match &self.sound_speed {
            SpeedConfig::Uniform => Ok(SoundSpeedMap::uniform(grid)),
            SpeedConfig::Bump {
                center,
                width,
                amplitude,
            } => {
                let [cx, cy] = *center;
                let w2 = width * width;
                let rho = self.rho;
                SoundSpeedMap::from_fn(grid, move |x, y| {
                    // taper the perturbation to zero before the circle
                    let r = (x * x + y * y).sqrt();
                    let fade = if r < 0.8 * rho {
                        1.0
                    } else if r < rho {
                        let u = (r - 0.8 * rho) / (0.2 * rho);
                        0.5 * (1.0 + (PI * u).cos())
                    } else {
                        0.0
                    };
                    1.0 + amplitude
                        * fade
                        * (-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / w2).exp()
                })
            }
        }
    }

    pub fn build_phantom_spec(&self) -> PhantomSpec<f64> {
        PhantomSpec {
            bumps: self
                .phantom_bumps
                .iter()
                .map(|b| Bump {
                    center: [b[0], b[1]],
                    radius: b[2],
                    amplitude: b[3],
                    taper: b[4],
                })
                .collect(),
            plateau: self.plateau,
        }
    }

    /// Assembles the full measurement pipeline for this configuration.
    pub fn build_model(&self) -> Result<ForwardModel<f64>> {
        let grid = self.build_grid()?;
        let mask = Arc::new(self.build_mask(&grid)?);
        let setup = self.build_setup()?;
        let c = self.build_sound_speed(&grid)?;
        let param = self.build_boundary(&grid)?;
        ForwardModel::new(mask, setup, c, param, self.tol, self.cfl)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
[geometry]
rho = 1.0
grid = 64
margin = 0.25
omega_radius = 0.3
omega_center = 0.05 -0.1

[acquisition]
rotations = 4
transducer_half_width = 0.52

[medium]
phantom = 0.0 0.0 0.15 0.5 0.075
phantom = 0.1 0.05 0.08 0.3 0.04

[solver]
tol = 1e-9

[experiment]
mode = simulate
seed = 3
out = /tmp/run1
";

    #[test]
    fn parses_and_builds() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.phantom_bumps.len(), 2);
        assert!(matches!(cfg.mode, Mode::Simulate));
        let grid = cfg.build_grid().unwrap();
        assert_eq!(grid.n_per_side(), 64);
        cfg.build_mask(&grid).unwrap();
        cfg.build_setup().unwrap();
    }

    #[test]
    fn unknown_key_is_field_precise() {
        let bad = "[geometry]\nrho = 1.0\nshoe_size = 42\n";
        let err = ExperimentConfig::parse(bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[geometry] shoe_size"), "{msg}");
    }

    #[test]
    fn bad_number_is_field_precise() {
        let bad = "[solver]\ncfl = fast\n";
        let msg = ExperimentConfig::parse(bad).unwrap_err().to_string();
        assert!(msg.contains("[solver] cfl"), "{msg}");
    }

    #[test]
    fn canonical_round_trips() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        let echo = cfg.canonical();
        let cfg2 = ExperimentConfig::parse(&echo).unwrap();
        assert_eq!(echo, cfg2.canonical());
    }

    #[test]
    fn manifest_section_is_ignored() {
        let text = format!("{SAMPLE}\n[manifest]\nversion = 0.1.0\nwall_ms = 12\n");
        assert!(ExperimentConfig::parse(&text).is_ok());
    }
}
