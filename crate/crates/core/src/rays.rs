//! Ray propagation in the travel-time metric of the sound speed, exit
//! times through the circle, and the coverage checks that decide whether a
//! configuration sees every singularity and every point of the support.

use rayon::prelude::*;

use crate::acoustics::SoundSpeedMap;
use crate::error::{Error, Result};
use crate::geometry::{
    AcquisitionSetup, ArcInterval, BoundaryParametrization, DomainMask, ScalarField,
};
use crate::scalar::{real, Scalar};

/// Number of shot directions used when estimating point-to-boundary travel
/// times for a non-constant speed.
const DISTANCE_FAN: usize = 256;

/// Where and when a ray leaves the disk.
#[derive(Debug, Clone, Copy)]
pub struct RayExit<T> {
    /// Travel time in the metric scaled by the sound speed.
    pub time: T,
    pub point: [T; 2],
    /// Polar angle of the exit point on the circle.
    pub angle: T,
}

/// A traced ray: sampled path and the exits in both directions.
/// A missing exit means the ray was still inside the disk at the time cap.
#[derive(Debug, Clone)]
pub struct Ray<T> {
    pub start: [T; 2],
    pub direction: [T; 2],
    pub path: Vec<[T; 2]>,
    pub exit_plus: Option<RayExit<T>>,
    pub exit_minus: Option<RayExit<T>>,
}

/// Shared tables for tracing many rays through one speed map.
pub struct RayTracer<T> {
    c2: ScalarField<T>,
    gx: ScalarField<T>,
    gy: ScalarField<T>,
    rho: T,
    step: T,
    time_cap: T,
}

type State<T> = [T; 4]; // x, y, xi_1, xi_2

impl<T: Scalar> RayTracer<T> {
    pub fn new(c: &SoundSpeedMap<T>) -> Self {
        let grid = *c.grid();
        let c2 = c.field().map(|v| v * v);
        let n = grid.n_per_side();
        let h2 = real::<T>(2.0) * grid.spacing();
        let mut gx = ScalarField::zeros(&grid);
        let mut gy = ScalarField::zeros(&grid);
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                gx.set(i, j, (c2.at(i + 1, j) - c2.at(i - 1, j)) / h2);
                gy.set(i, j, (c2.at(i, j + 1) - c2.at(i, j - 1)) / h2);
            }
        }
        RayTracer {
            c2,
            gx,
            gy,
            rho: grid.rho(),
            step: grid.spacing() / (real::<T>(2.0) * c.max_value()),
            time_cap: real::<T>(10.0) * grid.rho() / c.floor(),
        }
    }

    #[inline]
    fn rhs(&self, s: &State<T>) -> State<T> {
        let c2 = self.c2.sample(s[0], s[1]);
        let xi2 = s[2] * s[2] + s[3] * s[3];
        let half = real::<T>(0.5);
        [
            c2 * s[2],
            c2 * s[3],
            -half * xi2 * self.gx.sample(s[0], s[1]),
            -half * xi2 * self.gy.sample(s[0], s[1]),
        ]
    }

    fn rk4(&self, s: &State<T>, dt: T) -> State<T> {
        let half = real::<T>(0.5);
        let sixth = T::one() / real::<T>(6.0);
        let two = real::<T>(2.0);
        let k1 = self.rhs(s);
        let s2 = [
            s[0] + half * dt * k1[0],
            s[1] + half * dt * k1[1],
            s[2] + half * dt * k1[2],
            s[3] + half * dt * k1[3],
        ];
        let k2 = self.rhs(&s2);
        let s3 = [
            s[0] + half * dt * k2[0],
            s[1] + half * dt * k2[1],
            s[2] + half * dt * k2[2],
            s[3] + half * dt * k2[3],
        ];
        let k3 = self.rhs(&s3);
        let s4 = [
            s[0] + dt * k3[0],
            s[1] + dt * k3[1],
            s[2] + dt * k3[2],
            s[3] + dt * k3[3],
        ];
        let k4 = self.rhs(&s4);
        [
            s[0] + dt * sixth * (k1[0] + two * k2[0] + two * k3[0] + k4[0]),
            s[1] + dt * sixth * (k1[1] + two * k2[1] + two * k3[1] + k4[1]),
            s[2] + dt * sixth * (k1[2] + two * k2[2] + two * k3[2] + k4[2]),
            s[3] + dt * sixth * (k1[3] + two * k2[3] + two * k3[3] + k4[3]),
        ]
    }

    #[inline]
    fn outside(&self, s: &State<T>) -> bool {
        (s[0] * s[0] + s[1] * s[1]).sqrt() > self.rho
    }

    /// Integrates forward from `start` with unit direction `dir` until the
    /// ray leaves the disk; `None` when the time cap is reached first.
    /// The initial covector is scaled onto the unit-energy shell so the flow
    /// parameter is the travel time of the metric.
    pub fn shoot(
        &self,
        start: [T; 2],
        dir: [T; 2],
        mut path: Option<&mut Vec<[T; 2]>>,
    ) -> Option<RayExit<T>> {
        let c_here = self.c2.sample(start[0], start[1]).sqrt();
        let norm = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
        let mut s: State<T> = [
            start[0],
            start[1],
            dir[0] / (norm * c_here),
            dir[1] / (norm * c_here),
        ];
        let mut t = T::zero();
        if let Some(p) = path.as_deref_mut() {
            p.push([s[0], s[1]]);
        }
        while t < self.time_cap {
            let next = self.rk4(&s, self.step);
            if self.outside(&next) {
                let (tau, exit) = self.bisect(&s, self.step);
                let angle = exit[1].atan2(exit[0]);
                if let Some(p) = path.as_deref_mut() {
                    p.push(exit);
                }
                return Some(RayExit {
                    time: t + tau,
                    point: exit,
                    angle,
                });
            }
            s = next;
            t += self.step;
            if let Some(p) = path.as_deref_mut() {
                p.push([s[0], s[1]]);
            }
        }
        None
    }

    /// Bisection of the crossing sub-step to a time tolerance of 1e-8.
    fn bisect(&self, from: &State<T>, dt: T) -> (T, [T; 2]) {
        let mut lo = T::zero();
        let mut hi = dt;
        let tol = real::<T>(1e-8);
        let iters = 64usize;
        for _ in 0..iters {
            if hi - lo <= tol {
                break;
            }
            let mid = (lo + hi) * real::<T>(0.5);
            let s = self.rk4(from, mid);
            if self.outside(&s) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let s = self.rk4(from, hi);
        (hi, [s[0], s[1]])
    }

    pub fn trace(&self, start: [T; 2], direction: [T; 2]) -> Result<Ray<T>> {
        let norm = (direction[0] * direction[0] + direction[1] * direction[1]).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Geometry(
                "ray direction must be a nonzero vector".into(),
            ));
        }
        let r = (start[0] * start[0] + start[1] * start[1]).sqrt();
        if r > self.rho * (T::one() + real::<T>(1e-9)) {
            return Err(Error::Geometry(
                "ray start must lie in the closed disk".into(),
            ));
        }
        let dir = [direction[0] / norm, direction[1] / norm];
        let mut fwd = Vec::new();
        let exit_plus = self.shoot(start, dir, Some(&mut fwd));
        let mut bwd = Vec::new();
        let exit_minus = self.shoot(start, [-dir[0], -dir[1]], Some(&mut bwd));
        bwd.reverse();
        bwd.pop(); // drop the duplicated start
        bwd.extend(fwd);
        Ok(Ray {
            start,
            direction: dir,
            path: bwd,
            exit_plus,
            exit_minus,
        })
    }
}

/// Traces a single ray through the speed map (both directions).
pub fn trace_ray<T: Scalar>(
    start: [T; 2],
    direction: [T; 2],
    c: &SoundSpeedMap<T>,
) -> Result<Ray<T>> {
    RayTracer::new(c).trace(start, direction)
}

/// Point-coverage check: for each rotation, does every support node have a
/// boundary witness on the rotated arc within its recording duration?
/// Distances use the exact chord for a constant speed and first arrivals
/// over a direction fan otherwise (an upper bound, hence conservative).
pub fn check_uniqueness<T: Scalar>(
    setup: &AcquisitionSetup<T>,
    mask: &DomainMask<T>,
    c: &SoundSpeedMap<T>,
    param: &BoundaryParametrization<T>,
) -> Vec<bool> {
    let m = setup.rotation_count();
    let arcs: Vec<ArcInterval<T>> = (0..m).map(|i| setup.arc_for(i)).collect();
    let nodes = mask.omega_nodes();
    let grid = mask.grid();

    let per_node: Vec<Vec<bool>> = if c.is_uniform() {
        let speed = c.floor();
        let witnesses: Vec<Vec<[T; 2]>> = arcs
            .iter()
            .map(|arc| {
                (0..param.n_points())
                    .filter(|&k| arc.contains(param.angle(k)))
                    .map(|k| param.point(k))
                    .collect()
            })
            .collect();
        nodes
            .par_iter()
            .map(|&idx| {
                let [x, y] = grid.node_pos(idx);
                witnesses
                    .iter()
                    .enumerate()
                    .map(|(j, ws)| {
                        ws.iter().any(|w| {
                            let d =
                                ((x - w[0]) * (x - w[0]) + (y - w[1]) * (y - w[1])).sqrt() / speed;
                            d < setup.duration_at(arcs[j].center)
                        })
                    })
                    .collect()
            })
            .collect()
    } else {
        let tracer = RayTracer::new(c);
        nodes
            .par_iter()
            .map(|&idx| {
                let p = grid.node_pos(idx);
                let exits: Vec<RayExit<T>> = (0..DISTANCE_FAN)
                    .filter_map(|d| {
                        let a = real::<T>(2.0) * T::PI() * real::<T>(d as f64)
                            / real::<T>(DISTANCE_FAN as f64);
                        tracer.shoot(p, [a.cos(), a.sin()], None)
                    })
                    .collect();
                arcs.iter()
                    .map(|arc| {
                        exits
                            .iter()
                            .any(|e| arc.contains(e.angle) && e.time < setup.duration_at(e.angle))
                    })
                    .collect()
            })
            .collect()
    };

    (0..m).map(|j| per_node.iter().all(|row| row[j])).collect()
}

/// One wavefront sample that fails the visibility condition.
#[derive(Debug, Clone, Copy)]
pub struct UncoveredSample<T> {
    pub position: [T; 2],
    pub direction_angle: T,
}

/// Outcome of the coverage checks for one configuration.
#[derive(Debug, Clone)]
pub struct VisibilityReport<T> {
    pub uniqueness_ok: Vec<bool>,
    pub stability_ok: bool,
    pub uncovered: Vec<UncoveredSample<T>>,
    pub coverage_fraction: T,
    /// Fraction of covered directions per grid node (zero off the support).
    pub node_coverage: ScalarField<T>,
    pub trapped_rays: usize,
}

/// Singularity-coverage check: every support node and fan direction must
/// send at least one of its two exits through a shrunken arc before the
/// (taper-shortened) recording duration runs out. The shrinking matches the
/// cutoff plateaus, so a passing sample sits where the weights equal one.
pub fn check_stability<T: Scalar>(
    setup: &AcquisitionSetup<T>,
    mask: &DomainMask<T>,
    c: &SoundSpeedMap<T>,
    param: &BoundaryParametrization<T>,
    n_dirs: usize,
) -> Result<VisibilityReport<T>> {
    if n_dirs < 8 {
        return Err(Error::Setup(format!(
            "need at least 8 fan directions, got {n_dirs}"
        )));
    }
    let arcs: Vec<ArcInterval<T>> = (0..setup.rotation_count())
        .filter_map(|i| setup.plateau_arc_for(i))
        .collect();
    let t_limit = setup.recording_duration() - setup.taper_time();
    let tracer = RayTracer::new(c);
    let grid = mask.grid();
    let nodes = mask.omega_nodes();

    struct NodeOutcome<T> {
        idx: usize,
        covered: usize,
        misses: Vec<T>, // direction angles
        trapped: usize,
    }

    let outcomes: Vec<NodeOutcome<T>> = nodes
        .par_iter()
        .map(|&idx| {
            let p = grid.node_pos(idx);
            let mut covered = 0;
            let mut misses = Vec::new();
            let mut trapped = 0;
            for d in 0..n_dirs {
                let a = real::<T>(2.0) * T::PI() * real::<T>(d as f64) / real::<T>(n_dirs as f64);
                let dir = [a.cos(), a.sin()];
                let plus = tracer.shoot(p, dir, None);
                let minus = tracer.shoot(p, [-dir[0], -dir[1]], None);
                if plus.is_none() {
                    trapped += 1;
                }
                if minus.is_none() {
                    trapped += 1;
                }
                let seen = |e: &Option<RayExit<T>>| {
                    e.as_ref()
                        .map(|e| e.time < t_limit && arcs.iter().any(|arc| arc.contains(e.angle)))
                        .unwrap_or(false)
                };
                if seen(&plus) || seen(&minus) {
                    covered += 1;
                } else {
                    misses.push(a);
                }
            }
            NodeOutcome {
                idx,
                covered,
                misses,
                trapped,
            }
        })
        .collect();

    let mut node_coverage = ScalarField::zeros(grid);
    let mut uncovered = Vec::new();
    let mut total_covered = 0usize;
    let mut trapped_rays = 0usize;
    for o in &outcomes {
        node_coverage.values_mut()[o.idx] = real::<T>(o.covered as f64 / n_dirs as f64);
        total_covered += o.covered;
        trapped_rays += o.trapped;
        let pos = grid.node_pos(o.idx);
        for &a in &o.misses {
            uncovered.push(UncoveredSample {
                position: pos,
                direction_angle: a,
            });
        }
    }
    let total = nodes.len() * n_dirs;
    let coverage_fraction = if total == 0 {
        T::one()
    } else {
        real::<T>(total_covered as f64 / total as f64)
    };
    Ok(VisibilityReport {
        uniqueness_ok: check_uniqueness(setup, mask, c, param),
        stability_ok: uncovered.is_empty(),
        uncovered,
        coverage_fraction,
        node_coverage,
        trapped_rays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mask, Grid, Illumination};
    use std::f64::consts::PI;

    fn grid() -> Grid<f64> {
        Grid::new(64, 1.0, 0.25).unwrap()
    }

    #[test]
    fn central_ray_exits_at_rho_in_unit_speed() {
        let c = SoundSpeedMap::uniform(&grid());
        let ray = trace_ray([0.0, 0.0], [0.3, 0.4], &c).unwrap();
        let p = ray.exit_plus.unwrap();
        let m = ray.exit_minus.unwrap();
        assert!((p.time - 1.0).abs() < 1e-7);
        assert!((m.time - 1.0).abs() < 1e-7);
        // antipodal exits along the shot direction
        assert!((p.point[0] - 0.6).abs() < 1e-6 && (p.point[1] - 0.8).abs() < 1e-6);
        assert!((m.point[0] + 0.6).abs() < 1e-6 && (m.point[1] + 0.8).abs() < 1e-6);
    }

    #[test]
    fn exit_times_match_chord_lengths_for_straight_rays() {
        let c = SoundSpeedMap::uniform(&grid());
        let x = [0.3, -0.2];
        let dir = [1.0, 0.7];
        let ray = trace_ray(x, dir, &c).unwrap();
        // analytic line-circle intersection
        let n = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
        let e = [dir[0] / n, dir[1] / n];
        let b = x[0] * e[0] + x[1] * e[1];
        let disc = (b * b - (x[0] * x[0] + x[1] * x[1]) + 1.0).sqrt();
        let t_plus = -b + disc;
        let t_minus = b + disc;
        assert!((ray.exit_plus.unwrap().time - t_plus).abs() < 1e-7);
        assert!((ray.exit_minus.unwrap().time - t_minus).abs() < 1e-7);
    }

    #[test]
    fn forward_backward_symmetry() {
        let g = grid();
        let c =
            SoundSpeedMap::from_fn(&g, |x, y| 1.0 + 0.2 * (-(x * x + y * y) / 0.1).exp()).unwrap();
        let tracer = RayTracer::new(&c);
        let r1 = tracer.trace([0.2, 0.1], [0.6, -0.8]).unwrap();
        let r2 = tracer.trace([0.2, 0.1], [-0.6, 0.8]).unwrap();
        let t1 = r1.exit_plus.unwrap().time;
        let t2 = r2.exit_minus.unwrap().time;
        assert!((t1 - t2).abs() < 1e-12);
    }

    fn setup_with_arc(hw: f64, m: usize, s: f64) -> AcquisitionSetup<f64> {
        AcquisitionSetup::new(
            Illumination::Uniform { amplitude: 1.0 },
            ArcInterval::new(0.0, hw).unwrap(),
            AcquisitionSetup::equispaced_rotations(m),
            s,
            s + 0.2,
            (hw / 4.0).min(PI / 24.0),
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn full_circle_long_recording_sees_everything() {
        let g = grid();
        let mask = build_mask(&g, 0.35, [0.0, 0.0]).unwrap();
        let c = SoundSpeedMap::uniform(&g);
        let param = BoundaryParametrization::for_grid(&g);
        let setup = setup_with_arc(PI, 1, 2.2);
        assert!(check_uniqueness(&setup, &mask, &c, &param)
            .iter()
            .all(|&b| b));
        let report = check_stability(&setup, &mask, &c, &param, 16).unwrap();
        assert!(report.stability_ok);
        assert_eq!(report.coverage_fraction, 1.0);
        assert_eq!(report.trapped_rays, 0);
    }

    #[test]
    fn tiny_arc_fails_stability() {
        let g = grid();
        let mask = build_mask(&g, 0.35, [0.0, 0.0]).unwrap();
        let c = SoundSpeedMap::uniform(&g);
        let param = BoundaryParametrization::for_grid(&g);
        let setup = setup_with_arc(PI / 100.0, 1, 2.2);
        let report = check_stability(&setup, &mask, &c, &param, 16).unwrap();
        assert!(!report.stability_ok);
        assert!(report.coverage_fraction < 1.0);
        assert!(!report.uncovered.is_empty());
    }

    #[test]
    fn zero_recording_duration_fails_uniqueness() {
        let g = grid();
        let mask = build_mask(&g, 0.35, [0.0, 0.0]).unwrap();
        let c = SoundSpeedMap::uniform(&g);
        let param = BoundaryParametrization::for_grid(&g);
        // duration must be positive for a valid setup; use one shorter than
        // the distance from the support to the arc instead
        let setup = setup_with_arc(PI / 6.0, 1, 0.3);
        let ok = check_uniqueness(&setup, &mask, &c, &param);
        assert!(ok.iter().all(|&b| !b));
    }

    #[test]
    fn coverage_is_monotone_in_the_recording_duration() {
        let g = grid();
        let mask = build_mask(&g, 0.3, [0.0, 0.0]).unwrap();
        let c = SoundSpeedMap::uniform(&g);
        let param = BoundaryParametrization::for_grid(&g);
        let mut last = -1.0;
        for s in [1.0, 1.4, 1.8, 2.2] {
            let setup = setup_with_arc(PI / 4.0, 4, s);
            let rep = check_stability(&setup, &mask, &c, &param, 16).unwrap();
            assert!(rep.coverage_fraction >= last);
            last = rep.coverage_fraction;
        }
    }
}
