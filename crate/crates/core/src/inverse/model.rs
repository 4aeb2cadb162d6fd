//! The measurement pipeline bundled with its discretization choices.

use std::sync::Arc;

use rayon::prelude::*;

use crate::acoustics::{measure, propagate, BoundaryTrace, SoundSpeedMap};
use crate::error::{Error, Result};
use crate::geometry::{
    build_cutoff, AcquisitionSetup, BoundaryParametrization, DomainMask, SampledCutoff,
};
use crate::optics::{forward_family, AbsorptionMap, DiffusionSolution};
use crate::scalar::{real, Scalar};

/// One acquisition configuration with everything needed to map an
/// absorption map to its cutoff-weighted boundary traces.
#[derive(Clone)]
pub struct ForwardModel<T> {
    mask: Arc<DomainMask<T>>,
    setup: AcquisitionSetup<T>,
    c: SoundSpeedMap<T>,
    param: BoundaryParametrization<T>,
    diffusion_tol: T,
    cfl: T,
    n_steps: usize,
    dt: T,
    cutoffs: Vec<SampledCutoff<T>>,
}

impl<T: Scalar> ForwardModel<T> {
    pub fn new(
        mask: Arc<DomainMask<T>>,
        setup: AcquisitionSetup<T>,
        c: SoundSpeedMap<T>,
        param: BoundaryParametrization<T>,
        diffusion_tol: T,
        cfl: T,
    ) -> Result<Self> {
        if mask.grid() != c.grid() {
            return Err(Error::Shape("mask and sound speed grids differ".into()));
        }
        if (param.rho() - mask.grid().rho()).abs() > mask.grid().rho() * real::<T>(1e-12) {
            return Err(Error::Shape(
                "boundary circle does not match the grid disk".into(),
            ));
        }
        // mirror the step planning of the wave solver
        let stable = cfl * mask.grid().spacing() / c.max_value();
        let steps = (setup.total_time() / stable)
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        let dt = setup.total_time() / real::<T>(steps as f64);
        let n_steps = steps + 1;
        let cutoffs = (0..setup.rotation_count())
            .map(|i| Ok(build_cutoff(&setup, i)?.sample(&param, n_steps, dt)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ForwardModel {
            mask,
            setup,
            c,
            param,
            diffusion_tol,
            cfl,
            n_steps,
            dt,
            cutoffs,
        })
    }

    pub fn mask(&self) -> &Arc<DomainMask<T>> {
        &self.mask
    }

    pub fn setup(&self) -> &AcquisitionSetup<T> {
        &self.setup
    }

    pub fn sound_speed(&self) -> &SoundSpeedMap<T> {
        &self.c
    }

    pub fn boundary(&self) -> &BoundaryParametrization<T> {
        &self.param
    }

    pub fn diffusion_tol(&self) -> T {
        self.diffusion_tol
    }

    pub fn cfl(&self) -> T {
        self.cfl
    }

    pub fn trace_shape(&self) -> (usize, T) {
        (self.n_steps, self.dt)
    }

    pub fn cutoffs(&self) -> &[SampledCutoff<T>] {
        &self.cutoffs
    }

    /// Light transport solutions for the current absorption, one per rotation.
    pub fn illumination_fields(
        &self,
        sigma: &AbsorptionMap<T>,
    ) -> Result<Vec<DiffusionSolution<T>>> {
        forward_family(sigma, &self.setup, &self.param, self.diffusion_tol)
    }

    /// The cutoff-weighted traces generated by `sigma`, given precomputed
    /// light fields. Rotations run concurrently.
    pub fn traces_from_fields(
        &self,
        sigma: &AbsorptionMap<T>,
        fields: &[DiffusionSolution<T>],
    ) -> Result<Vec<BoundaryTrace<T>>> {
        let runs: Vec<Result<BoundaryTrace<T>>> = fields
            .par_iter()
            .enumerate()
            .map(|(i, u_i)| {
                let source = sigma.field().zip_map(&u_i.field, |s, u| s * u)?;
                let run = propagate(
                    &source,
                    &self.c,
                    self.setup.total_time(),
                    &self.param,
                    self.cfl,
                )?;
                measure(&run.trace, &self.cutoffs[i])
            })
            .collect();
        runs.into_iter().collect()
    }

    /// Full pipeline: solve the light transport and propagate each induced
    /// pressure source to its measured trace.
    pub fn measurements(&self, sigma: &AbsorptionMap<T>) -> Result<Vec<BoundaryTrace<T>>> {
        let fields = self.illumination_fields(sigma)?;
        self.traces_from_fields(sigma, &fields)
    }

    pub fn check_data_shape(&self, data: &[BoundaryTrace<T>]) -> Result<()> {
        if data.len() != self.setup.rotation_count() {
            return Err(Error::Shape(format!(
                "expected {} traces, got {}",
                self.setup.rotation_count(),
                data.len()
            )));
        }
        for tr in data {
            if tr.n_steps() != self.n_steps
                || tr.n_points() != self.param.n_points()
                || (tr.dt() - self.dt).abs() > self.dt * real::<T>(1e-10)
            {
                return Err(Error::Shape(
                    "trace lattice does not match the model".into(),
                ));
            }
        }
        Ok(())
    }
}
