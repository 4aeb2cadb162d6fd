//! Desk-scale numerical laboratory for photoacoustic imaging with a rotating
//! illumination/transducer assembly on a disk.
//!
//! The pipeline: light transport through an absorbing medium (screened
//! Poisson solves), acoustic emission and propagation (leapfrog with an
//! absorbing sponge frame), partial boundary measurements restricted by
//! smooth space-time cutoffs per rotation, time-reversal back-propagation,
//! ray-based visibility checks, and iterative recovery of the absorption
//! map from the rotating partial traces.
//!
//! All numerics are generic over the scalar type (`f32`/`f64`) through
//! [`scalar::Scalar`]; the `*64` aliases at the crate root pick `f64`.

pub mod acoustics;
mod disk;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod inverse;
mod linalg;
pub mod optics;
pub mod rays;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid64 = geometry::Grid<f64>;
pub type Field64 = geometry::ScalarField<f64>;
pub type Mask64 = geometry::DomainMask<f64>;
pub type Boundary64 = geometry::BoundaryParametrization<f64>;
pub type Setup64 = geometry::AcquisitionSetup<f64>;
pub type Absorption64 = optics::AbsorptionMap<f64>;
pub type SoundSpeed64 = acoustics::SoundSpeedMap<f64>;
pub type Trace64 = acoustics::BoundaryTrace<f64>;
pub type Model64 = inverse::ForwardModel<f64>;
