//! Discrete geometry: grid, nodal fields, the measurement circle, node
//! masks, the acquisition description and its cutoff weights.

mod boundary;
mod cutoff;
mod field;
mod grid;
mod mask;
mod setup;

pub use boundary::{BoundaryFn, BoundaryParametrization};
pub use cutoff::{build_cutoff, Cutoff, SampledCutoff};
pub use field::ScalarField;
pub use grid::Grid;
pub use mask::{build_mask, DomainMask};
pub use setup::{circle_distance, AcquisitionSetup, ArcInterval, Illumination};

/// Rotation of a sampled boundary function: the result evaluates the input
/// at `angle + theta` by periodic linear interpolation.
pub fn rotate_boundary_function<T: crate::scalar::Scalar>(
    f: &BoundaryFn<T>,
    theta: T,
) -> BoundaryFn<T> {
    f.rotate(theta)
}
