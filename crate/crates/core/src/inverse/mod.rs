//! Inversion layer: the measurement pipeline as one object, the linearized
//! operator with its spectrum and symbol-based preconditioner, discrete
//! norms, the fixed-point reconstruction and stability-ratio experiments.

mod matrix;
mod model;
mod norms;
mod operator;
mod reconstruct;
mod stability;

pub use matrix::DenseMatrix;
pub use model::ForwardModel;
pub use norms::{h1_norm_field, h1_norm_trace, poincare_constant};
pub use operator::{
    analyze_kappa, assemble_kappa, kappa_singular_values, symbol_weight, LinearizedOperator,
    NodalBasis, SymbolWeight, KAPPA_NODE_BUDGET,
};
pub use reconstruct::{reconstruct, IterationRecord, ReconstructionParams, ReconstructionState};
pub use stability::{stability_experiment, PairOutcome, StabilityReport};
