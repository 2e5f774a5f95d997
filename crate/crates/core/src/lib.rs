//! Spectral workbench for the matrix-valued Friedrichs model
//!
//! ```text
//! (H f)(x) = U(x) f(x) + ∫_{T^ν} K(x, y) f(y) dy   on L²(T^ν, C^n)
//! ```
//!
//! The crate computes essential-spectrum bands, discrete eigenvalues in the
//! gaps, extremal multiplicities of `Δ(x, z) = det(U(x) − z)` at band
//! endpoints, and a finiteness certificate built from those multiplicities
//! and a kernel smoothness estimate. All numerics are generic over
//! [`Real`]; `f64` aliases are exported at the crate root.

pub mod discrete;
pub mod error;
pub mod essential;
pub mod example;
pub mod linalg;
pub mod multiplicity;
pub mod numeric;
pub mod perturbation;
pub mod scalar;
pub mod symbols;
pub mod torus;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use scalar::Real;
pub use torus::{quadrature, torus_distance, FourierTable, TorusGrid, TrigPoly};

pub use discrete::{
    assemble, birman_schwinger_root, birman_schwinger_scan, eig_outside, refine_count, AssembleOptions,
    DiscretizedOperator, RefineReport, SpectralResult, Stability,
};
pub use essential::{compute_bands, delta, gamma_points, verify_global_extremal, Band, BandSet, GapLabel};
pub use example::{build_paper_example, run_example, Convention, ExampleConfig, ExampleReport, ExampleRunOptions};
pub use multiplicity::{
    certify, estimate_multiplicity, find_extremal_set, finiteness_certificate, total_multiplicity, Certificate,
    ExtremalSet, Multiplicity, MultiplicityOptions, Verdict,
};
pub use perturbation::{
    kernel_split, rank_perturbation_experiment, rank_trials, weighted_l2_diagnostic, KernelSplit, L2Verdict,
};
pub use symbols::{
    builtin_kernel, builtin_potential, smoothness_index, validate_symmetry, KernelSymbol, MatrixSymbol,
    Representation, SeparableTerm, SmoothnessIndex,
};

pub type Grid = TorusGrid<f64>;
pub type Matrix = CMatrix<f64>;
pub type Potential = MatrixSymbol<f64>;
pub type Kernel = KernelSymbol<f64>;
pub type Bands = BandSet<f64>;
pub type Operator = DiscretizedOperator<f64>;
pub type Spectrum = SpectralResult<f64>;
pub type Split = KernelSplit<f64>;
