//! Orthogonal wavelets on Vilenkin groups built from N-valid trees.
//!
//! The pipeline runs tree → mask → support set → refinable function →
//! refinement coefficients → wavelet bank → finite transform. Every stage is
//! generic over a [`Scalar`] field: the exact cyclotomic field
//! [`Cyclotomic`], in which all identities hold with zero error, or
//! `Complex<F>` for floating point work. The aliases below fix the two
//! common choices.

pub mod bundle;
pub mod cyclotomic;
pub mod error;
pub mod grid;
pub mod group;
pub mod io;
pub mod mask;
pub mod pipeline;
pub mod refinable;
pub mod report;
pub mod scalar;
pub mod transform;
pub mod tree;
pub mod wavelet;

pub use num_complex::Complex64;

pub use bundle::{CoefficientBundle, MraBundle, WaveletBundle};
pub use cyclotomic::Cyclotomic;
pub use error::{Error, Result};
pub use grid::{CharTable, StepFunction};
pub use group::{CharCoset, Character, GroupElement, GroupParams, RootScalar};
pub use mask::{solve_coefficients, CoefficientTable, Mask};
pub use pipeline::{diagnose_tree, Pipeline};
pub use refinable::{is_elementary, support_set, support_set_bruteforce, ElementarySet, PhiTable};
pub use report::{Check, Report};
pub use scalar::Scalar;
pub use transform::{analyze, energy_report, projection, synthesize, Analysis, FiniteSignal};
pub use tree::{
    allowed_windows, build_nvalid, enumerate_nvalid, tree_from_support, validate_nvalid, PTree,
    Strategy, Window,
};
pub use wavelet::{verify_wavelets, WaveletBank};

pub type ExactPipeline = Pipeline<Cyclotomic>;
pub type ComplexPipeline = Pipeline<Complex64>;
pub type ExactPhi = PhiTable<Cyclotomic>;
pub type ComplexPhi = PhiTable<Complex64>;
pub type ExactCoefficients = CoefficientTable<Cyclotomic>;
pub type ComplexCoefficients = CoefficientTable<Complex64>;
pub type ExactBank = WaveletBank<Cyclotomic>;
pub type ComplexBank = WaveletBank<Complex64>;
pub type ExactSignal = FiniteSignal<Cyclotomic>;
pub type ComplexSignal = FiniteSignal<Complex64>;
