//! Workbench for dynamical quadratic exchange algebras.
//!
//! The crate builds the structure matrices `(A, B, C, D)` of a dynamical
//! quadratic algebra, machine-checks every quantum exchange and
//! Yang–Baxter-type relation they must satisfy, fuses representations into
//! spin-chain-like ones via the two coproducts, and verifies the classical
//! r-matrix limit. All core math is generic over the real scalar type; the
//! aliases at the crate root pin the f64 instantiation used in practice.

pub mod algebra;
pub mod classical;
pub mod dynamical;
pub mod error;
pub mod fusion;
pub mod sampling;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::RealScalar;

/// f64 tensor operator.
pub type TensorOp64 = tensor::TensorOperator<f64>;
/// f32 tensor operator.
pub type TensorOp32 = tensor::TensorOperator<f32>;
/// f64 dynamical (λ-dependent, shiftable) operator.
pub type DynamicalOp64 = dynamical::DynamicalOperator<f64>;
/// f64 structure-matrix quadruple.
pub type StructureSet64 = algebra::StructureSet<f64>;
/// f64 Lax representation.
pub type LaxRep64 = algebra::LaxRep<f64>;
// TEMP: aliases restored once the fusion and classical modules land.
// pub type LrPair64 = fusion::LRPair<f64>;
// pub type ClassicalSet64 = classical::ClassicalRSet<f64>;
