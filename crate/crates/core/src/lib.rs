//! QAOA for Max-Cut with a phantom-edge phase operator.
//!
//! The phase operator is generated by `C + αC'`, where `C` is the Max-Cut cost
//! of the target graph and `C'` counts cut edges of an auxiliary ("phantom")
//! edge set. The optimization target is always the original `C`.
//!
//! Modules:
//! - [`graph`]: simple graphs, generators, exact Max-Cut.
//! - [`phantom`]: phantom edge constructions and per-edge environments.
//! - [`analytic`]: closed-form depth-1 expectations.
//! - [`sim`]: dense statevector simulation at arbitrary depth.
//! - [`optimize`]: bounded multistart BFGS, α sweeps and the depth-2 pass.
//!
//! Bit convention shared by every module: vertex `j` is bit `j` of a basis
//! index (vertex 0 is the least significant bit).

pub mod analytic;
pub mod error;
pub mod graph;
pub mod optimize;
pub mod phantom;
pub mod sim;

pub use error::{Error, Result};
pub use graph::Graph;
pub use phantom::{EdgeEnvironment, PhantomGraph, PhantomMethod};
