//! QAOA for MaxCut on a dense statevector simulator.
//!
//! The crate covers the whole pipeline: Erdős–Rényi instance generation,
//! exact and one-exchange classical MaxCut, a little-endian statevector
//! simulator, the depth-p QAOA ansatz, parameter-shift gradients, BFGS and
//! Nelder-Mead optimizers, and an experiment harness that runs and
//! aggregates a graph × optimizer × depth matrix.
//!
//! ```
//! use maxcut_qaoa::graph::Graph;
//! use maxcut_qaoa::optimize::{minimize_qaoa, Method, OptimizerConfig};
//! use maxcut_qaoa::qaoa::QaoaCircuit;
//!
//! let circuit = QaoaCircuit::new(Graph::new(2, [(0, 1)]).unwrap(), 1).unwrap();
//! let result = minimize_qaoa(&circuit, &OptimizerConfig::new(Method::Bfgs)).unwrap();
//! assert!((result.best_value + 1.0).abs() < 1e-5);
//! ```

pub mod cli;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod optimize;
pub mod qaoa;
pub mod rng;
pub mod statevector;

pub use error::{Error, Result};
