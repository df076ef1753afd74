//! Quantum autoencoder for multivariate time-series anomaly detection.
//!
//! A statevector simulator drives a layered rotation/CNOT circuit whose
//! angles are affine in the input window. The summed probability of the
//! trash qubits reading |0⟩ is both the training objective and the anomaly
//! score. A dense classical autoencoder serves as the baseline, and both
//! share the windowing pipeline, trainer and evaluation code.
//!
//! Data-parallel batch work runs on rayon when the `parallel` feature is
//! enabled (the default); [`Execution::Sequential`] forces the serial path.

pub mod classical_ae;
pub mod error;
pub mod eval;
pub mod exec;
pub mod model_io;
pub mod pipeline;
pub mod qae;
pub mod report;
pub mod simulator;
pub mod train;

pub use classical_ae::{AeConfig, AeModel};
pub use error::{Error, Result};
pub use exec::Execution;
pub use qae::{QaeConfig, QaeModel};
pub use train::{Model, TrainConfig};
