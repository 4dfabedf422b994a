//! Simulation of the universal thermalization process and quantum
//! partition-function estimation, checked against exact diagonalization.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimator;
pub mod gibbs;
pub mod hamiltonian;
pub mod linalg;
pub mod oracle;
pub mod qpe;
pub mod seed;
pub mod state;

pub use bounds::{BoundReport, VerifyConfig, VerifyReport, WedgeContour};
pub use error::{Error, Result};
pub use estimator::{EstimateOptions, EstimateReport, EstimationMode, Estimator, RatioEntry, Thermalizer, ZMode};
pub use gibbs::{Amplifier, CoolingSchedule, Cost, PrepareDiagnostics, PrepareOptions, PurifiedGibbs, SchedulePolicy};
pub use hamiltonian::{Boundary, EigenSystem, LocalHamiltonian, LocalTerm, ModelConfig, ShiftPolicy};
pub use oracle::ThermalPoint;
pub use qpe::{EvolutionPair, PerturbationMode, QpeConfig};
pub use state::{CompressedState, FullState, RegisterLayout};
