//! Two-qubit quantum realization: one qubit per source, Pauli observables,
//! exact Born statistics and a seeded finite-shot sampler.

pub mod measurement;
pub mod mermin_peres;
pub mod ops;
pub mod sampling;
pub mod state;

pub use measurement::{
    behavior_for_state, bell_basis, bloch_behavior, ideal_behavior, ms_basis, setting_distribution, setting_tables,
    Assignment, MeasurementBasis, Setting,
};
pub use mermin_peres::{verify_mermin_peres, MerminPeresReport};
pub use ops::{Operator, Pauli, PauliString};
pub use sampling::{sample_all, sample_setting, Counts, OutcomeCounts};
pub use state::{BlochVector, ProductState, QubitState};
