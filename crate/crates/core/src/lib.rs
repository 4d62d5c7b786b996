//! Decides whether statistics from two independent sources admit a
//! non-bi-contextual hidden-variable model, simulates the two-qubit quantum
//! realization that violates it, and produces sweep and region datasets.

pub mod behavior;
pub mod cli;
pub mod decision;
pub mod error;
pub mod oracle;
pub mod quantum;
pub mod stats;
pub mod sweeps;

pub use behavior::{Behavior, PairDistribution, SettingTables, Tolerances};
pub use decision::{decide_single, CorrelationBounds, DecisionReport, Verdict, WitnessModel};
pub use error::{Error, Result};
