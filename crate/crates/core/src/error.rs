use thiserror::Error;

use crate::behavior::DisturbanceReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside [-1, 1]")]
    Domain { name: &'static str, value: f64 },

    #[error("invalid probability table: {0}")]
    InvalidDistribution(String),

    #[error("{name} derived from tables is {derived}, but the stored value is {stored}")]
    Inconsistent {
        name: &'static str,
        derived: f64,
        stored: f64,
    },

    #[error("sources are not independent: <{which}> = {mean} but the product of local means is {product}")]
    SourceDependent {
        which: &'static str,
        mean: f64,
        product: f64,
    },

    #[error("no-disturbance check failed: {0}")]
    Disturbance(DisturbanceReport),

    #[error("behavior is bi-contextual; no factorized model exists")]
    NoWitness,

    #[error("witness check failed: {0}")]
    Witness(String),

    #[error("p({observable}={outcome}) is zero but the joint table puts {mass} on it")]
    ZeroMarginal {
        observable: &'static str,
        outcome: i8,
        mass: f64,
    },

    #[error("mixing weight {0} is outside [0, 1]")]
    Weight(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
