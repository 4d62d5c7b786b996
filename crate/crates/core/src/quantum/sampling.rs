//! Finite-shot sampling from exact Born probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::measurement::{setting_distribution, Assignment, Setting};
use super::state::ProductState;
use crate::behavior::{Outcome, PairDistribution, CELLS};
use crate::error::{Error, Result};

/// Outcome counts over the four `(±1, ±1)` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    #[serde(rename = "++")]
    pub pp: u64,
    #[serde(rename = "+-")]
    pub pm: u64,
    #[serde(rename = "-+")]
    pub mp: u64,
    #[serde(rename = "--")]
    pub mm: u64,
}

impl Counts {
    pub fn from_array(a: [u64; 4]) -> Self {
        Self {
            pp: a[0],
            pm: a[1],
            mp: a[2],
            mm: a[3],
        }
    }

    pub fn as_array(&self) -> [u64; 4] {
        [self.pp, self.pm, self.mp, self.mm]
    }

    pub fn total(&self) -> u64 {
        self.as_array().iter().sum()
    }

    pub fn record(&mut self, q: Outcome, r: Outcome) {
        match (q, r) {
            (Outcome::Plus, Outcome::Plus) => self.pp += 1,
            (Outcome::Plus, Outcome::Minus) => self.pm += 1,
            (Outcome::Minus, Outcome::Plus) => self.mp += 1,
            (Outcome::Minus, Outcome::Minus) => self.mm += 1,
        }
    }
}

/// Counts of one setting; for the joint setting the cells are `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub setting: Setting,
    pub shots: u64,
    pub counts: Counts,
}

/// Generator for one setting: seeded with `seed + setting index` so each
/// setting draws from its own stream.
pub fn setting_rng(seed: u64, setting: Setting) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(setting.index()))
}

/// Draws `shots` i.i.d. outcomes from `d`.
pub fn sample_distribution<R: Rng>(d: &PairDistribution, shots: u64, rng: &mut R) -> Counts {
    let cells = d.cells();
    let mut cumulative = [0.0; 4];
    let mut acc = 0.0;
    for (k, p) in cells.iter().enumerate() {
        acc += p;
        cumulative[k] = acc;
    }
    let mut counts = Counts::default();
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        // Zero-probability cells are never chosen, even at u = 0.
        let k = (0..4)
            .find(|&k| u < cumulative[k] && cells[k] > 0.0)
            .unwrap_or_else(|| (0..4).rev().find(|&k| cells[k] > 0.0).expect("mass"));
        let (q, r) = CELLS[k];
        counts.record(q, r);
    }
    counts
}

pub fn sample_setting(state: &ProductState, setting: Setting, shots: u64, seed: u64) -> Result<OutcomeCounts> {
    sample_setting_with(state, setting, shots, seed, Assignment::Standard)
}

pub fn sample_setting_with(
    state: &ProductState,
    setting: Setting,
    shots: u64,
    seed: u64,
    assignment: Assignment,
) -> Result<OutcomeCounts> {
    if shots == 0 {
        return Err(Error::Input("shots must be at least 1".into()));
    }
    let d = setting_distribution(state, setting, assignment)?;
    let counts = sample_distribution(&d, shots, &mut setting_rng(seed, setting));
    Ok(OutcomeCounts { setting, shots, counts })
}

/// All three settings with the same shot count.
pub fn sample_all(state: &ProductState, shots: u64, seed: u64) -> Result<[OutcomeCounts; 3]> {
    Ok([
        sample_setting(state, Setting::AlphaLocal, shots, seed)?,
        sample_setting(state, Setting::BetaLocal, shots, seed)?,
        sample_setting(state, Setting::JointMs, shots, seed)?,
    ])
}
