//! Observable statistics of the three-setting scenario.
//!
//! Alice receives one system from each of two independent sources. In the
//! first setting she measures `alpha1` (source 1) and `alpha2` (source 2)
//! and forms `A = alpha1 * alpha2`; in the second she measures `beta1`,
//! `beta2` and forms `B = beta1 * beta2`; in the third she measures `A` and
//! `B` jointly without learning the individual factors. Everything here is
//! classical probability bookkeeping over `±1` outcomes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for a table to count as a probability distribution.
pub const PROBABILITY_TOL: f64 = 1e-12;
/// Default tolerance for cross-consistency checks between derived quantities.
pub const CONSISTENCY_TOL: f64 = 1e-9;
/// Default tolerance used when classifying a behavior.
pub const VERDICT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub probability: f64,
    pub consistency: f64,
    pub verdict: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            probability: PROBABILITY_TOL,
            consistency: CONSISTENCY_TOL,
            verdict: VERDICT_TOL,
        }
    }
}

/// A single `±1` measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_sign(s: i8) -> Option<Self> {
        match s {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

/// Cell order used everywhere: `(+,+)`, `(+,-)`, `(-,+)`, `(-,-)`.
pub const CELLS: [(Outcome, Outcome); 4] = [
    (Outcome::Plus, Outcome::Plus),
    (Outcome::Plus, Outcome::Minus),
    (Outcome::Minus, Outcome::Plus),
    (Outcome::Minus, Outcome::Minus),
];

pub(crate) fn cell_index(q: Outcome, r: Outcome) -> usize {
    match (q, r) {
        (Outcome::Plus, Outcome::Plus) => 0,
        (Outcome::Plus, Outcome::Minus) => 1,
        (Outcome::Minus, Outcome::Plus) => 2,
        (Outcome::Minus, Outcome::Minus) => 3,
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (-1.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain { name, value })
    }
}

/// Joint distribution of two `±1` random variables `Q` and `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairRepr", into = "PairRepr")]
pub struct PairDistribution {
    cells: [f64; 4],
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    pp: f64,
    pm: f64,
    mp: f64,
    mm: f64,
}

impl TryFrom<PairRepr> for PairDistribution {
    type Error = Error;

    fn try_from(r: PairRepr) -> Result<Self> {
        PairDistribution::new(r.pp, r.pm, r.mp, r.mm)
    }
}

impl From<PairDistribution> for PairRepr {
    fn from(d: PairDistribution) -> Self {
        let [pp, pm, mp, mm] = d.cells;
        PairRepr { pp, pm, mp, mm }
    }
}

impl PairDistribution {
    pub fn new(pp: f64, pm: f64, mp: f64, mm: f64) -> Result<Self> {
        Self::from_cells([pp, pm, mp, mm], PROBABILITY_TOL)
    }

    pub fn from_cells(cells: [f64; 4], tol: f64) -> Result<Self> {
        if let Some(bad) = cells.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entry {bad} is negative or not finite"
            )));
        }
        let total: f64 = cells.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self { cells })
    }

    pub fn uniform() -> Self {
        Self { cells: [0.25; 4] }
    }

    /// All mass on a single cell.
    pub fn point(q: Outcome, r: Outcome) -> Self {
        let mut cells = [0.0; 4];
        cells[cell_index(q, r)] = 1.0;
        Self { cells }
    }

    /// Product of two independent marginals given by their means.
    pub fn product_of_means(mean_q: f64, mean_r: f64) -> Result<Self> {
        check_unit("meanQ", mean_q)?;
        check_unit("meanR", mean_r)?;
        let pq = [(1.0 + mean_q) / 2.0, (1.0 - mean_q) / 2.0];
        let pr = [(1.0 + mean_r) / 2.0, (1.0 - mean_r) / 2.0];
        Ok(Self {
            cells: [pq[0] * pr[0], pq[0] * pr[1], pq[1] * pr[0], pq[1] * pr[1]],
        })
    }

    pub fn cells(&self) -> [f64; 4] {
        self.cells
    }

    pub fn prob(&self, q: Outcome, r: Outcome) -> f64 {
        self.cells[cell_index(q, r)]
    }

    // Cells summing to 1 + ulp can push a moment just past ±1; clamp it back.
    pub fn mean_q(&self) -> f64 {
        let [pp, pm, mp, mm] = self.cells;
        ((pp + pm) - (mp + mm)).clamp(-1.0, 1.0)
    }

    pub fn mean_r(&self) -> f64 {
        let [pp, pm, mp, mm] = self.cells;
        ((pp + mp) - (pm + mm)).clamp(-1.0, 1.0)
    }

    pub fn correlation(&self) -> f64 {
        let [pp, pm, mp, mm] = self.cells;
        ((pp + mm) - (pm + mp)).clamp(-1.0, 1.0)
    }

    /// Distribution of the product `Q * R`, as `[p(+1), p(-1)]`.
    pub fn product_marginal(&self) -> [f64; 2] {
        let [pp, pm, mp, mm] = self.cells;
        [pp + mm, pm + mp]
    }

    /// Marginal of `Q`, as `[p(+1), p(-1)]`.
    pub fn q_marginal(&self) -> [f64; 2] {
        let [pp, pm, mp, mm] = self.cells;
        [pp + pm, mp + mm]
    }

    /// Marginal of `R`, as `[p(+1), p(-1)]`.
    pub fn r_marginal(&self) -> [f64; 2] {
        let [pp, pm, mp, mm] = self.cells;
        [pp + mp, pm + mm]
    }

    /// `w * self + (1 - w) * other`.
    pub fn mix(&self, w: f64, other: &Self) -> Self {
        let mut cells = [0.0; 4];
        for (k, c) in cells.iter_mut().enumerate() {
            *c = w * self.cells[k] + (1.0 - w) * other.cells[k];
        }
        Self { cells }
    }

    /// Product of the two marginals; same marginals, no correlation beyond them.
    pub fn decorrelated(&self) -> Self {
        let q = self.q_marginal();
        let r = self.r_marginal();
        Self {
            cells: [q[0] * r[0], q[0] * r[1], q[1] * r[0], q[1] * r[1]],
        }
    }
}

/// Evidence that a moment triple admits no probability distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityCertificate {
    pub q: Outcome,
    pub r: Outcome,
    /// The most negative cell value of the would-be distribution.
    pub value: f64,
    /// All four cells in canonical order.
    pub cells: [f64; 4],
}

impl fmt::Display for NegativityCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p({},{}) = {} < 0", self.q.symbol(), self.r.symbol(), self.value)
    }
}

/// Result of reconstructing a pair distribution from its moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Realization {
    Valid(PairDistribution),
    Negative(NegativityCertificate),
}

impl Realization {
    pub fn valid(self) -> Option<PairDistribution> {
        match self {
            Realization::Valid(d) => Some(d),
            Realization::Negative(_) => None,
        }
    }

    pub fn certificate(self) -> Option<NegativityCertificate> {
        match self {
            Realization::Valid(_) => None,
            Realization::Negative(c) => Some(c),
        }
    }
}

/// `p(q, r) = (1 + q<Q> + r<R> + qr<QR>) / 4`.
///
/// Cells that come out negative by less than [`PROBABILITY_TOL`] are rounding
/// noise at the boundary of the feasible set and are snapped to zero.
pub fn pair_distribution_from_moments(mean_q: f64, mean_r: f64, corr: f64) -> Result<Realization> {
    check_unit("meanQ", mean_q)?;
    check_unit("meanR", mean_r)?;
    check_unit("corrQR", corr)?;

    let mut cells = [0.0; 4];
    for (k, (q, r)) in CELLS.iter().enumerate() {
        let (q, r) = (q.value(), r.value());
        cells[k] = 0.25 * (1.0 + q * mean_q + r * mean_r + q * r * corr);
    }

    let (worst, &value) = cells
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("four cells");
    if value < -PROBABILITY_TOL {
        let (q, r) = CELLS[worst];
        return Ok(Realization::Negative(NegativityCertificate { q, r, value, cells }));
    }
    for c in cells.iter_mut() {
        *c = c.max(0.0);
    }
    Ok(Realization::Valid(PairDistribution::from_cells(
        cells,
        PROBABILITY_TOL,
    )?))
}

/// `(<Q>, <R>, <QR>)` of a pair distribution.
pub fn moments_from_pair_distribution(d: &PairDistribution) -> (f64, f64, f64) {
    (d.mean_q(), d.mean_r(), d.correlation())
}

/// Feasible range `[|<Q>+<R>| - 1, 1 - |<Q>-<R>|]` of `<QR>` given the two means.
pub fn correlation_range(mean_q: f64, mean_r: f64) -> (f64, f64) {
    ((mean_q + mean_r).abs() - 1.0, 1.0 - (mean_q - mean_r).abs())
}

/// Outcome tables of the three measurement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingTables {
    /// Over `(alpha1, alpha2)`.
    pub alpha: PairDistribution,
    /// Over `(beta1, beta2)`.
    pub beta: PairDistribution,
    /// Over `(A, B)`.
    pub joint: PairDistribution,
}

impl SettingTables {
    pub fn uniform() -> Self {
        Self {
            alpha: PairDistribution::uniform(),
            beta: PairDistribution::uniform(),
            joint: PairDistribution::uniform(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    /// `"A"` or `"B"`.
    pub observable: &'static str,
    pub outcome: i8,
    /// Marginal computed from the local setting.
    pub local: f64,
    /// Marginal computed from the joint setting.
    pub joint: f64,
    pub deviation: f64,
}

/// Marginal disagreements between settings that exceed the tolerance.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DisturbanceReport {
    pub tolerance: f64,
    pub deviations: Vec<Deviation>,
}

impl DisturbanceReport {
    pub fn passed(&self) -> bool {
        self.deviations.is_empty()
    }
}

impl fmt::Display for DisturbanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "no deviations above {}", self.tolerance);
        }
        for (k, d) in self.deviations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(
                f,
                "p({}={:+}) local {} vs joint {} (|diff| {})",
                d.observable, d.outcome, d.local, d.joint, d.deviation
            )?;
        }
        Ok(())
    }
}

/// Compares the distribution of `A` (resp. `B`) computed from the local
/// setting with the one read off the joint setting.
pub fn check_no_disturbance(t: &SettingTables, tol: f64) -> DisturbanceReport {
    let mut deviations = Vec::new();
    let pairs = [
        ("A", t.alpha.product_marginal(), t.joint.q_marginal()),
        ("B", t.beta.product_marginal(), t.joint.r_marginal()),
    ];
    for (observable, local, joint) in pairs {
        for (k, outcome) in [1i8, -1].into_iter().enumerate() {
            let deviation = (local[k] - joint[k]).abs();
            if deviation > tol {
                deviations.push(Deviation {
                    observable,
                    outcome,
                    local: local[k],
                    joint: joint[k],
                    deviation,
                });
            }
        }
    }
    DisturbanceReport {
        tolerance: tol,
        deviations,
    }
}

/// Measurable statistics of the scenario.
///
/// Always holds the five numbers the decision needs. `<A>`, `<B>` and the full
/// tables are optional; when present they are checked against the means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BehaviorRepr", into = "BehaviorRepr")]
pub struct Behavior {
    alpha1: f64,
    alpha2: f64,
    beta1: f64,
    beta2: f64,
    corr_ab: f64,
    mean_a: Option<f64>,
    mean_b: Option<f64>,
    tables: Option<SettingTables>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BehaviorRepr {
    alpha1: f64,
    alpha2: f64,
    beta1: f64,
    beta2: f64,
    #[serde(rename = "corrAB")]
    corr_ab: f64,
    #[serde(rename = "meanA", default, skip_serializing_if = "Option::is_none")]
    mean_a: Option<f64>,
    #[serde(rename = "meanB", default, skip_serializing_if = "Option::is_none")]
    mean_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tables: Option<SettingTables>,
}

impl TryFrom<BehaviorRepr> for Behavior {
    type Error = Error;

    fn try_from(r: BehaviorRepr) -> Result<Self> {
        let b = Behavior {
            alpha1: r.alpha1,
            alpha2: r.alpha2,
            beta1: r.beta1,
            beta2: r.beta2,
            corr_ab: r.corr_ab,
            mean_a: r.mean_a,
            mean_b: r.mean_b,
            tables: r.tables,
        };
        b.validate(&Tolerances::default())?;
        Ok(b)
    }
}

impl From<Behavior> for BehaviorRepr {
    fn from(b: Behavior) -> Self {
        BehaviorRepr {
            alpha1: b.alpha1,
            alpha2: b.alpha2,
            beta1: b.beta1,
            beta2: b.beta2,
            corr_ab: b.corr_ab,
            mean_a: b.mean_a,
            mean_b: b.mean_b,
            tables: b.tables,
        }
    }
}

impl Behavior {
    pub fn new(alpha1: f64, alpha2: f64, beta1: f64, beta2: f64, corr_ab: f64) -> Result<Self> {
        let b = Behavior {
            alpha1,
            alpha2,
            beta1,
            beta2,
            corr_ab,
            mean_a: None,
            mean_b: None,
            tables: None,
        };
        b.validate(&Tolerances::default())?;
        Ok(b)
    }

    /// Attaches `<A>` and `<B>`; both must match the products of local means.
    pub fn with_source_means(mut self, mean_a: f64, mean_b: f64) -> Result<Self> {
        self.mean_a = Some(mean_a);
        self.mean_b = Some(mean_b);
        self.validate(&Tolerances::default())?;
        Ok(self)
    }

    pub fn with_tables(mut self, tables: SettingTables) -> Result<Self> {
        self.tables = Some(tables);
        self.validate(&Tolerances::default())?;
        Ok(self)
    }

    /// The deterministic behavior with every mean equal to `+1`.
    pub fn deterministic_all_plus() -> Self {
        Behavior::new(1.0, 1.0, 1.0, 1.0, 1.0)
            .and_then(|b| b.with_source_means(1.0, 1.0))
            .expect("valid")
    }

    /// The deterministic behavior with `alpha2 = beta1 = -1` and `<AB> = 1`.
    pub fn deterministic_flipped() -> Self {
        Behavior::new(1.0, -1.0, -1.0, 1.0, 1.0)
            .and_then(|b| b.with_source_means(-1.0, -1.0))
            .expect("valid")
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        check_unit("alpha1", self.alpha1)?;
        check_unit("alpha2", self.alpha2)?;
        check_unit("beta1", self.beta1)?;
        check_unit("beta2", self.beta2)?;
        check_unit("corrAB", self.corr_ab)?;
        if let Some(a) = self.mean_a {
            check_unit("meanA", a)?;
            let product = self.alpha1 * self.alpha2;
            if (a - product).abs() > tol.consistency {
                return Err(Error::SourceDependent {
                    which: "A",
                    mean: a,
                    product,
                });
            }
        }
        if let Some(bm) = self.mean_b {
            check_unit("meanB", bm)?;
            let product = self.beta1 * self.beta2;
            if (bm - product).abs() > tol.consistency {
                return Err(Error::SourceDependent {
                    which: "B",
                    mean: bm,
                    product,
                });
            }
        }
        if let Some(t) = &self.tables {
            for (name, d) in [("alpha", &t.alpha), ("beta", &t.beta), ("joint", &t.joint)] {
                let total: f64 = d.cells().iter().sum();
                if (total - 1.0).abs() > tol.probability || d.cells().iter().any(|p| *p < 0.0) {
                    return Err(Error::InvalidDistribution(format!("{name} table")));
                }
            }
            let mut checks = vec![
                ("alpha1", t.alpha.mean_q(), self.alpha1),
                ("alpha2", t.alpha.mean_r(), self.alpha2),
                ("beta1", t.beta.mean_q(), self.beta1),
                ("beta2", t.beta.mean_r(), self.beta2),
                ("corrAB", t.joint.correlation(), self.corr_ab),
            ];
            if let Some(a) = self.mean_a {
                checks.push(("meanA", t.joint.mean_q(), a));
            }
            if let Some(bm) = self.mean_b {
                checks.push(("meanB", t.joint.mean_r(), bm));
            }
            for (name, derived, stored) in checks {
                if (derived - stored).abs() > tol.consistency {
                    return Err(Error::Inconsistent { name, derived, stored });
                }
            }
        }
        Ok(())
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }
    pub fn beta1(&self) -> f64 {
        self.beta1
    }
    pub fn beta2(&self) -> f64 {
        self.beta2
    }
    pub fn corr_ab(&self) -> f64 {
        self.corr_ab
    }
    pub fn mean_a(&self) -> Option<f64> {
        self.mean_a
    }
    pub fn mean_b(&self) -> Option<f64> {
        self.mean_b
    }
    pub fn tables(&self) -> Option<&SettingTables> {
        self.tables.as_ref()
    }

    /// `(<alpha_i>, <beta_i>)` for source `i` in `{1, 2}`.
    pub fn source_means(&self, source: usize) -> (f64, f64) {
        match source {
            1 => (self.alpha1, self.beta1),
            2 => (self.alpha2, self.beta2),
            _ => panic!("source index must be 1 or 2, got {source}"),
        }
    }

    /// The five numbers `(alpha1, alpha2, beta1, beta2, corrAB)`.
    pub fn moments(&self) -> [f64; 5] {
        [self.alpha1, self.alpha2, self.beta1, self.beta2, self.corr_ab]
    }

    /// Same behavior with optional data dropped.
    pub fn moments_only(&self) -> Self {
        Behavior {
            mean_a: None,
            mean_b: None,
            tables: None,
            ..self.clone()
        }
    }
}

/// Reads every mean off the tables after checking marginal consistency.
pub fn behavior_from_tables(t: &SettingTables, tol: f64) -> Result<Behavior> {
    let report = check_no_disturbance(t, tol);
    if !report.passed() {
        return Err(Error::Disturbance(report));
    }
    let b = Behavior {
        alpha1: t.alpha.mean_q(),
        alpha2: t.alpha.mean_r(),
        beta1: t.beta.mean_q(),
        beta2: t.beta.mean_r(),
        corr_ab: t.joint.correlation(),
        mean_a: Some(t.joint.mean_q()),
        mean_b: Some(t.joint.mean_r()),
        tables: Some(*t),
    };
    b.validate(&Tolerances {
        consistency: tol,
        ..Tolerances::default()
    })?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn maximally_mixed_moments_give_uniform_table() {
        let d = pair_distribution_from_moments(0.0, 0.0, 0.0).unwrap().valid().unwrap();
        assert_eq!(d.cells(), [0.25; 4]);
    }

    #[test]
    fn optimal_moments_are_not_a_distribution() {
        let cert = pair_distribution_from_moments(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0)
            .unwrap()
            .certificate()
            .unwrap();
        assert_eq!((cert.q, cert.r), (Outcome::Minus, Outcome::Minus));
        let expected = (1.0 - 2f64.sqrt()) / 4.0;
        assert!((cert.value - expected).abs() < 1e-15);
        assert!((cert.value + 0.10355).abs() < 1e-5);
    }

    #[test]
    fn deterministic_q_moments() {
        // p(q,r) = (1 + q)/4 evaluated cell by cell
        let d = pair_distribution_from_moments(1.0, 0.0, 0.0).unwrap().valid().unwrap();
        for (k, (q, _)) in CELLS.iter().enumerate() {
            assert_eq!(d.cells()[k], (1.0 + q.value()) / 4.0);
        }
        assert_eq!(d.cells(), [0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_moment_is_a_domain_error() {
        assert!(matches!(
            pair_distribution_from_moments(1.5, 0.0, 0.0),
            Err(Error::Domain { name: "meanQ", .. })
        ));
        assert!(pair_distribution_from_moments(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn moments_of_simple_tables() {
        assert_eq!(
            moments_from_pair_distribution(&PairDistribution::uniform()),
            (0.0, 0.0, 0.0)
        );
        let d = PairDistribution::new(0.5, 0.5, 0.0, 0.0).unwrap();
        assert_eq!(moments_from_pair_distribution(&d), (1.0, 0.0, 0.0));
        let d = PairDistribution::new(0.5, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(moments_from_pair_distribution(&d), (0.0, 0.0, 1.0));
    }

    #[test]
    fn rejects_invalid_tables() {
        assert!(PairDistribution::new(0.5, 0.5, 0.1, -0.1).is_err());
        assert!(PairDistribution::new(0.5, 0.5, 0.1, 0.0).is_err());
        assert!(serde_json::from_str::<PairDistribution>(r#"{"pp":1,"pm":1,"mp":0,"mm":0}"#).is_err());
    }

    #[test]
    fn disturbance_is_reported_per_outcome() {
        let t = SettingTables {
            alpha: PairDistribution::uniform(),
            beta: PairDistribution::uniform(),
            joint: PairDistribution::point(Outcome::Plus, Outcome::Plus),
        };
        let report = check_no_disturbance(&t, 1e-9);
        assert!(!report.passed());
        let a_minus = report
            .deviations
            .iter()
            .find(|d| d.observable == "A" && d.outcome == -1)
            .unwrap();
        assert_eq!(a_minus.deviation, 0.5);
        assert_eq!(a_minus.local, 0.5);
        assert_eq!(a_minus.joint, 0.0);
        assert!(matches!(behavior_from_tables(&t, 1e-9), Err(Error::Disturbance(_))));
    }

    #[test]
    fn decorrelated_joint_table_still_passes() {
        let t = SettingTables {
            alpha: PairDistribution::new(0.4, 0.1, 0.2, 0.3).unwrap(),
            beta: PairDistribution::new(0.1, 0.2, 0.3, 0.4).unwrap(),
            joint: PairDistribution::new(0.3, 0.4, 0.2, 0.1).unwrap(),
        };
        // P(A=+) = 0.7 locally and 0.7 jointly; P(B=+) = 0.5 both ways.
        assert!(check_no_disturbance(&t, 1e-12).passed());
        let t2 = SettingTables {
            joint: t.joint.decorrelated(),
            ..t
        };
        assert!(check_no_disturbance(&t2, 1e-12).passed());
    }

    #[test]
    fn uniform_and_deterministic_tables() {
        let b = behavior_from_tables(&SettingTables::uniform(), 1e-9).unwrap();
        assert_eq!(b.moments(), [0.0; 5]);
        assert_eq!(b.mean_a(), Some(0.0));

        let pp = PairDistribution::point(Outcome::Plus, Outcome::Plus);
        let t = SettingTables {
            alpha: pp,
            beta: pp,
            joint: pp,
        };
        let b = behavior_from_tables(&t, 1e-9).unwrap();
        assert_eq!(b.moments(), [1.0; 5]);
        assert_eq!((b.mean_a(), b.mean_b()), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn source_dependent_means_are_rejected() {
        let err = Behavior::new(0.5, 0.5, 0.0, 0.0, 0.0)
            .unwrap()
            .with_source_means(0.9, 0.0)
            .unwrap_err();
        assert!(matches!(err, Error::SourceDependent { which: "A", .. }));
        // Correlated alpha table: <A> = 0.8 while <alpha1><alpha2> = 0.
        let t = SettingTables {
            alpha: PairDistribution::new(0.45, 0.05, 0.05, 0.45).unwrap(),
            beta: PairDistribution::uniform(),
            joint: PairDistribution::new(0.45, 0.45, 0.05, 0.05).unwrap(),
        };
        assert!(check_no_disturbance(&t, 1e-9).passed());
        assert!(matches!(
            behavior_from_tables(&t, 1e-9),
            Err(Error::SourceDependent { which: "A", .. })
        ));
    }

    #[test]
    fn behavior_json_field_names() {
        let json = r#"{"alpha1":0.5,"alpha2":0.0,"beta1":0.0,"beta2":0.5,"corrAB":0.2}"#;
        let b: Behavior = serde_json::from_str(json).unwrap();
        assert_eq!(b.moments(), [0.5, 0.0, 0.0, 0.5, 0.2]);
        assert_eq!(serde_json::to_string(&b).unwrap(), json);

        let bad = r#"{"alpha1":1.5,"alpha2":0.0,"beta1":0.0,"beta2":0.5,"corrAB":0.2}"#;
        assert!(serde_json::from_str::<Behavior>(bad).is_err());
    }

    #[test]
    fn inconsistent_tables_are_rejected() {
        let err = Behavior::new(0.3, 0.0, 0.0, 0.0, 0.0)
            .unwrap()
            .with_tables(SettingTables::uniform())
            .unwrap_err();
        assert!(matches!(err, Error::Inconsistent { name: "alpha1", .. }));
    }

    #[test]
    fn degenerate_means_are_accepted() {
        let b = Behavior::new(1.0, -1.0, 1.0, -1.0, -1.0).unwrap();
        assert_eq!(b.source_means(2), (-1.0, -1.0));
    }
}
