//! Existence test for a factorized (non-bi-contextual) hidden-variable model.
//!
//! A factorized model assigns each source a joint distribution over its pair
//! `(alpha_i, beta_i)`. Non-negativity confines the unmeasurable correlation
//! `c_i = <alpha_i beta_i>` to `[L_i, R_i]`, and independence of the sources
//! forces `<AB> = c1 * c2`. A model exists iff the hyperbola `c1 * c2 = <AB>`
//! meets the rectangle `[L1, R1] x [L2, R2]`; the product `c1 * c2` over the
//! rectangle fills exactly the interval between its smallest and largest
//! corner products.

mod jpd;
mod witness;

pub use jpd::{construct_jpd, JointDistribution, Variable};
pub use witness::{build_witness, WitnessModel};

use serde::{Deserialize, Serialize};

use crate::behavior::{Behavior, Tolerances, VERDICT_TOL};
use crate::error::{Error, Result};

/// Below this magnitude a side-inequality denominator is treated as zero.
pub const RATIO_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    NonBiContextual,
    BiContextual,
}

impl Verdict {
    pub fn is_bicontextual(self) -> bool {
        self == Verdict::BiContextual
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NonBiContextual => "NonBiContextual",
            Verdict::BiContextual => "BiContextual",
        }
    }
}

/// Rectangle of admissible unmeasurable correlations `<alpha_i beta_i>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationBounds {
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
}

impl CorrelationBounds {
    /// `(L_i, R_i)` for `i` in `{1, 2}`.
    pub fn interval(&self, source: usize) -> (f64, f64) {
        match source {
            1 => (self.l1, self.r1),
            2 => (self.l2, self.r2),
            _ => panic!("source index must be 1 or 2, got {source}"),
        }
    }

    /// `[L1 L2, L1 R2, R1 L2, R1 R2]`.
    pub fn corner_products(&self) -> [f64; 4] {
        [
            self.l1 * self.l2,
            self.l1 * self.r2,
            self.r1 * self.l2,
            self.r1 * self.r2,
        ]
    }

    pub fn product_range(&self) -> (f64, f64) {
        let corners = self.corner_products();
        let min = corners.iter().copied().fold(f64::INFINITY, f64::min);
        let max = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    }
}

pub fn compute_bounds(b: &Behavior) -> CorrelationBounds {
    let bound = |a: f64, c: f64| ((a + c).abs() - 1.0, 1.0 - (a - c).abs());
    let (l1, r1) = bound(b.alpha1(), b.beta1());
    let (l2, r2) = bound(b.alpha2(), b.beta2());
    CorrelationBounds { l1, r1, l2, r2 }
}

/// Whether each edge of the rectangle meets the hyperbola.
///
/// `true` means the side inequality is satisfied. Each side is checked as
/// "`<AB>` lies between the two corner products on that edge", which equals
/// the ratio form whenever the edge coordinate is non-zero and stays defined
/// when it is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideResults {
    /// Edge `c1 = L1`.
    pub left: bool,
    /// Edge `c1 = R1`.
    pub right: bool,
    /// Edge `c2 = R2`.
    pub upper: bool,
    /// Edge `c2 = L2`.
    pub lower: bool,
}

impl SideResults {
    pub fn as_array(&self) -> [bool; 4] {
        [self.left, self.right, self.upper, self.lower]
    }

    pub fn any_satisfied(&self) -> bool {
        self.as_array().iter().any(|s| *s)
    }
}

impl Serialize for SideResultsArray {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.as_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SideResultsArray {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [left, right, upper, lower] = <[bool; 4]>::deserialize(d)?;
        Ok(SideResultsArray(SideResults {
            left,
            right,
            upper,
            lower,
        }))
    }
}

/// Serializes as `[left, right, upper, lower]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideResultsArray(pub SideResults);

fn between(value: f64, a: f64, b: f64, tol: f64) -> bool {
    a.min(b) - tol <= value && value <= a.max(b) + tol
}

pub fn decide_four_sides(b: &Behavior) -> SideResults {
    decide_four_sides_with(b, VERDICT_TOL)
}

pub fn decide_four_sides_with(b: &Behavior, tol: f64) -> SideResults {
    let r = compute_bounds(b);
    let c = b.corr_ab();
    SideResults {
        left: between(c, r.l1 * r.l2, r.l1 * r.r2, tol),
        right: between(c, r.r1 * r.l2, r.r1 * r.r2, tol),
        upper: between(c, r.l1 * r.r2, r.r1 * r.r2, tol),
        lower: between(c, r.l1 * r.l2, r.r1 * r.l2, tol),
    }
}

/// The four side ratios `<AB>/L1`, `<AB>/R1`, `<AB>/R2`, `<AB>/L2` in
/// left/right/upper/lower order; `None` where the denominator is within
/// [`RATIO_EPS`] of zero.
pub fn side_ratios(b: &Behavior) -> [Option<f64>; 4] {
    let r = compute_bounds(b);
    let c = b.corr_ab();
    [r.l1, r.r1, r.r2, r.l2].map(|d| (d.abs() >= RATIO_EPS).then(|| c / d))
}

/// `min_i max(|L_i|, |R_i|)` and whether `|<AB>|` exceeds it.
///
/// Exceeding the bound rules out a factorized model; staying below it proves
/// nothing.
pub fn necessary_bound_check(b: &Behavior) -> (f64, bool) {
    let r = compute_bounds(b);
    let bound = r.l1.abs().max(r.r1.abs()).min(r.l2.abs().max(r.r2.abs()));
    (bound, b.corr_ab().abs() > bound + VERDICT_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub verdict: Verdict,
    #[serde(flatten)]
    pub bounds: CorrelationBounds,
    #[serde(rename = "min")]
    pub product_min: f64,
    #[serde(rename = "max")]
    pub product_max: f64,
    /// `(<AB> - min)(<AB> - max)`; positive means bi-contextual.
    #[serde(rename = "singleLHS")]
    pub single_lhs: f64,
    #[serde(rename = "sides")]
    pub side_results: SideResultsArray,
    #[serde(rename = "necessaryBound")]
    pub necessary_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessModel>,
}

impl DecisionReport {
    pub fn sides(&self) -> SideResults {
        self.side_results.0
    }
}

/// Classifies a behavior by the single product inequality.
///
/// The verdict is `NonBiContextual` iff `<AB>` lies in `[min, max]` up to the
/// verdict tolerance, which is `single_lhs <= 0` in exact arithmetic. A
/// witness model is attached for every non-bi-contextual behavior.
pub fn decide_single(b: &Behavior) -> DecisionReport {
    decide_single_with(b, &Tolerances::default())
}

pub fn decide_single_with(b: &Behavior, tol: &Tolerances) -> DecisionReport {
    let mut report = classify(b, tol);
    if report.verdict == Verdict::NonBiContextual {
        report.witness = Some(
            witness::build_witness_with(b, &report.bounds, tol)
                .expect("a non-bi-contextual behavior always admits a witness"),
        );
    }
    report
}

/// Same as [`decide_single`] without constructing the witness.
pub fn classify(b: &Behavior, tol: &Tolerances) -> DecisionReport {
    let bounds = compute_bounds(b);
    let (product_min, product_max) = bounds.product_range();
    let c = b.corr_ab();
    let single_lhs = (c - product_min) * (c - product_max);
    let inside = between(c, product_min, product_max, tol.verdict);
    let verdict = if inside {
        Verdict::NonBiContextual
    } else {
        Verdict::BiContextual
    };
    let (necessary_bound, _) = necessary_bound_check(b);
    DecisionReport {
        verdict,
        bounds,
        product_min,
        product_max,
        single_lhs,
        side_results: SideResultsArray(decide_four_sides_with(b, tol.verdict)),
        necessary_bound,
        witness: None,
    }
}

/// Convex combination `w * b1 + (1 - w) * b2`.
///
/// Optional data is mixed only when both inputs carry it. The result is
/// validated like any other behavior, so mixing two source-independent
/// behaviors whose mixture no longer satisfies `<A> = <alpha1><alpha2>` fails.
pub fn mix_behaviors(b1: &Behavior, w: f64, b2: &Behavior) -> Result<Behavior> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Weight(w));
    }
    let m1 = b1.moments();
    let m2 = b2.moments();
    let m: Vec<f64> = m1.iter().zip(m2).map(|(x, y)| w * x + (1.0 - w) * y).collect();
    let mut out = Behavior::new(m[0], m[1], m[2], m[3], m[4])?;
    if let (Some(a1), Some(a2), Some(bb1), Some(bb2)) = (b1.mean_a(), b2.mean_a(), b1.mean_b(), b2.mean_b()) {
        out = out.with_source_means(w * a1 + (1.0 - w) * a2, w * bb1 + (1.0 - w) * bb2)?;
    }
    if let (Some(t1), Some(t2)) = (b1.tables(), b2.tables()) {
        let tables = crate::behavior::SettingTables {
            alpha: t1.alpha.mix(w, &t2.alpha),
            beta: t1.beta.mix(w, &t2.beta),
            joint: t1.joint.mix(w, &t2.joint),
        };
        out = out.with_tables(tables)?;
    }
    Ok(out)
}
