//! Algebraic checks on the Mermin–Peres square.
//!
//! ```text
//!   XI  IX  XX
//!   IY  YI  YY
//!   XY  YX  ZZ
//! ```
//!
//! Columns 1 and 2 are the two local settings of the standard assignment
//! (`alpha1, alpha2, A` and `beta2, beta1, B`) and row 3 is the joint setting.

use serde::Serialize;

use super::measurement::{ms_basis, Assignment};
use super::ops::{Operator, Pauli, PauliString};

pub const SQUARE: [[PauliString; 3]; 3] = {
    use Pauli::*;
    [
        [PauliString(X, I), PauliString(I, X), PauliString(X, X)],
        [PauliString(I, Y), PauliString(Y, I), PauliString(Y, Y)],
        [PauliString(X, Y), PauliString(Y, X), PauliString(Z, Z)],
    ]
};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct ContextCheck {
    /// `"row 1"`, `"column 3"`, ...
    pub context: String,
    pub operators: [String; 3],
    /// Largest entry of any pairwise commutator.
    #[serde(rename = "maxCommutator")]
    pub max_commutator: f64,
    /// `+1` or `-1` when the product is `±I`, `0` otherwise.
    #[serde(rename = "productSign")]
    pub product_sign: i8,
    #[serde(rename = "expectedSign")]
    pub expected_sign: i8,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MsLabel {
    pub vector: usize,
    #[serde(rename = "XY")]
    pub a: i8,
    #[serde(rename = "YX")]
    pub b: i8,
    #[serde(rename = "ZZ")]
    pub ab: i8,
}

#[derive(Debug, Clone, Serialize)]
pub struct MerminPeresReport {
    pub rows: Vec<ContextCheck>,
    pub columns: Vec<ContextCheck>,
    /// Contexts forming the bi-contextuality test.
    #[serde(rename = "biContextualSubset")]
    pub bicontextual_subset: Vec<String>,
    /// Whether that subset carries exactly the standard assignment's observables.
    #[serde(rename = "subsetMatchesAssignment")]
    pub subset_matches_assignment: bool,
    /// Outcome labels of the joint measurement basis, derived from the operators.
    #[serde(rename = "msLabels")]
    pub ms_labels: Vec<MsLabel>,
    pub ok: bool,
}

fn product_sign(p: &Operator) -> i8 {
    let id = Operator::identity();
    if (*p - id).max_abs() <= TOL {
        1
    } else if (*p + id).max_abs() <= TOL {
        -1
    } else {
        0
    }
}

fn check(context: String, ops: [PauliString; 3], expected_sign: i8) -> ContextCheck {
    let m = ops.map(PauliString::operator);
    let max_commutator = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| m[i].commutator(&m[j]).max_abs())
        .fold(0.0, f64::max);
    let sign = product_sign(&(m[0] * m[1] * m[2]));
    ContextCheck {
        context,
        operators: ops.map(|o| o.to_string()),
        max_commutator,
        product_sign: sign,
        expected_sign,
        ok: max_commutator <= TOL && sign == expected_sign,
    }
}

pub fn verify_mermin_peres() -> MerminPeresReport {
    let rows: Vec<_> = (0..3).map(|r| check(format!("row {}", r + 1), SQUARE[r], 1)).collect();
    let columns: Vec<_> = (0..3)
        .map(|c| {
            let expected = if c == 2 { -1 } else { 1 };
            check(
                format!("column {}", c + 1),
                [SQUARE[0][c], SQUARE[1][c], SQUARE[2][c]],
                expected,
            )
        })
        .collect();

    let obs = Assignment::Standard.observables();
    let same = |p: PauliString, op: &Operator| (p.operator() - *op).max_abs() <= TOL;
    let subset_matches_assignment = SQUARE[0][0] == obs.alpha1
        && SQUARE[1][0] == obs.alpha2
        && same(SQUARE[2][0], &obs.a())
        && SQUARE[1][1] == obs.beta1
        && SQUARE[0][1] == obs.beta2
        && same(SQUARE[2][1], &obs.b())
        && same(SQUARE[2][2], &(obs.a() * obs.b()));

    let ms_labels = ms_basis()
        .elements
        .iter()
        .enumerate()
        .map(|(k, e)| MsLabel {
            vector: k + 1,
            a: e.a,
            b: e.b,
            ab: e.ab,
        })
        .collect();

    let ok = rows.iter().chain(&columns).all(|c| c.ok) && subset_matches_assignment;
    MerminPeresReport {
        rows,
        columns,
        bicontextual_subset: vec!["column 1".into(), "column 2".into(), "row 3".into()],
        subset_matches_assignment,
        ms_labels,
        ok,
    }
}
