use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{inner, norm_sqr, Amplitudes, Operator, Pauli, PauliString};
use super::state::{BlochVector, ProductState, QubitState};
use crate::behavior::{behavior_from_tables, Behavior, PairDistribution, SettingTables, CONSISTENCY_TOL};
use crate::error::{Error, Result};

/// The three measurement settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    /// `alpha1` and `alpha2` measured locally.
    #[serde(rename = "alpha")]
    AlphaLocal,
    /// `beta1` and `beta2` measured locally.
    #[serde(rename = "beta")]
    BetaLocal,
    /// `A` and `B` read off a joint entangling measurement.
    #[serde(rename = "joint")]
    JointMs,
}

impl Setting {
    pub const ALL: [Setting; 3] = [Setting::AlphaLocal, Setting::BetaLocal, Setting::JointMs];

    pub fn index(self) -> u64 {
        match self {
            Setting::AlphaLocal => 0,
            Setting::BetaLocal => 1,
            Setting::JointMs => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Setting::AlphaLocal => "alpha",
            Setting::BetaLocal => "beta",
            Setting::JointMs => "joint",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Setting::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// Which Pauli observables play the roles of `alpha_i` and `beta_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Assignment {
    /// `alpha1 = XI, alpha2 = IY, beta1 = YI, beta2 = IX`, so `A = XY`,
    /// `B = YX`, jointly measured in the rotated Bell basis.
    #[default]
    Standard,
    /// `alpha1 = XI, alpha2 = IX, beta1 = YI, beta2 = IY`, so `A = XX`,
    /// `B = YY`, jointly measured in the Bell basis. Agrees with
    /// [`Assignment::Standard`] only where `<X> = <Y>` and `<Z> = 0`.
    BellXxYy,
}

#[derive(Debug, Clone, Copy)]
pub struct Observables {
    pub alpha1: PauliString,
    pub alpha2: PauliString,
    pub beta1: PauliString,
    pub beta2: PauliString,
}

impl Observables {
    pub fn a(&self) -> Operator {
        self.alpha1.operator() * self.alpha2.operator()
    }

    pub fn b(&self) -> Operator {
        self.beta1.operator() * self.beta2.operator()
    }
}

impl Assignment {
    pub fn observables(self) -> Observables {
        use Pauli::*;
        match self {
            Assignment::Standard => Observables {
                alpha1: PauliString(X, I),
                alpha2: PauliString(I, Y),
                beta1: PauliString(Y, I),
                beta2: PauliString(I, X),
            },
            Assignment::BellXxYy => Observables {
                alpha1: PauliString(X, I),
                alpha2: PauliString(I, X),
                beta1: PauliString(Y, I),
                beta2: PauliString(I, Y),
            },
        }
    }

    pub fn joint_basis(self) -> MeasurementBasis {
        match self {
            Assignment::Standard => ms_basis(),
            Assignment::BellXxYy => bell_basis(),
        }
    }
}

/// One vector of a joint measurement basis with its derived outcome labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisElement {
    pub vector: Amplitudes,
    /// Eigenvalue of `A`.
    pub a: i8,
    /// Eigenvalue of `B`.
    pub b: i8,
    /// Eigenvalue of `AB`.
    pub ab: i8,
}

/// Orthonormal joint eigenbasis of the commuting pair `A`, `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    pub elements: [BasisElement; 4],
}

fn eigenvalue(op: &Operator, v: &Amplitudes) -> Result<i8> {
    let lambda = op.expectation(v);
    let av = op.apply(v);
    let residual: f64 = av
        .iter()
        .zip(v)
        .map(|(x, y)| (x - y * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > 1e-12 || (lambda.abs() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "vector is not a ±1 eigenvector (<op> = {lambda}, residual {residual})"
        )));
    }
    Ok(if lambda > 0.0 { 1 } else { -1 })
}

impl MeasurementBasis {
    /// Labels every vector by evaluating `A`, `B` and `AB` on it.
    pub fn derive(vectors: [Amplitudes; 4], a: &Operator, b: &Operator) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (inner(&vectors[i], &vectors[j]) - expected).norm() > 1e-12 {
                    return Err(Error::Precondition(format!(
                        "basis vectors {i} and {j} are not orthonormal"
                    )));
                }
            }
        }
        let ab = *a * *b;
        let mut elements = Vec::with_capacity(4);
        for v in vectors {
            let e = BasisElement {
                vector: v,
                a: eigenvalue(a, &v)?,
                b: eigenvalue(b, &v)?,
                ab: eigenvalue(&ab, &v)?,
            };
            if e.a * e.b != e.ab {
                return Err(Error::Precondition("labels violate (A)(B) = AB".into()));
            }
            elements.push(e);
        }
        Ok(Self {
            elements: elements.try_into().expect("four elements"),
        })
    }

    /// Born distribution over `(A, B)` labels.
    pub fn distribution(&self, psi: &Amplitudes) -> Result<PairDistribution> {
        let mut cells = [0.0; 4];
        for e in &self.elements {
            let k = crate::behavior::cell_index(
                crate::behavior::Outcome::from_sign(e.a).expect("±1"),
                crate::behavior::Outcome::from_sign(e.b).expect("±1"),
            );
            cells[k] += inner(&e.vector, psi).norm_sqr();
        }
        PairDistribution::from_cells(cells, 1e-12)
    }

    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .elements
            .iter()
            .fold(Operator::zero(), |acc, e| acc + Operator::projector(&e.vector));
        (sum - Operator::identity()).max_abs()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rotated Bell basis of the Mølmer–Sørensen interaction:
/// `(|00> + i|11>)/√2`, `(|11> + i|00>)/√2`, `(|01> - i|10>)/√2`,
/// `(|10> - i|01>)/√2`, labelled by the eigenvalues of `XY`, `YX`, `ZZ`.
pub fn ms_basis() -> MeasurementBasis {
    let h = FRAC_1_SQRT_2;
    let vectors = [
        [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, h)],
        [c(0.0, h), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)],
        [c(0.0, 0.0), c(h, 0.0), c(0.0, -h), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, -h), c(h, 0.0), c(0.0, 0.0)],
    ];
    let obs = Assignment::Standard.observables();
    MeasurementBasis::derive(vectors, &obs.a(), &obs.b()).expect("MS basis is a joint eigenbasis")
}

/// Ordinary Bell basis, the joint eigenbasis of `XX` and `YY`.
pub fn bell_basis() -> MeasurementBasis {
    let h = FRAC_1_SQRT_2;
    let vectors = [
        [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)],
        [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-h, 0.0)],
        [c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)],
    ];
    let obs = Assignment::BellXxYy.observables();
    MeasurementBasis::derive(vectors, &obs.a(), &obs.b()).expect("Bell basis is a joint eigenbasis")
}

/// Born distribution of two commuting `±1` observables.
pub fn local_distribution(psi: &Amplitudes, q: &Operator, r: &Operator) -> Result<PairDistribution> {
    let mut cells = [0.0; 4];
    for (k, (oq, or)) in crate::behavior::CELLS.iter().enumerate() {
        let projected = q
            .eigenprojector(oq.value())
            .apply(&r.eigenprojector(or.value()).apply(psi));
        cells[k] = norm_sqr(&projected);
    }
    PairDistribution::from_cells(cells, 1e-12)
}

/// Exact outcome distribution of one setting.
pub fn setting_distribution(
    state: &ProductState,
    setting: Setting,
    assignment: Assignment,
) -> Result<PairDistribution> {
    let psi = state.amplitudes();
    let obs = assignment.observables();
    match setting {
        Setting::AlphaLocal => local_distribution(&psi, &obs.alpha1.operator(), &obs.alpha2.operator()),
        Setting::BetaLocal => local_distribution(&psi, &obs.beta1.operator(), &obs.beta2.operator()),
        Setting::JointMs => assignment.joint_basis().distribution(&psi),
    }
}

pub fn setting_tables(state: &ProductState, assignment: Assignment) -> Result<SettingTables> {
    Ok(SettingTables {
        alpha: setting_distribution(state, Setting::AlphaLocal, assignment)?,
        beta: setting_distribution(state, Setting::BetaLocal, assignment)?,
        joint: setting_distribution(state, Setting::JointMs, assignment)?,
    })
}

/// Exact behavior, with tables, of an arbitrary product state.
pub fn behavior_for_state(state: &ProductState, assignment: Assignment) -> Result<Behavior> {
    behavior_from_tables(&setting_tables(state, assignment)?, CONSISTENCY_TOL)
}

/// Exact behavior of `|ψ> ⊗ |ψ>` with `|ψ> = cos θ |0> + sin θ e^{iφ} |1>`
/// under the standard assignment. `<AB> = <ZZ> = cos² 2θ`.
pub fn ideal_behavior(theta: f64, phi: f64) -> Result<Behavior> {
    let q = QubitState::new(theta, phi)?;
    behavior_for_state(&ProductState::symmetric(q), Assignment::Standard)
}

/// Behavior of `ρ ⊗ ρ` for a qubit with Bloch vector `r`, standard
/// assignment: `alpha1 = beta2 = x`, `alpha2 = beta1 = y`, `<AB> = z²`.
pub fn bloch_behavior(r: &BlochVector) -> Result<Behavior> {
    Behavior::new(r.x, r.y, r.y, r.x, r.z * r.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    const H: f64 = FRAC_1_SQRT_2;

    fn close(a: [f64; 5], b: [f64; 5], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn ms_labels_are_derived_from_the_operators() {
        let basis = ms_basis();
        let labels: Vec<_> = basis.elements.iter().map(|e| (e.a, e.b, e.ab)).collect();
        assert_eq!(labels[0], (1, 1, 1));
        // Hand application of XY and YX to the remaining vectors.
        assert_eq!(labels[1], (-1, -1, 1));
        assert_eq!(labels[2], (1, -1, -1));
        assert_eq!(labels[3], (-1, 1, -1));
        assert!(basis.completeness_error() < 1e-15);
        assert!(bell_basis().completeness_error() < 1e-15);
    }

    #[test]
    fn derive_rejects_non_eigenvectors() {
        let obs = Assignment::Standard.observables();
        let mut vectors = ms_basis().elements.map(|e| e.vector);
        // computational basis is orthonormal but not an XY eigenbasis
        let comp = [0, 1, 2, 3].map(|k| {
            let mut v = [Complex64::new(0.0, 0.0); 4];
            v[k] = Complex64::new(1.0, 0.0);
            v
        });
        assert!(MeasurementBasis::derive(comp, &obs.a(), &obs.b()).is_err());
        vectors[1] = vectors[0];
        assert!(MeasurementBasis::derive(vectors, &obs.a(), &obs.b()).is_err());
    }

    #[test]
    fn ideal_behavior_examples() {
        let b = ideal_behavior(FRAC_PI_4, FRAC_PI_4).unwrap();
        assert!(close(b.moments(), [H, H, H, H, 0.0], 1e-12));
        assert!((b.mean_a().unwrap() - 0.5).abs() < 1e-12);

        let b = ideal_behavior(FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        assert!(close(b.moments(), [-H, H, H, -H, 0.0], 1e-12));

        for phi in [0.0, 1.0, 4.0] {
            let b = ideal_behavior(0.0, phi).unwrap();
            assert!(close(b.moments(), [0.0, 0.0, 0.0, 0.0, 1.0], 1e-12));
        }
    }

    #[test]
    fn joint_correlation_is_cos_squared() {
        for &(t, p) in &[(0.1, 0.2), (0.5, 2.0), (1.0, 4.0), (1.5, 6.0)] {
            let b = ideal_behavior(t, p).unwrap();
            let expected = (2.0 * t).cos().powi(2);
            assert!((b.corr_ab() - expected).abs() < 1e-12);
            let r = QubitState::new(t, p).unwrap().bloch();
            assert!(close(b.moments(), bloch_behavior(&r).unwrap().moments(), 1e-12));
        }
    }

    #[test]
    fn joint_distribution_matches_projectors() {
        let obs = Assignment::Standard.observables();
        for &(t, p) in &[(0.3, 0.7), (0.9, 2.2)] {
            let s = ProductState::symmetric(QubitState::new(t, p).unwrap());
            let psi = s.amplitudes();
            let via_basis = setting_distribution(&s, Setting::JointMs, Assignment::Standard).unwrap();
            let via_projectors = local_distribution(&psi, &obs.a(), &obs.b()).unwrap();
            for (x, y) in via_basis.cells().iter().zip(via_projectors.cells()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn variant_assignment_agrees_at_the_optimal_state() {
        let s = ProductState::symmetric(QubitState::new(FRAC_PI_4, FRAC_PI_4).unwrap());
        let std_b = behavior_for_state(&s, Assignment::Standard).unwrap();
        let var_b = behavior_for_state(&s, Assignment::BellXxYy).unwrap();
        assert!(close(std_b.moments(), var_b.moments(), 1e-12));

        // Away from it the variant has <AB> = -<Z>^2.
        let s = ProductState::symmetric(QubitState::new(0.4, PI / 3.0).unwrap());
        let var_b = behavior_for_state(&s, Assignment::BellXxYy).unwrap();
        assert!((var_b.corr_ab() + (0.8f64).cos().powi(2)).abs() < 1e-12);
    }
}
