use crate::behavior::{check_no_disturbance, Outcome, SettingTables, CONSISTENCY_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Alpha1,
    Alpha2,
    Beta1,
    Beta2,
    A,
    B,
}

impl Variable {
    pub const ALL: [Variable; 6] = [
        Variable::Alpha1,
        Variable::Alpha2,
        Variable::Beta1,
        Variable::Beta2,
        Variable::A,
        Variable::B,
    ];

    fn bit(self) -> usize {
        self as usize
    }
}

/// Distribution over `(alpha1, alpha2, beta1, beta2, A, B)`, 64 cells.
///
/// Cell index bit `k` is set when variable `k` (in [`Variable::ALL`] order)
/// takes the value `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    cells: [f64; 64],
}

impl JointDistribution {
    pub fn cells(&self) -> &[f64; 64] {
        &self.cells
    }

    pub fn value(index: usize, v: Variable) -> Outcome {
        if index >> v.bit() & 1 == 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// Two-variable marginal in canonical cell order.
    pub fn marginal(&self, q: Variable, r: Variable) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (idx, p) in self.cells.iter().enumerate() {
            let k = crate::behavior::cell_index(Self::value(idx, q), Self::value(idx, r));
            out[k] += p;
        }
        out
    }
}

/// Glues the three setting tables into one distribution over all six
/// variables, ignoring source independence:
///
/// `p = p(alpha1, alpha2, A) p(beta1, beta2, B) p(A, B) / (p(A) p(B))`
///
/// where `A` and `B` are tied to their factors by Kronecker deltas. Where
/// `p(A = a)` vanishes, no-disturbance forces every cell with `A = a` to
/// vanish too and the quotient is taken as zero; local mass on such an
/// outcome is an error.
pub fn construct_jpd(t: &SettingTables) -> Result<JointDistribution> {
    let report = check_no_disturbance(t, CONSISTENCY_TOL);
    if !report.passed() {
        return Err(Error::Disturbance(report));
    }
    let p_a = t.joint.q_marginal();
    let p_b = t.joint.r_marginal();
    let sign_idx = |o: Outcome| usize::from(o == Outcome::Minus);

    for (observable, marginal, local) in [
        ("A", p_a, t.alpha.product_marginal()),
        ("B", p_b, t.beta.product_marginal()),
    ] {
        for (k, outcome) in [1i8, -1].into_iter().enumerate() {
            if marginal[k] == 0.0 && local[k] > 0.0 {
                return Err(Error::ZeroMarginal {
                    observable,
                    outcome,
                    mass: local[k],
                });
            }
        }
    }

    let mut cells = [0.0; 64];
    for (idx, cell) in cells.iter_mut().enumerate() {
        let v = |var| JointDistribution::value(idx, var);
        let (a1, a2, b1, b2, a, b) = (
            v(Variable::Alpha1),
            v(Variable::Alpha2),
            v(Variable::Beta1),
            v(Variable::Beta2),
            v(Variable::A),
            v(Variable::B),
        );
        if a1.sign() * a2.sign() != a.sign() || b1.sign() * b2.sign() != b.sign() {
            continue;
        }
        let denom = p_a[sign_idx(a)] * p_b[sign_idx(b)];
        if denom == 0.0 {
            continue;
        }
        *cell = t.alpha.prob(a1, a2) * t.beta.prob(b1, b2) * t.joint.prob(a, b) / denom;
    }
    Ok(JointDistribution { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::PairDistribution;

    #[test]
    fn uniform_tables_give_product_of_uniforms() {
        let j = construct_jpd(&SettingTables::uniform()).unwrap();
        for (idx, p) in j.cells().iter().enumerate() {
            let v = |var| JointDistribution::value(idx, var).sign();
            let consistent = v(Variable::Alpha1) * v(Variable::Alpha2) == v(Variable::A)
                && v(Variable::Beta1) * v(Variable::Beta2) == v(Variable::B);
            // p(a1,a2) p(b1,b2) with A, B fixed by the deltas
            let expected = if consistent { 1.0 / 16.0 } else { 0.0 };
            assert!((p - expected).abs() < 1e-15);
        }
        assert!((j.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_marginal_cells_are_zero() {
        let pp = PairDistribution::point(Outcome::Plus, Outcome::Plus);
        let t = SettingTables {
            alpha: pp,
            beta: pp,
            joint: pp,
        };
        let j = construct_jpd(&t).unwrap();
        assert_eq!(j.cells()[0], 1.0);
        assert_eq!(j.total(), 1.0);
        assert_eq!(j.marginal(Variable::A, Variable::B), pp.cells());
    }

    #[test]
    fn refuses_disturbing_tables() {
        let t = SettingTables {
            alpha: PairDistribution::uniform(),
            beta: PairDistribution::uniform(),
            joint: PairDistribution::point(Outcome::Plus, Outcome::Plus),
        };
        assert!(matches!(construct_jpd(&t), Err(Error::Disturbance(_))));
    }

    #[test]
    fn local_mass_on_an_impossible_joint_outcome() {
        // A = -1 carries 1e-10 locally (below the no-disturbance tolerance)
        // but nothing in the joint table.
        let t = SettingTables {
            alpha: PairDistribution::new(1.0 - 1e-10, 1e-10, 0.0, 0.0).unwrap(),
            beta: PairDistribution::uniform(),
            joint: PairDistribution::new(0.5, 0.5, 0.0, 0.0).unwrap(),
        };
        assert!(matches!(
            construct_jpd(&t),
            Err(Error::ZeroMarginal {
                observable: "A",
                outcome: -1,
                ..
            })
        ));
    }
}
