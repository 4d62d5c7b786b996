//! Dense two-qubit linear algebra.
//!
//! Basis order is `|00>, |01>, |10>, |11>` with the first qubit as the most
//! significant bit, so `kron(a, b)` acts with `a` on qubit 1.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub type Amplitudes = [Complex64; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I], [I, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Two-qubit Pauli string `P1 ⊗ P2`, printed as e.g. `XI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString(pub Pauli, pub Pauli);

impl PauliString {
    pub fn operator(self) -> Operator {
        Operator::kron(&self.0.matrix(), &self.1.matrix())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0.letter(), self.1.letter())
    }
}

/// 4x4 complex matrix acting on two qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator(pub [[Complex64; 4]; 4]);

impl Operator {
    pub fn zero() -> Self {
        Operator([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (k, row) in m.iter_mut().enumerate() {
            row[k] = ONE;
        }
        Operator(m)
    }

    pub fn kron(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = a[i / 2][j / 2] * b[i % 2][j % 2];
            }
        }
        Operator(m)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = self.0;
        m.iter_mut().flatten().for_each(|x| *x *= s);
        Operator(m)
    }

    pub fn adjoint(&self) -> Self {
        let m = std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i].conj()));
        Operator(m)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).max_abs() <= tol
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: &Amplitudes) -> Amplitudes {
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// `<v|M|v>` for Hermitian `M`; the imaginary part is dropped.
    pub fn expectation(&self, v: &Amplitudes) -> f64 {
        inner(v, &self.apply(v)).re
    }

    /// `(1 + s M) / 2`: projector onto the `s`-eigenspace of an involution `M`.
    pub fn eigenprojector(&self, s: f64) -> Self {
        (Operator::identity() + self.scale(Complex64::new(s, 0.0))).scale(Complex64::new(0.5, 0.0))
    }

    /// `|v><v|`.
    pub fn projector(v: &Amplitudes) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = v[i] * v[j].conj();
            }
        }
        Operator(m)
    }
}

impl Mul for Operator {
    type Output = Operator;

    fn mul(self, rhs: Operator) -> Operator {
        let m = std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum()));
        Operator(m)
    }
}

impl Add for Operator {
    type Output = Operator;

    fn add(self, rhs: Operator) -> Operator {
        let mut m = self.0;
        for (row, other) in m.iter_mut().zip(rhs.0) {
            for (x, y) in row.iter_mut().zip(other) {
                *x += y;
            }
        }
        Operator(m)
    }
}

impl Sub for Operator {
    type Output = Operator;

    fn sub(self, rhs: Operator) -> Operator {
        self + (-rhs)
    }
}

impl Neg for Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        self.scale(-ONE)
    }
}

/// `<a|b>`.
pub fn inner(a: &Amplitudes, b: &Amplitudes) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &Amplitudes) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(a: Pauli, b: Pauli) -> Operator {
        PauliString(a, b).operator()
    }

    #[test]
    fn paulis_are_hermitian_involutions() {
        for a in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            for b in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                let m = ps(a, b);
                assert!(m.is_hermitian(1e-15));
                assert!((m * m - Operator::identity()).max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn products_of_joint_observables() {
        // (X⊗Y)(Y⊗X) = XY ⊗ YX = (iZ) ⊗ (-iZ) = Z⊗Z
        let p = ps(Pauli::X, Pauli::Y) * ps(Pauli::Y, Pauli::X);
        assert!((p - ps(Pauli::Z, Pauli::Z)).max_abs() < 1e-15);
        // (X⊗X)(Y⊗Y) = -Z⊗Z
        let p = ps(Pauli::X, Pauli::X) * ps(Pauli::Y, Pauli::Y);
        assert!((p + ps(Pauli::Z, Pauli::Z)).max_abs() < 1e-15);
    }

    #[test]
    fn kron_puts_first_factor_on_the_high_bit() {
        // X⊗I maps |00> to |10>, which is index 2.
        let x1 = ps(Pauli::X, Pauli::I);
        let mut v = [ZERO; 4];
        v[0] = ONE;
        let out = x1.apply(&v);
        assert_eq!(out[2], ONE);
        assert_eq!(PauliString(Pauli::X, Pauli::I).to_string(), "XI");
    }

    #[test]
    fn disjoint_factors_commute() {
        let c = ps(Pauli::X, Pauli::I).commutator(&ps(Pauli::I, Pauli::Y));
        assert_eq!(c.max_abs(), 0.0);
        let c = ps(Pauli::X, Pauli::I).commutator(&ps(Pauli::Y, Pauli::I));
        assert!(c.max_abs() > 1.0);
    }
}
