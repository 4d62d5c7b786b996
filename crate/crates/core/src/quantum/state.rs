use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::Amplitudes;
use crate::error::{Error, Result};

/// Pure qubit `cos θ |0> + sin θ e^{iφ} |1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    theta: f64,
    phi: f64,
}

impl QubitState {
    /// `theta` must lie in `[0, π/2]`; `phi` is reduced modulo `2π`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
            return Err(Error::Input(format!("theta = {theta} is outside [0, pi/2]")));
        }
        if !phi.is_finite() {
            return Err(Error::Input(format!("phi = {phi} is not finite")));
        }
        Ok(Self {
            theta: theta.min(FRAC_PI_2),
            phi: phi.rem_euclid(TAU),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.theta.cos(), 0.0),
            Complex64::from_polar(self.theta.sin(), self.phi),
        ]
    }

    /// `(<X>, <Y>, <Z>) = (sin 2θ cos φ, sin 2θ sin φ, cos 2θ)`.
    pub fn bloch(&self) -> BlochVector {
        let s = (2.0 * self.theta).sin();
        BlochVector {
            x: s * self.phi.cos(),
            y: s * self.phi.sin(),
            z: (2.0 * self.theta).cos(),
        }
    }
}

/// Bloch vector of a possibly mixed qubit, `|r| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) || v.norm() > 1.0 + 1e-12 {
            return Err(Error::Input(format!("({x}, {y}, {z}) is outside the Bloch ball")));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// `|ψ1> ⊗ |ψ2>`, one qubit from each source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    pub first: QubitState,
    pub second: QubitState,
}

impl ProductState {
    pub fn new(first: QubitState, second: QubitState) -> Self {
        Self { first, second }
    }

    pub fn symmetric(q: QubitState) -> Self {
        Self::new(q, q)
    }

    pub fn amplitudes(&self) -> Amplitudes {
        let a = self.first.amplitudes();
        let b = self.second.amplitudes();
        [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    }
}
