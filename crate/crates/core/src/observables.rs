//! Dichotomic qubit observables as Bloch-sphere directions.
//!
//! A setting `(theta, phi)` stands for the observable
//! `(σx cos φ + σy sin φ) sin θ + σz cos θ`, whose eigenvalues are ±1.
//! Angles are radians throughout; `theta` lives in `[0, π]` and `phi` in
//! `[0, 2π)`.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// One measurement direction on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSetting {
    theta: f64,
    phi: f64,
}

fn wrap_phi(phi: f64) -> f64 {
    let wrapped = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

impl ObservableSetting {
    /// Builds a setting from a polar angle already in `[0, π]`; `phi` is
    /// wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::NonFiniteAngle { theta, phi });
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::ThetaOutOfRange(theta));
        }
        Ok(Self {
            theta,
            phi: wrap_phi(phi),
        })
    }

    /// Maps arbitrary finite angles onto the canonical ranges without
    /// changing the observable. A polar angle outside `[0, π]` is reflected
    /// back, which flips the azimuth by π.
    pub fn canonicalize(theta_raw: f64, phi_raw: f64) -> Result<Self> {
        if !theta_raw.is_finite() || !phi_raw.is_finite() {
            return Err(Error::NonFiniteAngle {
                theta: theta_raw,
                phi: phi_raw,
            });
        }
        let mut theta = wrap_phi(theta_raw);
        let mut phi = phi_raw;
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
        }
        Ok(Self {
            theta,
            phi: wrap_phi(phi),
        })
    }

    /// Direction of a (not necessarily normalized) nonzero Bloch vector.
    pub fn from_bloch(v: [f64; 3]) -> Result<Self> {
        let transverse = v[0].hypot(v[1]);
        let theta = transverse.atan2(v[2]);
        let phi = v[1].atan2(v[0]);
        Self::canonicalize(theta, phi)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Unit Bloch vector `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn bloch(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// The 2×2 Hermitian matrix of the observable.
    pub fn to_matrix(&self) -> Matrix2<Complex64> {
        bloch_matrix(self.theta, self.phi)
    }
}

/// Observable matrix for raw angles, with no range checks.
pub(crate) fn bloch_matrix(theta: f64, phi: f64) -> Matrix2<Complex64> {
    let (st, ct) = theta.sin_cos();
    let off = Complex64::from_polar(st, phi);
    Matrix2::new(
        Complex64::new(ct, 0.0),
        off.conj(),
        off,
        Complex64::new(-ct, 0.0),
    )
}

/// The two settings a party chooses between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingPair {
    pub unprimed: ObservableSetting,
    pub primed: ObservableSetting,
}

impl SettingPair {
    pub fn get(&self, primed: bool) -> ObservableSetting {
        if primed {
            self.primed
        } else {
            self.unprimed
        }
    }

    pub fn set(&mut self, primed: bool, setting: ObservableSetting) {
        if primed {
            self.primed = setting;
        } else {
            self.unprimed = setting;
        }
    }
}

/// Two settings per party for `n ≥ 2` parties. Party `i` (zero-based) is
/// addressed by bit `i` of a setting-choice word.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingsTable {
    pairs: Vec<SettingPair>,
}

impl SettingsTable {
    pub fn new(pairs: Vec<SettingPair>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::TooFewParties(pairs.len()));
        }
        Ok(Self { pairs })
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[SettingPair] {
        &self.pairs
    }

    pub fn pair(&self, party: usize) -> &SettingPair {
        &self.pairs[party]
    }

    pub fn pair_mut(&mut self, party: usize) -> &mut SettingPair {
        &mut self.pairs[party]
    }

    /// Concrete per-party settings selected by `word`.
    pub fn resolve(&self, word: u32) -> Result<Vec<ObservableSetting>> {
        let n = self.n();
        if n < 32 && word >> n != 0 {
            return Err(Error::WordOutOfRange { word, n });
        }
        Ok(self
            .pairs
            .iter()
            .enumerate()
            .map(|(i, pair)| pair.get(word >> i & 1 == 1))
            .collect())
    }
}
