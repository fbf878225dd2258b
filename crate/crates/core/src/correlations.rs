//! Closed-form full correlations `⟨A B ⋯ K⟩` of pure and decohered GHZ
//! states.
//!
//! Every correlation has the shape
//! `population · Π cos θ + coherence · cos(Σ φ) · Π sin θ`; the channels
//! only change the two prefactors.

use crate::bell_operator::BellExpansion;
use crate::channels_states::{NoiseKind, NoiseSpec};
use crate::error::{Error, Result};
use crate::observables::{ObservableSetting, SettingsTable};

/// One concrete setting per party plus an optional channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationQuery {
    pub settings: Vec<ObservableSetting>,
    pub noise: Option<NoiseSpec>,
}

impl CorrelationQuery {
    pub fn new(settings: Vec<ObservableSetting>, noise: Option<NoiseSpec>) -> Result<Self> {
        if settings.len() < 2 {
            return Err(Error::TooFewParties(settings.len()));
        }
        Ok(Self { settings, noise })
    }

    pub fn n(&self) -> usize {
        self.settings.len()
    }

    pub fn evaluate(&self) -> f64 {
        match self.noise {
            None => correlation_ghz(&self.settings),
            Some(noise) => correlation_noisy(&self.settings, noise),
        }
    }
}

/// `(Π cos θ, cos(Σ φ) Π sin θ)`.
fn angular_parts(settings: &[ObservableSetting]) -> (f64, f64) {
    let mut cos_prod = 1.0;
    let mut sin_prod = 1.0;
    let mut phi_sum = 0.0;
    for s in settings {
        let (st, ct) = s.theta().sin_cos();
        cos_prod *= ct;
        sin_prod *= st;
        phi_sum += s.phi();
    }
    (cos_prod, phi_sum.cos() * sin_prod)
}

fn parity(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        0.0
    }
}

/// Prefactors `(population, coherence)` of the correlation for `n` qubits.
pub fn prefactors(n: usize, noise: Option<NoiseSpec>) -> (f64, f64) {
    let ni = n as i32;
    match noise {
        None => (parity(n), 1.0),
        Some(noise) => {
            let p = noise.p();
            match noise.kind() {
                NoiseKind::Depolarizing => {
                    let shrink = (1.0 - p).powi(ni);
                    (shrink * parity(n), shrink)
                }
                NoiseKind::Dephasing => (parity(n), (1.0 - p).powi(ni)),
                NoiseKind::Dissipation => (
                    (1.0 + (2.0 * p - 1.0).powi(ni)) / 2.0,
                    (1.0 - p).powf(n as f64 / 2.0),
                ),
            }
        }
    }
}

/// Correlation of the pure GHZ state.
pub fn correlation_ghz(settings: &[ObservableSetting]) -> f64 {
    let (z, xy) = angular_parts(settings);
    parity(settings.len()) * z + xy
}

/// Correlation of the GHZ state after `noise` hit every qubit.
pub fn correlation_noisy(settings: &[ObservableSetting], noise: NoiseSpec) -> f64 {
    let (z, xy) = angular_parts(settings);
    let (population, coherence) = prefactors(settings.len(), Some(noise));
    population * z + coherence * xy
}

/// Correlation for the settings selected by `word` from `table`.
pub fn correlate_word(table: &SettingsTable, noise: Option<NoiseSpec>, word: u32) -> Result<f64> {
    let settings = table.resolve(word)?;
    Ok(match noise {
        None => correlation_ghz(&settings),
        Some(noise) => correlation_noisy(&settings, noise),
    })
}

/// Bell value of `expansion` evaluated through the closed-form correlations.
pub fn bell_value_closed_form(
    expansion: &BellExpansion,
    table: &SettingsTable,
    noise: Option<NoiseSpec>,
) -> Result<f64> {
    if table.n() != expansion.n() {
        return Err(Error::DimensionMismatch {
            expected: expansion.n(),
            found: table.n(),
        });
    }
    expansion.bell_value(|w| correlate_word(table, noise, w))
}
