//! Cross-path audit: closed-form correlations against dense expectations,
//! and closed-form decohered states against qubit-by-qubit channel
//! application.

use crate::channels_states::{
    decohered_ghz_channelwise, decohered_ghz_closedform, ghz, NoiseKind, NoiseSpec, DENSE_QUBIT_CAP,
};
use crate::correlations::{correlation_ghz, correlation_noisy};
use crate::error::{Error, Result};
use crate::observables::ObservableSetting;
use crate::optimizer::{random_settings, start_rng, DEFAULT_SEED};

pub const CORRELATION_TOL: f64 = 1e-12;
pub const MATRIX_TOL: f64 = 1e-13;

/// Noise degrees used for the correlation comparison.
pub const CORRELATION_PS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_max: 5,
            trials: 50,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Correlation,
    Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Breach {
    pub check: Check,
    pub n: usize,
    pub channel: Option<NoiseKind>,
    pub p: f64,
    /// Stream index of the random settings table (correlation checks only).
    pub settings_seed: Option<u64>,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifySummary {
    pub correlation_comparisons: usize,
    pub max_correlation_deviation: f64,
    pub matrix_comparisons: usize,
    pub max_matrix_deviation: f64,
    pub breaches: Vec<Breach>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.breaches.is_empty()
    }
}

pub fn run_verify(config: &VerifyConfig) -> Result<VerifySummary> {
    run_verify_with(config, |settings, noise| match noise {
        None => correlation_ghz(settings),
        Some(noise) => correlation_noisy(settings, noise),
    })
}

/// Runs the audit with `closed_form` standing in for the correlation
/// formulas.
pub fn run_verify_with<F>(config: &VerifyConfig, closed_form: F) -> Result<VerifySummary>
where
    F: Fn(&[ObservableSetting], Option<NoiseSpec>) -> f64,
{
    if config.n_max < 2 {
        return Err(Error::TooFewParties(config.n_max));
    }
    if config.n_max > DENSE_QUBIT_CAP {
        return Err(Error::QubitCountOutOfRange {
            n: config.n_max,
            cap: DENSE_QUBIT_CAP,
        });
    }
    let mut summary = VerifySummary::default();

    let mut noises: Vec<Option<NoiseSpec>> = vec![None];
    for kind in NoiseKind::ALL {
        for p in CORRELATION_PS {
            noises.push(Some(NoiseSpec::new(kind, p)?));
        }
    }

    let mut stream = 0u64;
    for n in 2..=config.n_max {
        for &noise in &noises {
            let rho = match noise {
                None => ghz(n)?,
                Some(noise) => decohered_ghz_channelwise(n, noise)?,
            };
            for _ in 0..config.trials {
                let settings_seed = stream;
                stream += 1;
                let mut rng = start_rng(config.seed, settings_seed as usize);
                let table = random_settings(n, &mut rng)?;
                let mut worst: f64 = 0.0;
                for word in 0..1u32 << n {
                    let settings = table.resolve(word)?;
                    let dense = rho.expectation(&settings)?;
                    worst = worst.max((closed_form(&settings, noise) - dense).abs());
                    summary.correlation_comparisons += 1;
                }
                summary.max_correlation_deviation = summary.max_correlation_deviation.max(worst);
                if !(worst < CORRELATION_TOL) {
                    summary.breaches.push(Breach {
                        check: Check::Correlation,
                        n,
                        channel: noise.map(|z| z.kind()),
                        p: noise.map_or(0.0, |z| z.p()),
                        settings_seed: Some(settings_seed),
                        deviation: worst,
                    });
                }
            }
        }

        for kind in NoiseKind::ALL {
            for step in 0..=10 {
                let noise = NoiseSpec::new(kind, f64::from(step) / 10.0)?;
                let dev = decohered_ghz_channelwise(n, noise)?.max_abs_diff(&decohered_ghz_closedform(n, noise)?);
                summary.matrix_comparisons += 1;
                summary.max_matrix_deviation = summary.max_matrix_deviation.max(dev);
                if !(dev < MATRIX_TOL) {
                    summary.breaches.push(Breach {
                        check: Check::Matrix,
                        n,
                        channel: Some(kind),
                        p: noise.p(),
                        settings_seed: None,
                        deviation: dev,
                    });
                }
            }
        }
    }
    Ok(summary)
}
