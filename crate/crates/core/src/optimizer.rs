//! Maximization of the Mermin–Klyshko Bell value over all measurement
//! directions for a fixed (decohered) GHZ state.
//!
//! The Bell value is linear in every single observable, so with all other
//! parties frozen the best direction for one of a party's settings is the
//! normalized effective field obtained by contracting the state, the
//! expansion and the other observables against the Pauli matrices on that
//! party's slot. Cycling that exact update over the parties (see-saw) from
//! many random starts, followed by a simplex polish of the winner on the
//! closed-form evaluator, gives the reported maximum.

use std::f64::consts::TAU;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bell_operator::BellExpansion;
use crate::channels_states::{decohered_ghz, DensityMatrix, NoiseSpec, DENSE_QUBIT_CAP};
use crate::correlations::bell_value_closed_form;
use crate::error::{Error, Result};
use crate::observables::{ObservableSetting, SettingPair, SettingsTable};

pub const DEFAULT_SEED: u64 = 0x4D4B_5345_4553_4157;

/// Effective fields below this norm leave the setting untouched.
const DEGENERATE_FIELD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Random see-saw starts.
    pub starts: usize,
    pub seed: u64,
    /// A start has converged once a full sweep gains less than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Run the simplex polish on the best see-saw result.
    pub polish: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: DEFAULT_SEED,
            tolerance: 1e-12,
            max_sweeps: 500,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub n: usize,
    pub noise: Option<NoiseSpec>,
    pub best_value: f64,
    pub best_settings: SettingsTable,
    pub starts_used: usize,
    /// At least one start met the sweep tolerance.
    pub converged: bool,
    pub converged_starts: usize,
    /// Sweeps performed by each start.
    pub iterations: Vec<usize>,
    /// The polish improved on the see-saw optimum.
    pub polished: bool,
}

fn check_dims(settings: &SettingsTable, rho: &DensityMatrix, expansion: &BellExpansion) -> Result<()> {
    for found in [settings.n(), rho.n()] {
        if found != expansion.n() {
            return Err(Error::DimensionMismatch {
                expected: expansion.n(),
                found,
            });
        }
    }
    Ok(())
}

fn setting_matrices(settings: &SettingsTable) -> Vec<[Matrix2<Complex64>; 2]> {
    settings
        .pairs()
        .iter()
        .map(|pair| [pair.unprimed.to_matrix(), pair.primed.to_matrix()])
        .collect()
}

fn select(mats: &[[Matrix2<Complex64>; 2]], word: u32, out: &mut Vec<Matrix2<Complex64>>) {
    out.clear();
    out.extend(mats.iter().enumerate().map(|(q, m)| m[(word >> q & 1) as usize]));
}

/// Bell value through the density-matrix path.
pub fn dense_bell_value(rho: &DensityMatrix, expansion: &BellExpansion, settings: &SettingsTable) -> Result<f64> {
    check_dims(settings, rho, expansion)?;
    let mats = setting_matrices(settings);
    let mut ops = Vec::with_capacity(settings.n());
    expansion.bell_value(|w| {
        select(&mats, w, &mut ops);
        Ok(rho.product_trace(&ops).re)
    })
}

/// Effective fields `(F, F′)` of `party`: the Bell value equals
/// `a·F + a′·F′ + const` in that party's two Bloch vectors.
pub fn effective_fields(
    settings: &SettingsTable,
    rho: &DensityMatrix,
    expansion: &BellExpansion,
    party: usize,
) -> Result<[[f64; 3]; 2]> {
    check_dims(settings, rho, expansion)?;
    if party >= settings.n() {
        return Err(Error::QubitIndex {
            index: party,
            n: settings.n(),
        });
    }
    let mats = setting_matrices(settings);
    let mut ops = Vec::with_capacity(settings.n());
    let mut fields = [[0.0; 3]; 2];
    for (w, c) in expansion.terms() {
        select(&mats, w, &mut ops);
        let r = rho.contract_except(&ops, party);
        let c = c.to_f64();
        let slot = (w >> party & 1) as usize;
        let i = Complex64::i();
        let fx = r[(0, 1)] + r[(1, 0)];
        let fy = -i * r[(0, 1)] + i * r[(1, 0)];
        let fz = r[(0, 0)] - r[(1, 1)];
        fields[slot][0] += c * fx.re;
        fields[slot][1] += c * fy.re;
        fields[slot][2] += c * fz.re;
    }
    Ok(fields)
}

/// Replaces both settings of `party` with their exact maximizers given the
/// other parties. A slot whose field vanishes keeps its setting.
pub fn seesaw_step(
    settings: &SettingsTable,
    rho: &DensityMatrix,
    expansion: &BellExpansion,
    party: usize,
) -> Result<SettingsTable> {
    let fields = effective_fields(settings, rho, expansion, party)?;
    let mut next = settings.clone();
    for (slot, field) in fields.iter().enumerate() {
        let norm = field.iter().map(|f| f * f).sum::<f64>().sqrt();
        if norm > DEGENERATE_FIELD {
            next.pair_mut(party).set(slot == 1, ObservableSetting::from_bloch(*field)?);
        }
    }
    Ok(next)
}

fn random_setting(rng: &mut impl Rng) -> ObservableSetting {
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    ObservableSetting::canonicalize(cos_theta.acos(), phi).expect("finite angles")
}

/// Random table with directions uniform on the sphere.
pub fn random_settings(n: usize, rng: &mut impl Rng) -> Result<SettingsTable> {
    let pairs = (0..n)
        .map(|_| SettingPair {
            unprimed: random_setting(rng),
            primed: random_setting(rng),
        })
        .collect();
    SettingsTable::new(pairs)
}

/// Stream for start `index`; independent of scheduling.
pub fn start_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

struct StartOutcome {
    value: f64,
    settings: SettingsTable,
    sweeps: usize,
    converged: bool,
}

fn run_start(
    index: usize,
    rho: &DensityMatrix,
    expansion: &BellExpansion,
    config: &OptimizerConfig,
) -> Result<StartOutcome> {
    let n = expansion.n();
    let mut rng = start_rng(config.seed, index);
    let mut settings = random_settings(n, &mut rng)?;
    let mut value = dense_bell_value(rho, expansion, &settings)?;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < config.max_sweeps {
        for party in 0..n {
            settings = seesaw_step(&settings, rho, expansion, party)?;
        }
        sweeps += 1;
        let next = dense_bell_value(rho, expansion, &settings)?;
        let gain = next - value;
        value = next;
        if gain < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok(StartOutcome {
        value,
        settings,
        sweeps,
        converged,
    })
}

fn table_to_angles(table: &SettingsTable) -> Vec<f64> {
    table
        .pairs()
        .iter()
        .flat_map(|p| [p.unprimed.theta(), p.unprimed.phi(), p.primed.theta(), p.primed.phi()])
        .collect()
}

fn angles_to_table(x: &[f64]) -> Result<SettingsTable> {
    let pairs = x
        .chunks_exact(4)
        .map(|c| {
            Ok(SettingPair {
                unprimed: ObservableSetting::canonicalize(c[0], c[1])?,
                primed: ObservableSetting::canonicalize(c[2], c[3])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SettingsTable::new(pairs)
}

/// Plain Nelder–Mead minimizer; returns the best vertex and its value.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], step: f64, max_evals: usize, ftol: f64) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for k in 0..dim {
        let mut v = x0.to_vec();
        v[k] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = dim + 1;

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[dim] - values[0] <= ftol {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|v| v[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let (contracted, fc) = if fr < values[dim] {
                let c = along(-0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = f(&c);
                (c, fc)
            };
            evals += 1;
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                for i in 1..=dim {
                    let shrunk: Vec<f64> = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    values[i] = f(&shrunk);
                    simplex[i] = shrunk;
                }
                evals += dim;
            }
        }
    }
    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    (simplex[best].clone(), values[best])
}

fn polish(expansion: &BellExpansion, noise: Option<NoiseSpec>, start: &SettingsTable) -> Result<SettingsTable> {
    let x0 = table_to_angles(start);
    let objective = |x: &[f64]| -> f64 {
        match angles_to_table(x).and_then(|t| bell_value_closed_form(expansion, &t, noise)) {
            Ok(v) => -v,
            Err(_) => f64::INFINITY,
        }
    };
    let (x, _) = nelder_mead(objective, &x0, 1e-3, 400 * x0.len(), 1e-15);
    angles_to_table(&x)
}

/// Largest Bell value found for the GHZ state under `noise` (pure when
/// `None`).
pub fn max_bell(n: usize, noise: Option<NoiseSpec>, config: &OptimizerConfig) -> Result<OptimizationReport> {
    if n < 2 {
        return Err(Error::TooFewParties(n));
    }
    if n > DENSE_QUBIT_CAP {
        return Err(Error::QubitCountOutOfRange { n, cap: DENSE_QUBIT_CAP });
    }
    let rho = decohered_ghz(n, noise)?;
    let expansion = BellExpansion::build_mk(n)?;
    max_bell_for_state(&rho, &expansion, noise, config)
}

/// Same as [`max_bell`] with the state and expansion supplied. `noise` only
/// selects the closed-form evaluator used by the polish and must describe
/// `rho`.
pub fn max_bell_for_state(
    rho: &DensityMatrix,
    expansion: &BellExpansion,
    noise: Option<NoiseSpec>,
    config: &OptimizerConfig,
) -> Result<OptimizationReport> {
    let starts = config.starts.max(1);
    let outcomes = (0..starts)
        .into_par_iter()
        .map(|i| run_start(i, rho, expansion, config))
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best].value {
            best = i;
        }
    }
    let mut settings = outcomes[best].settings.clone();
    let mut value = outcomes[best].value;

    let mut polished = false;
    if config.polish {
        let candidate = polish(expansion, noise, &settings)?;
        let candidate_value = dense_bell_value(rho, expansion, &candidate)?;
        if candidate_value > value {
            settings = candidate;
            value = candidate_value;
            polished = true;
        }
    }

    let converged_starts = outcomes.iter().filter(|o| o.converged).count();
    Ok(OptimizationReport {
        n: expansion.n(),
        noise,
        best_value: value.abs(),
        best_settings: settings,
        starts_used: starts,
        converged: converged_starts > 0,
        converged_starts,
        iterations: outcomes.iter().map(|o| o.sweeps).collect(),
        polished,
    })
}
