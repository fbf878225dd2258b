//! The largest per-qubit noise `p_max` at which the optimized Bell value
//! still exceeds the local bound 1.

use crate::channels_states::{NoiseKind, NoiseSpec};
use crate::error::{Error, Result};
use crate::optimizer::{max_bell, OptimizerConfig};

pub const MIN_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_CAP: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    /// Coarse scan step from `p = 0`.
    pub scan_step: f64,
    /// Highest probed `p`; the scan never reaches complete decoherence.
    /// Must stay low enough that the remaining violation for even-`n`
    /// dephasing, `(1 − p)^4 / 2` at two parties, is resolvable next to 1 in
    /// double precision.
    pub cap: f64,
    /// A probe counts as violating when `max_bell − 1` exceeds this.
    pub violation_margin: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            scan_step: 0.01,
            cap: DEFAULT_CAP,
            violation_margin: 1e-14,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub n: usize,
    pub kind: NoiseKind,
    /// `None` when every probe up to `cap` still violates.
    pub p_max: Option<f64>,
    /// Width of the final bracket; `p_max` is its midpoint.
    pub bracket_width: f64,
    pub analytic_reference: Option<f64>,
    pub cap: f64,
}

/// Closed-form threshold where one is known: `1 − 2^{(1/n − 1)/2}` for
/// depolarizing noise and for dephasing at odd `n`, and the dissipation law
/// `1 − 2^{1/n − 1}`. Even-`n` dephasing has none.
pub fn analytic_pmax(n: usize, kind: NoiseKind) -> Option<f64> {
    let inv = 1.0 / n as f64;
    match kind {
        NoiseKind::Depolarizing => Some(1.0 - 2f64.powf((inv - 1.0) / 2.0)),
        NoiseKind::Dephasing if n % 2 == 1 => Some(1.0 - 2f64.powf((inv - 1.0) / 2.0)),
        NoiseKind::Dephasing => None,
        NoiseKind::Dissipation => Some(1.0 - 2f64.powf(inv - 1.0)),
    }
}

/// Optimized Bell value at `p`, failing if no start converged.
pub fn probe(n: usize, kind: NoiseKind, p: f64, config: &OptimizerConfig) -> Result<f64> {
    let report = max_bell(n, Some(NoiseSpec::new(kind, p)?), config)?;
    if !report.converged {
        return Err(Error::NotConverged { p });
    }
    Ok(report.best_value)
}

fn violates(n: usize, kind: NoiseKind, p: f64, config: &ThresholdConfig) -> Result<bool> {
    Ok(probe(n, kind, p, &config.optimizer)? - 1.0 > config.violation_margin)
}

/// Scan grid `0, step, 2·step, …` strictly below `cap`, then `cap`.
fn scan_points(step: f64, cap: f64) -> Vec<f64> {
    let mut points = Vec::new();
    let mut k = 0u32;
    loop {
        let p = f64::from(k) * step;
        if p >= cap {
            break;
        }
        points.push(p);
        k += 1;
    }
    points.push(cap);
    points
}

/// Locates the first downward crossing of `max_bell(p) − 1` by a coarse scan
/// followed by bisection down to `tolerance`.
pub fn numeric_pmax(n: usize, kind: NoiseKind, tolerance: f64, config: &ThresholdConfig) -> Result<ThresholdResult> {
    if !(tolerance >= MIN_TOLERANCE) {
        return Err(Error::ToleranceTooSmall(tolerance));
    }
    let mut result = ThresholdResult {
        n,
        kind,
        p_max: None,
        bracket_width: 0.0,
        analytic_reference: analytic_pmax(n, kind),
        cap: config.cap,
    };

    let points = scan_points(config.scan_step, config.cap);
    let mut bracket = None;
    for (k, &p) in points.iter().enumerate() {
        if !violates(n, kind, p, config)? {
            if k == 0 {
                return Err(Error::NoViolation);
            }
            bracket = Some((points[k - 1], p));
            break;
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(result);
    };

    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if violates(n, kind, mid, config)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result.p_max = Some(0.5 * (lo + hi));
    result.bracket_width = hi - lo;
    Ok(result)
}

impl ThresholdResult {
    /// Re-probes both sides of the bracket: `p_max − width` must violate and
    /// `p_max + width` must not. Trivially true when no threshold was found.
    pub fn verify_bracket(&self, config: &ThresholdConfig) -> Result<bool> {
        let Some(p) = self.p_max else {
            return Ok(true);
        };
        let below = (p - self.bracket_width).max(0.0);
        let above = (p + self.bracket_width).min(1.0);
        Ok(violates(self.n, self.kind, below, config)? && !violates(self.n, self.kind, above, config)?)
    }

    /// `numeric − analytic`, when both exist.
    pub fn deviation(&self) -> Option<f64> {
        Some(self.p_max? - self.analytic_reference?)
    }
}
