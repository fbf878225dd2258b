//! GHZ states and their locally decohered versions.
//!
//! Every state can be built two ways: from closed-form density matrices, or
//! by pushing a pure GHZ state through the element-wise single-qubit maps
//! one qubit at a time. The two constructions audit each other.
//!
//! Basis index convention: qubit `q` is bit `q` of the row/column index, so
//! qubit 0 (party 1) is the least significant bit.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::ObservableSetting;

/// Largest qubit count handled by the dense representation.
pub const DENSE_QUBIT_CAP: usize = 12;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Depolarizing,
    Dephasing,
    Dissipation,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::Depolarizing, NoiseKind::Dephasing, NoiseKind::Dissipation];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::Dephasing => "dephasing",
            NoiseKind::Dissipation => "dissipation",
        }
    }

    /// Image of `|i⟩⟨j|` under the single-qubit map as a list of
    /// `(i′, j′, weight)` terms.
    fn map_element(self, i: usize, j: usize, p: f64) -> ([(usize, usize, f64); 3], usize) {
        let none = (0, 0, 0.0);
        match (self, i == j) {
            (NoiseKind::Depolarizing, true) => ([(i, i, 1.0 - p), (0, 0, p / 2.0), (1, 1, p / 2.0)], 3),
            (NoiseKind::Depolarizing, false) => ([(i, j, 1.0 - p), none, none], 1),
            (NoiseKind::Dephasing, true) => ([(i, i, 1.0), none, none], 1),
            (NoiseKind::Dephasing, false) => ([(i, j, 1.0 - p), none, none], 1),
            (NoiseKind::Dissipation, true) => ([(i, i, 1.0 - p), (0, 0, p), none], 2),
            (NoiseKind::Dissipation, false) => ([(i, j, (1.0 - p).sqrt()), none, none], 1),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depolarizing" => Ok(NoiseKind::Depolarizing),
            "dephasing" => Ok(NoiseKind::Dephasing),
            "dissipation" => Ok(NoiseKind::Dissipation),
            other => Err(Error::UnknownChannel(other.to_string())),
        }
    }
}

/// A local channel and its per-qubit degree of decoherence `p ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    kind: NoiseKind,
    p: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(Self { kind, p })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > DENSE_QUBIT_CAP {
        return Err(Error::QubitCountOutOfRange { n, cap: DENSE_QUBIT_CAP });
    }
    Ok(())
}

fn check_ghz_qubits(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewParties(n));
    }
    check_qubits(n)
}

/// Dense `2^n × 2^n` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: DMatrix<Complex64>,
    nonzeros: Vec<(usize, usize, Complex64)>,
}

impl DensityMatrix {
    fn from_raw(n: usize, data: DMatrix<Complex64>) -> Self {
        let nonzeros = data
            .column_iter()
            .enumerate()
            .flat_map(|(c, col)| {
                col.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
                    .map(move |(r, v)| (r, c, *v))
                    .collect::<Vec<_>>()
            })
            .collect();
        Self { n, data, nonzeros }
    }

    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn from_matrix(n: usize, data: DMatrix<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.nrows().max(data.ncols()),
            });
        }
        let rho = Self::from_raw(n, data);
        rho.validate()?;
        Ok(rho)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn nonzeros(&self) -> &[(usize, usize, Complex64)] {
        &self.nonzeros
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.data - self.data.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()).scale(0.5);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (max deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    /// Largest entry-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.data - &other.data).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Row-major text dump, one row per line, entries as `re,im` separated
    /// by single spaces.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|c| {
                    let z = self.data[(r, c)];
                    format!("{},{}", z.re, z.im)
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// `ρ` with the single-qubit map of `noise` applied to `qubit`.
    pub fn apply_local_channel(&self, noise: NoiseSpec, qubit: usize) -> Result<DensityMatrix> {
        if qubit >= self.n {
            return Err(Error::QubitIndex { index: qubit, n: self.n });
        }
        let dim = self.dim();
        let bit = 1usize << qubit;
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        for c in 0..dim {
            for r in 0..dim {
                let v = self.data[(r, c)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let i = usize::from(r & bit != 0);
                let j = usize::from(c & bit != 0);
                let (images, count) = noise.kind.map_element(i, j, noise.p);
                for &(ii, jj, w) in &images[..count] {
                    let rr = (r & !bit) | (ii * bit);
                    let cc = (c & !bit) | (jj * bit);
                    out[(rr, cc)] += v * w;
                }
            }
        }
        Ok(Self::from_raw(self.n, out))
    }

    /// `Tr{(A₁ ⊗ … ⊗ A_n) ρ}` for one observable per qubit.
    pub fn expectation(&self, settings: &[ObservableSetting]) -> Result<f64> {
        if settings.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: settings.len(),
            });
        }
        let ops: Vec<Matrix2<Complex64>> = settings.iter().map(|s| s.to_matrix()).collect();
        Ok(self.product_trace(&ops).re)
    }

    /// `Tr{(O₁ ⊗ … ⊗ O_n) ρ}` for arbitrary 2×2 factors.
    pub fn product_trace(&self, ops: &[Matrix2<Complex64>]) -> Complex64 {
        debug_assert_eq!(ops.len(), self.n);
        let mut total = Complex64::new(0.0, 0.0);
        for &(r, c, v) in &self.nonzeros {
            // Tr(Oρ) = Σ O[c][r] ρ[r][c]
            let mut w = v;
            for (q, op) in ops.iter().enumerate() {
                w *= op[((c >> q) & 1, (r >> q) & 1)];
            }
            total += w;
        }
        total
    }

    /// Contracts `ρ` against every factor except the one on `qubit`. The
    /// returned 2×2 matrix `R` satisfies `Tr{(… ⊗ X ⊗ …) ρ} = Σᵢⱼ X[i][j] R[i][j]`
    /// for any `X` placed on `qubit`.
    pub fn contract_except(&self, ops: &[Matrix2<Complex64>], qubit: usize) -> Matrix2<Complex64> {
        debug_assert_eq!(ops.len(), self.n);
        let mut reduced = Matrix2::<Complex64>::zeros();
        for &(r, c, v) in &self.nonzeros {
            let mut w = v;
            for (q, op) in ops.iter().enumerate() {
                if q != qubit {
                    w *= op[((c >> q) & 1, (r >> q) & 1)];
                }
            }
            reduced[((c >> qubit) & 1, (r >> qubit) & 1)] += w;
        }
        reduced
    }
}

/// Pure GHZ state `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz(n: usize) -> Result<DensityMatrix> {
    check_ghz_qubits(n)?;
    let dim = 1usize << n;
    let top = dim - 1;
    let mut data = DMatrix::<Complex64>::zeros(dim, dim);
    for (r, c) in [(0, 0), (0, top), (top, 0), (top, top)] {
        data[(r, c)] = Complex64::new(0.5, 0.0);
    }
    Ok(DensityMatrix::from_raw(n, data))
}

/// GHZ state with `noise` applied once to every qubit, in index order.
pub fn decohered_ghz_channelwise(n: usize, noise: NoiseSpec) -> Result<DensityMatrix> {
    let mut rho = ghz(n)?;
    for q in 0..n {
        rho = rho.apply_local_channel(noise, q)?;
    }
    Ok(rho)
}

/// Adds `weight · ⊗_q diag(d0, d1)` to the diagonal.
fn add_product_diagonal(data: &mut DMatrix<Complex64>, n: usize, d0: f64, d1: f64, weight: f64) {
    for x in 0..1usize << n {
        let ones = x.count_ones() as i32;
        let value = weight * d1.powi(ones) * d0.powi(n as i32 - ones);
        data[(x, x)] += Complex64::new(value, 0.0);
    }
}

/// Decohered GHZ state from its closed-form density matrix.
pub fn decohered_ghz_closedform(n: usize, noise: NoiseSpec) -> Result<DensityMatrix> {
    check_ghz_qubits(n)?;
    let dim = 1usize << n;
    let top = dim - 1;
    let p = noise.p;
    let mut data = DMatrix::<Complex64>::zeros(dim, dim);
    let coherence = match noise.kind {
        NoiseKind::Depolarizing => {
            add_product_diagonal(&mut data, n, 1.0 - p / 2.0, p / 2.0, 0.5);
            add_product_diagonal(&mut data, n, p / 2.0, 1.0 - p / 2.0, 0.5);
            0.5 * (1.0 - p).powi(n as i32)
        }
        NoiseKind::Dephasing => {
            data[(0, 0)] += Complex64::new(0.5, 0.0);
            data[(top, top)] += Complex64::new(0.5, 0.0);
            0.5 * (1.0 - p).powi(n as i32)
        }
        NoiseKind::Dissipation => {
            data[(0, 0)] += Complex64::new(0.5, 0.0);
            add_product_diagonal(&mut data, n, p, 1.0 - p, 0.5);
            0.5 * (1.0 - p).powf(n as f64 / 2.0)
        }
    };
    data[(0, top)] += Complex64::new(coherence, 0.0);
    data[(top, 0)] += Complex64::new(coherence, 0.0);
    Ok(DensityMatrix::from_raw(n, data))
}

/// Pure GHZ for `None`, closed-form decohered GHZ otherwise.
pub fn decohered_ghz(n: usize, noise: Option<NoiseSpec>) -> Result<DensityMatrix> {
    match noise {
        None => ghz(n),
        Some(noise) => decohered_ghz_closedform(n, noise),
    }
}
