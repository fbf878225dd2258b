//! The N-party Mermin–Klyshko Bell operator as a table of coefficients over
//! setting-choice words.
//!
//! A word is an `n`-bit integer; bit `i` set means party `i` (zero-based,
//! party 1 in the least significant bit) measures its primed observable.
//! Starting from the CHSH form `½(AB + AB′ + A′B − A′B′)` the operator grows
//! by
//!
//! ```text
//! B_n = ½ B_{n-1} ⊗ (K + K′) + ½ B′_{n-1} ⊗ (K − K′)
//! ```
//!
//! where `B′` exchanges every primed and unprimed observable. Coefficients
//! are kept as exact dyadic rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use crate::channels_states::DENSE_QUBIT_CAP;
use crate::error::{Error, Result};

/// Exact rational `num / 2^shift`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i64,
    shift: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, shift: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, shift: 0 };

    pub fn new(num: i64, shift: u32) -> Self {
        let mut d = Dyadic { num, shift };
        d.reduce();
        d
    }

    fn reduce(&mut self) {
        if self.num == 0 {
            self.shift = 0;
            return;
        }
        while self.shift > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.shift -= 1;
        }
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> i64 {
        1i64 << self.shift
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn half(self) -> Self {
        Dyadic::new(self.num, self.shift + 1)
    }

    pub fn abs(self) -> Self {
        Dyadic { num: self.num.abs(), shift: self.shift }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.denominator() as f64
    }

    /// True when `self · 2^k` is an integer.
    pub fn is_multiple_of_pow2_inv(&self, k: u32) -> bool {
        self.shift <= k
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let shift = self.shift.max(rhs.shift);
        let a = self.num << (shift - self.shift);
        let b = rhs.num << (shift - rhs.shift);
        Dyadic::new(a + b, shift)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, shift: self.shift }
    }
}

impl Mul<i64> for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: i64) -> Dyadic {
        Dyadic::new(self.num * rhs, self.shift)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let shift = self.shift.max(other.shift);
        (self.num << (shift - self.shift)).cmp(&(other.num << (shift - other.shift)))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.denominator())
    }
}

impl std::str::FromStr for Dyadic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (num, den) = s.split_once('/').ok_or_else(|| format!("'{s}' is not num/den"))?;
        let num: i64 = num.parse().map_err(|e| format!("numerator: {e}"))?;
        let den: i64 = den.parse().map_err(|e| format!("denominator: {e}"))?;
        if den <= 0 || den.count_ones() != 1 {
            return Err(format!("denominator {den} is not a power of two"));
        }
        Ok(Dyadic::new(num, den.trailing_zeros()))
    }
}

/// Coefficient table of a Bell operator over setting-choice words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellExpansion {
    n: usize,
    coeffs: BTreeMap<u32, Dyadic>,
}

impl BellExpansion {
    /// Mermin–Klyshko operator for `n ≥ 2` parties.
    pub fn build_mk(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewParties(n));
        }
        if n > 31 {
            return Err(Error::QubitCountOutOfRange { n, cap: 31 });
        }
        let half = Dyadic::new(1, 1);
        let mut b = BellExpansion {
            n: 2,
            coeffs: BTreeMap::from([(0b00, half), (0b10, half), (0b01, half), (0b11, -half)]),
        };
        for m in 3..=n {
            let swapped = b.prime_swap();
            let last = 1u32 << (m - 1);
            let mut next: BTreeMap<u32, Dyadic> = BTreeMap::new();
            let mut push = |w: u32, c: Dyadic| {
                let e = next.entry(w).or_insert(Dyadic::ZERO);
                *e = *e + c;
            };
            for (&w, &c) in &b.coeffs {
                push(w, c.half());
                push(w | last, c.half());
            }
            for (&w, &c) in &swapped.coeffs {
                push(w, c.half());
                push(w | last, -c.half());
            }
            next.retain(|_, c| !c.is_zero());
            b = BellExpansion { n: m, coeffs: next };
        }
        Ok(b)
    }

    /// Builds an expansion from explicit terms; zero coefficients are dropped.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (u32, Dyadic)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewParties(n));
        }
        let mut coeffs = BTreeMap::new();
        for (w, c) in terms {
            if n < 32 && w >> n != 0 {
                return Err(Error::WordOutOfRange { word: w, n });
            }
            let e = coeffs.entry(w).or_insert(Dyadic::ZERO);
            *e = *e + c;
        }
        coeffs.retain(|_, c: &mut Dyadic| !c.is_zero());
        Ok(BellExpansion { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, word: u32) -> Dyadic {
        self.coeffs.get(&word).copied().unwrap_or(Dyadic::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, Dyadic)> + '_ {
        self.coeffs.iter().map(|(&w, &c)| (w, c))
    }

    /// Whether the party count is beyond what the dense density-matrix path
    /// supports. The expansion itself is still valid.
    pub fn exceeds_dense_cap(&self) -> bool {
        self.n > DENSE_QUBIT_CAP
    }

    fn mask(&self) -> u32 {
        if self.n >= 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    /// Exchanges primed and unprimed observables of every party.
    pub fn prime_swap(&self) -> Self {
        let mask = self.mask();
        BellExpansion {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(&w, &c)| (!w & mask, c)).collect(),
        }
    }

    /// `Σ_w coeff(w) · correlate(w)`.
    pub fn bell_value<E, F>(&self, mut correlate: F) -> std::result::Result<f64, E>
    where
        F: FnMut(u32) -> std::result::Result<f64, E>,
    {
        let mut total = 0.0;
        for (&w, &c) in &self.coeffs {
            total += c.to_f64() * correlate(w)?;
        }
        Ok(total)
    }

    /// Largest `|⟨B⟩|` over all deterministic local strategies, i.e. every
    /// assignment of ±1 outcomes to each party's two settings. Exact.
    pub fn deterministic_max(&self) -> Dyadic {
        let n = self.n;
        assert!(n <= 15, "exhaustive search over 2^(2n) strategies");
        let mut best = Dyadic::ZERO;
        for strategy in 0u64..(1u64 << (2 * n)) {
            let mut total = Dyadic::ZERO;
            for (&w, &c) in &self.coeffs {
                // outcome of party i for setting s is bit (2i + s) of the strategy
                let mut negatives = 0;
                for i in 0..n {
                    let s = (w >> i & 1) as usize;
                    negatives += (strategy >> (2 * i + s) & 1) as u32;
                }
                total = total + if negatives % 2 == 0 { c } else { -c };
            }
            best = best.max(total.abs());
        }
        best
    }

    /// Text dump, one term per line: `<word> <num>/<den>`. The word is
    /// written party 1 first, `1` meaning primed.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (&w, &c) in &self.coeffs {
            out.push_str(&self.word_string(w));
            out.push(' ');
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    pub fn word_string(&self, word: u32) -> String {
        (0..self.n)
            .map(|i| if word >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Parses the format written by [`BellExpansion::dump`].
    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut n = None;
        let mut terms = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| Error::Parse { line: line_no, reason };
            let (word, coeff) = line
                .split_once(' ')
                .ok_or_else(|| bad("expected '<word> <num>/<den>'".into()))?;
            if !word.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(bad(format!("word '{word}' is not a bit string")));
            }
            match n {
                None => n = Some(word.len()),
                Some(len) if len != word.len() => {
                    return Err(bad(format!("word length {} differs from {len}", word.len())))
                }
                _ => {}
            }
            let w = word
                .bytes()
                .enumerate()
                .fold(0u32, |acc, (i, b)| acc | (u32::from(b == b'1') << i));
            let c: Dyadic = coeff.trim().parse().map_err(bad)?;
            terms.push((w, c));
        }
        let n = n.ok_or(Error::Parse { line: 0, reason: "empty dump".into() })?;
        Self::from_terms(n, terms)
    }
}
