//! Color-support indicator processes, their permutation and bit-string
//! targets, and the insertion chains that couple them.
//!
//! The targets are computed by enumeration. Independent uniform variables are
//! replaced by a uniform permutation (ties are null events) and fair bits by
//! all `2^n` strings.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::Serialize;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::kernel::{spread_over_rotations, Kernel};
use crate::recurrence::line_window_law;
use crate::scalar::Probability;
use crate::word::{Sequence, Word};
use crate::{ExactDist, Rational};

/// A binary vector, cyclic where the context says so.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryState(Vec<u8>);

impl BinaryState {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Parse(format!("{bits:?}")));
        }
        Ok(BinaryState(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn has_adjacent_ones_cyclic(&self) -> bool {
        let n = self.0.len();
        match n {
            0 | 1 => false,
            2 => self.0[0] == 1 && self.0[1] == 1,
            _ => (0..n).any(|i| self.0[i] == 1 && self.0[(i + 1) % n] == 1),
        }
    }
}

impl Sequence for BinaryState {
    fn symbols(&self) -> &[u8] {
        &self.0
    }

    fn from_symbols(symbols: Vec<u8>) -> Self {
        BinaryState(symbols)
    }
}

impl fmt::Display for BinaryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryState({self})")
    }
}

impl FromStr for BinaryState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(s.into())),
            })
            .collect::<Result<Vec<_>>>()
            .map(BinaryState)
    }
}

/// Which color-support process a chain tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ChainVariant {
    /// Colors `{1, 2}` of the 4-coloring; target is the descent set.
    ColorsOneTwoQ4,
    /// Color `1` of the 3-coloring; target is the peak set.
    ColorOneQ3,
}

impl ChainVariant {
    pub fn q(self) -> u8 {
        match self {
            ChainVariant::ColorsOneTwoQ4 => 4,
            ChainVariant::ColorOneQ3 => 3,
        }
    }

    /// The indicator map applied to a coloring.
    pub fn indicator(self, x: &Word) -> BinaryState {
        match self {
            ChainVariant::ColorsOneTwoQ4 => colors_indicator(x, &[1, 2]),
            ChainVariant::ColorOneQ3 => colors_indicator(x, &[1]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChainVariant::ColorsOneTwoQ4 => "colors-1-2-q4",
            ChainVariant::ColorOneQ3 => "color-1-q3",
        }
    }
}

/// `(1[x_i in colors])_i`.
pub fn colors_indicator(x: &Word, colors: &[u8]) -> BinaryState {
    BinaryState(
        x.as_slice()
            .iter()
            .map(|c| u8::from(colors.contains(c)))
            .collect(),
    )
}

fn check_range(n: usize, min: usize, max: usize) -> Result<()> {
    if n < min || n > max {
        return Err(Error::LengthOutOfRange { n, min, max });
    }
    Ok(())
}

/// Law of `stat` under a uniform permutation of `0..m`.
fn permutation_law<F>(m: usize, stat: F) -> Result<ExactDist<BinaryState>>
where
    F: Fn(&[usize]) -> BinaryState,
{
    let perms = (0..m).permutations(m).map(|p| (stat(&p), 1u64));
    Dist::from_weights(perms)
}

/// Cyclic descent indicator `(1[U_i > U_{i+1}])_{i=1..n}`, indices mod `n`.
pub fn descent_law(n: usize) -> Result<ExactDist<BinaryState>> {
    check_range(n, 3, 9)?;
    permutation_law(n, |p| {
        BinaryState((0..n).map(|i| u8::from(p[i] > p[(i + 1) % n])).collect())
    })
}

/// Cyclic peak indicator `(1[U_{i-1} < U_i > U_{i+1}])_{i=1..n}`.
pub fn peak_law(n: usize) -> Result<ExactDist<BinaryState>> {
    check_range(n, 3, 9)?;
    permutation_law(n, |p| {
        BinaryState(
            (0..n)
                .map(|i| u8::from(p[(i + n - 1) % n] < p[i] && p[i] > p[(i + 1) % n]))
                .collect(),
        )
    })
}

/// Cyclic bit descent indicator `(1[B_i > B_{i+1}])_i` for fair bits.
pub fn bit_descent_law(n: usize) -> Result<ExactDist<BinaryState>> {
    check_range(n, 3, 20)?;
    let states = (0u32..1 << n).map(|code| {
        let b = |i: usize| (code >> (i % n)) & 1;
        (
            BinaryState((0..n).map(|i| u8::from(b(i) > b(i + 1))).collect()),
            1u64,
        )
    });
    Dist::from_weights(states)
}

/// Descent indicator of a window of length `m` on the line: needs `m + 1`
/// uniforms.
pub fn line_descent_law(m: usize) -> Result<ExactDist<BinaryState>> {
    check_range(m, 1, 8)?;
    permutation_law(m + 1, |p| {
        BinaryState((0..m).map(|i| u8::from(p[i] > p[i + 1])).collect())
    })
}

/// Peak indicator of a window of length `m` on the line: needs `m + 2`
/// uniforms.
pub fn line_peak_law(m: usize) -> Result<ExactDist<BinaryState>> {
    check_range(m, 1, 7)?;
    permutation_law(m + 2, |p| {
        BinaryState(
            (1..=m)
                .map(|i| u8::from(p[i - 1] < p[i] && p[i] > p[i + 1]))
                .collect(),
        )
    })
}

/// Bit descent indicator of a window of length `m` on the line.
pub fn line_bit_descent_law(m: usize) -> Result<ExactDist<BinaryState>> {
    check_range(m, 1, 20)?;
    let states = (0u32..1 << (m + 1)).map(|code| {
        let b = |i: usize| (code >> i) & 1;
        (
            BinaryState((0..m).map(|i| u8::from(b(i) > b(i + 1))).collect()),
            1u64,
        )
    });
    Dist::from_weights(states)
}

/// Law of the indicator process at `n = 3`.
pub fn initial_law(v: ChainVariant) -> ExactDist<BinaryState> {
    let states: Vec<BinaryState> = (0u8..8)
        .map(|c| BinaryState(vec![c & 1, (c >> 1) & 1, (c >> 2) & 1]))
        .filter(|s| match v {
            ChainVariant::ColorsOneTwoQ4 => matches!(s.weight(), 1 | 2),
            ChainVariant::ColorOneQ3 => s.weight() == 1,
        })
        .collect();
    Dist::uniform(states).expect("nonempty")
}

/// `(J_1, ..., J_{i-1}, z, J_i, ..., J_n)` for 1-based `i`.
fn insert_bit(x: &[u8], i: usize, z: u8) -> BinaryState {
    let mut y = x.to_vec();
    y.insert(i - 1, z);
    BinaryState(y)
}

/// The word with the cyclic run starting at 1-based position `start` of
/// length `len` replaced by `with`, written starting just after the run.
/// Equal to the in-place replacement up to rotation.
fn replace_cyclic(x: &[u8], start: usize, len: usize, with: &[u8]) -> BinaryState {
    let n = x.len();
    let mut y = Vec::with_capacity(n - len + with.len());
    y.extend_from_slice(with);
    for j in 0..n - len {
        y.push(x[(start - 1 + len + j) % n]);
    }
    BinaryState(y)
}

fn j_row<P: Probability>(v: ChainVariant, x: &BinaryState) -> Dist<BinaryState, P> {
    let s = x.bits();
    let n = s.len();
    let prev = |i: usize| s[(i + n - 2) % n];
    let cur = |i: usize| s[i - 1];
    let mut masses = Vec::new();
    match v {
        ChainVariant::ColorsOneTwoQ4 => {
            let mass = P::from_u64_ratio(1, 2 * n as u64);
            for i in 1..=n {
                for b in 0..=1u8 {
                    let z = if prev(i) == cur(i) { 1 - cur(i) } else { b };
                    spread_over_rotations(&insert_bit(s, i, z), mass.clone(), &mut masses);
                }
            }
        }
        ChainVariant::ColorOneQ3 => {
            let mass = P::from_u64_ratio(1, n as u64);
            for i in 1..=n {
                let z = u8::from(prev(i) == 0 && cur(i) == 0);
                spread_over_rotations(&insert_bit(s, i, z), mass.clone(), &mut masses);
            }
        }
    }
    Dist::from_masses(masses)
}

fn q_row<P: Probability>(v: ChainVariant, x: &BinaryState) -> Result<Dist<BinaryState, P>> {
    let s = x.bits();
    let n = s.len();
    let mut masses = Vec::new();
    match v {
        ChainVariant::ColorsOneTwoQ4 => {
            // symbol Q_{I-1} becomes (B, 1-B)
            let mass = P::from_u64_ratio(1, 2 * n as u64);
            for i in 1..=n {
                let target = if i == 1 { n } else { i - 1 };
                for b in 0..=1u8 {
                    let y = replace_cyclic(s, target, 1, &[b, 1 - b]);
                    spread_over_rotations(&y, mass.clone(), &mut masses);
                }
            }
        }
        ChainVariant::ColorOneQ3 => {
            if x.has_adjacent_ones_cyclic() {
                return Err(Error::AdjacentOnes(x.to_string()));
            }
            // (Q_{I-1}, Q_I) becomes (0, 1, 0)
            let mass = P::from_u64_ratio(1, n as u64);
            for i in 1..=n {
                let start = if i == 1 { n } else { i - 1 };
                let y = replace_cyclic(s, start, 2, &[0, 1, 0]);
                spread_over_rotations(&y, mass.clone(), &mut masses);
            }
        }
    }
    Ok(Dist::from_masses(masses))
}

/// States of length `n` reachable from the `n = 3` law under a rule.
fn reachable<F>(v: ChainVariant, n: usize, step: F) -> Result<BTreeSet<BinaryState>>
where
    F: Fn(&BinaryState) -> Result<Dist<BinaryState, Rational>>,
{
    check_range(n, 3, usize::MAX)?;
    let mut level: BTreeSet<BinaryState> = initial_law(v).support().cloned().collect();
    for _ in 3..n {
        let mut next = BTreeSet::new();
        for s in &level {
            next.extend(step(s)?.support().cloned());
        }
        level = next;
    }
    Ok(level)
}

/// Transition rule of the coloring's indicator process.
pub fn j_kernel(v: ChainVariant, n: usize) -> Result<Kernel<BinaryState, Rational>> {
    j_kernel_as(v, n)
}

pub fn j_kernel_as<P: Probability>(v: ChainVariant, n: usize) -> Result<Kernel<BinaryState, P>> {
    let domain = reachable(v, n, |s| Ok(j_row(v, s)))?;
    let mut k = Kernel::new(n);
    for s in domain {
        let row = j_row(v, &s);
        k.insert_row(s, row);
    }
    Ok(k)
}

/// Transition rule of the permutation statistic (descent or peak set).
pub fn q_kernel(v: ChainVariant, n: usize) -> Result<Kernel<BinaryState, Rational>> {
    q_kernel_as(v, n)
}

pub fn q_kernel_as<P: Probability>(v: ChainVariant, n: usize) -> Result<Kernel<BinaryState, P>> {
    let domain = reachable(v, n, |s| q_row(v, s))?;
    let mut k = Kernel::new(n);
    for s in domain {
        let row = q_row(v, &s)?;
        k.insert_row(s, row);
    }
    Ok(k)
}

/// One Q-rule row from an arbitrary state; errors on variant (ii) states with
/// adjacent ones.
pub fn q_row_from(v: ChainVariant, x: &BinaryState) -> Result<Dist<BinaryState, Rational>> {
    q_row(v, x)
}

pub fn j_row_from(v: ChainVariant, x: &BinaryState) -> Dist<BinaryState, Rational> {
    j_row(v, x)
}

/// Runs `initial_law(v)` through `n - 3` steps of the J-rule.
pub fn evolve_j_chain(v: ChainVariant, n: usize) -> Result<ExactDist<BinaryState>> {
    let mut d = initial_law(v);
    for m in 3..n {
        d = j_kernel(v, m)?.push(&d)?;
    }
    Ok(d)
}

/// The two-site `*`-statistic for `iota` (1 -> 1, 2 -> 2, 3, 4 -> *) on the
/// line 4-coloring, next to the value any 2-block-factor with the forced
/// one-site structure would give.
#[derive(Clone, Debug, PartialEq)]
pub struct IotaStatistic {
    /// `P(X_1 in {3,4}, X_2 in {3,4})` from the exact window law.
    pub actual: Rational,
    /// `P((U_0, U_1, U_2) in A^3 ∪ (A^c)^3)` with `P(A) = 1/2`.
    pub block_factor: Rational,
    /// `P(X_1 in {3,4})`.
    pub single_site: Rational,
}

pub fn iota_two_site_statistic() -> Result<IotaStatistic> {
    let pair = line_window_law(2, 1, 4)?;
    let high = |c: &u8| *c >= 3;
    let actual = pair.prob_of(|x| x.as_slice().iter().all(high));
    let single = line_window_law(1, 1, 4)?;
    let single_site = single.prob_of(|x| x.as_slice().iter().all(high));
    // A^3 ∪ (A^c)^3 for A of measure 1/2
    let half = Rational::from_u64_ratio(1, 2);
    let cube = half.clone() * half.clone() * half;
    let block_factor = cube.clone() + cube;
    Ok(IotaStatistic {
        actual,
        block_factor,
        single_site,
    })
}
