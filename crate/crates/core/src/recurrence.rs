//! Exact evaluation of the cycle and line deletion recurrences.
//!
//! `B°(x) = 1[x cyclically proper] * sum_i B°(x with position i deleted)`,
//! `B°(∅) = 1`, and `B⃗` is the same with "proper" in place of "cyclically
//! proper". Normalizing over `[q]^n` gives the cycle law and the line window
//! law.

use std::collections::HashMap;

use dashmap::DashMap;
use rayon::prelude::*;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::scalar::{factorial, falling_factorial, Count, Probability};
use crate::word::{is_cyclically_proper, is_proper, Color, Sequence, Word};
use crate::{BigCount, ExactDist, Rational};

/// Default cap on `q^n` for enumerations that materialize a law.
pub const DEFAULT_BUDGET: u128 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    /// Maximum `q^n` an enumeration may touch.
    pub budget: u128,
    /// Key the `B°` memo by rotation class and first-occurrence color
    /// relabeling instead of rotation class alone.
    pub color_canonical_memo: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            budget: DEFAULT_BUDGET,
            color_canonical_memo: false,
        }
    }
}

pub(crate) fn check_budget(n: usize, q: u8, budget: u128) -> Result<()> {
    let needed = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// The `(k, q)` pairs for which the line recurrence is known to describe a
/// stationary `k`-dependent `q`-coloring of the integers.
pub fn is_theorem_pair(k: usize, q: u8) -> bool {
    matches!((k, q), (1, 4) | (2, 3))
}

// ---------------------------------------------------------------------------
// canonical keys

/// Offset of the lexicographically least rotation.
fn least_rotation(x: &[u8]) -> usize {
    let n = x.len();
    let mut best = 0;
    for r in 1..n {
        for j in 0..n {
            let a = x[(r + j) % n];
            let b = x[(best + j) % n];
            if a != b {
                if a < b {
                    best = r;
                }
                break;
            }
        }
    }
    best
}

/// Relabels colors in order of first occurrence: the first symbol becomes 1,
/// the next new symbol 2, and so on.
fn relabel_first_occurrence(x: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut map = [0u8; 256];
    let mut next = 1u8;
    x.map(|c| {
        if map[c as usize] == 0 {
            map[c as usize] = next;
            next += 1;
        }
        map[c as usize]
    })
    .collect()
}

fn rotation_key(x: &[u8]) -> Vec<u8> {
    let r = least_rotation(x);
    let mut key = Vec::with_capacity(x.len());
    key.extend_from_slice(&x[r..]);
    key.extend_from_slice(&x[..r]);
    key
}

fn rotation_color_key(x: &[u8]) -> Vec<u8> {
    let n = x.len();
    (0..n)
        .map(|r| relabel_first_occurrence((0..n).map(|j| x[(r + j) % n])))
        .min()
        .unwrap_or_default()
}

// ---------------------------------------------------------------------------
// cycle recurrence

/// Memoized evaluator for `B°`.
///
/// The memo is keyed by rotation class, which is sound because `B°` is
/// invariant under cyclic shifts. It lives for the lifetime of the counter and
/// is shared across every top-level call, including concurrent ones.
pub struct CycleCounter<C: Count = BigCount> {
    memo: DashMap<Vec<u8>, C>,
    color_canonical: bool,
}

impl<C: Count> Default for CycleCounter<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Count> CycleCounter<C> {
    pub fn new() -> Self {
        CycleCounter {
            memo: DashMap::new(),
            color_canonical: false,
        }
    }

    /// Also fold color relabelings into the memo key. `B°` only looks at
    /// which positions carry equal colors, so this is sound as well.
    pub fn with_color_canonical_memo(mut self, on: bool) -> Self {
        self.color_canonical = on;
        self
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn key(&self, x: &[u8]) -> Vec<u8> {
        if self.color_canonical {
            rotation_color_key(x)
        } else {
            rotation_key(x)
        }
    }

    /// `B°(x)` without alphabet checks.
    pub fn eval(&self, x: &[u8]) -> Result<C> {
        let n = x.len();
        if n <= 1 {
            return Ok(C::one());
        }
        if !is_cyclically_proper(x) {
            return Ok(C::zero());
        }
        let key = self.key(x);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let mut sum = C::zero();
        let mut buf = Vec::with_capacity(n - 1);
        for i in 0..n {
            // x is cyclically proper, so the deletion is too unless the two
            // symbols that become neighbors coincide.
            if n >= 3 && x[(i + n - 1) % n] == x[(i + 1) % n] {
                continue;
            }
            buf.clear();
            buf.extend_from_slice(&x[..i]);
            buf.extend_from_slice(&x[i + 1..]);
            let term = self.eval(&buf)?;
            sum = sum.checked_add(&term).ok_or(Error::Overflow)?;
        }
        self.memo.insert(key, sum.clone());
        Ok(sum)
    }

    pub fn b_circ(&self, x: &Word, q: u8) -> Result<C> {
        x.check_alphabet(q)?;
        self.eval(x.as_slice())
    }

    /// `Z°(n, q)` by summing over color classes: a word with `m` distinct
    /// colors stands for `q (q-1) ... (q-m+1)` words with the same `B°`.
    pub fn z_circ(&self, n: usize, q: u8) -> Result<C> {
        if n == 0 {
            return Ok(C::one());
        }
        let mut total = C::zero();
        let mut err = None;
        for_each_restricted_cyclic_word(n, q, &mut |x, used| {
            if err.is_some() {
                return;
            }
            let step = || -> Result<C> {
                let b = self.eval(x)?;
                if b.is_zero() {
                    return Ok(C::zero());
                }
                let mult: C = falling_factorial(q as u64, used as u64).ok_or(Error::Overflow)?;
                b.checked_mul(&mult).ok_or(Error::Overflow)
            };
            match step().and_then(|t| total.checked_add(&t).ok_or(Error::Overflow)) {
                Ok(t) => total = t,
                Err(e) => err = Some(e),
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }

    /// `Z°(n, q)` by visiting every cyclically proper word of `[q]^n`,
    /// partitioned by leading symbol.
    pub fn z_circ_literal(&self, n: usize, q: u8) -> Result<C> {
        if n == 0 {
            return Ok(C::one());
        }
        let partial: Vec<Result<C>> = (1..=q)
            .into_par_iter()
            .map(|first| {
                let mut acc = C::zero();
                let mut err = None;
                for_each_word_with_first(n, q, first, true, &mut |x| {
                    if err.is_some() {
                        return;
                    }
                    match self
                        .eval(x)
                        .and_then(|b| acc.checked_add(&b).ok_or(Error::Overflow))
                    {
                        Ok(t) => acc = t,
                        Err(e) => err = Some(e),
                    }
                });
                err.map_or(Ok(acc), Err)
            })
            .collect();
        partial
            .into_iter()
            .try_fold(C::zero(), |a, p| a.checked_add(&p?).ok_or(Error::Overflow))
    }

    /// `sum_{y in [q]^k} B°(x y)`.
    pub fn restriction_sum(&self, x: &Word, k: usize, q: u8) -> Result<C> {
        x.check_alphabet(q)?;
        let mut buf = x.as_slice().to_vec();
        let base = buf.len();
        let mut total = C::zero();
        let mut tail = vec![1u8; k];
        loop {
            buf.truncate(base);
            buf.extend_from_slice(&tail);
            total = total
                .checked_add(&self.eval(&buf)?)
                .ok_or(Error::Overflow)?;
            if !odometer_step(&mut tail, q) {
                break;
            }
        }
        Ok(total)
    }

    /// Exact law `B°(x) / Z°(n, q)` over `[q]^n`.
    pub fn cycle_law<P: Probability>(
        &self,
        n: usize,
        q: u8,
        opts: &EnumOptions,
    ) -> Result<Dist<Word, P>> {
        if q < 3 {
            return Err(Error::TooFewColors { q, min: 3 });
        }
        check_budget(n, q, opts.budget)?;
        if n == 0 {
            return Ok(Dist::point(Word::empty()));
        }
        let parts: Vec<Result<Vec<(Word, C)>>> = (1..=q)
            .into_par_iter()
            .map(|first| {
                let mut out = Vec::new();
                let mut err = None;
                for_each_word_with_first(n, q, first, true, &mut |x| {
                    if err.is_some() {
                        return;
                    }
                    match self.eval(x) {
                        Ok(b) if !b.is_zero() => out.push((Word::from_symbols(x.to_vec()), b)),
                        Ok(_) => {}
                        Err(e) => err = Some(e),
                    }
                });
                err.map_or(Ok(out), Err)
            })
            .collect();
        let mut weights = Vec::new();
        for p in parts {
            weights.extend(p?);
        }
        Dist::from_weights(weights)
    }
}

// ---------------------------------------------------------------------------
// Möbius form

/// Evaluates `B°` through the inversion form
/// `B°(x) = sum_i B°(x̂_i) - 2 sum_{edges (i, i+1)} 1[x_i = x_{i+1}] B°(x̂_i)`,
/// applied to every word (proper or not) all the way down to `B°(∅) = 1`.
///
/// The memo is keyed by the literal word, so this route shares nothing with
/// [`CycleCounter`]: no properness gate and no rotation canonicalization.
///
/// The edge sum runs over the edges of the simple cycle graph on `n`
/// vertices: `n` edges for `n >= 3`, the single edge `{1, 2}` for `n = 2`, and
/// none for `n = 1`.
#[derive(Default)]
pub struct MobiusCounter<C: Count = BigCount> {
    memo: HashMap<Vec<u8>, C>,
}

impl<C: Count> MobiusCounter<C> {
    pub fn new() -> Self {
        MobiusCounter {
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, x: &[u8]) -> Result<C> {
        let n = x.len();
        if n == 0 {
            return Ok(C::one());
        }
        if let Some(v) = self.memo.get(x) {
            return Ok(v.clone());
        }
        let mut deletions = Vec::with_capacity(n);
        let mut buf = Vec::with_capacity(n - 1);
        for i in 0..n {
            buf.clear();
            buf.extend_from_slice(&x[..i]);
            buf.extend_from_slice(&x[i + 1..]);
            deletions.push(self.eval(&buf)?);
        }
        let plus = deletions
            .iter()
            .try_fold(C::zero(), |a, d| a.checked_add(d))
            .ok_or(Error::Overflow)?;
        let edges = match n {
            1 => 0,
            2 => 1,
            _ => n,
        };
        let mut minus = C::zero();
        for i in 0..edges {
            if x[i] == x[(i + 1) % n] {
                minus = minus
                    .checked_add(&deletions[i])
                    .and_then(|m| m.checked_add(&deletions[i]))
                    .ok_or(Error::Overflow)?;
            }
        }
        let value = plus.checked_sub(&minus).ok_or(Error::Overflow)?;
        self.memo.insert(x.to_vec(), value.clone());
        Ok(value)
    }
}

// ---------------------------------------------------------------------------
// line recurrence

/// Memoized evaluator for `B⃗`, keyed by the word itself.
pub struct LineCounter<C: Count = BigCount> {
    memo: DashMap<Vec<u8>, C>,
}

impl<C: Count> Default for LineCounter<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Count> LineCounter<C> {
    pub fn new() -> Self {
        LineCounter {
            memo: DashMap::new(),
        }
    }

    pub fn eval(&self, x: &[u8]) -> Result<C> {
        let n = x.len();
        if n <= 1 {
            return Ok(C::one());
        }
        if !is_proper(x) {
            return Ok(C::zero());
        }
        if let Some(v) = self.memo.get(x) {
            return Ok(v.clone());
        }
        let mut sum = C::zero();
        let mut buf = Vec::with_capacity(n - 1);
        for i in 0..n {
            if i > 0 && i + 1 < n && x[i - 1] == x[i + 1] {
                continue;
            }
            buf.clear();
            buf.extend_from_slice(&x[..i]);
            buf.extend_from_slice(&x[i + 1..]);
            sum = sum.checked_add(&self.eval(&buf)?).ok_or(Error::Overflow)?;
        }
        self.memo.insert(x.to_vec(), sum.clone());
        Ok(sum)
    }

    pub fn b_vec(&self, x: &Word, q: u8) -> Result<C> {
        x.check_alphabet(q)?;
        self.eval(x.as_slice())
    }

    /// `Z⃗(n, q) = sum over [q]^n of B⃗`.
    pub fn z_vec(&self, n: usize, q: u8) -> Result<C> {
        if n == 0 {
            return Ok(C::one());
        }
        let mut total = C::zero();
        let mut err = None;
        for first in 1..=q {
            for_each_word_with_first(n, q, first, false, &mut |x| {
                if err.is_some() {
                    return;
                }
                match self
                    .eval(x)
                    .and_then(|b| total.checked_add(&b).ok_or(Error::Overflow))
                {
                    Ok(t) => total = t,
                    Err(e) => err = Some(e),
                }
            });
        }
        err.map_or(Ok(total), Err)
    }

    /// Exact law `B⃗(x) / Z⃗(n, q)` of a length-`n` window.
    pub fn window_law<P: Probability>(
        &self,
        n: usize,
        q: u8,
        opts: &EnumOptions,
    ) -> Result<Dist<Word, P>> {
        if q < 3 {
            return Err(Error::TooFewColors { q, min: 3 });
        }
        check_budget(n, q, opts.budget)?;
        if n == 0 {
            return Ok(Dist::point(Word::empty()));
        }
        let parts: Vec<Result<Vec<(Word, C)>>> = (1..=q)
            .into_par_iter()
            .map(|first| {
                let mut out = Vec::new();
                let mut err = None;
                for_each_word_with_first(n, q, first, false, &mut |x| {
                    if err.is_some() {
                        return;
                    }
                    match self.eval(x) {
                        Ok(b) if !b.is_zero() => out.push((Word::from_symbols(x.to_vec()), b)),
                        Ok(_) => {}
                        Err(e) => err = Some(e),
                    }
                });
                err.map_or(Ok(out), Err)
            })
            .collect();
        let mut weights = Vec::new();
        for p in parts {
            weights.extend(p?);
        }
        Dist::from_weights(weights)
    }
}

// ---------------------------------------------------------------------------
// enumeration helpers

/// Visits every proper word of length `n >= 1` over `[q]` starting with
/// `first`; with `cyclic`, also requires last != first (for `n >= 2`).
pub(crate) fn for_each_word_with_first(
    n: usize,
    q: u8,
    first: Color,
    cyclic: bool,
    f: &mut dyn FnMut(&[u8]),
) {
    fn go(buf: &mut Vec<u8>, n: usize, q: u8, cyclic: bool, f: &mut dyn FnMut(&[u8])) {
        if buf.len() == n {
            if !cyclic || n == 1 || buf[0] != buf[n - 1] {
                f(buf);
            }
            return;
        }
        let prev = *buf.last().expect("nonempty");
        for c in 1..=q {
            if c == prev {
                continue;
            }
            buf.push(c);
            go(buf, n, q, cyclic, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(n);
    buf.push(first);
    go(&mut buf, n, q, cyclic, f);
}

/// Cyclically proper words in first-occurrence normal form (first symbol 1,
/// each new color the next unused integer). Passes the number of colors used.
fn for_each_restricted_cyclic_word(n: usize, q: u8, f: &mut dyn FnMut(&[u8], u8)) {
    fn go(buf: &mut Vec<u8>, used: u8, n: usize, q: u8, f: &mut dyn FnMut(&[u8], u8)) {
        if buf.len() == n {
            if n == 1 || buf[0] != buf[n - 1] {
                f(buf, used);
            }
            return;
        }
        let prev = *buf.last().expect("nonempty");
        let top = (used + 1).min(q);
        for c in 1..=top {
            if c == prev {
                continue;
            }
            buf.push(c);
            go(buf, used.max(c), n, q, f);
            buf.pop();
        }
    }
    if q == 0 {
        return;
    }
    let mut buf = Vec::with_capacity(n);
    buf.push(1);
    go(&mut buf, 1, n, q, f);
}

/// Advances a word over `[q]` in lexicographic order; false after the last.
/// Visits every word of `[q]^n` in lexicographic order.
pub(crate) fn for_each_word(n: usize, q: u8, f: &mut dyn FnMut(&[u8])) {
    let mut x = vec![1u8; n];
    loop {
        f(&x);
        if !odometer_step(&mut x, q) {
            break;
        }
    }
}

pub(crate) fn odometer_step(digits: &mut [u8], q: u8) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < q {
            *d += 1;
            return true;
        }
        *d = 1;
    }
    false
}

// ---------------------------------------------------------------------------
// convenience entry points on big integers and exact rationals

pub fn b_circ(x: &Word, q: u8) -> Result<BigCount> {
    CycleCounter::<BigCount>::new().b_circ(x, q)
}

/// `B°` through the Möbius inversion form. Defined for nonempty words.
pub fn b_circ_mobius(x: &Word, q: u8) -> Result<BigCount> {
    x.check_alphabet(q)?;
    if x.is_empty() {
        return Err(Error::EmptyWord);
    }
    MobiusCounter::<BigCount>::new().eval(x.as_slice())
}

pub fn z_circ(n: usize, q: u8) -> Result<BigCount> {
    CycleCounter::<BigCount>::new().z_circ(n, q)
}

/// `n! q (q-1) (q-2)^(n-2)`, for `n >= 2`.
pub fn z_circ_closed(n: usize, q: u8) -> Result<BigCount> {
    if n < 2 {
        return Err(Error::LengthOutOfRange {
            n,
            min: 2,
            max: usize::MAX,
        });
    }
    let q = BigCount::from(q);
    let nf: BigCount = factorial(n as u64).ok_or(Error::Overflow)?;
    let two = BigCount::from(2u8);
    let q1 = if q >= BigCount::from(1u8) {
        &q - 1u8
    } else {
        BigCount::from(0u8)
    };
    let q2 = if q >= two {
        &q - &two
    } else {
        BigCount::from(0u8)
    };
    Ok(nf * &q * q1 * num_traits::pow(q2, n - 2))
}

pub fn cycle_law(n: usize, q: u8) -> Result<ExactDist<Word>> {
    CycleCounter::<BigCount>::new().cycle_law::<Rational>(n, q, &EnumOptions::default())
}

pub fn cycle_law_with(n: usize, q: u8, opts: &EnumOptions) -> Result<ExactDist<Word>> {
    CycleCounter::<BigCount>::new()
        .with_color_canonical_memo(opts.color_canonical_memo)
        .cycle_law::<Rational>(n, q, opts)
}

pub fn b_vec(x: &Word, q: u8) -> Result<BigCount> {
    LineCounter::<BigCount>::new().b_vec(x, q)
}

pub fn z_vec(n: usize, q: u8) -> Result<BigCount> {
    LineCounter::<BigCount>::new().z_vec(n, q)
}

/// Law of `(X_1, ..., X_n)` for the line coloring attached to `(k, q)`.
///
/// The recurrence does not involve `k`; only the pairs for which
/// [`is_theorem_pair`] holds are known to define a consistent process, and
/// other pairs yield formal window laws.
pub fn line_window_law(n: usize, k: usize, q: u8) -> Result<ExactDist<Word>> {
    line_window_law_with(n, k, q, &EnumOptions::default())
}

pub fn line_window_law_with(
    n: usize,
    _k: usize,
    q: u8,
    opts: &EnumOptions,
) -> Result<ExactDist<Word>> {
    LineCounter::<BigCount>::new().window_law::<Rational>(n, q, opts)
}

pub fn restriction_sum(x: &Word, k: usize, q: u8) -> Result<BigCount> {
    CycleCounter::<BigCount>::new().restriction_sum(x, k, q)
}
