//! Exact operations on finite laws: marginals, images, independence and
//! k-dependence, symmetry, total variation, and chi-square goodness of fit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::scalar::{rational_string, Probability};
use crate::word::{ColorPerm, Sequence, Word};
use crate::{ExactDist, Rational};

/// Largest cycle length for the all-subsets k-dependence check.
pub const FULL_KDEP_MAX_N: usize = 10;

/// Cap on the number of table cells held by a k-dependence check.
const TABLE_CELL_BUDGET: u128 = 1 << 25;

fn normalize_indices(set: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&i| i == 0 || i > n) {
        return Err(Error::NotASubset { index: bad, len: n });
    }
    Ok(s)
}

/// Law of the coordinates in `set` (1-based), kept in increasing order.
pub fn marginalize<S, P>(d: &Dist<S, P>, set: &[usize]) -> Result<Dist<S, P>>
where
    S: Sequence,
    P: Probability,
{
    let n = d.support().map(Sequence::len).max().unwrap_or(0);
    let set = normalize_indices(set, n)?;
    let mut masses = Vec::with_capacity(d.len());
    for (x, p) in d.iter() {
        let sym = x.symbols();
        if let Some(&bad) = set.iter().find(|&&i| i > sym.len()) {
            return Err(Error::NotASubset {
                index: bad,
                len: sym.len(),
            });
        }
        let y = S::from_symbols(set.iter().map(|&i| sym[i - 1]).collect());
        masses.push((y, p.clone()));
    }
    Ok(Dist::from_masses(masses))
}

/// Image law under `f`.
pub fn pushforward<S, T, P, F>(d: &Dist<S, P>, f: F) -> Dist<T, P>
where
    S: Ord + Clone,
    T: Ord + Clone,
    P: Probability,
    F: Fn(&S) -> T,
{
    Dist::from_masses(d.iter().map(|(x, p)| (f(x), p.clone())))
}

/// `(1/2) * sum |d1 - d2|`.
pub fn tv_distance<S, P>(a: &Dist<S, P>, b: &Dist<S, P>) -> P
where
    S: Ord + Clone,
    P: Probability,
{
    let mut states: Vec<&S> = a.support().chain(b.support()).collect();
    states.sort();
    states.dedup();
    let sum = states
        .into_iter()
        .fold(P::zero(), |acc, s| acc + a.prob(s).abs_diff(&b.prob(s)));
    sum / P::from_u64_ratio(2, 1)
}

// ---------------------------------------------------------------------------
// independence

/// Integer weights over a common denominator, with each state's symbols
/// mapped onto `0..base`.
struct IntegerLaw<W> {
    n: usize,
    base: usize,
    symbols: Vec<u8>,
    states: Vec<(Vec<u8>, W)>,
    total: W,
    denominator: BigUint,
}

trait Weight: Clone + Zero + PartialEq + Send + Sync {
    fn add_to(&mut self, other: &Self);
    fn products_equal(j: &Self, t: &Self, a: &Self, b: &Self) -> bool;
    fn to_big(&self) -> BigUint;
}

impl Weight for u64 {
    fn add_to(&mut self, other: &Self) {
        *self += *other;
    }

    fn products_equal(j: &Self, t: &Self, a: &Self, b: &Self) -> bool {
        u128::from(*j) * u128::from(*t) == u128::from(*a) * u128::from(*b)
    }

    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Weight for BigUint {
    fn add_to(&mut self, other: &Self) {
        *self += other;
    }

    fn products_equal(j: &Self, t: &Self, a: &Self, b: &Self) -> bool {
        j * t == a * b
    }

    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

/// Common denominator and the numerators over it.
fn integer_numerators<S: Sequence>(d: &ExactDist<S>) -> (BigUint, Vec<(&S, BigUint)>) {
    let lcm = d
        .iter()
        .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
    let nums = d
        .iter()
        .map(|(s, p)| {
            let num = (p.numer() * (&lcm / p.denom())).abs();
            (s, num.to_biguint().expect("nonnegative"))
        })
        .collect();
    (lcm.to_biguint().expect("positive"), nums)
}

fn integer_law<S: Sequence, W: Weight>(
    d: &ExactDist<S>,
    convert: impl Fn(&BigUint) -> W,
) -> Result<IntegerLaw<W>> {
    let n = d.support().map(Sequence::len).max().unwrap_or(0);
    if d.support().any(|s| s.len() != n) {
        return Err(Error::InvalidArgument("states of unequal length".into()));
    }
    let mut symbols: Vec<u8> = d
        .support()
        .flat_map(|s| s.symbols().iter().copied())
        .collect();
    symbols.sort_unstable();
    symbols.dedup();
    let index: HashMap<u8, u8> = symbols
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i as u8))
        .collect();
    let (denominator, nums) = integer_numerators(d);
    let states = nums
        .into_iter()
        .map(|(s, w)| (s.symbols().iter().map(|c| index[c]).collect(), convert(&w)))
        .collect();
    Ok(IntegerLaw {
        n,
        base: symbols.len().max(1),
        symbols,
        states,
        total: convert(&denominator),
        denominator,
    })
}

fn positions(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

fn table_size(base: usize, mask: u32) -> u128 {
    (base as u128).saturating_pow(mask.count_ones())
}

impl<W: Weight> IntegerLaw<W> {
    /// Dense marginal table of `mask`; the digit of the `j`-th smallest
    /// position carries weight `base^j`.
    fn table(&self, mask: u32) -> Vec<W> {
        let pos = positions(mask);
        let mut t = vec![W::zero(); table_size(self.base, mask) as usize];
        for (digits, w) in &self.states {
            let code = pos
                .iter()
                .rev()
                .fold(0usize, |acc, &p| acc * self.base + digits[p] as usize);
            t[code].add_to(w);
        }
        t
    }

    /// Offset of each code of `part` inside the table of `whole`.
    fn offsets(&self, part: u32, whole: u32) -> Vec<usize> {
        let whole_pos = positions(whole);
        let part_pos = positions(part);
        let strides: Vec<usize> = part_pos
            .iter()
            .map(|p| {
                let rank = whole_pos.iter().position(|q| q == p).expect("subset");
                self.base.pow(rank as u32)
            })
            .collect();
        let size = table_size(self.base, part) as usize;
        (0..size)
            .map(|mut code| {
                let mut off = 0;
                for s in &strides {
                    off += (code % self.base) * s;
                    code /= self.base;
                }
                off
            })
            .collect()
    }

    fn decode(&self, mask: u32, mut code: usize) -> String {
        let mut out = String::new();
        for p in positions(mask) {
            let c = self.symbols[code % self.base];
            code /= self.base;
            if !out.is_empty() {
                out.push(',');
            }
            out.push_str(&format!("{}={}", p + 1, c));
        }
        out
    }

    /// First assignment where the joint law differs from the product.
    fn first_violation(
        &self,
        tables: &HashMap<u32, Vec<W>>,
        s1: u32,
        s2: u32,
    ) -> Option<(usize, usize)> {
        let u = s1 | s2;
        let (m1, m2, joint) = (&tables[&s1], &tables[&s2], &tables[&u]);
        let off1 = self.offsets(s1, u);
        let off2 = self.offsets(s2, u);
        for (a, wa) in m1.iter().enumerate() {
            for (b, wb) in m2.iter().enumerate() {
                let j = &joint[off1[a] + off2[b]];
                if !W::products_equal(j, &self.total, wa, wb) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    fn counterexample(
        &self,
        tables: &HashMap<u32, Vec<W>>,
        s1: u32,
        s2: u32,
    ) -> Option<Counterexample> {
        let (a, b) = self.first_violation(tables, s1, s2)?;
        let u = s1 | s2;
        let off = self.offsets(s1, u)[a] + self.offsets(s2, u)[b];
        let den = &self.denominator;
        let joint = Rational::from_ratio(&tables[&u][off].to_big(), den);
        let product = Rational::from_ratio(
            &(tables[&s1][a].to_big() * tables[&s2][b].to_big()),
            &(den * den),
        );
        Some(Counterexample {
            s1: positions(s1).iter().map(|p| p + 1).collect(),
            s2: positions(s2).iter().map(|p| p + 1).collect(),
            values1: self.decode(s1, a),
            values2: self.decode(s2, b),
            joint: rational_string(&joint),
            product: rational_string(&product),
        })
    }

    fn tables_for(&self, pairs: &[(u32, u32)]) -> Result<HashMap<u32, Vec<W>>> {
        let mut masks: Vec<u32> = pairs.iter().flat_map(|&(a, b)| [a, b, a | b]).collect();
        masks.sort_unstable();
        masks.dedup();
        let cells: u128 = masks.iter().map(|&m| table_size(self.base, m)).sum();
        if cells > TABLE_CELL_BUDGET {
            return Err(Error::BudgetExceeded {
                needed: cells,
                budget: TABLE_CELL_BUDGET,
            });
        }
        Ok(masks.into_par_iter().map(|m| (m, self.table(m))).collect())
    }
}

fn set_mask(set: &[usize]) -> u32 {
    set.iter().fold(0, |m, &i| m | 1 << (i - 1))
}

/// Exact factorization test for the restrictions to `s1` and `s2` (1-based).
pub fn are_independent<S: Sequence>(d: &ExactDist<S>, s1: &[usize], s2: &[usize]) -> Result<bool> {
    let n = d.support().map(Sequence::len).max().unwrap_or(0);
    let a = normalize_indices(s1, n)?;
    let b = normalize_indices(s2, n)?;
    if a.iter().any(|i| b.contains(i)) {
        return Err(Error::OverlappingSets);
    }
    if a.is_empty() || b.is_empty() {
        return Ok(true);
    }
    if n > 32 {
        return Err(Error::LengthOutOfRange { n, min: 1, max: 32 });
    }
    let pair = [(set_mask(&a), set_mask(&b))];
    with_integer_law(d, |law| {
        let tables = law.tables_for(&pair)?;
        Ok(law.counterexample(&tables, pair[0].0, pair[0].1).is_none())
    })
}

/// Runs `f` on the `u64` form of the law when its common denominator fits,
/// on the big-integer form otherwise.
fn with_integer_law<S: Sequence, T>(
    d: &ExactDist<S>,
    f: impl Fn(&dyn LawOps) -> Result<T>,
) -> Result<T> {
    let (den, _) = integer_numerators(d);
    if den.to_u64().is_some() {
        let law = integer_law(d, |w| w.to_u64().expect("bounded by the denominator"))?;
        f(&law)
    } else {
        let law = integer_law(d, BigUint::clone)?;
        f(&law)
    }
}

/// Object-safe view used to share the driver between weight types.
trait LawOps: Sync {
    fn n(&self) -> usize;
    fn tables_check(&self, pairs: &[(u32, u32)]) -> Result<Option<(usize, Counterexample)>>;
    fn tables_for(&self, pairs: &[(u32, u32)]) -> Result<Tables>;
    fn counterexample(&self, tables: &Tables, s1: u32, s2: u32) -> Option<Counterexample>;
}

enum Tables {
    Small(HashMap<u32, Vec<u64>>),
    Big(HashMap<u32, Vec<BigUint>>),
}

macro_rules! law_ops {
    ($w:ty, $variant:ident) => {
        impl LawOps for IntegerLaw<$w> {
            fn n(&self) -> usize {
                self.n
            }

            fn tables_check(
                &self,
                pairs: &[(u32, u32)],
            ) -> Result<Option<(usize, Counterexample)>> {
                let tables = IntegerLaw::tables_for(self, pairs)?;
                let hit = pairs
                    .par_iter()
                    .position_first(|&(a, b)| self.first_violation(&tables, a, b).is_some());
                Ok(hit.map(|i| {
                    let (a, b) = pairs[i];
                    (
                        i,
                        IntegerLaw::counterexample(self, &tables, a, b).expect("violation"),
                    )
                }))
            }

            fn tables_for(&self, pairs: &[(u32, u32)]) -> Result<Tables> {
                IntegerLaw::tables_for(self, pairs).map(Tables::$variant)
            }

            fn counterexample(&self, tables: &Tables, s1: u32, s2: u32) -> Option<Counterexample> {
                match tables {
                    Tables::$variant(t) => IntegerLaw::counterexample(self, t, s1, s2),
                    _ => unreachable!("tables built for this weight type"),
                }
            }
        }
    };
}

law_ops!(u64, Small);
law_ops!(BigUint, Big);

/// Which subset pairs a k-dependence check covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KDepMode {
    /// Every pair of disjoint nonempty vertex sets.
    Full,
    /// Pairs of cyclic intervals only.
    Partial,
}

/// A pair of sets whose restrictions are not independent, with one
/// assignment where the joint law and the product differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub values1: String,
    pub values2: String,
    pub joint: String,
    pub product: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S1={:?} S2={:?}: P({}; {}) = {} but product = {}",
            self.s1, self.s2, self.values1, self.values2, self.joint, self.product
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KDepReport {
    pub n: usize,
    pub k: usize,
    pub mode: KDepMode,
    pub pairs_total: usize,
    pub pairs_checked: usize,
    pub independent: bool,
    pub counterexample: Option<Counterexample>,
}

fn cyclic_neighborhood(mask: u32, n: usize, k: usize) -> u32 {
    let mut out = 0u32;
    for p in positions(mask) {
        for d in 0..=k.min(n) {
            out |= 1 << ((p + d) % n);
            out |= 1 << ((p + n - d % n) % n);
        }
    }
    out
}

/// All unordered pairs of disjoint nonempty subsets of the `n`-cycle at
/// distance greater than `k`, smallest union first.
pub(crate) fn separated_pairs(n: usize, k: usize, mode: KDepMode) -> Vec<(u32, u32)> {
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    let candidates: Vec<u32> = match mode {
        KDepMode::Full => (1..=full).collect(),
        KDepMode::Partial => {
            let mut arcs: Vec<u32> = (0..n)
                .flat_map(|s| (1..n).map(move |l| (0..l).fold(0u32, |m, j| m | 1 << ((s + j) % n))))
                .collect();
            arcs.sort_unstable();
            arcs.dedup();
            arcs
        }
    };
    let mut pairs = Vec::new();
    for &s1 in &candidates {
        let low = s1.trailing_zeros();
        let above_low = full & !((1u32 << (low + 1)) - 1);
        let allowed = full & !cyclic_neighborhood(s1, n, k) & above_low;
        match mode {
            KDepMode::Full => {
                let mut s2 = allowed;
                while s2 != 0 {
                    pairs.push((s1, s2));
                    s2 = (s2 - 1) & allowed;
                }
            }
            KDepMode::Partial => {
                pairs.extend(
                    candidates
                        .iter()
                        .filter(|&&s2| s2 & !allowed == 0)
                        .map(|&s2| (s1, s2)),
                );
            }
        }
    }
    pairs.sort_unstable_by_key(|&(a, b)| ((a | b).count_ones(), a, b));
    pairs
}

/// Checks independence of every separated pair; full mode is limited to
/// `n <= 10`.
pub fn k_dependence_report<S: Sequence>(
    d: &ExactDist<S>,
    k: usize,
    mode: KDepMode,
) -> Result<KDepReport> {
    let n = d.support().map(Sequence::len).max().unwrap_or(0);
    match mode {
        KDepMode::Full if n > FULL_KDEP_MAX_N => {
            return Err(Error::BudgetExceeded {
                needed: n as u128,
                budget: FULL_KDEP_MAX_N as u128,
            })
        }
        KDepMode::Partial if n > 24 => {
            return Err(Error::BudgetExceeded {
                needed: n as u128,
                budget: 24,
            })
        }
        _ => {}
    }
    let pairs = separated_pairs(n, k, mode);
    let hit = with_integer_law(d, |law| {
        debug_assert_eq!(law.n(), n);
        law.tables_check(&pairs)
    })?;
    Ok(KDepReport {
        n,
        k,
        mode,
        pairs_total: pairs.len(),
        pairs_checked: hit.as_ref().map_or(pairs.len(), |(i, _)| i + 1),
        independent: hit.is_none(),
        counterexample: hit.map(|(_, c)| c),
    })
}

/// True iff every pair of disjoint nonempty sets at cyclic distance greater
/// than `k` has independent restrictions.
pub fn verify_k_dependence<S: Sequence>(d: &ExactDist<S>, k: usize) -> Result<bool> {
    Ok(k_dependence_report(d, k, KDepMode::Full)?.independent)
}

// ---------------------------------------------------------------------------
// symmetry

/// A symmetry of colorings of the cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymmetryOp {
    Rotation(i64),
    Reflection,
    ColorPermutation(ColorPerm),
}

impl SymmetryOp {
    pub fn apply(&self, x: &Word) -> Result<Word> {
        match self {
            SymmetryOp::Rotation(r) => x.rotate(*r),
            SymmetryOp::Reflection => Ok(x.reflect()),
            SymmetryOp::ColorPermutation(sigma) => x.apply_color_perm(sigma),
        }
    }
}

impl fmt::Display for SymmetryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryOp::Rotation(r) => write!(f, "rotation by {r}"),
            SymmetryOp::Reflection => write!(f, "reflection"),
            SymmetryOp::ColorPermutation(s) => write!(f, "color permutation {:?}", s),
        }
    }
}

/// True iff the image of `d` under `op` is `d`. A state the operation
/// cannot act on makes the check fail.
pub fn symmetry_check<P: Probability>(d: &Dist<Word, P>, op: &SymmetryOp) -> bool {
    let mut masses = Vec::with_capacity(d.len());
    for (x, p) in d.iter() {
        match op.apply(x) {
            Ok(y) => masses.push((y, p.clone())),
            Err(_) => return false,
        }
    }
    Dist::from_masses(masses) == *d
}

/// Generators of the dihedral group on the cycle and of the color
/// permutations of `[q]`: rotation by one, reflection, and the adjacent
/// transpositions.
pub fn symmetry_generators(q: u8) -> Vec<SymmetryOp> {
    let mut ops = vec![SymmetryOp::Rotation(1), SymmetryOp::Reflection];
    for a in 1..q {
        ops.push(SymmetryOp::ColorPermutation(
            ColorPerm::transposition(q, a, a + 1).expect("valid transposition"),
        ));
    }
    ops
}

/// First generator under which `d` is not invariant.
pub fn first_asymmetry<P: Probability>(d: &Dist<Word, P>, q: u8) -> Option<SymmetryOp> {
    symmetry_generators(q)
        .into_iter()
        .find(|op| !symmetry_check(d, op))
}

// ---------------------------------------------------------------------------
// goodness of fit

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.001;

/// Minimum expected count per pooled bin.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
    pub sample_size: u64,
    pub bins: usize,
    pub seed: Option<u64>,
    pub diagnostic: Option<String>,
}

impl GofReport {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Empirical counts of a sample.
pub fn tally<S: Ord + Clone>(samples: &[S]) -> BTreeMap<S, u64> {
    let mut counts = BTreeMap::new();
    for s in samples {
        *counts.entry(s.clone()).or_insert(0) += 1;
    }
    counts
}

/// Pearson chi-square test of `counts` against the exact law `d`.
///
/// Support states are sorted by expected count (ties by state order) and
/// merged from the smallest until every bin expects at least five; a short
/// last bin joins its predecessor.
pub fn chi_square_gof<S, P>(
    counts: &BTreeMap<S, u64>,
    d: &Dist<S, P>,
    alpha: f64,
) -> Result<GofReport>
where
    S: Ord + Clone + fmt::Display,
    P: Probability,
{
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    let outside: Vec<&S> = counts
        .iter()
        .filter(|(s, &c)| c > 0 && !d.contains(s))
        .map(|(s, _)| s)
        .collect();
    if !outside.is_empty() {
        let shown: Vec<String> = outside.iter().take(5).map(|s| s.to_string()).collect();
        return Ok(GofReport {
            statistic: f64::INFINITY,
            dof: 0,
            p_value: 0.0,
            alpha,
            pass: false,
            sample_size: total,
            bins: 0,
            seed: None,
            diagnostic: Some(format!(
                "{} observed state(s) outside the support, e.g. {}",
                outside.len(),
                shown.join(" ")
            )),
        });
    }
    let n = total as f64;
    let mut cells: Vec<(f64, &S, u64)> = d
        .iter()
        .map(|(s, p)| (p.to_f64() * n, s, counts.get(s).copied().unwrap_or(0)))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut bins: Vec<(f64, u64)> = Vec::new();
    let mut open = (0.0, 0u64);
    for (e, _, o) in cells {
        open.0 += e;
        open.1 += o;
        if open.0 >= MIN_EXPECTED {
            bins.push(open);
            open = (0.0, 0);
        }
    }
    if open.0 > 0.0 || open.1 > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += open.0;
                last.1 += open.1;
            }
            None => bins.push(open),
        }
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(e, o)| {
            let diff = o as f64 - e;
            diff * diff / e
        })
        .sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 || statistic <= 0.0 {
        1.0
    } else {
        statrs::function::gamma::gamma_ur(dof as f64 / 2.0, statistic / 2.0)
    };
    let diagnostic = (dof == 0).then(|| "a single pooled bin; the test has no power".to_string());
    Ok(GofReport {
        statistic,
        dof,
        p_value,
        alpha,
        pass: p_value >= alpha,
        sample_size: total,
        bins: bins.len(),
        seed: None,
        diagnostic,
    })
}
