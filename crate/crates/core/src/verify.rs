//! Named suites of exact checks, each returning a serializable report with
//! the first counterexample on failure.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    k_dependence_report, marginalize, pushforward, symmetry_check, symmetry_generators, KDepMode,
    SymmetryOp,
};
use crate::chains::{
    bit_descent_law, descent_law, iota_two_site_statistic, j_kernel, peak_law, q_kernel,
    ChainVariant,
};
use crate::eden::eden_vs_necklace_kernel_check;
use crate::error::{Error, Result};
use crate::insertion::coupling_kernel;
use crate::kernel::{first_difference, kernel_equal};
use crate::recurrence::{
    cycle_law, for_each_word, line_window_law, z_circ_closed, CycleCounter, LineCounter,
    MobiusCounter,
};
use crate::scalar::{rational_string, Probability};
use crate::word::{Sequence, Word};
use crate::{BigCount, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Partition,
    Mobius,
    Shift,
    Symmetry,
    Restriction,
    Kdep,
    Coupling,
    Window,
    Marginals,
    Kernels,
    BlockfactorStat,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Partition,
        Suite::Mobius,
        Suite::Shift,
        Suite::Symmetry,
        Suite::Restriction,
        Suite::Kdep,
        Suite::Coupling,
        Suite::Window,
        Suite::Marginals,
        Suite::Kernels,
        Suite::BlockfactorStat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Partition => "partition",
            Suite::Mobius => "mobius",
            Suite::Shift => "shift",
            Suite::Symmetry => "symmetry",
            Suite::Restriction => "restriction",
            Suite::Kdep => "kdep",
            Suite::Coupling => "coupling",
            Suite::Window => "window",
            Suite::Marginals => "marginals",
            Suite::Kernels => "kernels",
            Suite::BlockfactorStat => "blockfactor-stat",
        }
    }

    /// Default largest `n` of the suite's range.
    pub fn default_max_n(self) -> usize {
        match self {
            Suite::Partition => 10,
            Suite::Mobius | Suite::Shift | Suite::Symmetry | Suite::Restriction => 8,
            Suite::Kdep | Suite::Window => 9,
            Suite::Coupling => 7,
            Suite::Marginals => 9,
            Suite::Kernels => 8,
            Suite::BlockfactorStat => 2,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// Parameters shared by the suites. `n`, `q` and `k` select a single
/// k-dependence check.
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub max_n: Option<usize>,
    pub n: Option<usize>,
    pub q: Option<u8>,
    pub k: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub label: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckOutcome {
    fn new(label: impl Into<String>, pass: bool, detail: Option<String>) -> Self {
        CheckOutcome {
            label: label.into(),
            pass,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
    /// Detail of the first failing check.
    pub counterexample: Option<String>,
    pub elapsed_ms: u128,
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let started = Instant::now();
    let max_n = opts.max_n.unwrap_or_else(|| suite.default_max_n());
    let checks = match suite {
        Suite::Partition => partition(max_n)?,
        Suite::Mobius => mobius(max_n)?,
        Suite::Shift => symmetry(max_n, false)?,
        Suite::Symmetry => symmetry(max_n, true)?,
        Suite::Restriction => restriction(max_n)?,
        Suite::Kdep => kdep(max_n, opts)?,
        Suite::Coupling => coupling(max_n)?,
        Suite::Window => window(max_n)?,
        Suite::Marginals => marginals(max_n)?,
        Suite::Kernels => kernels(max_n)?,
        Suite::BlockfactorStat => blockfactor()?,
    };
    let counterexample = checks
        .iter()
        .find(|c| !c.pass)
        .map(|c| c.detail.clone().unwrap_or_else(|| c.label.clone()));
    Ok(SuiteReport {
        suite,
        pass: checks.iter().all(|c| c.pass),
        checks,
        counterexample,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

/// Every suite at its default range, capped by `max_n` when given.
pub fn run_all(max_n: Option<usize>) -> Result<Vec<SuiteReport>> {
    Suite::ALL
        .into_iter()
        .map(|suite| {
            let opts = VerifyOptions {
                max_n: max_n.map(|m| m.min(suite.default_max_n())),
                ..Default::default()
            };
            run_suite(suite, &opts)
        })
        .collect()
}

fn partition(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let counter = CycleCounter::<BigCount>::new();
    let mut out = Vec::new();
    for q in 3..=6u8 {
        for n in 2..=max_n {
            let got = counter.z_circ(n, q)?;
            let want = z_circ_closed(n, q)?;
            let pass = got == want;
            out.push(CheckOutcome::new(
                format!("n={n} q={q}"),
                pass,
                (!pass).then(|| format!("recurrence {got} != closed form {want}")),
            ));
        }
    }
    Ok(out)
}

fn mobius(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for q in [3u8, 4] {
        let direct = CycleCounter::<BigCount>::new();
        let mut inverted = MobiusCounter::<BigCount>::new();
        for n in 1..=max_n {
            let mut bad = None;
            let mut words = 0u64;
            let mut err = None;
            for_each_word(n, q, &mut |x| {
                if bad.is_some() || err.is_some() {
                    return;
                }
                words += 1;
                match (direct.eval(x), inverted.eval(x)) {
                    (Ok(a), Ok(b)) if a == b => {}
                    (Ok(a), Ok(b)) => {
                        bad = Some(format!(
                            "{}: direct {a} != inverted {b}",
                            Word::from_symbols(x.to_vec())
                        ))
                    }
                    (Err(e), _) | (_, Err(e)) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            out.push(CheckOutcome::new(
                format!("n={n} q={q} ({words} words)"),
                bad.is_none(),
                bad,
            ));
        }
    }
    Ok(out)
}

fn symmetry(max_n: usize, colors: bool) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for q in [3u8, 4] {
        let ops: Vec<SymmetryOp> = symmetry_generators(q)
            .into_iter()
            .filter(|op| matches!(op, SymmetryOp::ColorPermutation(_)) == colors)
            .collect();
        for n in 3..=max_n {
            let d = cycle_law(n, q)?;
            let broken = ops.iter().find(|op| !symmetry_check(&d, op));
            out.push(CheckOutcome::new(
                format!("n={n} q={q}"),
                broken.is_none(),
                broken.map(|op| format!("cycle_law({n},{q}) is not invariant under {op}")),
            ));
        }
    }
    Ok(out)
}

const THEOREM_PAIRS: [(usize, u8); 2] = [(1, 4), (2, 3)];

fn restriction(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (k, q) in THEOREM_PAIRS {
        let cyc = CycleCounter::<BigCount>::new();
        let line = LineCounter::<BigCount>::new();
        let z = cyc.z_circ(k, q)?;
        for n in 0..=max_n {
            let mut bad = None;
            let mut err = None;
            for_each_word(n, q, &mut |x| {
                if bad.is_some() || err.is_some() {
                    return;
                }
                let w = Word::from_symbols(x.to_vec());
                match (cyc.restriction_sum(&w, k, q), line.eval(x)) {
                    (Ok(lhs), Ok(b)) => {
                        let rhs = &z * &b;
                        if lhs != rhs {
                            bad = Some(format!("{w}: sum {lhs} != {z} * {b}"));
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            out.push(CheckOutcome::new(
                format!("n={n} k={k} q={q}"),
                bad.is_none(),
                bad,
            ));
        }
    }
    Ok(out)
}

fn kdep_check(n: usize, q: u8, k: usize) -> Result<CheckOutcome> {
    let rep = k_dependence_report(&cycle_law(n, q)?, k, KDepMode::Full)?;
    Ok(CheckOutcome::new(
        format!(
            "cycle_law({n},{q}) is {k}-dependent ({} pairs)",
            rep.pairs_total
        ),
        rep.independent,
        rep.counterexample.map(|c| c.to_string()),
    ))
}

fn kdep(max_n: usize, opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    if opts.n.is_some() || opts.q.is_some() || opts.k.is_some() {
        let n = opts
            .n
            .ok_or_else(|| Error::InvalidArgument("kdep needs --n".into()))?;
        let q = opts
            .q
            .ok_or_else(|| Error::InvalidArgument("kdep needs --q".into()))?;
        let k = opts
            .k
            .ok_or_else(|| Error::InvalidArgument("kdep needs --k".into()))?;
        return Ok(vec![kdep_check(n, q, k)?]);
    }
    let mut out = Vec::new();
    for (k, q) in [(2usize, 3u8), (1, 4)] {
        for n in 5..=max_n {
            out.push(kdep_check(n, q, k)?);
        }
    }
    // control: the 2-dependent law on 5 vertices is not 1-dependent
    let control = kdep_check(5, 3, 1)?;
    out.push(CheckOutcome::new(
        "control: cycle_law(5,3) is not 1-dependent",
        !control.pass,
        control.detail.map(|d| format!("witness {d}")),
    ));
    Ok(out)
}

fn coupling(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for q in [3u8, 4] {
        for n in 3..=max_n {
            let kernel = coupling_kernel(n, q)?;
            let pushed = kernel.push(&cycle_law(n, q)?)?;
            let target = cycle_law(n + 1, q)?;
            let pass = pushed == target;
            let detail = (!pass).then(|| {
                let s = pushed
                    .support()
                    .chain(target.support())
                    .find(|s| pushed.prob(s) != target.prob(s))
                    .map(|s| {
                        format!(
                            "{s}: pushed {} vs law {}",
                            rational_string(&pushed.prob(s)),
                            rational_string(&target.prob(s))
                        )
                    });
                s.unwrap_or_default()
            });
            out.push(CheckOutcome::new(
                format!("transport n={n} q={q}"),
                pass,
                detail,
            ));
            let eden = eden_vs_necklace_kernel_check(n, q)?;
            out.push(CheckOutcome::new(
                format!("eden kernel n={n} q={q}"),
                eden,
                (!eden).then(|| format!("an Eden state of length {n} steps differently")),
            ));
        }
    }
    Ok(out)
}

fn window(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let mut jobs = Vec::new();
    for (k, q) in THEOREM_PAIRS {
        for m in 4..=max_n {
            jobs.push((m, k, q));
        }
    }
    jobs.into_par_iter()
        .map(|(m, k, q)| {
            let first: Vec<usize> = (1..=m - k).collect();
            let marginal = marginalize(&cycle_law(m, q)?, &first)?;
            let line = line_window_law(m - k, k, q)?;
            let pass = marginal == line;
            let detail = (!pass).then(|| {
                let s = marginal
                    .support()
                    .chain(line.support())
                    .find(|s| marginal.prob(s) != line.prob(s))
                    .cloned()
                    .expect("laws differ somewhere");
                format!(
                    "{s}: cycle marginal {} vs line {}",
                    rational_string(&marginal.prob(&s)),
                    rational_string(&line.prob(&s))
                )
            });
            Ok(CheckOutcome::new(
                format!("m={m} k={k} q={q}"),
                pass,
                detail,
            ))
        })
        .collect()
}

fn compare<S: Ord + Clone + fmt::Display>(
    label: String,
    got: &crate::ExactDist<S>,
    want: &crate::ExactDist<S>,
) -> CheckOutcome {
    let pass = got == want;
    let detail = (!pass).then(|| {
        got.support()
            .chain(want.support())
            .find(|s| got.prob(s) != want.prob(s))
            .map(|s| {
                format!(
                    "{s}: {} vs {}",
                    rational_string(&got.prob(s)),
                    rational_string(&want.prob(s))
                )
            })
            .unwrap_or_default()
    });
    CheckOutcome::new(label, pass, detail)
}

fn marginals(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let v1 = ChainVariant::ColorsOneTwoQ4;
    let v2 = ChainVariant::ColorOneQ3;
    for n in 3..=max_n.min(8) {
        let image = pushforward(&cycle_law(n, 4)?, |x| v1.indicator(x));
        out.push(compare(
            format!("colors 1,2 of q=4 vs descents, n={n}"),
            &image,
            &descent_law(n)?,
        ));
        let image = pushforward(&cycle_law(n, 3)?, |x| v2.indicator(x));
        out.push(compare(
            format!("color 1 of q=3 vs peaks, n={n}"),
            &image,
            &peak_law(n)?,
        ));
    }
    let one = Rational::from_u64_ratio(1, 4);
    for n in 3..=max_n.min(9) {
        let law = cycle_law(n, 4)?;
        let image = pushforward(&law, |x| crate::chains::colors_indicator(x, &[1]));
        out.push(compare(
            format!("color 1 of q=4 vs bit descents, n={n}"),
            &image,
            &bit_descent_law(n)?,
        ));
        let site = law.prob_of(|x| x.as_slice()[0] == 1);
        out.push(CheckOutcome::new(
            format!("P(X_1 = 1) = 1/4, n={n}"),
            site == one,
            (site != one).then(|| format!("got {}", rational_string(&site))),
        ));
    }
    Ok(out)
}

fn kernels(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for v in [ChainVariant::ColorsOneTwoQ4, ChainVariant::ColorOneQ3] {
        for n in 3..=max_n {
            let j = j_kernel(v, n)?;
            let q = q_kernel(v, n)?;
            let pass = kernel_equal(&j, &q)?;
            let detail = (!pass).then(|| {
                first_difference(&j, &q)
                    .map(|s| format!("rows from {s} differ"))
                    .unwrap_or_default()
            });
            out.push(CheckOutcome::new(
                format!("{} n={n} ({} states)", v.name(), j.len()),
                pass,
                detail,
            ));
        }
    }
    Ok(out)
}

fn blockfactor() -> Result<Vec<CheckOutcome>> {
    let s = iota_two_site_statistic()?;
    let sixth = Rational::from_u64_ratio(1, 6);
    let detail = format!(
        "actual {} vs block-factor {} (single site {})",
        rational_string(&s.actual),
        rational_string(&s.block_factor),
        rational_string(&s.single_site)
    );
    Ok(vec![CheckOutcome::new(
        "two-site statistic separates from every 2-block-factor",
        s.actual == sixth && s.actual != s.block_factor,
        Some(detail),
    )])
}
