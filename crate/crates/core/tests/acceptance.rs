//! The thirteen acceptance criteria, each printed as one PASS/FAIL line.
//!
//! Runs without the libtest harness so the lines reach the terminal. A
//! criterion that cannot hold as stated is listed in `KNOWN_FAILURES`; for it
//! the run checks that the failure has exactly the documented shape instead.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use findep::analysis::{
    chi_square_gof, k_dependence_report, marginalize, pushforward, symmetry_check, tally, KDepMode,
    SymmetryOp, DEFAULT_ALPHA,
};
use findep::chains::{
    bit_descent_law, colors_indicator, descent_law, iota_two_site_statistic, j_kernel, peak_law,
    q_kernel, BinaryState, ChainVariant,
};
use findep::eden::{eden_sample, eden_vs_necklace_kernel_check};
use findep::insertion::{coupling_kernel, necklace_sample, sample_replicates};
use findep::recurrence::{
    cycle_law, line_window_law, z_circ_closed, CycleCounter, LineCounter, MobiusCounter,
};
use findep::{BigCount, ColorPerm, Dist, Probability, Rational, Sequence, Word};

/// Seeds for the sampler criterion; replicate `j` uses stream `j`.
const NECKLACE_SEED: u64 = 20_171;
const EDEN_SEED: u64 = 20_172;
const REPLICATES: usize = 100_000;

/// Criterion 4 with `(k, q) = (1, 4)`: the single-letter convention gives
/// `z_circ(1, 4) = 4`, but every nonempty word satisfies
/// `restriction_sum(x, 1, 4) = 6 * b_vec(x, 4)`.
const KNOWN_FAILURES: [u32; 1] = [4];

/// Id, name, check, and time limit in seconds.
type Criterion = (u32, &'static str, fn() -> Outcome, Option<u64>);

struct Outcome {
    pass: bool,
    detail: String,
    /// For known failures: whether the failure has the documented shape.
    as_documented: bool,
}

impl Outcome {
    fn pass(detail: impl Into<String>) -> Self {
        Outcome {
            pass: true,
            detail: detail.into(),
            as_documented: true,
        }
    }

    fn check(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
            as_documented: pass,
        }
    }
}

fn all_words(n: usize, q: u8) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=q).map(move |c| {
                    let mut v = w.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

fn criterion_1() -> Outcome {
    let counter = CycleCounter::<BigCount>::new();
    for q in 3..=6u8 {
        for n in 2..=10 {
            let got = counter.z_circ(n, q).unwrap();
            let want = z_circ_closed(n, q).unwrap();
            if got != want {
                return Outcome::check(false, format!("n={n} q={q}: {got} != {want}"));
            }
        }
    }
    Outcome::pass("36 (n, q) pairs")
}

fn criterion_2() -> Outcome {
    let mut words = 0;
    for q in [3u8, 4] {
        let direct = CycleCounter::<BigCount>::new();
        let mut inverted = MobiusCounter::<BigCount>::new();
        for n in 1..=8 {
            for x in all_words(n, q) {
                words += 1;
                let (a, b) = (direct.eval(&x).unwrap(), inverted.eval(&x).unwrap());
                if a != b {
                    return Outcome::check(false, format!("{x:?}: {a} != {b}"));
                }
            }
        }
    }
    Outcome::pass(format!("{words} words"))
}

fn criterion_3() -> Outcome {
    let mut ops_checked = 0;
    for q in [3u8, 4] {
        for n in 3..=8 {
            let d = cycle_law(n, q).unwrap();
            let mut ops: Vec<SymmetryOp> = (1..n as i64).map(SymmetryOp::Rotation).collect();
            ops.push(SymmetryOp::Reflection);
            ops.extend(ColorPerm::all(q).map(SymmetryOp::ColorPermutation));
            for op in ops {
                ops_checked += 1;
                if !symmetry_check(&d, &op) {
                    return Outcome::check(false, format!("cycle_law({n},{q}) under {op}"));
                }
            }
        }
    }
    Outcome::pass(format!("{ops_checked} (law, operation) checks"))
}

fn criterion_4() -> Outcome {
    let mut literal_failures = Vec::new();
    let mut shape_holds = true;
    for (k, q) in [(1usize, 4u8), (2, 3)] {
        let cyc = CycleCounter::<BigCount>::new();
        let line = LineCounter::<BigCount>::new();
        let z = cyc.z_circ(k, q).unwrap();
        for n in 0..=8 {
            for x in all_words(n, q) {
                let lhs = cyc
                    .restriction_sum(&Word::from_symbols(x.clone()), k, q)
                    .unwrap();
                let b = line.eval(&x).unwrap();
                if lhs != &z * &b {
                    literal_failures.push((k, q, x.clone()));
                }
                // documented shape: exact for (2,3); for (1,4) exact on the
                // empty word and with constant 6 = 1! * 4 * 3 * 2^(-1) beyond
                let constant = if k == 1 && n >= 1 {
                    BigCount::from(6u8)
                } else {
                    z.clone()
                };
                shape_holds &= lhs == constant * b;
            }
        }
    }
    if literal_failures.is_empty() {
        return Outcome::pass("every word with n <= 8");
    }
    let only_k1 = literal_failures
        .iter()
        .all(|(k, _, x)| *k == 1 && !x.is_empty());
    let (_, _, first) = &literal_failures[0];
    Outcome {
        pass: false,
        detail: format!(
            "{} words fail for (k,q)=(1,4), first {:?}: sum is 6*b_vec, z_circ(1,4)=4; (2,3) holds",
            literal_failures.len(),
            first
        ),
        as_documented: only_k1 && shape_holds,
    }
}

fn criterion_5() -> Outcome {
    for (k, q) in [(1usize, 4u8), (2, 3)] {
        for m in 4..=9 {
            let first: Vec<usize> = (1..=m - k).collect();
            let marginal = marginalize(&cycle_law(m, q).unwrap(), &first).unwrap();
            if marginal != line_window_law(m - k, k, q).unwrap() {
                return Outcome::check(false, format!("m={m} k={k} q={q}"));
            }
        }
    }
    Outcome::pass("m in 4..=9 for both pairs")
}

fn criterion_6() -> Outcome {
    let mut pairs = 0;
    for (k, q) in [(2usize, 3u8), (1, 4)] {
        for n in 5..=9 {
            let rep = k_dependence_report(&cycle_law(n, q).unwrap(), k, KDepMode::Full).unwrap();
            pairs += rep.pairs_total;
            if !rep.independent {
                return Outcome::check(
                    false,
                    format!("n={n} q={q} k={k}: {}", rep.counterexample.unwrap()),
                );
            }
        }
    }
    let control = k_dependence_report(&cycle_law(5, 3).unwrap(), 1, KDepMode::Full).unwrap();
    match control.counterexample {
        Some(c) if !control.independent => {
            Outcome::pass(format!("{pairs} set pairs; control (5,3,k=1) fails at {c}"))
        }
        _ => Outcome::check(false, "cycle_law(5,3) reported 1-dependent"),
    }
}

fn criterion_7() -> Outcome {
    for q in [3u8, 4] {
        for n in 3..=7 {
            let pushed = coupling_kernel(n, q)
                .unwrap()
                .push(&cycle_law(n, q).unwrap())
                .unwrap();
            if pushed != cycle_law(n + 1, q).unwrap() {
                return Outcome::check(false, format!("transport n={n} q={q}"));
            }
            if !eden_vs_necklace_kernel_check(n, q).unwrap() {
                return Outcome::check(false, format!("eden kernel n={n} q={q}"));
            }
        }
    }
    Outcome::pass("transport and Eden kernel for n in 3..=7, q in {3,4}")
}

fn uniform_over(weights: &[usize], n: usize, p: Rational, d: &Dist<BinaryState, Rational>) -> bool {
    let states: Vec<BinaryState> = (0u32..1 << n)
        .map(|c| BinaryState::new((0..n).map(|i| (c >> i & 1) as u8).collect()).unwrap())
        .filter(|s| weights.contains(&s.weight()))
        .collect();
    d.len() == states.len() && states.iter().all(|s| d.prob(s) == p)
}

fn criterion_8() -> Outcome {
    let v = ChainVariant::ColorsOneTwoQ4;
    for n in 3..=8 {
        let image = pushforward(&cycle_law(n, 4).unwrap(), |x| v.indicator(x));
        if image != descent_law(n).unwrap() {
            return Outcome::check(false, format!("n={n}"));
        }
        if n == 3 && !uniform_over(&[1, 2], 3, Rational::from_u64_ratio(1, 6), &image) {
            return Outcome::check(false, "n=3 law is not uniform over the 6 vectors");
        }
    }
    Outcome::pass("n in 3..=8; n=3 uniform over 6 vectors")
}

fn criterion_9() -> Outcome {
    let v = ChainVariant::ColorOneQ3;
    for n in 3..=8 {
        let image = pushforward(&cycle_law(n, 3).unwrap(), |x| v.indicator(x));
        if image != peak_law(n).unwrap() {
            return Outcome::check(false, format!("n={n}"));
        }
        if n == 3 && !uniform_over(&[1], 3, Rational::from_u64_ratio(1, 3), &image) {
            return Outcome::check(false, "n=3 law is not uniform over singletons");
        }
    }
    Outcome::pass("n in 3..=8; n=3 uniform over singletons")
}

fn criterion_10() -> Outcome {
    let quarter = Rational::from_u64_ratio(1, 4);
    for n in 3..=9 {
        let law = cycle_law(n, 4).unwrap();
        let image = pushforward(&law, |x| colors_indicator(x, &[1]));
        if image != bit_descent_law(n).unwrap() {
            return Outcome::check(false, format!("n={n}"));
        }
        let site = law.prob_of(|x| x.as_slice()[0] == 1);
        if site != quarter {
            return Outcome::check(false, format!("n={n}: one-site marginal {site}"));
        }
    }
    Outcome::pass("n in 3..=9; one-site marginal 1/4")
}

fn criterion_11() -> Outcome {
    for v in [ChainVariant::ColorsOneTwoQ4, ChainVariant::ColorOneQ3] {
        for n in 3..=8 {
            if !findep::kernel_equal(&j_kernel(v, n).unwrap(), &q_kernel(v, n).unwrap()).unwrap() {
                return Outcome::check(false, format!("{} n={n}", v.name()));
            }
        }
    }
    Outcome::pass("both variants, n in 3..=8")
}

fn criterion_12() -> Outcome {
    let s = iota_two_site_statistic().unwrap();
    let sixth = Rational::from_u64_ratio(1, 6);
    let quarter = Rational::from_u64_ratio(1, 4);
    Outcome::check(
        s.actual == sixth && s.block_factor == quarter && s.actual != s.block_factor,
        format!("{} vs {}", s.actual, s.block_factor),
    )
}

fn criterion_13() -> Outcome {
    let cases = [(5usize, 3u8), (6, 3), (7, 3), (5, 4), (6, 4)];
    let mut worst = f64::INFINITY;
    let mut slowest = Duration::ZERO;
    for (n, q) in cases {
        let law = cycle_law(n, q).unwrap();
        for (name, seed) in [("necklace", NECKLACE_SEED), ("eden", EDEN_SEED)] {
            let started = Instant::now();
            let samples = if name == "necklace" {
                sample_replicates(REPLICATES, seed, |r| necklace_sample(n, q, r))
            } else {
                sample_replicates(REPLICATES, seed, |r| eden_sample(n, q, r))
            }
            .unwrap();
            let rep = chi_square_gof(&tally(&samples), &law, DEFAULT_ALPHA).unwrap();
            let took = started.elapsed();
            slowest = slowest.max(took);
            worst = worst.min(rep.p_value);
            if !rep.pass || took > Duration::from_secs(120) {
                return Outcome::check(
                    false,
                    format!(
                        "{name} n={n} q={q} seed={seed}: p={:.3e} in {took:?}",
                        rep.p_value
                    ),
                );
            }
        }
    }
    Outcome::pass(format!(
        "10 runs of {REPLICATES}; smallest p = {worst:.4}; slowest {:.1}s",
        slowest.as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        (1, "partition closed form", criterion_1, Some(60)),
        (
            2,
            "Mobius form agrees with recurrence",
            criterion_2,
            Some(60),
        ),
        (3, "rotation/reflection/color symmetry", criterion_3, None),
        (4, "restriction identity", criterion_4, None),
        (5, "cycle window equals line window", criterion_5, None),
        (6, "k-dependence", criterion_6, Some(300)),
        (7, "coupling transport and Eden kernel", criterion_7, None),
        (
            8,
            "colors {1,2} of q=4 are the descent set",
            criterion_8,
            None,
        ),
        (9, "color 1 of q=3 is the peak set", criterion_9, None),
        (
            10,
            "color 1 of q=4 is the bit descent set",
            criterion_10,
            None,
        ),
        (11, "J-rule and Q-rule kernels coincide", criterion_11, None),
        (12, "two-site statistic 1/6 vs 1/4", criterion_12, None),
        (13, "sampler goodness of fit", criterion_13, None),
    ];
    let mut unexpected = 0;
    for (id, name, run, limit) in criteria {
        let started = Instant::now();
        let mut out = run();
        let secs = started.elapsed().as_secs_f64();
        if let Some(limit) = limit {
            if secs > limit as f64 {
                out.detail = format!("{} (took {secs:.1}s, limit {limit}s)", out.detail);
                out.pass = false;
                out.as_documented = false;
            }
        }
        let tag = if out.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_FAILURES.contains(&id);
        let note = match (out.pass, known) {
            (false, true) if out.as_documented => " [known, as documented]",
            (false, true) => " [known criterion, undocumented failure shape]",
            (true, true) => " [listed as known failure but passed]",
            _ => "",
        };
        println!(
            "criterion {id:>2} {tag}: {name} ({secs:.1}s) {}{note}",
            out.detail
        );
        let ok = if known {
            !out.pass && out.as_documented
        } else {
            out.pass
        };
        if !ok {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        println!("acceptance: all criteria as expected");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected result(s)");
        ExitCode::FAILURE
    }
}
