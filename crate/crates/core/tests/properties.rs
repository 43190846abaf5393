use findep::analysis::{marginalize, pushforward};
use findep::chains::{
    colors_indicator, evolve_j_chain, line_bit_descent_law, line_descent_law, line_peak_law,
    ChainVariant,
};
use findep::eden::EdenState;
use findep::insertion::{coupling_row, necklace_sample};
use findep::recurrence::{cycle_law, line_window_law};
use findep::{Probability, Rational, RngStream, Sequence, Word};
use proptest::prelude::*;

#[test]
fn line_windows_carry_the_linear_statistics() {
    for m in 1..=6 {
        let four = line_window_law(m, 1, 4).unwrap();
        let three = line_window_law(m, 2, 3).unwrap();
        assert_eq!(
            pushforward(&four, |x| colors_indicator(x, &[1, 2])),
            line_descent_law(m).unwrap(),
            "descents m={m}"
        );
        assert_eq!(
            pushforward(&three, |x| colors_indicator(x, &[1])),
            line_peak_law(m).unwrap(),
            "peaks m={m}"
        );
        assert_eq!(
            pushforward(&four, |x| colors_indicator(x, &[1])),
            line_bit_descent_law(m).unwrap(),
            "bit descents m={m}"
        );
    }
}

#[test]
fn line_windows_are_consistent_and_stationary() {
    for (k, q) in [(1usize, 4u8), (2, 3)] {
        for m in 2..=7 {
            let long = line_window_law(m, k, q).unwrap();
            let short = line_window_law(m - 1, k, q).unwrap();
            let head: Vec<usize> = (1..m).collect();
            let tail: Vec<usize> = (2..=m).collect();
            assert_eq!(marginalize(&long, &head).unwrap(), short);
            assert_eq!(marginalize(&long, &tail).unwrap(), short);
        }
    }
}

#[test]
fn chains_evolve_to_the_pushforwards() {
    for v in [ChainVariant::ColorsOneTwoQ4, ChainVariant::ColorOneQ3] {
        for n in 3..=8 {
            let push = pushforward(&cycle_law(n, v.q()).unwrap(), |x| v.indicator(x));
            assert_eq!(evolve_j_chain(v, n).unwrap(), push, "{v:?} n={n}");
        }
    }
}

#[test]
fn coupling_row_mass_on_rotation_classes() {
    // from 123 with q = 3 every gap has one legal color, so each of the
    // three insertions is followed by a uniform rotation of a 4-word
    let row = coupling_row::<Rational>(&"123".parse().unwrap(), 3);
    assert_eq!(row.len(), 12);
    assert!(row
        .iter()
        .all(|(_, p)| *p == Rational::from_u64_ratio(1, 12)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn necklaces_are_cyclically_proper(seed in any::<u64>(), n in 3usize..20, q in 3u8..7) {
        let x = necklace_sample(n, q, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert_eq!(x.len(), n);
        prop_assert!(x.is_cyclically_proper());
        prop_assert!(x.check_alphabet(q).is_ok());
    }

    #[test]
    fn eden_invariants_hold_after_every_step(seed in any::<u64>(), steps in 0usize..30, q in 3u8..6) {
        let mut rng = RngStream::new(seed, 1);
        let mut s = EdenState::with_initial_colors(q, [1, 2, 3]).unwrap();
        for t in 0..steps {
            s.step(&mut rng).unwrap();
            s.validate().unwrap();
            prop_assert_eq!(s.size(), t + 2);
            prop_assert_eq!(s.boundary().len(), s.size() + 2);
            prop_assert_eq!(s.outer_len(), s.size() + 2);
            let w = s.read_from(t % s.outer_len());
            prop_assert!(w.is_cyclically_proper());
        }
    }

    #[test]
    fn cycle_law_probabilities_are_rotation_invariant(n in 3usize..7, q in 3u8..5, r in 0i64..7) {
        let d = cycle_law(n, q).unwrap();
        for (x, p) in d.iter() {
            prop_assert_eq!(&d.prob(&x.rotate(r).unwrap()), p);
            prop_assert_eq!(&d.prob(&x.reflect()), p);
        }
        let total = d.iter().fold(Rational::from_u64_ratio(0, 1), |acc, (_, p)| acc + p.clone());
        prop_assert_eq!(total, Rational::from_u64_ratio(1, 1));
    }

    #[test]
    fn window_law_matches_cycle_marginal_for_random_words(m in 4usize..8, pick in any::<u32>()) {
        let (k, q) = if pick % 2 == 0 { (1usize, 4u8) } else { (2, 3) };
        let first: Vec<usize> = (1..=m - k).collect();
        let marginal = marginalize(&cycle_law(m, q).unwrap(), &first).unwrap();
        let line = line_window_law(m - k, k, q).unwrap();
        // probe one word, possibly improper
        let symbols: Vec<u8> = (0..m - k).map(|i| 1 + ((pick >> (2 * i)) % q as u32) as u8).collect();
        let w = Word::from_symbols(symbols);
        prop_assert_eq!(marginal.prob(&w), line.prob(&w));
    }
}
