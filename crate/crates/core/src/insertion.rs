//! Necklace insertion: insert a bead into a uniformly chosen gap with a color
//! differing from both neighbors, then rotate uniformly.

use rand::Rng;
use rayon::prelude::*;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::kernel::{spread_over_rotations, Kernel};
use crate::rng::RngStream;
use crate::scalar::Probability;
use crate::word::{Color, Sequence, Word};
use crate::Rational;

/// Inserts `z` just before 1-based position `i`, then applies `tau_r`, the
/// cyclic left shift by `r` on the lengthened word.
///
/// `r` may be anything in `0..=n+1`; `0` and `n+1` both give the identity.
pub fn insert_with_rotation(x: &Word, i: usize, z: Color, r: usize) -> Result<Word> {
    let n = x.len();
    if n == 0 {
        return Err(Error::EmptyWord);
    }
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    if r > n + 1 {
        return Err(Error::IndexOutOfRange {
            index: r,
            len: n + 1,
        });
    }
    let mut y = x.as_slice().to_vec();
    y.insert(i - 1, z);
    Word::from_symbols(y).rotated(r as i64)
}

/// Colors of `[q]` different from the two neighbors of gap `i` (the gap just
/// before position `i`, between `x_{i-1}` and `x_i`, indices mod `n`).
fn gap_colors(x: &[u8], i: usize, q: u8) -> Vec<Color> {
    let n = x.len();
    let left = x[(i + n - 2) % n];
    let right = x[i - 1];
    (1..=q).filter(|&c| c != left && c != right).collect()
}

fn check_params(n: usize, q: u8) -> Result<()> {
    if n < 3 {
        return Err(Error::LengthOutOfRange {
            n,
            min: 3,
            max: usize::MAX,
        });
    }
    if q < 3 {
        return Err(Error::TooFewColors { q, min: 3 });
    }
    Ok(())
}

/// One-step law from `x`: `I` uniform on `[n]`, `Z` uniform on
/// `[q] \ {x_{I-1}, x_I}`, `R` uniform on `[n+1]`.
pub fn coupling_row<P: Probability>(x: &Word, q: u8) -> Dist<Word, P> {
    let n = x.len();
    let mut masses = Vec::with_capacity(n * q as usize * (n + 1));
    for i in 1..=n {
        let colors = gap_colors(x.as_slice(), i, q);
        let mass = P::from_u64_ratio(1, (n * colors.len()) as u64);
        for &z in &colors {
            let mut y = x.as_slice().to_vec();
            y.insert(i - 1, z);
            spread_over_rotations(&Word::from_symbols(y), mass.clone(), &mut masses);
        }
    }
    Dist::from_masses(masses)
}

/// Exact insertion kernel on the cyclically proper words of `[q]^n`.
pub fn coupling_kernel_as<P: Probability>(n: usize, q: u8) -> Result<Kernel<Word, P>> {
    check_params(n, q)?;
    let mut domain = Vec::new();
    for first in 1..=q {
        crate::recurrence::for_each_word_with_first(n, q, first, true, &mut |x| {
            domain.push(Word::from_symbols(x.to_vec()));
        });
    }
    let rows: Vec<(Word, Dist<Word, P>)> = domain
        .into_par_iter()
        .map(|x| {
            let row = coupling_row(&x, q);
            (x, row)
        })
        .collect();
    let mut kernel = Kernel::new(n);
    for (x, row) in rows {
        kernel.insert_row(x, row);
    }
    Ok(kernel)
}

pub fn coupling_kernel(n: usize, q: u8) -> Result<Kernel<Word, Rational>> {
    coupling_kernel_as(n, q)
}

/// Uniformly random ordered triple of distinct colors.
pub(crate) fn distinct_triple(q: u8, rng: &mut RngStream) -> [Color; 3] {
    let a = rng.gen_range(1..=q);
    let mut b = rng.gen_range(1..q);
    if b >= a {
        b += 1;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mut c = rng.gen_range(1..q - 1);
    if c >= lo {
        c += 1;
    }
    if c >= hi {
        c += 1;
    }
    [a, b, c]
}

/// One random insertion step, rotation included.
pub fn insertion_step(x: &Word, q: u8, rng: &mut RngStream) -> Result<Word> {
    let n = x.len();
    let i = rng.gen_range(1..=n);
    let colors = gap_colors(x.as_slice(), i, q);
    if colors.is_empty() {
        return Err(Error::TooFewColors { q, min: 3 });
    }
    let z = colors[rng.gen_range(0..colors.len())];
    let r = rng.gen_range(1..=n + 1);
    insert_with_rotation(x, i, z, r)
}

/// A necklace of `n` beads: start from three beads of distinct uniform colors
/// and run `n - 3` insertion steps.
pub fn necklace_sample(n: usize, q: u8, rng: &mut RngStream) -> Result<Word> {
    check_params(n, q)?;
    let mut x = Word::from_symbols(distinct_triple(q, rng).to_vec());
    for _ in 3..n {
        x = insertion_step(&x, q, rng)?;
    }
    Ok(x)
}

/// Runs `reps` replicates, replicate `j` on stream `j` of `seed`. Output order
/// follows the replicate index regardless of scheduling.
pub fn sample_replicates<F>(reps: usize, seed: u64, sampler: F) -> Result<Vec<Word>>
where
    F: Fn(&mut RngStream) -> Result<Word> + Sync,
{
    (0..reps as u64)
        .into_par_iter()
        .map(|j| sampler(&mut RngStream::new(seed, j)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::cycle_law;
    use num_traits::One;
    use std::collections::BTreeMap;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn insert_examples() {
        assert_eq!(insert_with_rotation(&w("123"), 2, 4, 0).unwrap(), w("1423"));
        assert_eq!(insert_with_rotation(&w("123"), 2, 4, 4).unwrap(), w("1423"));
        assert_eq!(insert_with_rotation(&w("123"), 1, 4, 1).unwrap(), w("1234"));
        assert_eq!(insert_with_rotation(&w("1"), 1, 2, 0).unwrap(), w("21"));
        assert!(insert_with_rotation(&w("123"), 4, 4, 1).is_err());
        assert!(insert_with_rotation(&w("123"), 0, 4, 1).is_err());
        assert!(insert_with_rotation(&w("123"), 1, 4, 5).is_err());
        assert_eq!(
            insert_with_rotation(&Word::empty(), 1, 1, 0),
            Err(Error::EmptyWord)
        );
    }

    #[test]
    fn kernel_rows_are_distributions() {
        let k = coupling_kernel(4, 3).unwrap();
        assert!(k.rows_normalized());
        assert_eq!(k.source_len(), 4);
        // cyclically proper 4-words over 3 colors: 2^4 + 2
        assert_eq!(k.len(), 18);
        let row = k.row(&w("123")).is_none();
        assert!(row);
        let k3 = coupling_kernel(3, 3).unwrap();
        let row = k3.row(&w("123")).unwrap();
        assert!(row
            .support()
            .all(|y| y.is_cyclically_proper() && y.len() == 4));
    }

    #[test]
    fn kernel_pushes_cycle_law_forward() {
        let k = coupling_kernel(3, 3).unwrap();
        assert_eq!(
            k.push(&cycle_law(3, 3).unwrap()).unwrap(),
            cycle_law(4, 3).unwrap()
        );
    }

    #[test]
    fn kernel_errors() {
        assert!(matches!(
            coupling_kernel(2, 3),
            Err(Error::LengthOutOfRange { .. })
        ));
        assert!(matches!(
            coupling_kernel(3, 2),
            Err(Error::TooFewColors { .. })
        ));
        let k = coupling_kernel(3, 3).unwrap();
        let stray = Dist::point(w("121"));
        assert_eq!(k.push(&stray), Err(Error::MissingRow("121".into())));
    }

    #[test]
    fn float_kernel_instantiation() {
        let k = coupling_kernel_as::<f64>(3, 4).unwrap();
        for (_, row) in k.iter() {
            assert!((row.total() - 1.0).abs() < 1e-12);
        }
        let exact = coupling_kernel(3, 4).unwrap();
        let x = w("124");
        assert_eq!(exact.row(&x).unwrap().total(), Rational::one());
    }

    #[test]
    fn distinct_triples_are_uniform_support() {
        let mut rng = RngStream::new(1, 0);
        let mut seen = BTreeMap::new();
        for _ in 0..6000 {
            let t = distinct_triple(4, &mut rng);
            assert!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
            *seen.entry(t).or_insert(0u32) += 1;
        }
        assert_eq!(seen.len(), 24);
        assert!(seen.values().all(|&c| (150..350).contains(&c)));
    }

    #[test]
    fn necklace_is_cyclically_proper_and_deterministic() {
        let a = sample_replicates(200, 9, |r| necklace_sample(8, 3, r)).unwrap();
        let b = sample_replicates(200, 9, |r| necklace_sample(8, 3, r)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.len() == 8 && x.is_cyclically_proper()));
        let three = necklace_sample(3, 5, &mut RngStream::new(2, 2)).unwrap();
        assert_eq!(three.len(), 3);
        assert!(three.is_cyclically_proper());
        assert!(necklace_sample(2, 3, &mut RngStream::new(0, 0)).is_err());
    }
}
