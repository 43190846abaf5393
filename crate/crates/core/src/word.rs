//! Colored words on cycles and intervals.
//!
//! Positions are 1-based in every public operation. In a cyclic context
//! position `i` is read modulo the length.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Color = u8;

/// A finite sequence of small symbols with cyclic helpers.
///
/// Implemented by [`Word`] (colors `1..=q`) and by
/// [`BinaryState`](crate::chains::BinaryState) (bits).
pub trait Sequence: Clone + Ord + Hash + fmt::Display + Send + Sync {
    fn symbols(&self) -> &[u8];

    fn from_symbols(symbols: Vec<u8>) -> Self;

    fn len(&self) -> usize {
        self.symbols().len()
    }

    fn is_empty(&self) -> bool {
        self.symbols().is_empty()
    }

    /// Cyclic left shift by `r`, reduced modulo the length.
    fn rotated(&self, r: i64) -> Result<Self> {
        let s = self.symbols();
        if s.is_empty() {
            return Err(Error::EmptyWord);
        }
        let shift = r.rem_euclid(s.len() as i64) as usize;
        let mut out = Vec::with_capacity(s.len());
        out.extend_from_slice(&s[shift..]);
        out.extend_from_slice(&s[..shift]);
        Ok(Self::from_symbols(out))
    }

    fn reflected(&self) -> Self {
        Self::from_symbols(self.symbols().iter().rev().copied().collect())
    }

    /// All distinct rotations, in order of first appearance.
    fn distinct_rotations(&self) -> Vec<Self> {
        let n = self.len();
        if n == 0 {
            return vec![self.clone()];
        }
        (0..n as i64)
            .map(|r| self.rotated(r).expect("nonempty"))
            .unique()
            .collect()
    }
}

/// A word over the colors `1..=q`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word(Vec<Color>);

impl Word {
    /// Builds a word, checking that every symbol is a color in `[1, q]`.
    pub fn new(symbols: Vec<Color>, q: u8) -> Result<Self> {
        let w = Word(symbols);
        w.check_alphabet(q)?;
        Ok(w)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn check_alphabet(&self, q: u8) -> Result<()> {
        match self.0.iter().find(|&&c| c == 0 || c > q) {
            Some(&symbol) => Err(Error::SymbolOutOfRange { symbol, q }),
            None => Ok(()),
        }
    }

    pub fn as_slice(&self) -> &[Color] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Color> {
        self.0
    }

    /// `x` with the symbol at 1-based position `i` removed.
    pub fn delete_at(&self, i: usize) -> Result<Word> {
        if i == 0 || i > self.0.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.0.len(),
            });
        }
        let mut out = self.0.clone();
        out.remove(i - 1);
        Ok(Word(out))
    }

    pub fn rotate(&self, r: i64) -> Result<Word> {
        self.rotated(r)
    }

    pub fn reflect(&self) -> Word {
        self.reflected()
    }

    /// No two consecutive symbols are equal. Not cyclic.
    pub fn is_proper(&self) -> bool {
        is_proper(&self.0)
    }

    /// Proper, and the last symbol differs from the first.
    ///
    /// Words of length 0 and 1 count as cyclically proper: the 1-cycle has
    /// no edge, so a single letter gets `B°(x) = B°(∅) = 1`. This is the
    /// convention under which `Z°(2, q) = 2q(q-1)`.
    pub fn is_cyclically_proper(&self) -> bool {
        is_cyclically_proper(&self.0)
    }

    pub fn apply_color_perm(&self, sigma: &ColorPerm) -> Result<Word> {
        let out = self
            .0
            .iter()
            .map(|&c| sigma.apply(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word(out))
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        Word(out)
    }

    /// Text form for an alphabet of size `q`: digits when `q <= 9`,
    /// comma-separated integers otherwise.
    pub fn to_text(&self, q: u8) -> String {
        if q <= 9 {
            self.0.iter().map(|c| char::from(b'0' + c)).collect()
        } else {
            self.0.iter().join(",")
        }
    }
}

pub(crate) fn is_proper(x: &[u8]) -> bool {
    x.windows(2).all(|w| w[0] != w[1])
}

pub(crate) fn is_cyclically_proper(x: &[u8]) -> bool {
    if x.len() <= 1 {
        return true;
    }
    is_proper(x) && x[0] != x[x.len() - 1]
}

impl Sequence for Word {
    fn symbols(&self) -> &[u8] {
        &self.0
    }

    fn from_symbols(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.0.iter().copied().max().unwrap_or(0);
        f.write_str(&self.to_text(q))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("Word(∅)")
        } else {
            write!(f, "Word({self})")
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Accepts a digit string (`"1213"`), a comma-separated list
    /// (`"1,12,3"`), or the empty string / `"∅"` for the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || t == "∅" {
            return Ok(Word::empty());
        }
        let symbols = if t.contains(',') {
            t.split(',')
                .map(|p| p.trim().parse::<u8>().map_err(|_| Error::Parse(s.into())))
                .collect::<Result<Vec<_>>>()?
        } else {
            t.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| Error::Parse(s.into()))
                })
                .collect::<Result<Vec<_>>>()?
        };
        if symbols.contains(&0) {
            return Err(Error::Parse(s.into()));
        }
        Ok(Word(symbols))
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for Word {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A permutation of the colors `1..=q`, stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColorPerm {
    images: Vec<Color>,
}

impl ColorPerm {
    /// `images[c - 1]` is the image of color `c`.
    pub fn new(images: Vec<Color>) -> Result<Self> {
        let q = images.len() as u8;
        let mut seen = vec![false; images.len()];
        for &c in &images {
            if c == 0 || c > q || seen[c as usize - 1] {
                return Err(Error::NotAPermutation { q });
            }
            seen[c as usize - 1] = true;
        }
        Ok(ColorPerm { images })
    }

    pub fn identity(q: u8) -> Self {
        ColorPerm {
            images: (1..=q).collect(),
        }
    }

    pub fn transposition(q: u8, a: Color, b: Color) -> Result<Self> {
        if a == 0 || b == 0 || a > q || b > q {
            return Err(Error::NotAPermutation { q });
        }
        let mut images: Vec<Color> = (1..=q).collect();
        images.swap(a as usize - 1, b as usize - 1);
        Ok(ColorPerm { images })
    }

    /// Every permutation of `1..=q`, identity first.
    pub fn all(q: u8) -> impl Iterator<Item = ColorPerm> {
        (1..=q)
            .permutations(q as usize)
            .map(|images| ColorPerm { images })
    }

    pub fn q(&self) -> u8 {
        self.images.len() as u8
    }

    pub fn apply(&self, c: Color) -> Result<Color> {
        if c == 0 || c as usize > self.images.len() {
            return Err(Error::SymbolOutOfRange {
                symbol: c,
                q: self.q(),
            });
        }
        Ok(self.images[c as usize - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn delete_at_examples() {
        assert_eq!(w("123").delete_at(2).unwrap(), w("13"));
        assert_eq!(w("1").delete_at(1).unwrap(), Word::empty());
        assert_eq!(w("1213").delete_at(4).unwrap(), w("121"));
        assert_eq!(
            w("12").delete_at(3),
            Err(Error::IndexOutOfRange { index: 3, len: 2 })
        );
        assert!(w("12").delete_at(0).is_err());
    }

    #[test]
    fn rotate_examples() {
        let x = w("123");
        assert_eq!(x.rotate(1).unwrap(), w("231"));
        assert_eq!(x.rotate(0).unwrap(), x);
        assert_eq!(w("12").rotate(2).unwrap(), w("12"));
        assert_eq!(x.rotate(-1).unwrap(), w("312"));
        assert_eq!(Word::empty().rotate(1), Err(Error::EmptyWord));
    }

    #[test]
    fn properness_examples() {
        assert!(w("121").is_proper());
        assert!(!w("112").is_proper());
        assert!(Word::empty().is_proper());
        assert!(w("123").is_cyclically_proper());
        assert!(!w("121").is_cyclically_proper());
        assert!(w("1").is_cyclically_proper());
        assert!(Word::empty().is_cyclically_proper());
        assert!(!w("11").is_cyclically_proper());
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(w("123").reflect(), w("321"));
        assert_eq!(w("11").reflect(), w("11"));
        assert_eq!(Word::empty().reflect(), Word::empty());
    }

    #[test]
    fn color_perm_examples() {
        assert_eq!(
            w("123").apply_color_perm(&ColorPerm::identity(3)).unwrap(),
            w("123")
        );
        let swap = ColorPerm::transposition(3, 1, 2).unwrap();
        assert_eq!(w("123").apply_color_perm(&swap).unwrap(), w("213"));
        // the cycle (1 3 2): 1 -> 3, 3 -> 2, 2 -> 1
        let cycle = ColorPerm::new(vec![3, 1, 2]).unwrap();
        assert_eq!(w("11").apply_color_perm(&cycle).unwrap(), w("33"));
        assert_eq!(
            ColorPerm::new(vec![1, 1, 2]),
            Err(Error::NotAPermutation { q: 3 })
        );
        assert_eq!(ColorPerm::all(3).count(), 6);
        assert!(w("14").apply_color_perm(&swap).is_err());
    }

    #[test]
    fn alphabet_and_text_forms() {
        assert!(Word::new(vec![1, 4], 3).is_err());
        assert!(Word::new(vec![1, 3], 3).is_ok());
        assert_eq!(w("1,10,2").as_slice(), &[1, 10, 2]);
        assert_eq!(w("1,10,2").to_string(), "1,10,2");
        assert_eq!(w("1213").to_text(4), "1213");
        assert_eq!(w("1213").to_text(12), "1,2,1,3");
        assert!("10".parse::<Word>().is_err());
        assert!("1a".parse::<Word>().is_err());
        let json = serde_json::to_string(&w("132")).unwrap();
        assert_eq!(json, "\"132\"");
        assert_eq!(serde_json::from_str::<Word>(&json).unwrap(), w("132"));
    }

    fn small_word() -> impl Strategy<Value = Word> {
        prop::collection::vec(1u8..=4, 0..=8).prop_map(Word::from_symbols)
    }

    proptest! {
        #[test]
        fn rotations_compose(x in small_word(), a in -20i64..20, b in -20i64..20) {
            prop_assume!(!x.is_empty());
            let lhs = x.rotate(a).unwrap().rotate(b).unwrap();
            prop_assert_eq!(lhs, x.rotate(a + b).unwrap());
        }

        #[test]
        fn deletion_commutes_with_color_perm(
            x in small_word(),
            i in 1usize..=8,
            perm_index in 0usize..24,
        ) {
            prop_assume!(i <= x.len());
            let sigma = ColorPerm::all(4).nth(perm_index).unwrap();
            let lhs = x.delete_at(i).unwrap().apply_color_perm(&sigma).unwrap();
            let rhs = x.apply_color_perm(&sigma).unwrap().delete_at(i).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn cyclic_properness_is_dihedral_invariant(x in small_word(), r in -10i64..10) {
            prop_assume!(!x.is_empty());
            let p = x.is_cyclically_proper();
            prop_assert_eq!(p, x.rotate(r).unwrap().is_cyclically_proper());
            prop_assert_eq!(p, x.reflect().is_cyclically_proper());
        }

        #[test]
        fn rotation_preserves_multiset(x in small_word(), r in 0i64..10) {
            prop_assume!(!x.is_empty());
            let mut a = x.as_slice().to_vec();
            let mut b = x.rotate(r).unwrap().into_vec();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }
}
