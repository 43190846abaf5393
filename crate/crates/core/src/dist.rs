//! Finite probability distributions keyed by state.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rational_parts, Count, Probability};

/// A finitely supported distribution. Zero-probability states are never
/// stored, and iteration follows the state order.
#[derive(Clone, PartialEq)]
pub struct Dist<S, P> {
    probs: BTreeMap<S, P>,
}

impl<S: Ord + Clone, P: Probability> Dist<S, P> {
    /// Normalizes nonnegative integer weights. Repeated states accumulate.
    pub fn from_weights<C, I>(weights: I) -> Result<Self>
    where
        C: Count,
        I: IntoIterator<Item = (S, C)>,
    {
        let mut acc: BTreeMap<S, BigUint> = BTreeMap::new();
        for (state, w) in weights {
            if w.is_zero() {
                continue;
            }
            *acc.entry(state).or_default() += w.to_biguint();
        }
        let total: BigUint = acc.values().sum();
        if total.is_zero() {
            return Err(Error::ZeroMass);
        }
        let probs = acc
            .into_iter()
            .map(|(s, w)| (s, P::from_ratio(&w, &total)))
            .collect();
        Ok(Dist { probs })
    }

    /// Accumulates `(state, probability)` pairs without renormalizing.
    pub fn from_masses<I>(masses: I) -> Self
    where
        I: IntoIterator<Item = (S, P)>,
    {
        let mut probs: BTreeMap<S, P> = BTreeMap::new();
        for (s, p) in masses {
            if p.is_zero() {
                continue;
            }
            match probs.get_mut(&s) {
                Some(v) => *v = v.clone() + p,
                None => {
                    probs.insert(s, p);
                }
            }
        }
        probs.retain(|_, p| !p.is_zero());
        Dist { probs }
    }

    pub fn uniform<I: IntoIterator<Item = S>>(states: I) -> Result<Self> {
        Self::from_weights(states.into_iter().map(|s| (s, 1u64)))
    }

    pub fn point(state: S) -> Self {
        let mut probs = BTreeMap::new();
        probs.insert(state, P::one());
        Dist { probs }
    }

    pub fn prob(&self, state: &S) -> P {
        self.probs.get(state).cloned().unwrap_or_else(P::zero)
    }

    pub fn contains(&self, state: &S) -> bool {
        self.probs.contains_key(state)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &P)> {
        self.probs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &S> {
        self.probs.keys()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> P {
        self.probs.values().fold(P::zero(), |a, p| a + p.clone())
    }

    /// Exact for rational probabilities.
    pub fn is_normalized(&self) -> bool {
        self.total() == P::one()
    }

    /// Mass of the states satisfying `pred`.
    pub fn prob_of<F: Fn(&S) -> bool>(&self, pred: F) -> P {
        self.probs
            .iter()
            .filter(|(s, _)| pred(s))
            .fold(P::zero(), |a, (_, p)| a + p.clone())
    }

    pub fn to_f64(&self) -> Dist<S, f64> {
        Dist {
            probs: self
                .probs
                .iter()
                .map(|(s, p)| (s.clone(), p.to_f64()))
                .collect(),
        }
    }
}

impl<S: fmt::Display, P: fmt::Debug> fmt::Debug for Dist<S, P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.probs.iter().map(|(s, p)| (s.to_string(), p)))
            .finish()
    }
}

/// One line of the exact JSON form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistEntry {
    pub state: String,
    pub num: String,
    pub den: String,
}

impl<S: Ord + Clone + fmt::Display> Dist<S, BigRational> {
    pub fn entries(&self) -> Vec<DistEntry> {
        self.probs
            .iter()
            .map(|(s, p)| {
                let (num, den) = rational_parts(p);
                DistEntry {
                    state: s.to_string(),
                    num,
                    den,
                }
            })
            .collect()
    }

    /// `[{"state": .., "num": .., "den": ..}, ...]`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.entries()).expect("entries serialize")
    }

    /// `state,num,den` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,num,den\n");
        for e in self.entries() {
            out.push_str(&format!("{},{},{}\n", csv_field(&e.state), e.num, e.den));
        }
        out
    }

    pub fn from_entries(entries: &[DistEntry]) -> Result<Self>
    where
        S: std::str::FromStr,
    {
        let mut probs = BTreeMap::new();
        for e in entries {
            let state: S = e.state.parse().map_err(|_| Error::Parse(e.state.clone()))?;
            let p = parse_rational(&e.num, &e.den)
                .ok_or_else(|| Error::Parse(format!("{}/{}", e.num, e.den)))?;
            if p < BigRational::zero() {
                return Err(Error::Parse(format!("{}/{}", e.num, e.den)));
            }
            if !p.is_zero() {
                probs.insert(state, p);
            }
        }
        let d = Dist { probs };
        if !d.is_normalized() {
            return Err(Error::InvalidArgument(
                "probabilities do not sum to 1".into(),
            ));
        }
        Ok(d)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') {
        format!("\"{s}\"")
    } else {
        s.to_string()
    }
}
