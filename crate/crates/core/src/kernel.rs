//! Exact one-step transition laws.

use std::collections::BTreeMap;
use std::fmt;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::scalar::Probability;
use crate::word::Sequence;

/// Transition law from states of length `source_len` to successor states.
#[derive(Clone, PartialEq)]
pub struct Kernel<S, P> {
    source_len: usize,
    rows: BTreeMap<S, Dist<S, P>>,
}

impl<S: Ord + Clone + fmt::Display, P: Probability> Kernel<S, P> {
    pub fn new(source_len: usize) -> Self {
        Kernel {
            source_len,
            rows: BTreeMap::new(),
        }
    }

    pub fn insert_row(&mut self, state: S, row: Dist<S, P>) {
        self.rows.insert(state, row);
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn row(&self, state: &S) -> Option<&Dist<S, P>> {
        self.rows.get(state)
    }

    pub fn domain(&self) -> impl Iterator<Item = &S> {
        self.rows.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &Dist<S, P>)> {
        self.rows.iter()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows_normalized(&self) -> bool {
        self.rows.values().all(Dist::is_normalized)
    }

    /// Law after one step from `d`. Every state in the support of `d` needs a
    /// row.
    pub fn push(&self, d: &Dist<S, P>) -> Result<Dist<S, P>> {
        let mut masses = Vec::new();
        for (s, p) in d.iter() {
            let row = self
                .rows
                .get(s)
                .ok_or_else(|| Error::MissingRow(s.to_string()))?;
            masses.extend(row.iter().map(|(t, w)| (t.clone(), p.clone() * w.clone())));
        }
        Ok(Dist::from_masses(masses))
    }

    /// Image of the kernel under a state map applied on both sides. Only
    /// meaningful when the map is lumpable for this kernel.
    pub fn image_row<F, T>(&self, state: &S, f: F) -> Option<Dist<T, P>>
    where
        F: Fn(&S) -> T,
        T: Ord + Clone,
    {
        self.rows
            .get(state)
            .map(|row| Dist::from_masses(row.iter().map(|(t, p)| (f(t), p.clone()))))
    }
}

impl<S: fmt::Display, P: fmt::Debug> fmt::Debug for Kernel<S, P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("source_len", &self.source_len)
            .field("rows", &self.rows.len())
            .finish()
    }
}

/// Row-by-row equality.
///
/// Kernels on different source lengths are an error; kernels on the same
/// length but with different domains are simply unequal.
pub fn kernel_equal<S, P>(a: &Kernel<S, P>, b: &Kernel<S, P>) -> Result<bool>
where
    S: Ord + Clone + fmt::Display,
    P: Probability,
{
    if a.source_len != b.source_len {
        return Err(Error::MismatchedStateSpaces {
            left: a.source_len,
            right: b.source_len,
        });
    }
    Ok(a.rows == b.rows)
}

/// First state whose rows differ, for diagnostics.
pub fn first_difference<'a, S, P>(a: &'a Kernel<S, P>, b: &'a Kernel<S, P>) -> Option<&'a S>
where
    S: Ord + Clone + fmt::Display,
    P: Probability,
{
    a.rows
        .keys()
        .chain(b.rows.keys())
        .find(|s| a.rows.get(*s) != b.rows.get(*s))
}

/// Spreads `mass` evenly over the `len` rotations `tau_1, ..., tau_len` of `y`.
pub(crate) fn spread_over_rotations<S: Sequence, P: Probability>(
    y: &S,
    mass: P,
    out: &mut Vec<(S, P)>,
) {
    let len = y.len();
    let share = mass / P::from_u64_ratio(len as u64, 1);
    for r in 1..=len {
        let rotated = y.rotated(r as i64).expect("successor states are nonempty");
        out.push((rotated, share.clone()));
    }
}
