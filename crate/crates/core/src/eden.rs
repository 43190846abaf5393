//! Eden growth on the planar 3-regular tree, read through the dual
//! triangulation.
//!
//! Every tree vertex `v` is dual to a triangle `Δ(v)`. The cluster `T_n` of
//! `n` tree vertices corresponds to `n` triangles glued along the dual edges of
//! the tree edges inside the cluster; the result `D_n` is a triangulated
//! polygon whose `n + 2` vertices all lie on the outer face. Each outer edge of
//! `D_n` is dual to the tree edge joining `T_n` to one boundary vertex, so
//! gaps of the outer cycle and boundary tree vertices are in bijection.
//!
//! Growing the cluster at a boundary vertex `w` stacks `Δ(w)` on the outer
//! edge dual to the edge into `w`. Its third corner is a new dual vertex (the
//! face of the tree between the two fresh edges at `w`), and the two fresh
//! tree neighbors of `w` become the boundary vertices of the two new gaps.
//!
//! Colors are assigned greedily. `D_n` is a 2-tree: the first triangle takes
//! one of `q (q-1) (q-2)` colorings and each later vertex sees exactly two
//! adjacent colored vertices, so it has exactly `q - 2` legal colors whatever
//! was chosen before. Every choice sequence therefore has probability
//! `1 / (q (q-1) (q-2)^n)`, and distinct sequences give distinct colorings,
//! which makes the greedy coloring uniform over the `q (q-1) (q-2)^n` proper
//! colorings of `D_n`.
//!
//! The outer cycle is stored in clockwise order.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::insertion::{coupling_row, distinct_triple};
use crate::rng::RngStream;
use crate::word::{Color, Sequence, Word};
use crate::Rational;

pub type TreeVertex = u32;
pub type DualVertex = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OuterVertex {
    pub id: DualVertex,
    pub color: Color,
}

/// The outer edge `(left, right)` and the boundary tree vertex across it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub left: DualVertex,
    pub right: DualVertex,
    pub boundary: TreeVertex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdenState {
    q: u8,
    cluster: Vec<TreeVertex>,
    tree_edges: Vec<(TreeVertex, TreeVertex)>,
    next_tree_vertex: TreeVertex,
    dual_colors: Vec<Color>,
    triangles: Vec<[DualVertex; 3]>,
    /// Clockwise.
    outer: Vec<DualVertex>,
    /// `gaps[i]` sits between `outer[i]` and `outer[i + 1]`.
    gaps: Vec<Gap>,
}

/// JSON snapshot for debugging and plotting.
#[derive(Serialize)]
pub struct EdenSnapshot {
    pub q: u8,
    pub size: usize,
    pub cluster: Vec<TreeVertex>,
    pub tree_edges: Vec<(TreeVertex, TreeVertex)>,
    pub outer: Vec<OuterVertex>,
    pub gaps: Vec<Gap>,
    pub triangles: Vec<[DualVertex; 3]>,
}

impl EdenState {
    /// `T_1` = the root, with its triangle colored `colors` clockwise.
    pub fn with_initial_colors(q: u8, colors: [Color; 3]) -> Result<Self> {
        if q < 3 {
            return Err(Error::TooFewColors { q, min: 3 });
        }
        for &c in &colors {
            if c == 0 || c > q {
                return Err(Error::SymbolOutOfRange { symbol: c, q });
            }
        }
        if colors[0] == colors[1] || colors[1] == colors[2] || colors[0] == colors[2] {
            return Err(Error::InvalidArgument(
                "initial triangle needs three distinct colors".into(),
            ));
        }
        let root = 0;
        Ok(EdenState {
            q,
            cluster: vec![root],
            tree_edges: vec![(root, 1), (root, 2), (root, 3)],
            next_tree_vertex: 4,
            dual_colors: colors.to_vec(),
            triangles: vec![[0, 1, 2]],
            outer: vec![0, 1, 2],
            gaps: vec![
                Gap {
                    left: 0,
                    right: 1,
                    boundary: 1,
                },
                Gap {
                    left: 1,
                    right: 2,
                    boundary: 2,
                },
                Gap {
                    left: 2,
                    right: 0,
                    boundary: 3,
                },
            ],
        })
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    /// Number of tree vertices in the cluster.
    pub fn size(&self) -> usize {
        self.cluster.len()
    }

    pub fn outer_len(&self) -> usize {
        self.outer.len()
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn boundary(&self) -> Vec<TreeVertex> {
        self.gaps.iter().map(|g| g.boundary).collect()
    }

    pub fn dual_colors(&self) -> &[Color] {
        &self.dual_colors
    }

    pub fn triangles(&self) -> &[[DualVertex; 3]] {
        &self.triangles
    }

    /// Edges of `D_n`.
    pub fn dual_edges(&self) -> BTreeSet<(DualVertex, DualVertex)> {
        let mut edges = BTreeSet::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges
    }

    /// Legal colors for a vertex stacked on gap `gap`, ascending.
    pub fn gap_colors(&self, gap: usize) -> Result<Vec<Color>> {
        let g = self.gaps.get(gap).ok_or(Error::IndexOutOfRange {
            index: gap,
            len: self.gaps.len(),
        })?;
        let (a, b) = (
            self.dual_colors[g.left as usize],
            self.dual_colors[g.right as usize],
        );
        Ok((1..=self.q).filter(|&c| c != a && c != b).collect())
    }

    /// Adds the boundary tree vertex of gap `gap` to the cluster and gives the
    /// new dual vertex the `color_choice`-th legal color.
    pub fn step_with(&mut self, gap: usize, color_choice: usize) -> Result<()> {
        let colors = self.gap_colors(gap)?;
        let color = *colors.get(color_choice).ok_or(Error::IndexOutOfRange {
            index: color_choice,
            len: colors.len(),
        })?;
        let Gap {
            left,
            right,
            boundary: w,
        } = self.gaps[gap];

        let (w1, w2) = (self.next_tree_vertex, self.next_tree_vertex + 1);
        self.next_tree_vertex += 2;
        self.cluster.push(w);
        self.tree_edges.push((w, w1));
        self.tree_edges.push((w, w2));

        let c = self.dual_colors.len() as DualVertex;
        self.dual_colors.push(color);
        self.triangles.push([left, c, right]);

        let pos = gap + 1;
        self.outer.insert(pos, c);
        self.gaps[gap] = Gap {
            left,
            right: c,
            boundary: w1,
        };
        self.gaps.insert(
            pos,
            Gap {
                left: c,
                right,
                boundary: w2,
            },
        );
        Ok(())
    }

    /// One Eden step: uniform boundary vertex, uniform legal color.
    pub fn step(&mut self, rng: &mut RngStream) -> Result<()> {
        let gap = rng.gen_range(0..self.gaps.len());
        let choices = self.q as usize - 2;
        let color = rng.gen_range(0..choices);
        self.step_with(gap, color)
    }

    /// Outer colors clockwise from outer vertex `start`.
    pub fn read_from(&self, start: usize) -> Word {
        let m = self.outer.len();
        Word::from_symbols(
            (0..m)
                .map(|j| self.dual_colors[self.outer[(start + j) % m] as usize])
                .collect(),
        )
    }

    pub fn snapshot(&self) -> EdenSnapshot {
        EdenSnapshot {
            q: self.q,
            size: self.size(),
            cluster: self.cluster.clone(),
            tree_edges: self.tree_edges.clone(),
            outer: self
                .outer
                .iter()
                .map(|&id| OuterVertex {
                    id,
                    color: self.dual_colors[id as usize],
                })
                .collect(),
            gaps: self.gaps.clone(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.snapshot()).expect("snapshot serializes")
    }

    /// Checks every structural invariant; the message names the first failure.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::BrokenInvariant(msg));
        let n = self.size();
        if self.outer.len() != n + 2 || self.gaps.len() != n + 2 {
            return fail(format!(
                "cluster of size {n} has {} outer vertices and {} gaps",
                self.outer.len(),
                self.gaps.len()
            ));
        }
        let m = self.outer.len();
        for (i, g) in self.gaps.iter().enumerate() {
            if g.left != self.outer[i] || g.right != self.outer[(i + 1) % m] {
                return fail(format!("gap {i} does not interleave with the outer cycle"));
            }
            if self.dual_colors[g.left as usize] == self.dual_colors[g.right as usize] {
                return fail(format!("outer edge at gap {i} is monochromatic"));
            }
        }
        for t in &self.triangles {
            let c: Vec<Color> = t.iter().map(|&v| self.dual_colors[v as usize]).collect();
            if c[0] == c[1] || c[1] == c[2] || c[0] == c[2] {
                return fail(format!("triangle {t:?} is not properly colored"));
            }
        }
        if self.triangles.len() != n {
            return fail("one triangle per cluster vertex".into());
        }
        let in_cluster: BTreeSet<TreeVertex> = self.cluster.iter().copied().collect();
        let mut degree: BTreeMap<TreeVertex, usize> = BTreeMap::new();
        let mut outside = BTreeSet::new();
        for &(a, b) in &self.tree_edges {
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() += 1;
            match (in_cluster.contains(&a), in_cluster.contains(&b)) {
                (true, false) => {
                    outside.insert(b);
                }
                (false, true) => {
                    outside.insert(a);
                }
                (false, false) => return fail(format!("edge ({a}, {b}) misses the cluster")),
                (true, true) => {}
            }
        }
        if in_cluster.iter().any(|v| degree.get(v) != Some(&3)) {
            return fail("cluster vertex without three tree neighbors".into());
        }
        let boundary: Vec<TreeVertex> = self.boundary();
        let boundary_set: BTreeSet<TreeVertex> = boundary.iter().copied().collect();
        if boundary_set.len() != boundary.len() || boundary_set != outside {
            return fail(
                "gap boundary vertices differ from the tree boundary of the cluster".into(),
            );
        }
        Ok(())
    }
}

/// `T_1` with a uniformly colored initial triangle.
pub fn eden_init(q: u8, rng: &mut RngStream) -> Result<EdenState> {
    if q < 3 {
        return Err(Error::TooFewColors { q, min: 3 });
    }
    EdenState::with_initial_colors(q, distinct_triple(q, rng))
}

pub fn eden_step(mut s: EdenState, rng: &mut RngStream) -> Result<EdenState> {
    s.step(rng)?;
    Ok(s)
}

/// Outer colors clockwise from a uniform outer vertex.
pub fn eden_read(s: &EdenState, rng: &mut RngStream) -> Word {
    let start = rng.gen_range(0..s.outer_len());
    s.read_from(start)
}

/// Coloring of the `n`-cycle from the cluster `T_{n-2}`.
pub fn eden_sample(n: usize, q: u8, rng: &mut RngStream) -> Result<Word> {
    eden_run(n, q, rng).map(|(_, w)| w)
}

/// Like [`eden_sample`], also returning the final state.
pub fn eden_run(n: usize, q: u8, rng: &mut RngStream) -> Result<(EdenState, Word)> {
    if n < 3 {
        return Err(Error::LengthOutOfRange {
            n,
            min: 3,
            max: usize::MAX,
        });
    }
    let mut s = eden_init(q, rng)?;
    for _ in 3..n {
        s.step(rng)?;
    }
    let w = eden_read(&s, rng);
    Ok((s, w))
}

/// Every Eden state with outer length `n`, one per distinct clockwise outer
/// coloring read from outer vertex 0.
pub fn reachable_states(n: usize, q: u8) -> Result<Vec<EdenState>> {
    if n < 3 {
        return Err(Error::LengthOutOfRange {
            n,
            min: 3,
            max: usize::MAX,
        });
    }
    let mut level: BTreeMap<Word, EdenState> = BTreeMap::new();
    for a in 1..=q {
        for b in 1..=q {
            for c in 1..=q {
                if a != b && b != c && a != c {
                    let s = EdenState::with_initial_colors(q, [a, b, c])?;
                    level.insert(s.read_from(0), s);
                }
            }
        }
    }
    for _ in 3..n {
        let mut next = BTreeMap::new();
        for s in level.values() {
            for gap in 0..s.outer_len() {
                for color in 0..q as usize - 2 {
                    let mut t = s.clone();
                    t.step_with(gap, color)?;
                    next.entry(t.read_from(0)).or_insert(t);
                }
            }
        }
        level = next;
    }
    Ok(level.into_values().collect())
}

/// Exact law of the outer coloring after one step and a uniform-start read,
/// by exhausting every (gap, color, start) choice.
pub fn eden_step_read_law(s: &EdenState) -> Result<Dist<Word, Rational>> {
    let m = s.outer_len();
    let colors = s.q as usize - 2;
    let mut outcomes = Vec::with_capacity(m * colors * (m + 1));
    for gap in 0..m {
        for color in 0..colors {
            let mut t = s.clone();
            t.step_with(gap, color)?;
            for start in 0..t.outer_len() {
                outcomes.push((t.read_from(start), 1u64));
            }
        }
    }
    Dist::from_weights(outcomes)
}

/// True iff, for every reachable state of outer length `n`, one Eden step
/// followed by a uniform-start read has the same law as one step of the
/// insertion-with-rotation kernel from the current outer coloring.
pub fn eden_vs_necklace_kernel_check(n: usize, q: u8) -> Result<bool> {
    if q < 3 {
        return Err(Error::TooFewColors { q, min: 3 });
    }
    for s in reachable_states(n, q)? {
        s.validate()?;
        let eden = eden_step_read_law(&s)?;
        let necklace = coupling_row::<Rational>(&s.read_from(0), q);
        if eden != necklace {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::insertion::sample_replicates;

    /// Proper colorings of `D_n` by brute force over `[q]^(n+2)`.
    fn count_proper_colorings(s: &EdenState) -> u64 {
        let v = s.dual_colors().len();
        let edges: Vec<_> = s.dual_edges().into_iter().collect();
        let q = s.q() as u64;
        let mut count = 0;
        for code in 0..q.pow(v as u32) {
            let mut c = vec![0u64; v];
            let mut t = code;
            for slot in c.iter_mut() {
                *slot = t % q;
                t /= q;
            }
            if edges.iter().all(|&(a, b)| c[a as usize] != c[b as usize]) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn init_has_distinct_colors() {
        let mut rng = RngStream::new(3, 0);
        for _ in 0..50 {
            let s = eden_init(4, &mut rng).unwrap();
            assert_eq!(s.outer_len(), 3);
            let w = s.read_from(0);
            assert!(w.is_cyclically_proper());
            s.validate().unwrap();
        }
        assert!(matches!(
            eden_init(2, &mut rng),
            Err(Error::TooFewColors { .. })
        ));
        assert!(EdenState::with_initial_colors(3, [1, 1, 2]).is_err());
    }

    #[test]
    fn sizes_grow_by_one_per_step() {
        let mut rng = RngStream::new(11, 0);
        let mut s = eden_init(3, &mut rng).unwrap();
        for m in 1..=40 {
            s = eden_step(s, &mut rng).unwrap();
            assert_eq!(s.outer_len(), m + 3);
            assert_eq!(s.boundary().len(), m + 3);
            assert_eq!(s.size() + 2, s.boundary().len());
            s.validate().unwrap();
            assert!(eden_read(&s, &mut rng).is_cyclically_proper());
        }
    }

    #[test]
    fn step_with_rejects_bad_choices() {
        let mut s = EdenState::with_initial_colors(3, [1, 2, 3]).unwrap();
        assert!(s.step_with(3, 0).is_err());
        assert!(s.step_with(0, 1).is_err());
        s.step_with(0, 0).unwrap();
        // gap (1, 2) only admits color 3
        assert_eq!(s.read_from(0).to_string(), "1323");
    }

    #[test]
    fn greedy_coloring_is_uniform_over_proper_colorings() {
        for q in [3u8, 4] {
            for steps in 0..=3usize {
                // one fixed shape per gap sequence: always grow at gap 0 or
                // at the last gap, alternating
                let mut all = BTreeSet::new();
                let mut runs = 0u64;
                let mut stack = Vec::new();
                for a in 1..=q {
                    for b in 1..=q {
                        for c in 1..=q {
                            if a != b && b != c && a != c {
                                stack.push((
                                    EdenState::with_initial_colors(q, [a, b, c]).unwrap(),
                                    0,
                                ));
                            }
                        }
                    }
                }
                let mut reference = None;
                while let Some((s, done)) = stack.pop() {
                    if done == steps {
                        runs += 1;
                        assert!(all.insert(s.dual_colors().to_vec()), "repeated coloring");
                        reference.get_or_insert(s);
                        continue;
                    }
                    let gap = if done % 2 == 0 { 0 } else { s.outer_len() - 1 };
                    for color in 0..q as usize - 2 {
                        let mut t = s.clone();
                        t.step_with(gap, color).unwrap();
                        stack.push((t, done + 1));
                    }
                }
                let n = steps as u32 + 1;
                let q64 = q as u64;
                let expected = q64 * (q64 - 1) * (q64 - 2).pow(n);
                assert_eq!(runs, expected);
                assert_eq!(count_proper_colorings(&reference.unwrap()), expected);
            }
        }
    }

    #[test]
    fn kernel_check_small_cases() {
        assert!(eden_vs_necklace_kernel_check(3, 3).unwrap());
        assert!(eden_vs_necklace_kernel_check(4, 3).unwrap());
        assert!(eden_vs_necklace_kernel_check(3, 4).unwrap());
    }

    #[test]
    fn reachable_states_are_valid() {
        let states = reachable_states(5, 3).unwrap();
        assert!(!states.is_empty());
        for s in &states {
            s.validate().unwrap();
            assert_eq!(s.outer_len(), 5);
        }
    }

    #[test]
    fn snapshot_round_trips_through_json() {
        let (s, _) = eden_run(6, 4, &mut RngStream::new(5, 1)).unwrap();
        let json = s.to_json();
        assert_eq!(json["size"], 4);
        assert_eq!(json["outer"].as_array().unwrap().len(), 6);
        assert_eq!(json["gaps"].as_array().unwrap().len(), 6);
        assert_eq!(json["tree_edges"].as_array().unwrap().len(), 3 + 2 * 3);
    }

    #[test]
    fn samples_are_deterministic() {
        let a = sample_replicates(100, 4, |r| eden_sample(7, 3, r)).unwrap();
        let b = sample_replicates(100, 4, |r| eden_sample(7, 3, r)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|w| w.len() == 7 && w.is_cyclically_proper()));
    }
}
