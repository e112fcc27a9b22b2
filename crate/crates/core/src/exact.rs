//! Branch-and-bound oracles for maximum discrete IS and minimum discrete DS.
//!
//! Both work on the shared-element graph only, so they accept geometric
//! instances, abstract set systems and reduction embeddings alike.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::instance::{is_feasible_ds, is_feasible_is, Coverage, SharingGraph};
use crate::reductions::SetSystem;

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactResult {
    pub optimum: usize,
    #[serde(with = "bitset_indices")]
    pub witness: FixedBitSet,
    pub nodes_explored: u64,
    /// `false` when the node budget ran out; `optimum` is then only the best
    /// value found.
    pub proven: bool,
}

mod bitset_indices {
    use fixedbitset::FixedBitSet;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(b: &FixedBitSet, s: S) -> Result<S::Ok, S::Error> {
        b.ones().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FixedBitSet, D::Error> {
        let idx = Vec::<usize>::deserialize(d)?;
        let len = idx.iter().max().map_or(0, |&x| x + 1);
        let mut b = FixedBitSet::with_capacity(len);
        for i in idx {
            b.insert(i);
        }
        Ok(b)
    }
}

/// Maximum set of objects no two of which share an element.
pub fn exact_is<C: Coverage + ?Sized>(c: &C, node_budget: u64) -> ExactResult {
    let graph = SharingGraph::from_coverage(c);
    let m = graph.len();
    let mut search = IsSearch {
        graph: &graph,
        best: FixedBitSet::with_capacity(m),
        best_size: 0,
        nodes: 0,
        budget: node_budget,
        aborted: false,
    };
    let greedy = greedy_is(&graph);
    search.best_size = greedy.count_ones(..);
    search.best = greedy;
    let mut cand = FixedBitSet::with_capacity(m);
    cand.insert_range(..);
    search.branch(cand, FixedBitSet::with_capacity(m));
    debug_assert!(is_feasible_is(c, &search.best));
    ExactResult {
        optimum: search.best_size,
        witness: search.best,
        nodes_explored: search.nodes,
        proven: !search.aborted,
    }
}

fn greedy_is(g: &SharingGraph) -> FixedBitSet {
    let m = g.len();
    let mut cand = FixedBitSet::with_capacity(m);
    cand.insert_range(..);
    let mut out = FixedBitSet::with_capacity(m);
    while let Some(v) = cand
        .ones()
        .min_by_key(|&v| g.neighbors(v).intersection(&cand).count())
    {
        out.insert(v);
        cand.set(v, false);
        cand.difference_with(g.neighbors(v));
    }
    out
}

struct IsSearch<'a> {
    graph: &'a SharingGraph,
    best: FixedBitSet,
    best_size: usize,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl IsSearch<'_> {
    fn branch(&mut self, mut cand: FixedBitSet, mut cur: FixedBitSet) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        // vertices of degree <= 1 inside the candidate set are always safe to take
        loop {
            let safe = cand
                .ones()
                .find(|&v| self.graph.neighbors(v).intersection(&cand).count() <= 1);
            match safe {
                Some(v) => {
                    cur.insert(v);
                    cand.set(v, false);
                    cand.difference_with(self.graph.neighbors(v));
                }
                None => break,
            }
        }
        let size = cur.count_ones(..);
        if cand.is_clear() {
            if size > self.best_size {
                self.best_size = size;
                self.best = cur;
            }
            return;
        }
        if size + clique_cover_bound(self.graph, &cand) <= self.best_size {
            return;
        }
        let v = cand
            .ones()
            .max_by_key(|&v| self.graph.neighbors(v).intersection(&cand).count())
            .expect("non-empty candidate set");

        let mut with_v = cand.clone();
        with_v.set(v, false);
        with_v.difference_with(self.graph.neighbors(v));
        let mut cur_with = cur.clone();
        cur_with.insert(v);
        self.branch(with_v, cur_with);

        cand.set(v, false);
        self.branch(cand, cur);
    }
}

/// Number of cliques in a greedy clique partition of `cand`; bounds the
/// independent set inside `cand` from above.
fn clique_cover_bound(g: &SharingGraph, cand: &FixedBitSet) -> usize {
    let mut joinable: Vec<FixedBitSet> = Vec::new();
    for v in cand.ones() {
        match joinable.iter_mut().find(|j| j.contains(v)) {
            Some(j) => j.intersect_with(g.neighbors(v)),
            None => {
                let mut j = g.neighbors(v).clone();
                j.intersect_with(cand);
                joinable.push(j);
            }
        }
    }
    joinable.len()
}

/// Minimum selection such that every unselected object shares an element with
/// a selected one.
pub fn exact_ds<C: Coverage + ?Sized>(c: &C, node_budget: u64) -> ExactResult {
    let graph = SharingGraph::from_coverage(c);
    let m = graph.len();
    let closed: Vec<FixedBitSet> = (0..m).map(|i| graph.closed_neighborhood(i)).collect();
    let greedy = greedy_ds(&closed);
    let mut search = DsSearch {
        closed: &closed,
        best_size: greedy.count_ones(..),
        best: greedy,
        nodes: 0,
        budget: node_budget,
        aborted: false,
    };
    search.branch(
        FixedBitSet::with_capacity(m),
        FixedBitSet::with_capacity(m),
        FixedBitSet::with_capacity(m),
    );
    debug_assert!(is_feasible_ds(c, &search.best));
    ExactResult {
        optimum: search.best_size,
        witness: search.best,
        nodes_explored: search.nodes,
        proven: !search.aborted,
    }
}

/// Set-intersection domination over an abstract set system.
pub fn exact_set_ds(sys: &SetSystem, node_budget: u64) -> ExactResult {
    exact_ds(sys, node_budget)
}

fn greedy_ds(closed: &[FixedBitSet]) -> FixedBitSet {
    let m = closed.len();
    let mut dominated = FixedBitSet::with_capacity(m);
    let mut sel = FixedBitSet::with_capacity(m);
    while dominated.count_ones(..) < m {
        let w = (0..m)
            .filter(|w| !sel.contains(*w))
            .max_by_key(|&w| closed[w].difference(&dominated).count())
            .expect("some object still adds domination");
        sel.insert(w);
        dominated.union_with(&closed[w]);
    }
    sel
}

struct DsSearch<'a> {
    closed: &'a [FixedBitSet],
    best: FixedBitSet,
    best_size: usize,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl DsSearch<'_> {
    fn branch(&mut self, sel: FixedBitSet, dominated: FixedBitSet, excluded: FixedBitSet) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let m = self.closed.len();
        let size = sel.count_ones(..);
        let undominated: Vec<usize> = (0..m).filter(|u| !dominated.contains(*u)).collect();
        if undominated.is_empty() {
            if size < self.best_size {
                self.best_size = size;
                self.best = sel;
            }
            return;
        }
        if size + 1 >= self.best_size {
            return;
        }

        // each undominated object needs one of its allowed dominators
        let mut options: Vec<(usize, FixedBitSet)> = Vec::with_capacity(undominated.len());
        for &u in &undominated {
            let mut allowed = self.closed[u].clone();
            allowed.difference_with(&excluded);
            if allowed.is_clear() {
                return;
            }
            options.push((u, allowed));
        }
        if size + self.lower_bound(&options, &dominated, &excluded) >= self.best_size {
            return;
        }

        let (_, allowed) = options
            .iter()
            .min_by_key(|(_, a)| a.count_ones(..))
            .expect("undominated objects exist");
        let mut choices: Vec<usize> = allowed.ones().collect();
        choices.sort_by_key(|&w| std::cmp::Reverse(self.closed[w].difference(&dominated).count()));

        let mut excluded = excluded;
        for w in choices {
            let mut sel2 = sel.clone();
            sel2.insert(w);
            let mut dom2 = dominated.clone();
            dom2.union_with(&self.closed[w]);
            self.branch(sel2, dom2, excluded.clone());
            excluded.insert(w);
        }
    }

    fn lower_bound(
        &self,
        options: &[(usize, FixedBitSet)],
        dominated: &FixedBitSet,
        excluded: &FixedBitSet,
    ) -> usize {
        // objects whose allowed dominator sets are pairwise disjoint need
        // distinct selections
        let mut order: Vec<&(usize, FixedBitSet)> = options.iter().collect();
        order.sort_by_key(|(_, a)| a.count_ones(..));
        let mut used = FixedBitSet::with_capacity(self.closed.len());
        let mut packing = 0;
        for (_, allowed) in order {
            if used.is_disjoint(allowed) {
                used.union_with(allowed);
                packing += 1;
            }
        }

        let max_gain = (0..self.closed.len())
            .filter(|w| !excluded.contains(*w))
            .map(|w| self.closed[w].difference(dominated).count())
            .max()
            .unwrap_or(0)
            .max(1);
        let counting = options.len().div_ceil(max_gain);
        packing.max(counting)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{GeomObject, Point, ShapeKind};
    use crate::instance::{generate_random, GeneratorConfig, Instance};
    use proptest::prelude::*;

    /// Plain enumeration of every subset.
    fn enumerate<C: Coverage>(c: &C) -> (usize, usize) {
        let m = c.object_count();
        let (mut is_best, mut ds_best) = (0, m);
        for mask in 0u32..(1 << m) {
            let mut b = FixedBitSet::with_capacity(m);
            for i in 0..m {
                if mask >> i & 1 == 1 {
                    b.insert(i);
                }
            }
            let k = mask.count_ones() as usize;
            if is_feasible_is(c, &b) {
                is_best = is_best.max(k);
            }
            if is_feasible_ds(c, &b) {
                ds_best = ds_best.min(k);
            }
        }
        (is_best, ds_best)
    }

    #[test]
    fn triangle_and_disjoint_examples() {
        let tri = Instance::build(
            vec![GeomObject::disk(0, 0, 5), GeomObject::disk(3, 0, 5), GeomObject::disk(0, 3, 5)],
            vec![Point::new(1, 1)],
        )
        .unwrap();
        assert_eq!(exact_is(&tri, DEFAULT_NODE_BUDGET).optimum, 1);

        let disjoint = Instance::build(
            (0..6).map(|k| GeomObject::disk(100 * k, 0, 3)).collect(),
            (0..6).map(|k| Point::new(100 * k, 0)).collect(),
        )
        .unwrap();
        let r = exact_is(&disjoint, DEFAULT_NODE_BUDGET);
        assert_eq!((r.optimum, r.proven), (6, true));
        assert_eq!(exact_ds(&disjoint, DEFAULT_NODE_BUDGET).optimum, 6);
    }

    #[test]
    fn star_ds_is_one() {
        let mut objects = vec![GeomObject::disk(0, 0, 100)];
        let mut points = Vec::new();
        for (x, y) in [(80, 0), (0, 80), (-80, 0), (0, -80), (57, 57)] {
            points.push(Point::new(x, y));
            objects.push(GeomObject::disk(3 * x, 3 * y, 163));
        }
        let inst = Instance::build(objects, points).unwrap();
        assert_eq!(enumerate(&inst).1, 1);
        let r = exact_ds(&inst, DEFAULT_NODE_BUDGET);
        assert_eq!(r.optimum, 1);
        assert_eq!(r.witness.ones().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn random_m10_matches_enumeration() {
        let inst = generate_random(&GeneratorConfig::new(2024, 10, 25, ShapeKind::Disk)).unwrap();
        let (is_opt, ds_opt) = enumerate(&inst);
        assert_eq!(exact_is(&inst, DEFAULT_NODE_BUDGET).optimum, is_opt);
        assert_eq!(exact_ds(&inst, DEFAULT_NODE_BUDGET).optimum, ds_opt);
    }

    #[test]
    fn set_system_examples() {
        let dup = SetSystem::new(1, vec![vec![0], vec![0]]).unwrap();
        assert_eq!(exact_set_ds(&dup, DEFAULT_NODE_BUDGET).optimum, 1);
        let disjoint = SetSystem::new(4, vec![vec![0], vec![1, 2], vec![3]]).unwrap();
        assert_eq!(exact_set_ds(&disjoint, DEFAULT_NODE_BUDGET).optimum, 3);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let inst = generate_random(&GeneratorConfig::new(3, 30, 60, ShapeKind::Square)).unwrap();
        let r = exact_ds(&inst, 0);
        assert!(!r.proven);
        assert!(is_feasible_ds(&inst, &r.witness));
        let r = exact_is(&inst, 0);
        assert!(!r.proven);
        assert!(is_feasible_is(&inst, &r.witness));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn branch_and_bound_equals_enumeration(seed in any::<u64>(), m in 0usize..=12, n in 0usize..30,
                                               square in any::<bool>()) {
            let kind = if square { ShapeKind::Square } else { ShapeKind::Disk };
            let inst = generate_random(&GeneratorConfig::new(seed, m, n, kind)).unwrap();
            let (is_opt, ds_opt) = enumerate(&inst);
            let is = exact_is(&inst, DEFAULT_NODE_BUDGET);
            let ds = exact_ds(&inst, DEFAULT_NODE_BUDGET);
            prop_assert!(is.proven && ds.proven);
            prop_assert_eq!(is.optimum, is_opt);
            prop_assert_eq!(ds.optimum, ds_opt);
            prop_assert_eq!(is.witness.count_ones(..), is.optimum);
            prop_assert_eq!(ds.witness.count_ones(..), ds.optimum);
            prop_assert!(is_feasible_is(&inst, &is.witness));
            prop_assert!(is_feasible_ds(&inst, &ds.witness));
        }
    }
}
