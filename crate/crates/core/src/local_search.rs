//! t-level local search for discrete IS and DS.
//!
//! Both searches apply the first improving exchange they meet. Incoming sets
//! are tried in increasing size and lexicographic order over a fixed object
//! ranking (the identity unless `order_seed` is non-zero), and every applied
//! exchange restarts the scan.
//!
//! `t = 1` is accepted. For IS it reduces to swapping one object for two; for
//! DS it only drops redundant objects.

use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    ds_forced_objects, is_feasible, Coverage, Instance, Problem, SharingGraph, Solution,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    /// Exchange radius.
    pub t: usize,
    /// Stop after this many scans even if an exchange might still exist.
    pub max_passes: Option<usize>,
    /// Seed for the candidate ranking; 0 keeps index order.
    pub order_seed: u64,
}

impl LocalSearchConfig {
    pub fn new(t: usize) -> Self {
        LocalSearchConfig { t, max_passes: None, order_seed: 0 }
    }

    fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::InvalidField {
                field: "t".into(),
                message: "exchange radius must be at least 1".into(),
            });
        }
        Ok(())
    }

    fn ranking(&self, m: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..m).collect();
        if self.order_seed != 0 {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.order_seed));
        }
        order
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub removed: Vec<usize>,
    pub added: Vec<usize>,
    pub new_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub exchanges: Vec<Exchange>,
    pub passes: usize,
    pub elapsed: Duration,
    /// The last pass found no improving exchange.
    pub converged: bool,
}

pub fn local_search(
    inst: &Instance,
    problem: Problem,
    cfg: &LocalSearchConfig,
) -> Result<(Solution, SearchTrace)> {
    match problem {
        Problem::Is => local_search_is(inst, cfg),
        Problem::Ds => local_search_ds(inst, cfg),
    }
}

/// Grows an independent selection from the empty set until no `≤ t` objects
/// can be traded for `≤ t + 1` others.
pub fn local_search_is(inst: &Instance, cfg: &LocalSearchConfig) -> Result<(Solution, SearchTrace)> {
    local_search_is_from(inst, cfg, &FixedBitSet::with_capacity(inst.m()))
}

/// [`local_search_is`] started from a given independent selection.
pub fn local_search_is_from(
    inst: &Instance,
    cfg: &LocalSearchConfig,
    initial: &FixedBitSet,
) -> Result<(Solution, SearchTrace)> {
    cfg.validate()?;
    let start = Instant::now();
    let graph = inst.sharing();
    let m = inst.m();
    let mut sel = resized(initial, m);
    if !is_feasible(inst, &sel, Problem::Is) {
        return Err(Error::Infeasible("initial selection is not independent".into()));
    }
    let order = cfg.ranking(m);
    let mut trace = SearchTrace {
        exchanges: Vec::new(),
        passes: 0,
        elapsed: Duration::ZERO,
        converged: false,
    };

    loop {
        if cfg.max_passes.is_some_and(|cap| trace.passes >= cap) {
            break;
        }
        trace.passes += 1;
        let outside: Vec<usize> = order.iter().copied().filter(|&i| !sel.contains(i)).collect();
        let mut found = None;
        for k in 1..=cfg.t + 1 {
            let mut search = IsExchangeSearch {
                graph,
                sel: &sel,
                outside: &outside,
                target: k,
                budget: cfg.t.min(k - 1),
                chosen: Vec::with_capacity(k),
            };
            let blocked = FixedBitSet::with_capacity(m);
            let removed = FixedBitSet::with_capacity(m);
            if let Some(hit) = search.dfs(0, &blocked, &removed) {
                found = Some(hit);
                break;
            }
        }
        match found {
            Some((removed, added)) => {
                for &i in &removed {
                    sel.set(i, false);
                }
                for &i in &added {
                    sel.insert(i);
                }
                trace.exchanges.push(Exchange {
                    removed: sorted(removed),
                    added: sorted(added),
                    new_size: sel.count_ones(..),
                });
            }
            None => {
                trace.converged = true;
                break;
            }
        }
    }
    trace.elapsed = start.elapsed();
    Ok((Solution { selected: sel, problem: Problem::Is }, trace))
}

struct IsExchangeSearch<'a> {
    graph: &'a SharingGraph,
    sel: &'a FixedBitSet,
    outside: &'a [usize],
    target: usize,
    /// Largest admissible number of selected objects the incoming set may
    /// conflict with.
    budget: usize,
    chosen: Vec<usize>,
}

impl IsExchangeSearch<'_> {
    /// `blocked`: union of open neighborhoods of the chosen objects.
    /// `removed`: selected objects in conflict with the chosen ones.
    fn dfs(
        &mut self,
        from: usize,
        blocked: &FixedBitSet,
        removed: &FixedBitSet,
    ) -> Option<(Vec<usize>, Vec<usize>)> {
        if self.chosen.len() == self.target {
            return Some((removed.ones().collect(), self.chosen.clone()));
        }
        let still_needed = self.target - self.chosen.len();
        for pos in from..self.outside.len() {
            if self.outside.len() - pos < still_needed {
                break;
            }
            let r = self.outside[pos];
            if blocked.contains(r) {
                continue;
            }
            let nbrs = self.graph.neighbors(r);
            let mut next_removed = removed.clone();
            for l in nbrs.intersection(self.sel) {
                next_removed.insert(l);
            }
            if next_removed.count_ones(..) > self.budget {
                continue;
            }
            let mut next_blocked = blocked.clone();
            next_blocked.union_with(nbrs);
            self.chosen.push(r);
            if let Some(hit) = self.dfs(pos + 1, &next_blocked, &next_removed) {
                return Some(hit);
            }
            self.chosen.pop();
        }
        None
    }
}

/// Shrinks a dominating selection, starting from every object, until no
/// `≤ t` objects can be traded for `≤ t - 1` others. Objects that share no
/// point with any other object are never removed.
pub fn local_search_ds(inst: &Instance, cfg: &LocalSearchConfig) -> Result<(Solution, SearchTrace)> {
    let mut all = FixedBitSet::with_capacity(inst.m());
    all.insert_range(..);
    local_search_ds_from(inst, cfg, &all)
}

/// [`local_search_ds`] started from a given dominating selection.
pub fn local_search_ds_from(
    inst: &Instance,
    cfg: &LocalSearchConfig,
    initial: &FixedBitSet,
) -> Result<(Solution, SearchTrace)> {
    cfg.validate()?;
    let start = Instant::now();
    let graph = inst.sharing();
    let m = inst.m();
    let sel = resized(initial, m);
    if !is_feasible(inst, &sel, Problem::Ds) {
        return Err(Error::Infeasible("initial selection is not dominating".into()));
    }
    let order = cfg.ranking(m);
    let forced = ds_forced_objects(inst);

    let mut state = DomState::new(graph, sel);
    let mut trace = SearchTrace {
        exchanges: Vec::new(),
        passes: 0,
        elapsed: Duration::ZERO,
        converged: false,
    };

    loop {
        if cfg.max_passes.is_some_and(|cap| trace.passes >= cap) {
            break;
        }
        trace.passes += 1;
        let outside: Vec<usize> = order.iter().copied().filter(|&i| !state.sel.contains(i)).collect();
        let removable: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| state.sel.contains(i) && !forced.contains(i))
            .collect();
        let mut found = None;
        for k_in in 0..cfg.t {
            let mut search = DsExchangeSearch {
                state: &mut state,
                outside: &outside,
                removable: &removable,
                added: Vec::new(),
                removed: Vec::new(),
                add_target: k_in,
            };
            if search.choose_incoming(0) {
                found = Some((search.removed.clone(), search.added.clone()));
                break;
            }
        }
        match found {
            Some((removed, added)) => {
                trace.exchanges.push(Exchange {
                    removed: sorted(removed),
                    added: sorted(added),
                    new_size: state.sel.count_ones(..),
                });
            }
            None => {
                trace.converged = true;
                break;
            }
        }
    }
    trace.elapsed = start.elapsed();
    Ok((Solution { selected: state.sel, problem: Problem::Ds }, trace))
}

/// Selection plus, for every object, how many selected objects lie in its
/// closed neighborhood.
struct DomState<'a> {
    graph: &'a SharingGraph,
    sel: FixedBitSet,
    count: Vec<usize>,
    undominated: usize,
}

impl<'a> DomState<'a> {
    fn new(graph: &'a SharingGraph, sel: FixedBitSet) -> Self {
        let count: Vec<usize> = (0..graph.len())
            .map(|i| {
                let mut c = graph.neighbors(i).intersection(&sel).count();
                if sel.contains(i) {
                    c += 1;
                }
                c
            })
            .collect();
        let undominated = count.iter().filter(|&&c| c == 0).count();
        DomState { graph, sel, count, undominated }
    }

    fn add(&mut self, i: usize) {
        self.sel.insert(i);
        for y in self.graph.neighbors(i).ones().chain(std::iter::once(i)) {
            if self.count[y] == 0 {
                self.undominated -= 1;
            }
            self.count[y] += 1;
        }
    }

    fn remove(&mut self, i: usize) {
        self.sel.set(i, false);
        for y in self.graph.neighbors(i).ones().chain(std::iter::once(i)) {
            self.count[y] -= 1;
            if self.count[y] == 0 {
                self.undominated += 1;
            }
        }
    }
}

struct DsExchangeSearch<'s, 'a> {
    state: &'s mut DomState<'a>,
    outside: &'s [usize],
    removable: &'s [usize],
    added: Vec<usize>,
    removed: Vec<usize>,
    add_target: usize,
}

impl DsExchangeSearch<'_, '_> {
    /// On success the state is left with the exchange applied.
    fn choose_incoming(&mut self, from: usize) -> bool {
        if self.added.len() == self.add_target {
            return self.choose_outgoing(0);
        }
        let needed = self.add_target - self.added.len();
        for pos in from..self.outside.len() {
            if self.outside.len() - pos < needed {
                break;
            }
            let r = self.outside[pos];
            self.state.add(r);
            self.added.push(r);
            if self.choose_incoming(pos + 1) {
                return true;
            }
            self.added.pop();
            self.state.remove(r);
        }
        false
    }

    /// Removes exactly `add_target + 1` objects; a larger removal set that
    /// works always contains one of this size that works too.
    fn choose_outgoing(&mut self, from: usize) -> bool {
        if self.removed.len() == self.add_target + 1 {
            return self.state.undominated == 0;
        }
        let needed = self.add_target + 1 - self.removed.len();
        for pos in from..self.removable.len() {
            if self.removable.len() - pos < needed {
                break;
            }
            let l = self.removable[pos];
            self.state.remove(l);
            // removals never repair domination, so a hole here is final
            if self.state.undominated == 0 {
                self.removed.push(l);
                if self.choose_outgoing(pos + 1) {
                    return true;
                }
                self.removed.pop();
            }
            self.state.add(l);
        }
        false
    }
}

fn resized(b: &FixedBitSet, m: usize) -> FixedBitSet {
    let mut out = b.clone();
    out.grow(m);
    out
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Exhaustive check that no exchange within the `t` bound improves `sel`:
/// every pair of an outgoing set `L' ⊆ sel` with `|L'| ≤ t` and an incoming
/// set `R'` outside `sel` (`|R'| ≤ t + 1` for IS, `≤ t - 1` for DS) is
/// tested for feasibility and size.
pub fn verify_local_optimality<C: Coverage + ?Sized>(
    c: &C,
    sel: &FixedBitSet,
    problem: Problem,
    t: usize,
) -> Result<bool> {
    if !is_feasible(c, sel, problem) {
        return Err(Error::Infeasible(format!("selection is not {problem}-feasible")));
    }
    let m = c.object_count();
    let inside: Vec<usize> = sel.ones().collect();
    let outside: Vec<usize> = (0..m).filter(|i| !sel.contains(*i)).collect();
    let max_in = match problem {
        Problem::Is => t + 1,
        Problem::Ds => t.saturating_sub(1),
    };

    let mut improving = false;
    for k_in in 0..=max_in.min(outside.len()) {
        for_each_combination(&outside, k_in, &mut |incoming| {
            for k_out in 0..=t.min(inside.len()) {
                let gains = match problem {
                    Problem::Is => k_in > k_out,
                    Problem::Ds => k_in < k_out,
                };
                if !gains {
                    continue;
                }
                for_each_combination(&inside, k_out, &mut |outgoing| {
                    let mut next = sel.clone();
                    for &i in outgoing {
                        next.set(i, false);
                    }
                    for &i in incoming {
                        next.insert(i);
                    }
                    if is_feasible(c, &next, problem) {
                        improving = true;
                    }
                    !improving
                });
                if improving {
                    return false;
                }
            }
            true
        });
        if improving {
            break;
        }
    }
    Ok(!improving)
}

/// Calls `f` on every `k`-subset of `items` in lexicographic order until it
/// returns `false`. Returns `false` if stopped early.
fn for_each_combination(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        items: &[usize],
        k: usize,
        from: usize,
        buf: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if buf.len() == k {
            return f(buf);
        }
        for pos in from..items.len() {
            if items.len() - pos < k - buf.len() {
                break;
            }
            buf.push(items[pos]);
            if !rec(items, k, pos + 1, buf, f) {
                return false;
            }
            buf.pop();
        }
        true
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{GeomObject, Point, ShapeKind};
    use crate::instance::{bitset_from, generate_random, is_feasible_ds, is_feasible_is, GeneratorConfig};
    use proptest::prelude::*;

    /// Brute force over all subsets; independent of the search code.
    fn brute_optimum(inst: &Instance, problem: Problem) -> usize {
        let m = inst.m();
        let mut best = match problem {
            Problem::Is => 0,
            Problem::Ds => m,
        };
        for mask in 0u32..(1 << m) {
            let mut b = FixedBitSet::with_capacity(m);
            for i in 0..m {
                if mask >> i & 1 == 1 {
                    b.insert(i);
                }
            }
            let size = mask.count_ones() as usize;
            match problem {
                Problem::Is if is_feasible_is(inst, &b) => best = best.max(size),
                Problem::Ds if is_feasible_ds(inst, &b) => best = best.min(size),
                _ => {}
            }
        }
        best
    }

    fn star() -> Instance {
        // hub covers one point shared with each satellite
        let mut objects = vec![GeomObject::disk(0, 0, 100)];
        let mut points = Vec::new();
        for k in 0..5i64 {
            let (x, y) = [(80, 0), (0, 80), (-80, 0), (0, -80), (57, 57)][k as usize];
            points.push(Point::new(x, y));
            objects.push(GeomObject::disk(3 * x, 3 * y, 2 * 80 + 3));
        }
        Instance::build(objects, points).unwrap()
    }

    #[test]
    fn star_fixture_shape() {
        let inst = star();
        assert_eq!(inst.incidence()[0].count_ones(..), 5);
        for s in 1..=5 {
            assert_eq!(inst.incidence()[s].count_ones(..), 1, "satellite {s}");
            for s2 in s + 1..=5 {
                assert!(!inst.shares_point(s, s2).unwrap());
            }
            assert!(inst.shares_point(0, s).unwrap());
        }
    }

    #[test]
    fn is_examples() {
        let empty = Instance::build(vec![], vec![]).unwrap();
        let (sol, trace) = local_search_is(&empty, &LocalSearchConfig::new(2)).unwrap();
        assert_eq!(sol.size(), 0);
        assert!(trace.exchanges.is_empty());

        let tri = Instance::build(
            vec![GeomObject::disk(0, 0, 5), GeomObject::disk(3, 0, 5), GeomObject::disk(0, 3, 5)],
            vec![Point::new(1, 1)],
        )
        .unwrap();
        let (sol, _) = local_search_is(&tri, &LocalSearchConfig::new(1)).unwrap();
        assert_eq!(sol.size(), 1);
    }

    #[test]
    fn is_with_t_m_matches_brute_force() {
        let inst = generate_random(&GeneratorConfig::new(11, 8, 20, ShapeKind::Disk)).unwrap();
        let (sol, _) = local_search_is(&inst, &LocalSearchConfig::new(inst.m())).unwrap();
        assert_eq!(sol.size(), brute_optimum(&inst, Problem::Is));
    }

    #[test]
    fn ds_examples() {
        let single = Instance::build(vec![GeomObject::disk(0, 0, 5)], vec![Point::new(0, 0)]).unwrap();
        let (sol, _) = local_search_ds(&single, &LocalSearchConfig::new(2)).unwrap();
        assert_eq!(sol.indices(), vec![0]);

        let inst = star();
        assert_eq!(brute_optimum(&inst, Problem::Ds), 1);
        let (sol, _) = local_search_ds(&inst, &LocalSearchConfig::new(2)).unwrap();
        assert_eq!(sol.indices(), vec![0]);
    }

    #[test]
    fn ds_with_t_m_matches_brute_force() {
        let inst = generate_random(&GeneratorConfig::new(11, 8, 20, ShapeKind::Disk)).unwrap();
        let (sol, _) = local_search_ds(&inst, &LocalSearchConfig::new(inst.m())).unwrap();
        assert_eq!(sol.size(), brute_optimum(&inst, Problem::Ds));
    }

    #[test]
    fn zero_radius_rejected() {
        let inst = Instance::build(vec![], vec![]).unwrap();
        assert!(local_search_is(&inst, &LocalSearchConfig::new(0)).is_err());
    }

    #[test]
    fn verify_examples() {
        // a conflicts with b and c, b and c are disjoint
        let inst = Instance::build(
            vec![GeomObject::disk(0, 0, 12), GeomObject::disk(-10, 0, 3), GeomObject::disk(10, 0, 3)],
            vec![Point::new(-10, 0), Point::new(10, 0)],
        )
        .unwrap();
        assert!(inst.shares_point(0, 1).unwrap() && inst.shares_point(0, 2).unwrap());
        assert!(!inst.shares_point(1, 2).unwrap());
        let a = bitset_from(3, &[0]).unwrap();
        assert!(!verify_local_optimality(&inst, &a, Problem::Is, 1).unwrap());
        let bc = bitset_from(3, &[1, 2]).unwrap();
        assert!(verify_local_optimality(&inst, &bc, Problem::Is, 1).unwrap());
        assert!(verify_local_optimality(&inst, &bc, Problem::Is, 5).unwrap());

        let empty = FixedBitSet::with_capacity(3);
        assert!(!verify_local_optimality(&inst, &empty, Problem::Is, 1).unwrap());

        // DS optimum {a}
        assert!(verify_local_optimality(&inst, &a, Problem::Ds, 3).unwrap());
        // infeasible DS selection
        assert!(verify_local_optimality(&inst, &empty, Problem::Ds, 2).is_err());
    }

    #[test]
    fn order_seed_changes_nothing_about_validity() {
        let inst = generate_random(&GeneratorConfig::new(5, 18, 40, ShapeKind::Square)).unwrap();
        for seed in [0, 1, 99] {
            let cfg = LocalSearchConfig { t: 2, max_passes: None, order_seed: seed };
            let (sol, _) = local_search_is(&inst, &cfg).unwrap();
            assert!(verify_local_optimality(&inst, &sol.selected, Problem::Is, 2).unwrap());
            let (sol, _) = local_search_ds(&inst, &cfg).unwrap();
            assert!(verify_local_optimality(&inst, &sol.selected, Problem::Ds, 2).unwrap());
        }
    }

    #[test]
    fn max_passes_caps_the_scan() {
        let inst = generate_random(&GeneratorConfig::new(5, 18, 40, ShapeKind::Disk)).unwrap();
        let cfg = LocalSearchConfig { t: 2, max_passes: Some(1), order_seed: 0 };
        let (_, trace) = local_search_is(&inst, &cfg).unwrap();
        assert_eq!(trace.passes, 1);
        assert!(trace.exchanges.len() <= 1);
    }

    fn run_and_check(inst: &Instance, problem: Problem, t: usize) -> std::result::Result<(), TestCaseError> {
        let cfg = LocalSearchConfig::new(t);
        let (sol, trace) = local_search(inst, problem, &cfg).unwrap();
        prop_assert!(sol.is_feasible(inst));
        prop_assert!(trace.converged);
        prop_assert!(verify_local_optimality(inst, &sol.selected, problem, t).unwrap());
        prop_assert!(trace.exchanges.len() <= inst.m());
        let mut prev = match problem { Problem::Is => 0, Problem::Ds => inst.m() };
        for ex in &trace.exchanges {
            match problem {
                Problem::Is => prop_assert!(ex.new_size > prev),
                Problem::Ds => prop_assert!(ex.new_size < prev),
            }
            prev = ex.new_size;
        }
        // rerunning from the output performs no exchange
        let (again, trace2) = match problem {
            Problem::Is => local_search_is_from(inst, &cfg, &sol.selected).unwrap(),
            Problem::Ds => local_search_ds_from(inst, &cfg, &sol.selected).unwrap(),
        };
        prop_assert!(trace2.exchanges.is_empty());
        prop_assert_eq!(again.selected, sol.selected);
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn solver_output_is_t_locally_optimal(seed in any::<u64>(), m in 0usize..16, n in 0usize..30,
                                              t in 1usize..4, square in any::<bool>()) {
            let kind = if square { ShapeKind::Square } else { ShapeKind::Disk };
            let inst = generate_random(&GeneratorConfig::new(seed, m, n, kind)).unwrap();
            run_and_check(&inst, Problem::Is, t)?;
            run_and_check(&inst, Problem::Ds, t)?;
        }

        #[test]
        fn large_t_reaches_optimum(seed in any::<u64>(), m in 0usize..9, n in 0usize..20) {
            let inst = generate_random(&GeneratorConfig::new(seed, m, n, ShapeKind::Disk)).unwrap();
            let t = inst.m().max(1);
            let (is, _) = local_search_is(&inst, &LocalSearchConfig::new(t)).unwrap();
            prop_assert_eq!(is.size(), brute_optimum(&inst, Problem::Is));
            let (ds, _) = local_search_ds(&inst, &LocalSearchConfig::new(t)).unwrap();
            prop_assert_eq!(ds.size(), brute_optimum(&inst, Problem::Ds));
        }
    }
}
