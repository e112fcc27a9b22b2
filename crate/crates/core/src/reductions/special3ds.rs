use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::graph::CubicGraph;
use crate::error::{Error, Result};
use crate::instance::{is_feasible_ds, Coverage};

/// Abstract set system; sets are the objects and universe elements the
/// points, so two sets "share a point" when they intersect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    universe: usize,
    sets: Vec<Vec<usize>>,
    labels: Vec<String>,
    membership: Vec<FixedBitSet>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetSystemFile {
    universe: usize,
    sets: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl SetSystem {
    pub fn new(universe: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        let labels = (0..universe).map(|e| format!("e{e}")).collect();
        Self::with_labels(universe, sets, labels)
    }

    pub fn with_labels(universe: usize, sets: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != universe {
            return Err(Error::InvalidField {
                field: "labels".into(),
                message: format!("expected {universe} labels, got {}", labels.len()),
            });
        }
        let mut membership = Vec::with_capacity(sets.len());
        for (s, set) in sets.iter().enumerate() {
            let mut bits = FixedBitSet::with_capacity(universe);
            for &e in set {
                if e >= universe {
                    return Err(Error::InvalidField {
                        field: format!("sets[{s}]"),
                        message: format!("element {e} outside universe of size {universe}"),
                    });
                }
                if bits.put(e) {
                    return Err(Error::InvalidField {
                        field: format!("sets[{s}]"),
                        message: format!("element {e} listed twice"),
                    });
                }
            }
            membership.push(bits);
        }
        Ok(Self { universe, sets, labels, membership })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Sets containing element `e`, ascending.
    pub fn sets_containing(&self, e: usize) -> Vec<usize> {
        (0..self.len()).filter(|&s| self.membership[s].contains(e)).collect()
    }

    /// Every element in exactly two sets, every set of size 2 or 3, and a
    /// multiple of seven sets.
    pub fn check_special_shape(&self) -> Result<()> {
        if !self.len().is_multiple_of(7) {
            return Err(Error::NotSpecialShape(format!("{} sets is not a multiple of 7", self.len())));
        }
        if let Some((s, set)) = self.sets.iter().enumerate().find(|(_, s)| !(2..=3).contains(&s.len())) {
            return Err(Error::NotSpecialShape(format!("set {s} has {} elements", set.len())));
        }
        for e in 0..self.universe {
            let k = self.membership.iter().filter(|m| m.contains(e)).count();
            if k != 2 {
                return Err(Error::NotSpecialShape(format!(
                    "element {} lies in {k} sets",
                    self.labels[e]
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = SetSystemFile {
            universe: self.universe,
            sets: self.sets.clone(),
            labels: self.labels.clone(),
        };
        serde_json::to_string_pretty(&file).expect("set system serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SetSystemFile = serde_json::from_str(text).map_err(Error::from_json)?;
        Self::with_labels(file.universe, file.sets, file.labels)
    }
}

impl Coverage for SetSystem {
    fn object_count(&self) -> usize {
        self.sets.len()
    }

    fn element_count(&self) -> usize {
        self.universe
    }

    fn coverage(&self, object: usize) -> &FixedBitSet {
        &self.membership[object]
    }
}

/// Element index of `b_t^s` (s in 1..=6) in a system built from a graph with
/// `n` edges; `a_i` is simply `i`.
pub fn b_element(n: usize, t: usize, s: usize) -> usize {
    n + 6 * t + (s - 1)
}

/// Seven sets per vertex: for incident edges i < j < k,
/// `{a_i,b1} {b1,b2} {b2,b3} {b3,b4,a_j} {b4,b5} {b5,b6} {b6,a_k}`,
/// stored at indices `7t..7t+7`.
pub fn special3ds_from_cubic(g: &CubicGraph) -> SetSystem {
    let n = g.edges().len();
    let m = g.vertex_count();
    let mut labels: Vec<String> = (0..n).map(|i| format!("a{}", i + 1)).collect();
    for t in 0..m {
        labels.extend((1..=6).map(|s| format!("b{}^{s}", t + 1)));
    }
    let mut sets = Vec::with_capacity(7 * m);
    for t in 0..m {
        let [i, j, k] = g.incident_edges(t);
        let b = |s| b_element(n, t, s);
        sets.push(vec![i, b(1)]);
        sets.push(vec![b(1), b(2)]);
        sets.push(vec![b(2), b(3)]);
        sets.push(vec![b(3), b(4), j]);
        sets.push(vec![b(4), b(5)]);
        sets.push(vec![b(5), b(6)]);
        sets.push(vec![b(6), k]);
    }
    SetSystem::with_labels(n + 6 * m, sets, labels).expect("construction stays in range")
}

/// Maps a dominating set of `g` to a dominating selection of
/// [`special3ds_from_cubic`] of size `|ds| + 2m`.
///
/// Vertices in `ds` take their three `a`-sets. A vertex outside `ds` takes
/// two inner sets that dominate everything in its gadget except the `a`-set
/// whose edge leads to its first neighbour in `ds`; that neighbour's
/// selected `a`-set dominates it.
pub fn forward_solution(g: &CubicGraph, ds: &FixedBitSet) -> Result<FixedBitSet> {
    let m = g.vertex_count();
    if let Some(v) = ds.ones().find(|&v| v >= m) {
        return Err(Error::IndexOutOfRange { index: v, len: m });
    }
    let mut ds_bits = ds.clone();
    ds_bits.grow(m);
    if !g.graph().is_dominating(&ds_bits) {
        return Err(Error::Infeasible("vertex set does not dominate the graph".into()));
    }
    let mut out = FixedBitSet::with_capacity(7 * m);
    for t in 0..m {
        let picks: &[usize] = if ds_bits.contains(t) {
            &[0, 3, 6]
        } else {
            let edges = g.incident_edges(t);
            let via = edges
                .iter()
                .position(|&e| {
                    let (u, v) = g.edges()[e];
                    ds_bits.contains(if u == t { v } else { u })
                })
                .expect("dominated vertex has a neighbour in the set");
            match via {
                0 => &[2, 5],
                1 => &[1, 5],
                _ => &[1, 4],
            }
        };
        for &p in picks {
            out.insert(7 * t + p);
        }
    }
    Ok(out)
}

/// Maps a dominating selection of the set system back to a dominating set of
/// `g` with at most `|f2| - 2m` vertices.
///
/// Every gadget holds at least two selected sets. A vertex is taken when its
/// gadget holds three or more; a two-set gadget cannot select an `a`-set and
/// so is dominated through an `a`-element owned by a taken neighbour. Any
/// vertex still undominated is added as a repair and the bound re-checked.
pub fn backward_solution(g: &CubicGraph, sys: &SetSystem, f2: &FixedBitSet) -> Result<FixedBitSet> {
    let m = g.vertex_count();
    if sys.len() != 7 * m {
        return Err(Error::NotSpecialShape(format!(
            "expected {} sets for {m} vertices, got {}",
            7 * m,
            sys.len()
        )));
    }
    if let Some(s) = f2.ones().find(|&s| s >= sys.len()) {
        return Err(Error::IndexOutOfRange { index: s, len: sys.len() });
    }
    let mut sel = f2.clone();
    sel.grow(sys.len());
    if !is_feasible_ds(sys, &sel) {
        return Err(Error::Infeasible("selection does not dominate the set system".into()));
    }
    let mut f1 = FixedBitSet::with_capacity(m);
    for t in 0..m {
        if sel.count_ones(7 * t..7 * t + 7) >= 3 {
            f1.insert(t);
        }
    }
    for v in 0..m {
        let dominated = f1.contains(v) || g.graph().neighbors(v).iter().any(|&u| f1.contains(u));
        if !dominated {
            f1.insert(v);
        }
    }
    let size = sel.count_ones(..);
    if f1.count_ones(..) + 2 * m > size {
        return Err(Error::Construction(format!(
            "recovered {} vertices from {size} sets, above the {} bound",
            f1.count_ones(..),
            size.saturating_sub(2 * m)
        )));
    }
    Ok(f1)
}
