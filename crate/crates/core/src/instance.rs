//! Range-space data model: objects, points, their incidence, and the
//! shared-point relation that drives both IS conflicts and DS domination.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{covers, GeomObject, Point, ShapeKind};

/// Anything that assigns to each object the set of ground elements it covers.
///
/// Geometric instances, abstract set systems and the reduction embeddings all
/// implement this, so the feasibility checks and exact oracles are written
/// once against incidence alone.
pub trait Coverage {
    fn object_count(&self) -> usize;
    fn element_count(&self) -> usize;
    fn coverage(&self, object: usize) -> &FixedBitSet;
}

/// Object-object graph: `i ~ j` iff the two objects cover a common element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharingGraph {
    adj: Vec<FixedBitSet>,
    covers_any: FixedBitSet,
}

impl SharingGraph {
    pub fn from_coverage<C: Coverage + ?Sized>(c: &C) -> Self {
        let m = c.object_count();
        let mut owners: Vec<Vec<usize>> = vec![Vec::new(); c.element_count()];
        let mut covers_any = FixedBitSet::with_capacity(m);
        for i in 0..m {
            for e in c.coverage(i).ones() {
                owners[e].push(i);
                covers_any.insert(i);
            }
        }
        let mut adj = vec![FixedBitSet::with_capacity(m); m];
        for list in &owners {
            for (a, &i) in list.iter().enumerate() {
                for &j in &list[a + 1..] {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        SharingGraph { adj, covers_any }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Open neighborhood (never contains `i` itself).
    pub fn neighbors(&self, i: usize) -> &FixedBitSet {
        &self.adj[i]
    }

    pub fn closed_neighborhood(&self, i: usize) -> FixedBitSet {
        let mut n = self.adj[i].clone();
        n.insert(i);
        n
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].count_ones(..)
    }

    /// `shares(i, i)` holds iff object `i` covers at least one element.
    pub fn shares(&self, i: usize, j: usize) -> bool {
        if i == j {
            self.covers_any.contains(i)
        } else {
            self.adj[i].contains(j)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Is,
    Ds,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Is => f.write_str("is"),
            Problem::Ds => f.write_str("ds"),
        }
    }
}

impl FromStr for Problem {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "is" => Ok(Problem::Is),
            "ds" => Ok(Problem::Ds),
            other => Err(format!("unknown problem `{other}` (expected is|ds)")),
        }
    }
}

/// A set of disks or squares over a point set, with cached incidence.
#[derive(Debug, Clone)]
pub struct Instance {
    scale: i64,
    objects: Vec<GeomObject>,
    points: Vec<Point>,
    incidence: Vec<FixedBitSet>,
    sharing: SharingGraph,
}

pub const DEFAULT_SCALE: i64 = 1000;

impl Instance {
    pub fn build(objects: Vec<GeomObject>, points: Vec<Point>) -> Result<Self> {
        Self::with_scale(DEFAULT_SCALE, objects, points)
    }

    /// Validates coordinates, drops duplicates (first occurrence wins) and
    /// computes the incidence with the exact containment predicate.
    pub fn with_scale(scale: i64, objects: Vec<GeomObject>, points: Vec<Point>) -> Result<Self> {
        if scale <= 0 {
            return Err(Error::InvalidField {
                field: "scale".into(),
                message: format!("must be positive, got {scale}"),
            });
        }
        for o in &objects {
            o.validate()?;
        }
        for p in &points {
            p.check_range()?;
        }
        let objects = dedup(objects);
        let points = dedup(points);
        let incidence: Vec<FixedBitSet> = objects
            .iter()
            .map(|o| {
                let mut row = FixedBitSet::with_capacity(points.len());
                for (j, p) in points.iter().enumerate() {
                    if covers(o, *p) {
                        row.insert(j);
                    }
                }
                row
            })
            .collect();
        let mut inst = Instance {
            scale,
            objects,
            points,
            incidence,
            sharing: SharingGraph { adj: Vec::new(), covers_any: FixedBitSet::new() },
        };
        inst.sharing = SharingGraph::from_coverage(&inst);
        Ok(inst)
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn objects(&self) -> &[GeomObject] {
        &self.objects
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn incidence(&self) -> &[FixedBitSet] {
        &self.incidence
    }

    pub fn sharing(&self) -> &SharingGraph {
        &self.sharing
    }

    pub fn m(&self) -> usize {
        self.objects.len()
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Object `i` and `j` cover a common point of the instance.
    pub fn shares_point(&self, i: usize, j: usize) -> Result<bool> {
        let m = self.m();
        for idx in [i, j] {
            if idx >= m {
                return Err(Error::IndexOutOfRange { index: idx, len: m });
            }
        }
        Ok(self.sharing.shares(i, j))
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            scale: self.scale,
            objects: self.objects.clone(),
            points: self.points.clone(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(Error::from_json)?;
        for (i, o) in file.objects.iter().enumerate() {
            o.validate().map_err(|e| match e {
                Error::InvalidField { field, message } => Error::InvalidField {
                    field: format!("objects[{i}].{field}"),
                    message,
                },
                other => other,
            })?;
        }
        Self::with_scale(file.scale, file.objects, file.points)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

impl Coverage for Instance {
    fn object_count(&self) -> usize {
        self.objects.len()
    }
    fn element_count(&self) -> usize {
        self.points.len()
    }
    fn coverage(&self, object: usize) -> &FixedBitSet {
        &self.incidence[object]
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.scale == other.scale && self.objects == other.objects && self.points == other.points
    }
}

fn dedup<T: Copy + Eq + std::hash::Hash>(items: Vec<T>) -> Vec<T> {
    let mut seen = std::collections::HashSet::with_capacity(items.len());
    items.into_iter().filter(|x| seen.insert(*x)).collect()
}

/// On-disk instance layout. Integers only.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub scale: i64,
    pub objects: Vec<GeomObject>,
    pub points: Vec<Point>,
}

/// An index subset of the objects, tagged with the problem it solves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub selected: FixedBitSet,
    pub problem: Problem,
}

impl Solution {
    pub fn empty(m: usize, problem: Problem) -> Self {
        Solution { selected: FixedBitSet::with_capacity(m), problem }
    }

    pub fn from_indices(m: usize, indices: &[usize], problem: Problem) -> Result<Self> {
        Ok(Solution { selected: bitset_from(m, indices)?, problem })
    }

    pub fn size(&self) -> usize {
        self.selected.count_ones(..)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.selected.ones().collect()
    }

    pub fn is_feasible<C: Coverage + ?Sized>(&self, c: &C) -> bool {
        is_feasible(c, &self.selected, self.problem)
    }
}

pub fn bitset_from(m: usize, indices: &[usize]) -> Result<FixedBitSet> {
    let mut b = FixedBitSet::with_capacity(m);
    for &i in indices {
        if i >= m {
            return Err(Error::IndexOutOfRange { index: i, len: m });
        }
        b.insert(i);
    }
    Ok(b)
}

pub fn is_feasible<C: Coverage + ?Sized>(c: &C, sel: &FixedBitSet, problem: Problem) -> bool {
    match problem {
        Problem::Is => is_feasible_is(c, sel),
        Problem::Ds => is_feasible_ds(c, sel),
    }
}

/// No two selected objects cover a common element.
pub fn is_feasible_is<C: Coverage + ?Sized>(c: &C, sel: &FixedBitSet) -> bool {
    let mut union = FixedBitSet::with_capacity(c.element_count());
    for i in sel.ones() {
        let row = c.coverage(i);
        if !union.is_disjoint(row) {
            return false;
        }
        union.union_with(row);
    }
    true
}

/// Every unselected object shares an element with some selected object.
pub fn is_feasible_ds<C: Coverage + ?Sized>(c: &C, sel: &FixedBitSet) -> bool {
    let mut union = FixedBitSet::with_capacity(c.element_count());
    for i in sel.ones() {
        union.union_with(c.coverage(i));
    }
    (0..c.object_count()).all(|k| sel.contains(k) || !c.coverage(k).is_disjoint(&union))
}

/// Objects that share no element with any other object. They cannot be
/// dominated and so sit in every feasible DS selection.
pub fn ds_forced_objects<C: Coverage + ?Sized>(c: &C) -> FixedBitSet {
    let g = SharingGraph::from_coverage(c);
    let mut forced = FixedBitSet::with_capacity(c.object_count());
    for i in 0..c.object_count() {
        if g.neighbors(i).is_clear() {
            forced.insert(i);
        }
    }
    forced
}

/// Replaces every selected object whose covered set is a proper subset of
/// another object's covered set by the largest such superset (lowest index on
/// ties), until no replacement applies.
pub fn reduce_by_subset_rule<C: Coverage + ?Sized>(c: &C, sel: &FixedBitSet) -> Result<FixedBitSet> {
    if !is_feasible_ds(c, sel) {
        return Err(Error::Infeasible("input is not a dominating selection".into()));
    }
    let m = c.object_count();
    let mut cur = sel.clone();
    loop {
        let mut changed = false;
        for l in cur.ones().collect::<Vec<_>>() {
            let small = c.coverage(l);
            if small.is_clear() {
                continue;
            }
            let size = small.count_ones(..);
            let mut best: Option<(usize, usize)> = None;
            for d in 0..m {
                let big = c.coverage(d);
                let big_size = big.count_ones(..);
                if d == l || big_size <= size || !small.is_subset(big) {
                    continue;
                }
                if best.is_none_or(|(_, s)| big_size > s) {
                    best = Some((d, big_size));
                }
            }
            if let Some((d, _)) = best {
                cur.set(l, false);
                cur.insert(d);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    debug_assert!(is_feasible_ds(c, &cur));
    Ok(cur)
}

/// Parameters of the uniform random instance generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub kind: ShapeKind,
    pub min_extent: i64,
    pub max_extent: i64,
    /// Centers and points are drawn from `[0, window]²`.
    pub window: i64,
    pub scale: i64,
}

impl GeneratorConfig {
    pub fn new(seed: u64, m: usize, n: usize, kind: ShapeKind) -> Self {
        GeneratorConfig {
            seed,
            m,
            n,
            kind,
            min_extent: 80,
            max_extent: 300,
            window: 1000,
            scale: DEFAULT_SCALE,
        }
    }
}

pub fn generate_random(cfg: &GeneratorConfig) -> Result<Instance> {
    if cfg.min_extent <= 0 || cfg.max_extent < cfg.min_extent {
        return Err(Error::InvalidField {
            field: "extent-range".into(),
            message: format!("need 0 < min <= max, got [{}, {}]", cfg.min_extent, cfg.max_extent),
        });
    }
    if cfg.window < 0 {
        return Err(Error::InvalidField {
            field: "window".into(),
            message: "must be non-negative".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let objects = (0..cfg.m)
        .map(|_| GeomObject {
            kind: cfg.kind,
            cx: rng.gen_range(0..=cfg.window),
            cy: rng.gen_range(0..=cfg.window),
            extent: rng.gen_range(cfg.min_extent..=cfg.max_extent),
        })
        .collect();
    let points = (0..cfg.n)
        .map(|_| Point::new(rng.gen_range(0..=cfg.window), rng.gen_range(0..=cfg.window)))
        .collect();
    Instance::with_scale(cfg.scale, objects, points)
}
