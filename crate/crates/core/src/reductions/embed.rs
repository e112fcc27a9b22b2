//! Geometric realizations of set systems and cubic graphs.
//!
//! Every construction recomputes its incidence with the exact predicates and
//! fails rather than return a layout that disagrees with the source.

use std::f64::consts::FRAC_PI_2;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::graph::CubicGraph;
use super::regions::{Region, RegionInstance};
use super::special3ds::SetSystem;
use crate::error::{Error, Result};
use crate::exact::{exact_is, DEFAULT_NODE_BUDGET};
use crate::geom::{GeomObject, Point, MAX_COORD};
use crate::instance::{Coverage, Instance, DEFAULT_SCALE};

/// True when object `s` covers element `e` exactly when set `s` contains `e`.
pub fn incidence_matches<C: Coverage + ?Sized>(c: &C, sys: &SetSystem) -> bool {
    c.object_count() == sys.len()
        && c.element_count() == sys.universe()
        && (0..sys.len()).all(|s| c.coverage(s) == sys.coverage(s))
}

fn checked(inst: RegionInstance, sys: &SetSystem, what: &str) -> Result<RegionInstance> {
    if incidence_matches(&inst, sys) {
        Ok(inst)
    } else {
        Err(Error::Construction(format!("{what} incidence differs from set membership")))
    }
}

/// Elements labelled `a...` form the A side, everything else the B side.
/// Returns each element's side and its rank within that side.
fn sides(sys: &SetSystem) -> (Vec<bool>, Vec<usize>, usize, usize) {
    let mut is_a = Vec::with_capacity(sys.universe());
    let mut rank = Vec::with_capacity(sys.universe());
    let (mut na, mut nb) = (0, 0);
    for label in sys.labels() {
        let a = label.starts_with('a');
        is_a.push(a);
        if a {
            rank.push(na);
            na += 1;
        } else {
            rank.push(nb);
            nb += 1;
        }
    }
    (is_a, rank, na, nb)
}

/// The A-ranks and B-ranks of a set as inclusive runs.
type Runs = (Option<(usize, usize)>, Option<(usize, usize)>);

fn runs(sys: &SetSystem, is_a: &[bool], rank: &[usize]) -> Result<Vec<Runs>> {
    let run = |mut r: Vec<usize>, s: usize| -> Result<Option<(usize, usize)>> {
        r.sort_unstable();
        match (r.first(), r.last()) {
            (Some(&lo), Some(&hi)) if hi - lo + 1 == r.len() => Ok(Some((lo, hi))),
            (None, None) => Ok(None),
            _ => Err(Error::NotSpecialShape(format!(
                "set {s} is not a consecutive run on each side"
            ))),
        }
    };
    sys.sets()
        .iter()
        .enumerate()
        .map(|(s, set)| {
            if set.is_empty() {
                return Err(Error::NotSpecialShape(format!("set {s} is empty")));
            }
            let a = set.iter().filter(|&&e| is_a[e]).map(|&e| rank[e]).collect();
            let b = set.iter().filter(|&&e| !is_a[e]).map(|&e| rank[e]).collect();
            Ok((run(a, s)?, run(b, s)?))
        })
        .collect()
}

/// Rectangles with upper-left corners clustered near `(-U, U)` and
/// lower-right corners clustered near `(U, -U)`, `U = epsilon_scale`.
///
/// A elements sit on `y = x - 2U`, B elements on `y = x + 2U`, both at
/// spacing 2. Every set must be a consecutive run on each side, which holds
/// for systems built by [`super::special3ds_from_cubic`].
pub fn embed_a1(sys: &SetSystem, epsilon_scale: i64) -> Result<RegionInstance> {
    let (is_a, rank, na, nb) = sides(sys);
    let u = epsilon_scale;
    let need = 4 * (na.max(nb) as i64 + 2);
    if u < need || u > MAX_COORD / 4 {
        return Err(Error::Precondition(format!(
            "epsilon scale {u} outside [{need}, {}]",
            MAX_COORD / 4
        )));
    }
    let a = |r: usize| Point::new(u + 2 * r as i64, -u + 2 * r as i64);
    let b = |r: usize| Point::new(-u + 2 * r as i64, u + 2 * r as i64);
    let points: Vec<Point> = (0..sys.universe())
        .map(|e| if is_a[e] { a(rank[e]) } else { b(rank[e]) })
        .collect();
    let regions = runs(sys, &is_a, &rank)?
        .into_iter()
        .map(|(ar, br)| {
            let (x0, y1) = match br {
                Some((q1, q2)) => (b(q1).x - 1, b(q2).y + 1),
                None => (b(0).x - 1, b(0).y - 1),
            };
            let (x1, y0) = match ar {
                Some((i1, i2)) => (a(i2).x + 1, a(i1).y - 1),
                None => (a(0).x - 1, a(0).y + 1),
            };
            Region::Rect { x0, y0, x1, y1 }
        })
        .collect();
    checked(RegionInstance::new(regions, points)?, sys, "rectangle embedding")
}

/// Vertical strips for sets holding an A element, horizontal strips for the
/// rest.
///
/// Each A element owns two adjacent columns, one per set containing it.
/// Horizontal sets that share elements are chained into paths and stacked as
/// adjacent bands, with each shared element on the common band boundary.
pub fn embed_a3_strips(sys: &SetSystem) -> Result<RegionInstance> {
    let (is_a, rank, _, _) = sides(sys);
    let shape = |msg: String| Error::NotSpecialShape(msg);
    let containing: Vec<Vec<usize>> = (0..sys.universe()).map(|e| sys.sets_containing(e)).collect();
    if let Some(e) = containing.iter().position(|c| c.len() > 2) {
        return Err(shape(format!("element {} lies in more than two sets", sys.labels()[e])));
    }

    // column of each vertical set: (left edge, x of its private points)
    let mut column: Vec<Option<(i64, i64)>> = vec![None; sys.len()];
    for (s, set) in sys.sets().iter().enumerate() {
        let owned: Vec<usize> = set.iter().copied().filter(|&e| is_a[e]).collect();
        match owned.as_slice() {
            [] => {}
            [e] => {
                let x = 8 * (rank[*e] as i64 + 1);
                column[s] = Some(if containing[*e][0] == s { (x - 2, x - 1) } else { (x, x + 1) });
            }
            _ => return Err(shape(format!("set {s} holds more than one a-element"))),
        }
    }
    let vertical = |s: usize| column[s].is_some();

    // horizontal sets linked by shared elements must form disjoint paths
    let mut links: Vec<Vec<(usize, usize)>> = vec![Vec::new(); sys.len()];
    for (e, c) in containing.iter().enumerate() {
        if let [s, t] = c[..] {
            match (vertical(s), vertical(t)) {
                (true, true) if !is_a[e] => {
                    return Err(shape(format!("element {} joins two vertical sets", sys.labels()[e])));
                }
                (false, false) => {
                    links[s].push((t, e));
                    links[t].push((s, e));
                }
                _ => {}
            }
        }
    }
    if let Some(s) = (0..sys.len()).find(|&s| links[s].len() > 2) {
        return Err(shape(format!("set {s} chains to more than two horizontal sets")));
    }
    let mut band: Vec<Option<i64>> = vec![None; sys.len()];
    let mut boundary_y: Vec<Option<i64>> = vec![None; sys.universe()];
    let mut next = 10i64;
    for start in 0..sys.len() {
        if vertical(start) || band[start].is_some() || links[start].len() == 2 {
            continue;
        }
        let (mut prev, mut cur) = (usize::MAX, start);
        loop {
            band[cur] = Some(next);
            next += 2;
            match links[cur].iter().find(|&&(t, _)| t != prev) {
                Some(&(t, e)) if band[t].is_none() => {
                    boundary_y[e] = Some(next);
                    prev = cur;
                    cur = t;
                }
                Some(_) => return Err(shape("horizontal sets chain into a cycle".into())),
                None => break,
            }
        }
        next += 10;
    }
    if let Some(s) = (0..sys.len()).find(|&s| !vertical(s) && band[s].is_none()) {
        return Err(shape(format!("set {s} lies on a cycle of horizontal sets")));
    }

    let points: Vec<Point> = (0..sys.universe())
        .map(|e| {
            if is_a[e] {
                return Point::new(8 * (rank[e] as i64 + 1), 0);
            }
            let far_x = -(10 + 4 * e as i64);
            let low_y = -(10 + 2 * e as i64);
            let x = containing[e].iter().find_map(|&s| column[s].map(|c| c.1)).unwrap_or(far_x);
            let y = boundary_y[e]
                .or_else(|| containing[e].iter().find_map(|&s| band[s].map(|r| r + 1)))
                .unwrap_or(low_y);
            Point::new(x, y)
        })
        .collect();
    let regions = (0..sys.len())
        .map(|s| match (column[s], band[s]) {
            (Some((x0, _)), _) => Region::VStrip { x0, x1: x0 + 2 },
            (None, Some(r)) => Region::HStrip { y0: r, y1: r + 2 },
            (None, None) => unreachable!("every set is vertical or banded"),
        })
        .collect();
    checked(RegionInstance::new(regions, points)?, sys, "strip embedding")
}

/// Downward shadows of segments; A elements on the ray `(x, -x)`, x > 0, and
/// B elements on the ray `(x, x)`, x < 0, both moving away from the origin.
pub fn embed_a5_shadows(sys: &SetSystem) -> Result<RegionInstance> {
    let (is_a, rank, na, nb) = sides(sys);
    let rs = runs(sys, &is_a, &rank)?;
    const D: i64 = 2;
    let longest = rs
        .iter()
        .flat_map(|(a, b)| [*a, *b])
        .flatten()
        .map(|(lo, hi)| (hi - lo + 1) as i64)
        .max()
        .unwrap_or(1);
    // keeps every segment slope far below one spacing step over a run
    let l = 4 * D * (na as i64 + nb as i64 + 4) * (longest + 2);
    let a = |r: usize| Point::new(l + D * r as i64, -(l + D * r as i64));
    let b = |r: usize| Point::new(-(l + D * r as i64), -(l + D * r as i64));
    let points: Vec<Point> = (0..sys.universe())
        .map(|e| if is_a[e] { a(rank[e]) } else { b(rank[e]) })
        .collect();
    let floor = points.iter().map(|p| p.y).min().unwrap_or(0) - 1;
    let regions = rs
        .into_iter()
        .map(|runs| match runs {
            (Some((i1, i2)), Some((q1, q2))) => Region::Shadow {
                p: Point::new(b(q2).x, b(q1).y + D / 2),
                q: Point::new(a(i2).x, a(i1).y + D / 2),
                floor,
            },
            (None, Some((q1, q2))) => Region::Shadow {
                p: Point::new(b(q2).x, b(q1).y),
                q: b(q1),
                floor,
            },
            (Some((i1, i2)), None) => Region::Shadow {
                p: a(i1),
                q: Point::new(a(i2).x, a(i1).y),
                floor,
            },
            (None, None) => unreachable!("empty sets rejected by runs"),
        })
        .collect();
    checked(RegionInstance::new(regions, points)?, sys, "shadow embedding")
}

/// Proper edge colouring with at most four colours, by backtracking over
/// edges in index order.
pub fn edge_coloring(g: &CubicGraph) -> Result<Vec<u8>> {
    fn go(g: &CubicGraph, e: usize, colors: &mut Vec<Option<u8>>) -> bool {
        if e == colors.len() {
            return true;
        }
        let (u, v) = g.edges()[e];
        for c in 0..4u8 {
            let clash = [u, v].iter().any(|&w| {
                g.incident_edges(w).iter().any(|&f| f != e && colors[f] == Some(c))
            });
            if !clash {
                colors[e] = Some(c);
                if go(g, e + 1, colors) {
                    return true;
                }
                colors[e] = None;
            }
        }
        false
    }
    let mut colors = vec![None; g.edges().len()];
    if go(g, 0, &mut colors) {
        Ok(colors.into_iter().map(|c| c.expect("all edges coloured")).collect())
    } else {
        Err(Error::Construction("no proper 4-edge-colouring found".into()))
    }
}

const CIRCLE_RADIUS: f64 = 1e6;

/// One point per edge, on a circle of radius 10^6, inside a short arc around
/// the axis crossing of the edge's colour.
fn edge_points(g: &CubicGraph) -> Result<Vec<Point>> {
    let colors = edge_coloring(g)?;
    let mut class_size = [0usize; 4];
    for &c in &colors {
        class_size[c as usize] += 1;
    }
    let mut seen = [0usize; 4];
    Ok(colors
        .iter()
        .map(|&c| {
            let k = class_size[c as usize];
            let j = seen[c as usize];
            seen[c as usize] += 1;
            let step = (1.0 / k as f64).min(0.02);
            let theta = c as f64 * FRAC_PI_2 + (j as f64 - (k as f64 - 1.0) / 2.0) * step;
            Point::new(
                (CIRCLE_RADIUS * theta.cos()).round() as i64,
                (CIRCLE_RADIUS * theta.sin()).round() as i64,
            )
        })
        .collect())
}

/// Expected incidence for the vertex-over-edge embeddings: object `v` covers
/// exactly the points of its three edges.
fn vertex_edge_system(g: &CubicGraph) -> SetSystem {
    let sets = (0..g.vertex_count()).map(|v| g.incident_edges(v).to_vec()).collect();
    SetSystem::new(g.edges().len(), sets).expect("edge indices in range")
}

/// One triangle per vertex, the convex hull of its three edge points. Edge
/// points are in convex position so each triangle covers exactly its own.
pub fn embed_triangles_from_cubic_is(g: &CubicGraph) -> Result<RegionInstance> {
    let points = edge_points(g)?;
    let regions = (0..g.vertex_count())
        .map(|v| {
            let [i, j, k] = g.incident_edges(v);
            Region::Triangle { a: points[i], b: points[j], c: points[k] }
        })
        .collect();
    checked(RegionInstance::new(regions, points)?, &vertex_edge_system(g), "triangle embedding")
}

/// Disks from [`embed_circles_from_cubic_is`], plus the number of
/// point-disk incidences beyond the intended ones.
#[derive(Debug, Clone)]
pub struct CircleEmbedding {
    pub instance: Instance,
    pub stray_incidences: usize,
}

/// Smallest integer disk around the rounded circumcentre of three points
/// that still covers all three.
fn circle_through(p: [Point; 3]) -> Option<GeomObject> {
    let [(ax, ay), (bx, by), (cx, cy)] = p.map(|q| (q.x as f64, q.y as f64));
    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    if d.abs() < 1.0 {
        return None;
    }
    let sq = |x: f64, y: f64| x * x + y * y;
    let ux = (sq(ax, ay) * (by - cy) + sq(bx, by) * (cy - ay) + sq(cx, cy) * (ay - by)) / d;
    let uy = (sq(ax, ay) * (cx - bx) + sq(bx, by) * (ax - cx) + sq(cx, cy) * (bx - ax)) / d;
    if !(ux.abs() < 1e12 && uy.abs() < 1e12) {
        return None;
    }
    let center = Point::new(ux.round() as i64, uy.round() as i64);
    let far = p
        .iter()
        .map(|q| {
            let dx = (q.x - center.x) as i128;
            let dy = (q.y - center.y) as i128;
            dx * dx + dy * dy
        })
        .max()
        .expect("three points");
    let mut r = (far as f64).sqrt().ceil() as i128;
    while r * r < far {
        r += 1;
    }
    while r > 1 && (r - 1) * (r - 1) >= far {
        r -= 1;
    }
    Some(GeomObject::disk(center.x, center.y, r as i64))
}

fn circle_layout(g: &CubicGraph, points: &[Point]) -> Option<(Vec<GeomObject>, usize)> {
    let mut disks = Vec::with_capacity(g.vertex_count());
    let mut stray = 0;
    for v in 0..g.vertex_count() {
        let own = g.incident_edges(v);
        let disk = circle_through(own.map(|e| points[e]))?;
        stray += (0..points.len())
            .filter(|e| !own.contains(e) && disk.covers(points[*e]))
            .count();
        disks.push(disk);
    }
    Some((disks, stray))
}

/// One disk per vertex through its three edge points.
///
/// Starting from the triangle layout, edge points are moved by a seeded
/// search until no disk covers a foreign point, or the search budget runs out.
/// Disks are pseudo-disks, so a non-planar graph always keeps at least one
/// stray incidence; the result is accepted only if the maximum discrete
/// independent set still equals that of `g`.
pub fn embed_circles_from_cubic_is(g: &CubicGraph) -> Result<CircleEmbedding> {
    const RESTARTS: usize = 24;
    const STEPS: usize = 4000;
    let start = edge_points(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let bound = 2 * CIRCLE_RADIUS as i64;
    let mut best: Option<(usize, Vec<Point>, Vec<GeomObject>)> = None;
    for restart in 0..RESTARTS {
        let mut pts = start.clone();
        if restart > 0 {
            for p in &mut pts {
                p.x += rng.gen_range(-50_000..=50_000);
                p.y += rng.gen_range(-50_000..=50_000);
            }
        }
        let Some((mut disks, mut cost)) = circle_layout(g, &pts) else {
            continue;
        };
        for _ in 0..STEPS {
            if cost == 0 {
                break;
            }
            let i = rng.gen_range(0..pts.len());
            let scale = [300_000i64, 100_000, 30_000, 10_000, 3_000][rng.gen_range(0..5)];
            let mut moved = pts.clone();
            moved[i].x = (moved[i].x + rng.gen_range(-scale..=scale)).clamp(-bound, bound);
            moved[i].y = (moved[i].y + rng.gen_range(-scale..=scale)).clamp(-bound, bound);
            if pts.iter().enumerate().any(|(j, p)| j != i && *p == moved[i]) {
                continue;
            }
            if let Some((d, c)) = circle_layout(g, &moved) {
                if c <= cost {
                    pts = moved;
                    disks = d;
                    cost = c;
                }
            }
        }
        if best.as_ref().is_none_or(|b| cost < b.0) {
            best = Some((cost, pts, disks));
        }
        if best.as_ref().is_some_and(|b| b.0 == 0) {
            break;
        }
    }
    let (stray, points, disks) =
        best.ok_or_else(|| Error::Construction("no non-degenerate circle layout found".into()))?;
    let instance = Instance::with_scale(DEFAULT_SCALE, disks, points)?;
    if instance.m() != g.vertex_count() || instance.n() != g.edges().len() {
        return Err(Error::Construction("circle layout produced duplicate disks or points".into()));
    }
    for v in 0..g.vertex_count() {
        if g.incident_edges(v).iter().any(|&e| !instance.coverage(v).contains(e)) {
            return Err(Error::Construction(format!("disk {v} misses one of its own points")));
        }
    }
    if stray > 0 {
        let want = exact_is(g.graph(), DEFAULT_NODE_BUDGET).optimum;
        let got = exact_is(&instance, DEFAULT_NODE_BUDGET).optimum;
        if want != got {
            return Err(Error::Construction(format!(
                "{stray} stray incidences reduce the independent set from {want} to {got}"
            )));
        }
    }
    Ok(CircleEmbedding { instance, stray_incidences: stray })
}

/// Membership bitsets of a coverage, for direct comparison in reports.
pub fn incidence_rows<C: Coverage + ?Sized>(c: &C) -> Vec<FixedBitSet> {
    (0..c.object_count()).map(|i| c.coverage(i).clone()).collect()
}
