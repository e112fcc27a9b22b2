//! Sampled checks of additive-weighted Voronoi cell properties.
//!
//! `cell(D)` is the set of points where `phi(D, .)` is smallest. The checks
//! here sample that partition instead of building it.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{compare_phi, contains_object, covers, phi_at, GeomObject, Point};

/// Relative tolerance for classifying a sampled point as a genuine violation.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAssignment {
    pub query: [f64; 2],
    pub owner: usize,
    pub phi_value: f64,
    /// Runner-up phi minus the best; infinite for a single object.
    pub margin: f64,
}

pub fn nearest_cell(objects: &[GeomObject], x: f64, y: f64) -> Result<CellAssignment> {
    if objects.is_empty() {
        return Err(Error::Precondition("nearest_cell needs at least one object".into()));
    }
    let (mut best, mut second) = ((0, f64::INFINITY), f64::INFINITY);
    for (i, o) in objects.iter().enumerate() {
        let v = phi_at(o, x, y);
        if v < best.1 {
            second = best.1;
            best = (i, v);
        } else if v < second {
            second = v;
        }
    }
    Ok(CellAssignment {
        query: [x, y],
        owner: best.0,
        phi_value: best.1,
        margin: second - best.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub object: usize,
    pub query: [f64; 2],
    pub owner: usize,
    /// How far `phi(object)` exceeds `phi(owner)` at the query.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub check: String,
    pub seed: u64,
    pub samples: usize,
    /// Samples whose premise held and so were actually tested.
    pub tested: usize,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    fn new(check: &str, seed: u64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            seed,
            samples: 0,
            tested: 0,
            tolerance,
            violations: Vec::new(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Bounding box of all objects, as `(xmin, ymin, xmax, ymax)`.
fn bounds(objects: &[GeomObject]) -> (f64, f64, f64, f64) {
    objects.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), o| {
            let r = o.extent as f64;
            let (x, y) = (o.cx as f64, o.cy as f64);
            (a.min(x - r), b.min(y - r), c.max(x + r), d.max(y + r))
        },
    )
}

fn tolerance(objects: &[GeomObject]) -> f64 {
    if objects.is_empty() {
        return 0.0;
    }
    let (a, b, c, d) = bounds(objects);
    RELATIVE_TOLERANCE * (c - a).hypot(d - b)
}

fn require_non_nested(objects: &[GeomObject]) -> Result<()> {
    for (i, a) in objects.iter().enumerate() {
        for (j, b) in objects.iter().enumerate() {
            if i != j && contains_object(a, b) {
                return Err(Error::Precondition(format!("object {j} is nested in object {i}")));
            }
        }
    }
    Ok(())
}

/// Each checked object must own its own centre. `trials == 0` or
/// `trials >= m` checks every object; otherwise a seeded sample of objects.
pub fn check_center_ownership(objects: &[GeomObject], trials: usize, seed: u64) -> Result<ViolationReport> {
    require_non_nested(objects)?;
    let tol = tolerance(objects);
    let mut report = ViolationReport::new("center_ownership", seed, tol);
    let m = objects.len();
    let chosen: Vec<usize> = if trials == 0 || trials >= m {
        (0..m).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, m, trials).into_vec()
    };
    for d in chosen {
        let (x, y) = (objects[d].cx as f64, objects[d].cy as f64);
        let cell = nearest_cell(objects, x, y)?;
        report.samples += 1;
        report.tested += 1;
        let excess = phi_at(&objects[d], x, y) - cell.phi_value;
        if cell.owner != d && excess > tol {
            report.violations.push(Violation { object: d, query: [x, y], owner: cell.owner, excess });
        }
    }
    Ok(report)
}

/// Samples `p`, takes its owner `D`, and checks that a random point on the
/// segment from `p` to `cen(D)` is still owned by `D` up to the tolerance.
pub fn check_star_shaped(objects: &[GeomObject], trials: usize, seed: u64) -> Result<ViolationReport> {
    require_non_nested(objects)?;
    let tol = tolerance(objects);
    let mut report = ViolationReport::new("star_shaped", seed, tol);
    if objects.is_empty() {
        return Ok(report);
    }
    let (a, b, c, d) = bounds(objects);
    let (pad_x, pad_y) = ((c - a) * 0.25 + 1.0, (d - b) * 0.25 + 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let px = rng.gen_range(a - pad_x..=c + pad_x);
        let py = rng.gen_range(b - pad_y..=d + pad_y);
        let owner = nearest_cell(objects, px, py)?.owner;
        let lambda: f64 = rng.gen();
        let cen = &objects[owner];
        let x = px + lambda * (cen.cx as f64 - px);
        let y = py + lambda * (cen.cy as f64 - py);
        let cell = nearest_cell(objects, x, y)?;
        report.samples += 1;
        report.tested += 1;
        let excess = phi_at(cen, x, y) - cell.phi_value;
        if cell.owner != owner && excess > tol {
            report.violations.push(Violation { object: owner, query: [x, y], owner: cell.owner, excess });
        }
    }
    Ok(report)
}

/// Exact check that `phi(D1, x) <= phi(D2, x)` and `D2` covering `x` imply
/// `D1` covers `x`. Query points alternate between the given points and
/// random lattice points inside `D2`'s bounding box.
pub fn check_coverage_monotone(
    objects: &[GeomObject],
    points: &[Point],
    trials: usize,
    seed: u64,
) -> ViolationReport {
    let mut report = ViolationReport::new("coverage_monotone", seed, 0.0);
    if objects.is_empty() {
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let i = rng.gen_range(0..objects.len());
        let j = rng.gen_range(0..objects.len());
        let (d1, d2) = (&objects[i], &objects[j]);
        let x = if t % 2 == 0 && !points.is_empty() {
            points[rng.gen_range(0..points.len())]
        } else {
            let r = d2.extent;
            Point::new(
                d2.cx.saturating_add(rng.gen_range(-r..=r)),
                d2.cy.saturating_add(rng.gen_range(-r..=r)),
            )
        };
        report.samples += 1;
        if compare_phi(d1, d2, x) != Ordering::Greater && covers(d2, x) {
            report.tested += 1;
            if !covers(d1, x) {
                report.violations.push(Violation {
                    object: i,
                    query: [x.x as f64, x.y as f64],
                    owner: j,
                    excess: 0.0,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{phi, ShapeKind};
    use crate::instance::{generate_random, GeneratorConfig};
    use proptest::prelude::*;

    fn non_nested(seed: u64, m: usize, kind: ShapeKind) -> Vec<GeomObject> {
        let inst = generate_random(&GeneratorConfig::new(seed, m, 0, kind)).unwrap();
        let mut keep: Vec<GeomObject> = Vec::new();
        for o in inst.objects() {
            if keep.iter().all(|k| !contains_object(k, o) && !contains_object(o, k)) {
                keep.push(*o);
            }
        }
        keep
    }

    #[test]
    fn nearest_cell_examples() {
        let one = [GeomObject::disk(0, 0, 5)];
        let c = nearest_cell(&one, 3.0, 4.0).unwrap();
        assert_eq!(c.owner, 0);
        assert!(c.margin.is_infinite());
        assert!(c.phi_value.abs() < 1e-12);

        let two = [GeomObject::disk(-10, 0, 5), GeomObject::disk(10, 0, 5)];
        let c = nearest_cell(&two, 0.0, 7.0).unwrap();
        assert_eq!((c.owner, c.margin), (0, 0.0));

        assert!(nearest_cell(&[], 0.0, 0.0).is_err());
    }

    #[test]
    fn center_in_own_cell() {
        let objs = non_nested(11, 20, ShapeKind::Disk);
        for (d, o) in objs.iter().enumerate() {
            assert_eq!(nearest_cell(&objs, o.cx as f64, o.cy as f64).unwrap().owner, d);
        }
    }

    #[test]
    fn center_ownership_examples() {
        let objs = non_nested(5, 25, ShapeKind::Square);
        assert!(check_center_ownership(&objs, 0, 1).unwrap().is_clean());
        let nested = [GeomObject::disk(0, 0, 10), GeomObject::disk(1, 0, 3)];
        assert!(matches!(check_center_ownership(&nested, 0, 1), Err(Error::Precondition(_))));
        let empty = check_center_ownership(&[], 10, 1).unwrap();
        assert_eq!((empty.samples, empty.is_clean()), (0, true));
        let partial = check_center_ownership(&objs, 3, 9).unwrap();
        assert_eq!(partial.samples, 3);
    }

    #[test]
    fn star_shaped_examples() {
        let single = check_star_shaped(&[GeomObject::disk(3, 3, 2)], 1000, 4).unwrap();
        assert!(single.is_clean());
        for kind in [ShapeKind::Disk, ShapeKind::Square] {
            let objs = non_nested(21, 30, kind);
            let r = check_star_shaped(&objs, 20_000, 8).unwrap();
            assert!(r.is_clean(), "{kind}: {:?}", r.violations.first());
        }
    }

    #[test]
    fn monotone_boundary_case() {
        // both boundaries pass through the query: phi is 0 for each
        let objs = [GeomObject::disk(0, 0, 5), GeomObject::disk(10, 0, 5)];
        let x = Point::new(5, 0);
        assert_eq!(compare_phi(&objs[0], &objs[1], x), Ordering::Equal);
        let r = check_coverage_monotone(&objs, &[x], 200, 3);
        assert!(r.is_clean());
        assert!(r.tested > 0);
    }

    #[test]
    fn report_serializes() {
        let r = check_coverage_monotone(&[GeomObject::square(0, 0, 4)], &[], 10, 0);
        let text = serde_json::to_string(&r).unwrap();
        let back: ViolationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #[test]
        fn coverage_monotone_never_fails(seed in any::<u64>(), m in 1usize..15, n in 0usize..30, square in any::<bool>()) {
            let kind = if square { ShapeKind::Square } else { ShapeKind::Disk };
            let inst = generate_random(&GeneratorConfig::new(seed, m, n, kind)).unwrap();
            let r = check_coverage_monotone(inst.objects(), inst.points(), 500, seed);
            prop_assert!(r.is_clean());
        }

        #[test]
        fn argmin_stable_under_dominated_addition(seed in any::<u64>(), m in 1usize..10, qx in -500i64..1500, qy in -500i64..1500) {
            let inst = generate_random(&GeneratorConfig::new(seed, m, 0, ShapeKind::Disk)).unwrap();
            let mut objs = inst.objects().to_vec();
            let before = nearest_cell(&objs, qx as f64, qy as f64).unwrap();
            // a disk far from q, so its phi exceeds the current best
            let far = GeomObject::disk(qx + 100_000, qy, 10);
            prop_assume!(phi(&far, Point::new(qx, qy)) > before.phi_value);
            objs.push(far);
            prop_assert_eq!(nearest_cell(&objs, qx as f64, qy as f64).unwrap().owner, before.owner);
        }
    }
}
