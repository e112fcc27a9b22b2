//! Exact geometric kernel for disks and axis-parallel squares.
//!
//! Coordinates are scaled integers. Every predicate that decides feasibility
//! is evaluated in 128-bit integer arithmetic; floating point only shows up in
//! the additive-weighted distance [`phi`], which is a diagnostic quantity.

use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible absolute coordinate or extent. Differences of two such
/// values fit in 63 bits, so squared distances and orientation determinants
/// fit in an `i128`.
pub const MAX_COORD: i64 = (1 << 62) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    pub fn check_range(&self) -> Result<()> {
        check_coord(self.x, "x")?;
        check_coord(self.y, "y")
    }
}

impl From<[i64; 2]> for Point {
    fn from([x, y]: [i64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [i64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Disk,
    Square,
}

impl std::fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShapeKind::Disk => f.write_str("disk"),
            ShapeKind::Square => f.write_str("square"),
        }
    }
}

/// A disk (`extent` = radius) or an axis-parallel square (`extent` = side
/// length, stored un-halved).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeomObject {
    pub kind: ShapeKind,
    pub cx: i64,
    pub cy: i64,
    pub extent: i64,
}

impl GeomObject {
    pub const fn disk(cx: i64, cy: i64, radius: i64) -> Self {
        GeomObject { kind: ShapeKind::Disk, cx, cy, extent: radius }
    }

    pub const fn square(cx: i64, cy: i64, side: i64) -> Self {
        GeomObject { kind: ShapeKind::Square, cx, cy, extent: side }
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    pub fn validate(&self) -> Result<()> {
        check_coord(self.cx, "cx")?;
        check_coord(self.cy, "cy")?;
        if self.extent <= 0 {
            return Err(Error::InvalidField {
                field: "extent".into(),
                message: format!("must be positive, got {}", self.extent),
            });
        }
        check_coord(self.extent, "extent")
    }

    /// Closed containment of `p`.
    pub fn covers(&self, p: Point) -> bool {
        covers(self, p)
    }
}

fn check_coord(v: i64, field: &str) -> Result<()> {
    if v.unsigned_abs() > MAX_COORD as u64 {
        Err(Error::Scale(format!("{field} = {v} exceeds |{MAX_COORD}|")))
    } else {
        Ok(())
    }
}

/// Twice the Φ value, written as `sqrt(radicand) - offset` so that both
/// metrics share one exact comparison routine.
fn doubled_phi_parts(obj: &GeomObject, p: Point) -> (BigInt, BigInt) {
    let dx = obj.cx as i128 - p.x as i128;
    let dy = obj.cy as i128 - p.y as i128;
    match obj.kind {
        ShapeKind::Disk => {
            let sq = BigInt::from(dx * dx + dy * dy);
            (sq * 4, BigInt::from(2 * obj.extent as i128))
        }
        ShapeKind::Square => {
            let m = BigInt::from(2 * dx.abs().max(dy.abs()));
            (&m * &m, BigInt::from(obj.extent))
        }
    }
}

/// Closed containment, exact.
pub fn covers(obj: &GeomObject, p: Point) -> bool {
    let dx = obj.cx as i128 - p.x as i128;
    let dy = obj.cy as i128 - p.y as i128;
    match obj.kind {
        ShapeKind::Disk => {
            let r = obj.extent as i128;
            dx * dx + dy * dy <= r * r
        }
        ShapeKind::Square => 2 * dx.abs().max(dy.abs()) <= obj.extent as i128,
    }
}

/// `p` lies exactly on the boundary of `obj`.
pub fn on_boundary(obj: &GeomObject, p: Point) -> bool {
    let dx = obj.cx as i128 - p.x as i128;
    let dy = obj.cy as i128 - p.y as i128;
    match obj.kind {
        ShapeKind::Disk => {
            let r = obj.extent as i128;
            dx * dx + dy * dy == r * r
        }
        ShapeKind::Square => 2 * dx.abs().max(dy.abs()) == obj.extent as i128,
    }
}

/// Additive weighted distance: center distance minus radius (L2) for disks,
/// L∞ center distance minus half the side for squares.
pub fn phi(obj: &GeomObject, p: Point) -> f64 {
    phi_at(obj, p.x as f64, p.y as f64)
}

/// [`phi`] at a real-valued query point.
pub fn phi_at(obj: &GeomObject, x: f64, y: f64) -> f64 {
    let dx = obj.cx as f64 - x;
    let dy = obj.cy as f64 - y;
    match obj.kind {
        ShapeKind::Disk => dx.hypot(dy) - obj.extent as f64,
        ShapeKind::Square => dx.abs().max(dy.abs()) - obj.extent as f64 / 2.0,
    }
}

/// Exact comparison of `phi(a, p)` against `phi(b, p)`.
pub fn compare_phi(a: &GeomObject, b: &GeomObject, p: Point) -> Ordering {
    let (ra, oa) = doubled_phi_parts(a, p);
    let (rb, ob) = doubled_phi_parts(b, p);
    // sqrt(ra) - oa  vs  sqrt(rb) - ob  <=>  sign(sqrt(ra) - sqrt(rb) - (oa - ob))
    sign_sqrt_diff(ra, rb, oa - ob)
}

/// Sign of `sqrt(p) - sqrt(q) - k` for non-negative `p`, `q`.
fn sign_sqrt_diff(p: BigInt, q: BigInt, k: BigInt) -> Ordering {
    let zero = BigInt::from(0);
    if k < zero {
        return sign_sqrt_diff(q, p, -k).reverse();
    }
    // sqrt(p) vs sqrt(q) + k, both sides non-negative.
    let c = &p - &q - &k * &k;
    if k == zero || q == zero {
        return c.cmp(&zero);
    }
    if c < zero {
        return Ordering::Less;
    }
    let lhs = &c * &c;
    let rhs = BigInt::from(4) * &k * &k * &q;
    lhs.cmp(&rhs)
}

/// Orientation determinant of the triple, exact.
pub fn orient(a: Point, b: Point, c: Point) -> i128 {
    let abx = b.x as i128 - a.x as i128;
    let aby = b.y as i128 - a.y as i128;
    let acx = c.x as i128 - a.x as i128;
    let acy = c.y as i128 - a.y as i128;
    abx * acy - aby * acx
}

/// `outer` contains `inner` (closed, same kind). Identical objects contain
/// each other.
pub fn contains_object(outer: &GeomObject, inner: &GeomObject) -> bool {
    if outer.kind != inner.kind {
        return false;
    }
    let dx = outer.cx as i128 - inner.cx as i128;
    let dy = outer.cy as i128 - inner.cy as i128;
    let (ro, ri) = (outer.extent as i128, inner.extent as i128);
    match outer.kind {
        ShapeKind::Disk => ro >= ri && dx * dx + dy * dy <= (ro - ri) * (ro - ri),
        ShapeKind::Square => 2 * dx.abs().max(dy.abs()) + ri <= ro,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "index", rename_all = "lowercase")]
pub enum Member {
    Center(usize),
    Point(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    Boundary { object: usize, point: usize },
    Collinear { members: [Member; 3] },
    Nested { outer: usize, inner: usize },
}

/// Lists every breach of the general-position assumptions: points on object
/// boundaries, collinear triples among centers and points, and nested objects
/// of the same kind.
pub fn check_general_position(objects: &[GeomObject], points: &[Point]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, o) in objects.iter().enumerate() {
        for (j, p) in points.iter().enumerate() {
            if on_boundary(o, *p) {
                out.push(Violation::Boundary { object: i, point: j });
            }
        }
    }

    let members: Vec<(Member, Point)> = objects
        .iter()
        .enumerate()
        .map(|(i, o)| (Member::Center(i), o.center()))
        .chain(points.iter().enumerate().map(|(j, p)| (Member::Point(j), *p)))
        .collect();
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            for c in b + 1..members.len() {
                if orient(members[a].1, members[b].1, members[c].1) == 0 {
                    out.push(Violation::Collinear {
                        members: [members[a].0, members[b].0, members[c].0],
                    });
                }
            }
        }
    }

    for i in 0..objects.len() {
        for j in i + 1..objects.len() {
            if contains_object(&objects[i], &objects[j]) {
                out.push(Violation::Nested { outer: i, inner: j });
            } else if contains_object(&objects[j], &objects[i]) {
                out.push(Violation::Nested { outer: j, inner: i });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn covers_examples() {
        let d = GeomObject::disk(0, 0, 1);
        assert!(!covers(&d, Point::new(2, 0)));
        assert!(covers(&d, Point::new(1, 0)));
        assert!(covers(&GeomObject::square(0, 0, 2), Point::new(1, 1)));
        assert!(!covers(&GeomObject::square(0, 0, 2), Point::new(2, 1)));
        // odd side: half-side 1.5
        assert!(!covers(&GeomObject::square(0, 0, 3), Point::new(2, 0)));
        assert!(covers(&GeomObject::square(0, 0, 3), Point::new(1, -1)));
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&GeomObject::disk(0, 0, 1), Point::new(2, 0)), 1.0);
        assert_eq!(phi(&GeomObject::square(0, 0, 2), Point::new(0, 0)), -1.0);
        assert_eq!(phi(&GeomObject::disk(0, 0, 1), Point::new(1, 0)), 0.0);
    }

    #[test]
    fn general_position_examples() {
        let v = check_general_position(&[GeomObject::disk(0, 0, 1)], &[Point::new(1, 0)]);
        assert_eq!(v, vec![Violation::Boundary { object: 0, point: 0 }]);

        let v = check_general_position(
            &[GeomObject::disk(0, 0, 5), GeomObject::disk(1, 0, 1)],
            &[],
        );
        assert_eq!(v, vec![Violation::Nested { outer: 0, inner: 1 }]);

        assert!(check_general_position(&[], &[]).is_empty());
    }

    #[test]
    fn collinear_triple_is_reported() {
        let v = check_general_position(
            &[GeomObject::disk(0, 0, 1)],
            &[Point::new(10, 10), Point::new(20, 20)],
        );
        assert_eq!(
            v,
            vec![Violation::Collinear {
                members: [Member::Center(0), Member::Point(0), Member::Point(1)]
            }]
        );
    }

    #[test]
    fn extreme_coordinates_do_not_overflow() {
        let d = GeomObject::disk(MAX_COORD, MAX_COORD, MAX_COORD);
        assert!(!covers(&d, Point::new(-MAX_COORD, -MAX_COORD)));
        assert!(covers(&d, Point::new(0, MAX_COORD)));
        let s = GeomObject::square(-MAX_COORD, 0, MAX_COORD);
        assert!(!covers(&s, Point::new(MAX_COORD, 0)));
        assert_eq!(
            orient(
                Point::new(-MAX_COORD, -MAX_COORD),
                Point::new(MAX_COORD, MAX_COORD),
                Point::new(0, 0)
            ),
            0
        );
    }

    #[test]
    fn validate_rejects_bad_extent_and_range() {
        assert!(GeomObject::disk(0, 0, 0).validate().is_err());
        assert!(matches!(
            GeomObject::disk(i64::MAX, 0, 1).validate(),
            Err(Error::Scale(_))
        ));
        assert!(Point::new(i64::MIN, 0).check_range().is_err());
    }

    #[test]
    fn compare_phi_exact_near_tie() {
        // sqrt(2) - 1 vs sqrt(8) - 2 : 2(sqrt 2 - 1) > sqrt 2 - 1
        let a = GeomObject::disk(1, 1, 1);
        let b = GeomObject::disk(2, 2, 2);
        assert_eq!(compare_phi(&a, &b, Point::new(0, 0)), Ordering::Less);
        // equal values: both zero on boundary
        let c = GeomObject::disk(3, 0, 3);
        let d = GeomObject::square(0, 4, 8);
        assert_eq!(compare_phi(&c, &d, Point::new(0, 0)), Ordering::Equal);
    }

    fn small_obj() -> impl Strategy<Value = GeomObject> {
        (any::<bool>(), -1000i64..1000, -1000i64..1000, 1i64..800).prop_map(|(d, x, y, e)| {
            if d {
                GeomObject::disk(x, y, e)
            } else {
                GeomObject::square(x, y, e)
            }
        })
    }

    proptest! {
        #[test]
        fn covers_agrees_with_phi(o in small_obj(), px in -2000i64..2000, py in -2000i64..2000) {
            let p = Point::new(px, py);
            let f = phi(&o, p);
            if f.abs() > 1e-6 {
                prop_assert_eq!(covers(&o, p), f <= 0.0);
            }
        }

        #[test]
        fn covers_translation_invariant(o in small_obj(), px in -2000i64..2000, py in -2000i64..2000,
                                        tx in -100_000i64..100_000, ty in -100_000i64..100_000) {
            let p = Point::new(px, py);
            let moved = GeomObject { cx: o.cx + tx, cy: o.cy + ty, ..o };
            prop_assert_eq!(covers(&o, p), covers(&moved, Point::new(px + tx, py + ty)));
        }

        #[test]
        fn square_covers_reflection_invariant(x in -1000i64..1000, y in -1000i64..1000, s in 1i64..800,
                                              px in -2000i64..2000, py in -2000i64..2000) {
            let sq = GeomObject::square(x, y, s);
            let reflected = Point::new(2 * x - px, 2 * y - py);
            prop_assert_eq!(covers(&sq, Point::new(px, py)), covers(&sq, reflected));
        }

        #[test]
        fn compare_phi_matches_float_when_separated(a in small_obj(), b in small_obj(),
                                                    px in -2000i64..2000, py in -2000i64..2000) {
            let p = Point::new(px, py);
            let (fa, fb) = (phi(&a, p), phi(&b, p));
            if (fa - fb).abs() > 1e-6 {
                prop_assert_eq!(compare_phi(&a, &b, p), fa.partial_cmp(&fb).unwrap());
            }
            prop_assert_eq!(compare_phi(&a, &b, p), compare_phi(&b, &a, p).reverse());
        }
    }
}
