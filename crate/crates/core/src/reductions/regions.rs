use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{orient, Point};
use crate::instance::Coverage;

/// Closed planar ranges produced by the embeddings. They only feed the exact
/// oracles; local search stays on disks and squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Axis-parallel rectangle given by its corners.
    Rect { x0: i64, y0: i64, x1: i64, y1: i64 },
    /// Unbounded vertical slab `x0 <= x <= x1`.
    VStrip { x0: i64, x1: i64 },
    /// Unbounded horizontal slab `y0 <= y <= y1`.
    HStrip { y0: i64, y1: i64 },
    /// Points below the segment `p q` within its x-range, clipped at `floor`.
    Shadow { p: Point, q: Point, floor: i64 },
    Triangle { a: Point, b: Point, c: Point },
}

impl Region {
    pub fn covers(&self, pt: Point) -> bool {
        match *self {
            Region::Rect { x0, y0, x1, y1 } => x0 <= pt.x && pt.x <= x1 && y0 <= pt.y && pt.y <= y1,
            Region::VStrip { x0, x1 } => x0 <= pt.x && pt.x <= x1,
            Region::HStrip { y0, y1 } => y0 <= pt.y && pt.y <= y1,
            Region::Shadow { p, q, floor } => {
                p.x <= pt.x && pt.x <= q.x && pt.y >= floor && orient(p, q, pt) <= 0
            }
            Region::Triangle { a, b, c } => {
                let s = orient(a, b, c).signum();
                [orient(a, b, pt), orient(b, c, pt), orient(c, a, pt)]
                    .iter()
                    .all(|o| o.signum() * s >= 0)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::Rect { x0, y0, x1, y1 } => x0 <= x1 && y0 <= y1,
            Region::VStrip { x0, x1 } => x0 <= x1,
            Region::HStrip { y0, y1 } => y0 <= y1,
            Region::Shadow { p, q, .. } => p.x <= q.x,
            Region::Triangle { a, b, c } => orient(a, b, c) != 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidField {
                field: "regions".into(),
                message: format!("degenerate region {self:?}"),
            })
        }
    }
}

/// Regions plus points with exact incidence, usable by the exact oracles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionInstance {
    regions: Vec<Region>,
    points: Vec<Point>,
    incidence: Vec<FixedBitSet>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionInstanceFile {
    regions: Vec<Region>,
    points: Vec<Point>,
}

impl RegionInstance {
    pub fn new(regions: Vec<Region>, points: Vec<Point>) -> Result<Self> {
        for r in &regions {
            r.validate()?;
        }
        for p in &points {
            p.check_range()?;
        }
        let incidence = regions
            .iter()
            .map(|r| {
                let mut b = FixedBitSet::with_capacity(points.len());
                for (j, &p) in points.iter().enumerate() {
                    if r.covers(p) {
                        b.insert(j);
                    }
                }
                b
            })
            .collect();
        Ok(Self { regions, points, incidence })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn to_json(&self) -> String {
        let file = RegionInstanceFile {
            regions: self.regions.clone(),
            points: self.points.clone(),
        };
        serde_json::to_string_pretty(&file).expect("region instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RegionInstanceFile = serde_json::from_str(text).map_err(Error::from_json)?;
        Self::new(file.regions, file.points)
    }
}

impl Coverage for RegionInstance {
    fn object_count(&self) -> usize {
        self.regions.len()
    }

    fn element_count(&self) -> usize {
        self.points.len()
    }

    fn coverage(&self, object: usize) -> &FixedBitSet {
        &self.incidence[object]
    }
}
