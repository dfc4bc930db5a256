//! Interfaces drawn on the auxiliary square-octagon lattice.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::domain::DiscreteDomain;

/// Minimum clearance (lattice units) between an interface and the hull
/// boundary, away from the two endpoints.
pub const BOUNDARY_CLEARANCE: f64 = 0.25;

/// Non-self-crossing polyline from the hull corner at `a` to the hull corner
/// at `b`, in lattice units.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCurve {
    points: Vec<(f64, f64)>,
    mesh: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum CurveDefect {
    #[error("curve has fewer than two points")]
    TooShort,
    #[error("curve does not start at the start corner")]
    BadStart,
    #[error("curve does not end at the end corner")]
    BadEnd,
    #[error("step {0} is longer than one lattice unit")]
    LongStep(usize),
    #[error("point {index} is {distance} from the hull boundary")]
    TooCloseToBoundary { index: usize, distance: f64 },
    #[error("point {0} lies outside the hull")]
    Outside(usize),
    #[error("segments {0} and {1} intersect")]
    SelfCrossing(usize, usize),
}

impl LatticeCurve {
    pub fn new(points: Vec<(f64, f64)>, mesh: f64) -> Self {
        LatticeCurve { points, mesh }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        LatticeCurve { points, mesh: self.mesh }
    }

    /// Points in the physical plane of `domain`.
    pub fn physical_points(&self, domain: &DiscreteDomain) -> Vec<(f64, f64)> {
        self.points.iter().map(|&p| domain.to_physical(p)).collect()
    }

    /// CSV export, header `x,y`, coordinates in units of the mesh.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }

    /// Checks every lattice-curve invariant against the domain it was
    /// extracted from.
    pub fn check_invariants(&self, domain: &DiscreteDomain) -> Result<(), CurveDefect> {
        let pts = &self.points;
        if pts.len() < 2 {
            return Err(CurveDefect::TooShort);
        }
        let close = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).hypot(p.1 - q.1) < 1e-9;
        if !close(pts[0], domain.start_corner()) {
            return Err(CurveDefect::BadStart);
        }
        if !close(*pts.last().unwrap(), domain.end_corner()) {
            return Err(CurveDefect::BadEnd);
        }
        for (i, w) in pts.windows(2).enumerate() {
            if (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1) > 1.0 + 1e-9 {
                return Err(CurveDefect::LongStep(i));
            }
        }
        for (i, &p) in pts.iter().enumerate().skip(1).take(pts.len() - 2) {
            if !domain.hull_contains(p) {
                return Err(CurveDefect::Outside(i));
            }
            let d = domain.distance_to_hull_boundary(p);
            if d < BOUNDARY_CLEARANCE - 1e-9 {
                return Err(CurveDefect::TooCloseToBoundary { index: i, distance: d });
            }
        }
        if let Some((i, j)) = first_self_intersection(pts) {
            return Err(CurveDefect::SelfCrossing(i, j));
        }
        Ok(())
    }
}

/// First pair of non-adjacent segments that touch or cross, found through a
/// unit-cell spatial hash.
pub fn first_self_intersection(pts: &[(f64, f64)]) -> Option<(usize, usize)> {
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..pts.len().saturating_sub(1) {
        let (p, q) = (pts[i], pts[i + 1]);
        let (x0, x1) = (p.0.min(q.0).floor() as i64, p.0.max(q.0).floor() as i64);
        let (y0, y1) = (p.1.min(q.1).floor() as i64, p.1.max(q.1).floor() as i64);
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                cells.entry((cx, cy)).or_default().push(i);
            }
        }
    }
    let mut best: Option<(usize, usize)> = None;
    for segs in cells.values() {
        for (k, &i) in segs.iter().enumerate() {
            for &j in &segs[k + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if j == i + 1 {
                    continue;
                }
                if segments_touch(pts[i], pts[i + 1], pts[j], pts[j + 1])
                    && best.is_none_or(|b| (i, j) < b)
                {
                    best = Some((i, j));
                }
            }
        }
    }
    best
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) - 1e-12
        && p.0 <= a.0.max(b.0) + 1e-12
        && p.1 >= a.1.min(b.1) - 1e-12
        && p.1 <= a.1.max(b.1) + 1e-12
}

/// Closed-segment intersection test.
pub fn segments_touch(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    const EPS: f64 = 1e-12;
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > EPS && o2 < -EPS) || (o1 < -EPS && o2 > EPS))
        && ((o3 > EPS && o4 < -EPS) || (o3 < -EPS && o4 > EPS))
    {
        return true;
    }
    (o1.abs() <= EPS && on_segment(a, b, c))
        || (o2.abs() <= EPS && on_segment(a, b, d))
        || (o3.abs() <= EPS && on_segment(c, d, a))
        || (o4.abs() <= EPS && on_segment(c, d, b))
}
