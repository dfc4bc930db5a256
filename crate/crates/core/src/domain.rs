//! Discrete domains: simply connected subgraphs of the mesh-δ square lattice
//! with two marked boundary vertices and the two boundary arcs between them.
//!
//! Sites are stored in integer lattice coordinates; the physical position of
//! site `(x, y)` is `origin + mesh * (x, y)`. The polygonal hull is the union
//! of closed unit tiles centred on the sites.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

/// Lattice site in integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    #[inline]
    pub fn step(self, dir: usize) -> Site {
        let (dx, dy) = DIRS[dir];
        Site::new(self.x + dx, self.y + dy)
    }

    #[inline]
    pub fn is_adjacent(self, other: Site) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }
}

/// East, north, west, south.
pub const DIRS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Sentinel in the dense site lookup.
const NO_SITE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `[0, width] x [0, height]` with the lower-left corner on a lattice site.
    Rectangle { width: f64, height: f64 },
    /// Closed disc centred on a lattice site.
    Disc { radius: f64 },
    /// Hand-built site set; no continuum uniformizer is attached.
    Custom,
}

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("mesh must be a positive finite number, got {0}")]
    InvalidMesh(f64),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("mesh too coarse: {interior} interior vertices (need at least 2)")]
    MeshTooCoarse { interior: usize },
    #[error("marked points coincide after discretization")]
    AnchorsCoincide,
    #[error("arc (b a) has no interior vertex")]
    DegenerateArcs,
    #[error("vertex set is not simply connected")]
    NotSimplyConnected,
    #[error("boundary visits a vertex twice (domain is one site wide somewhere)")]
    PinchedBoundary,
    #[error("no boundary vertex is eligible as a marked point")]
    NoEligibleAnchor,
}

#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    shape: Shape,
    mesh: f64,
    origin: (f64, f64),
    sites: Vec<Site>,
    // dense lookup over the bounding box
    min_x: i32,
    min_y: i32,
    span_x: i32,
    span_y: i32,
    lookup: Vec<u32>,
    neighbors: Vec<[u32; 4]>,
    edges: Vec<(u32, u32)>,
    is_boundary: Vec<bool>,
    /// Counterclockwise boundary cycle, rotated to start at `a`.
    cycle: Vec<u32>,
    /// `junctions[i]`: hull corner (doubled coordinates) where the boundary
    /// walk passes from `cycle[i]` to `cycle[i + 1]`.
    junctions: Vec<(i32, i32)>,
    b_pos: usize,
    hull: Vec<(i32, i32)>,
}

impl DiscreteDomain {
    /// Discretizes `shape` at the given mesh and snaps the anchors (physical
    /// coordinates) to boundary vertices.
    pub fn build(
        shape: Shape,
        mesh: f64,
        a_pos: (f64, f64),
        b_pos: (f64, f64),
    ) -> Result<Self, DomainError> {
        if !(mesh.is_finite() && mesh > 0.0) {
            return Err(DomainError::InvalidMesh(mesh));
        }
        let sites = match shape {
            Shape::Rectangle { width, height } => {
                if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
                    return Err(DomainError::InvalidShape(format!(
                        "rectangle({width}, {height})"
                    )));
                }
                let nx = (width / mesh + 1e-9).floor() as i32 + 1;
                let ny = (height / mesh + 1e-9).floor() as i32 + 1;
                let mut s = Vec::with_capacity((nx * ny) as usize);
                for y in 0..ny {
                    for x in 0..nx {
                        s.push(Site::new(x, y));
                    }
                }
                s
            }
            Shape::Disc { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(DomainError::InvalidShape(format!("disc({radius})")));
                }
                let r = radius / mesh;
                let n = (r + 1e-9).floor() as i32;
                let r2 = r * r + 1e-9;
                let mut s = Vec::new();
                for y in -n..=n {
                    for x in -n..=n {
                        if (x as f64).powi(2) + (y as f64).powi(2) <= r2 {
                            s.push(Site::new(x, y));
                        }
                    }
                }
                s
            }
            Shape::Custom => {
                return Err(DomainError::InvalidShape(
                    "custom shapes are built with from_sites".into(),
                ))
            }
        };
        Self::assemble(shape, mesh, (0.0, 0.0), sites, a_pos, b_pos)
    }

    /// Builds a domain from an explicit site set (test fixtures, quads).
    /// Anchors are physical coordinates, as in [`DiscreteDomain::build`].
    pub fn from_sites(
        mesh: f64,
        sites: impl IntoIterator<Item = Site>,
        a_pos: (f64, f64),
        b_pos: (f64, f64),
    ) -> Result<Self, DomainError> {
        if !(mesh.is_finite() && mesh > 0.0) {
            return Err(DomainError::InvalidMesh(mesh));
        }
        let mut sites: Vec<Site> = sites.into_iter().collect();
        sites.sort_by_key(|s| (s.y, s.x));
        sites.dedup();
        Self::assemble(Shape::Custom, mesh, (0.0, 0.0), sites, a_pos, b_pos)
    }

    fn assemble(
        shape: Shape,
        mesh: f64,
        origin: (f64, f64),
        sites: Vec<Site>,
        a_pos: (f64, f64),
        b_pos: (f64, f64),
    ) -> Result<Self, DomainError> {
        if sites.is_empty() {
            return Err(DomainError::MeshTooCoarse { interior: 0 });
        }
        if !validate_simply_connected(sites.iter().copied()) {
            return Err(DomainError::NotSimplyConnected);
        }
        let min_x = sites.iter().map(|s| s.x).min().unwrap();
        let max_x = sites.iter().map(|s| s.x).max().unwrap();
        let min_y = sites.iter().map(|s| s.y).min().unwrap();
        let max_y = sites.iter().map(|s| s.y).max().unwrap();
        let span_x = max_x - min_x + 1;
        let span_y = max_y - min_y + 1;
        let mut lookup = vec![NO_SITE; (span_x as usize) * (span_y as usize)];
        for (i, s) in sites.iter().enumerate() {
            lookup[((s.y - min_y) * span_x + (s.x - min_x)) as usize] = i as u32;
        }
        let find = |s: Site| -> u32 {
            if s.x < min_x || s.x > max_x || s.y < min_y || s.y > max_y {
                NO_SITE
            } else {
                lookup[((s.y - min_y) * span_x + (s.x - min_x)) as usize]
            }
        };

        let mut neighbors = Vec::with_capacity(sites.len());
        let mut edges = Vec::new();
        let mut is_boundary = vec![false; sites.len()];
        for (i, &s) in sites.iter().enumerate() {
            let mut nb = [NO_SITE; 4];
            for (d, slot) in nb.iter_mut().enumerate() {
                *slot = find(s.step(d));
                if *slot == NO_SITE {
                    is_boundary[i] = true;
                }
            }
            // east and north edges only, so each edge is listed once
            for &slot in &nb[..2] {
                if slot != NO_SITE {
                    edges.push((i as u32, slot));
                }
            }
            neighbors.push(nb);
        }
        let interior = is_boundary.iter().filter(|b| !**b).count();
        if interior < 2 {
            return Err(DomainError::MeshTooCoarse { interior });
        }

        let walk = boundary_walk(&sites, &find)?;
        // runs of consecutive edges with the same owner; the junction of a run
        // is the hull corner where the walk passes to the next owner
        let shift = (0..walk.len())
            .find(|&k| walk[(k + walk.len() - 1) % walk.len()].owner != walk[k].owner)
            .unwrap_or(0);
        let mut cycle: Vec<u32> = Vec::new();
        let mut junctions: Vec<(i32, i32)> = Vec::new();
        for k in 0..walk.len() {
            let e = &walk[(k + shift) % walk.len()];
            let next = &walk[(k + shift + 1) % walk.len()];
            if k == 0 || walk[(k + shift + walk.len() - 1) % walk.len()].owner != e.owner {
                cycle.push(e.owner);
            }
            if next.owner != e.owner || k + 1 == walk.len() {
                junctions.push(e.to);
            }
        }
        debug_assert_eq!(cycle.len(), junctions.len());
        {
            let mut seen = HashSet::with_capacity(cycle.len());
            if !cycle.iter().all(|v| seen.insert(*v)) {
                return Err(DomainError::PinchedBoundary);
            }
        }

        let hull = hull_polygon(&walk);
        let n = cycle.len();
        let to_phys = |s: Site| (origin.0 + mesh * s.x as f64, origin.1 + mesh * s.y as f64);
        let pick = |target: (f64, f64), eligible: &dyn Fn(usize) -> bool| -> Option<usize> {
            (0..n)
                .filter(|&i| eligible(i))
                .min_by(|&i, &j| {
                    let si = sites[cycle[i] as usize];
                    let sj = sites[cycle[j] as usize];
                    let (pi, pj) = (to_phys(si), to_phys(sj));
                    let di = (pi.0 - target.0).powi(2) + (pi.1 - target.1).powi(2);
                    let dj = (pj.0 - target.0).powi(2) + (pj.1 - target.1).powi(2);
                    di.partial_cmp(&dj)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then((si.x, si.y).cmp(&(sj.x, sj.y)))
                })
        };
        let a_idx = pick(a_pos, &|_| true).ok_or(DomainError::NoEligibleAnchor)?;
        let b_idx = pick(b_pos, &|_| true).ok_or(DomainError::NoEligibleAnchor)?;
        if a_idx == b_idx {
            return Err(DomainError::AnchorsCoincide);
        }
        cycle.rotate_left(a_idx);
        junctions.rotate_left(a_idx);
        let b_pos = (b_idx + n - a_idx) % n;
        if b_pos + 1 >= n {
            return Err(DomainError::DegenerateArcs);
        }

        Ok(DiscreteDomain {
            shape,
            mesh,
            origin,
            sites,
            min_x,
            min_y,
            span_x,
            span_y,
            lookup,
            neighbors,
            edges,
            is_boundary,
            cycle,
            junctions,
            b_pos,
            hull,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    /// Same lattice, rigidly shifted in the plane.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut d = self.clone();
        d.origin = (self.origin.0 + dx, self.origin.1 + dy);
        d
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, v: usize) -> Site {
        self.sites[v]
    }

    /// Index of the site at `s`, if it belongs to the domain.
    #[inline]
    pub fn index_of(&self, s: Site) -> Option<usize> {
        let (x, y) = (s.x - self.min_x, s.y - self.min_y);
        if x < 0 || y < 0 || x >= self.span_x || y >= self.span_y {
            return None;
        }
        let v = self.lookup[(y * self.span_x + x) as usize];
        (v != NO_SITE).then_some(v as usize)
    }

    #[inline]
    pub fn contains(&self, s: Site) -> bool {
        self.index_of(s).is_some()
    }

    /// Neighbor of `v` in direction `dir` (see [`DIRS`]).
    #[inline]
    pub fn neighbor(&self, v: usize, dir: usize) -> Option<usize> {
        let n = self.neighbors[v][dir];
        (n != NO_SITE).then_some(n as usize)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[v]
            .iter()
            .filter(|n| **n != NO_SITE)
            .map(|n| *n as usize)
    }

    /// Nearest-neighbor edges, each listed once.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn interior_count(&self) -> usize {
        self.is_boundary.iter().filter(|b| !**b).count()
    }

    pub fn a_mark(&self) -> usize {
        self.cycle[0] as usize
    }

    pub fn b_mark(&self) -> usize {
        self.cycle[self.b_pos] as usize
    }

    /// Counterclockwise boundary cycle starting at `a`.
    pub fn boundary_cycle(&self) -> impl Iterator<Item = usize> + '_ {
        self.cycle.iter().map(|v| *v as usize)
    }

    pub fn boundary_len(&self) -> usize {
        self.cycle.len()
    }

    /// The two boundary arcs: `a -> b` and `b -> a`, counterclockwise, each
    /// including both marked endpoints.
    pub fn boundary_arcs(&self) -> (Vec<usize>, Vec<usize>) {
        let ab = self.cycle[..=self.b_pos].iter().map(|v| *v as usize).collect();
        let mut ba: Vec<usize> = self.cycle[self.b_pos..].iter().map(|v| *v as usize).collect();
        ba.push(self.cycle[0] as usize);
        (ab, ba)
    }

    /// Membership mask for the open arc `(b a)`: boundary vertices strictly
    /// between `b` and `a` in counterclockwise order.
    pub fn arc_ba_interior_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.sites.len()];
        for v in &self.cycle[self.b_pos + 1..] {
            mask[*v as usize] = true;
        }
        mask
    }

    /// Membership mask for the closed arc `[a b]`.
    pub fn arc_ab_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.sites.len()];
        for v in &self.cycle[..=self.b_pos] {
            mask[*v as usize] = true;
        }
        mask
    }

    /// Boundary vertex preceding `a` counterclockwise (last vertex of the open arc `(b a)`).
    pub fn before_a(&self) -> usize {
        *self.cycle.last().unwrap() as usize
    }

    /// Boundary vertex following `b` counterclockwise (first vertex of the open arc `(b a)`).
    pub fn after_b(&self) -> usize {
        self.cycle[self.b_pos + 1] as usize
    }

    /// Hull corner where the interface starts: between `before_a` and `a`, in
    /// lattice units.
    pub fn start_corner(&self) -> (f64, f64) {
        let c = *self.junctions.last().unwrap();
        (c.0 as f64 / 2.0, c.1 as f64 / 2.0)
    }

    /// Hull corner where the interface ends: between `b` and `after_b`.
    pub fn end_corner(&self) -> (f64, f64) {
        let c = self.junctions[self.b_pos];
        (c.0 as f64 / 2.0, c.1 as f64 / 2.0)
    }

    /// Physical coordinates of a point given in lattice units.
    #[inline]
    pub fn to_physical(&self, p: (f64, f64)) -> (f64, f64) {
        (self.origin.0 + self.mesh * p.0, self.origin.1 + self.mesh * p.1)
    }

    #[inline]
    pub fn to_lattice(&self, p: (f64, f64)) -> (f64, f64) {
        ((p.0 - self.origin.0) / self.mesh, (p.1 - self.origin.1) / self.mesh)
    }

    pub fn site_position(&self, v: usize) -> (f64, f64) {
        let s = self.sites[v];
        self.to_physical((s.x as f64, s.y as f64))
    }

    /// Closed polygon of the union of tiles (counterclockwise, physical
    /// coordinates, first vertex not repeated).
    pub fn polygonal_hull(&self) -> Vec<(f64, f64)> {
        self.hull
            .iter()
            .map(|&(x, y)| self.to_physical((x as f64 / 2.0, y as f64 / 2.0)))
            .collect()
    }

    /// Euclidean distance (lattice units) from a point inside the tile union to
    /// its boundary.
    pub fn distance_to_hull_boundary(&self, p: (f64, f64)) -> f64 {
        let cx = p.0.round() as i32;
        let cy = p.1.round() as i32;
        let mut best = f64::INFINITY;
        for r in 0..=3i32 {
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx.abs().max(dy.abs()) != r {
                        continue;
                    }
                    let s = Site::new(cx + dx, cy + dy);
                    if self.contains(s) {
                        continue;
                    }
                    // distance to the closed tile of the missing site
                    let ddx = ((p.0 - s.x as f64).abs() - 0.5).max(0.0);
                    let ddy = ((p.1 - s.y as f64).abs() - 0.5).max(0.0);
                    best = best.min(ddx.hypot(ddy));
                }
            }
            if best <= r as f64 - 0.5 {
                break;
            }
        }
        best
    }

    /// Whether a lattice-unit point lies in the closed tile union.
    pub fn hull_contains(&self, p: (f64, f64)) -> bool {
        let cx = p.0.round() as i32;
        let cy = p.1.round() as i32;
        for dy in -1..=1 {
            for dx in -1..=1 {
                let s = Site::new(cx + dx, cy + dy);
                if self.contains(s)
                    && (p.0 - s.x as f64).abs() <= 0.5 + 1e-12
                    && (p.1 - s.y as f64).abs() <= 0.5 + 1e-12
                {
                    return true;
                }
            }
        }
        false
    }

    pub fn validate_simply_connected(&self) -> bool {
        validate_simply_connected(self.sites.iter().copied())
    }

    /// Plain-text vertex/arc listing for debugging.
    pub fn to_listing(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mesh {}", self.mesh);
        let _ = writeln!(out, "origin {} {}", self.origin.0, self.origin.1);
        let _ = writeln!(out, "vertices {}", self.sites.len());
        for s in &self.sites {
            let _ = writeln!(out, "{} {}", s.x, s.y);
        }
        let (ab, ba) = self.boundary_arcs();
        for (name, arc) in [("arc_ab", ab), ("arc_ba", ba)] {
            let _ = write!(out, "{name} {}", arc.len());
            for v in arc {
                let s = self.sites[v];
                let _ = write!(out, " {},{}", s.x, s.y);
            }
            out.push('\n');
        }
        out
    }
}

/// Connected vertex set whose tile-union complement is connected.
pub fn validate_simply_connected(sites: impl IntoIterator<Item = Site>) -> bool {
    let set: HashSet<Site> = sites.into_iter().collect();
    let Some(&start) = set.iter().next() else {
        return false;
    };
    let mut seen = HashSet::with_capacity(set.len());
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for d in 0..4 {
            let t = s.step(d);
            if set.contains(&t) && seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    if seen.len() != set.len() {
        return false;
    }
    // complement inside a padded box; closed tiles meeting at a corner block
    // passage, so the complement is 4-connected
    let min_x = set.iter().map(|s| s.x).min().unwrap() - 1;
    let max_x = set.iter().map(|s| s.x).max().unwrap() + 1;
    let min_y = set.iter().map(|s| s.y).min().unwrap() - 1;
    let max_y = set.iter().map(|s| s.y).max().unwrap() + 1;
    let total = ((max_x - min_x + 1) as usize) * ((max_y - min_y + 1) as usize) - set.len();
    let start = Site::new(min_x, min_y);
    let mut seen = HashSet::with_capacity(total);
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for d in 0..4 {
            let t = s.step(d);
            if t.x < min_x || t.x > max_x || t.y < min_y || t.y > max_y {
                continue;
            }
            if !set.contains(&t) && seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    seen.len() == total
}

struct WalkEdge {
    owner: u32,
    to: (i32, i32),
}

/// Counterclockwise walk along the tile-union boundary (interior on the left),
/// in doubled coordinates.
fn boundary_walk(
    sites: &[Site],
    find: &dyn Fn(Site) -> u32,
) -> Result<Vec<WalkEdge>, DomainError> {
    let mut out_edges: HashMap<(i32, i32), ((i32, i32), u32)> = HashMap::new();
    for (i, &s) in sites.iter().enumerate() {
        let (x2, y2) = (2 * s.x, 2 * s.y);
        let sides = [
            ((x2 + 1, y2 - 1), (x2 + 1, y2 + 1)),
            ((x2 + 1, y2 + 1), (x2 - 1, y2 + 1)),
            ((x2 - 1, y2 + 1), (x2 - 1, y2 - 1)),
            ((x2 - 1, y2 - 1), (x2 + 1, y2 - 1)),
        ];
        for (d, (from, to)) in sides.into_iter().enumerate() {
            if find(s.step(d)) == NO_SITE && out_edges.insert(from, (to, i as u32)).is_some() {
                return Err(DomainError::NotSimplyConnected);
            }
        }
    }
    let start = *out_edges.keys().min().unwrap();
    let mut walk = Vec::with_capacity(out_edges.len());
    let mut at = start;
    loop {
        let (to, owner) = out_edges[&at];
        walk.push(WalkEdge { owner, to });
        at = to;
        if at == start {
            break;
        }
        if walk.len() > out_edges.len() {
            return Err(DomainError::NotSimplyConnected);
        }
    }
    if walk.len() != out_edges.len() {
        return Err(DomainError::NotSimplyConnected);
    }
    Ok(walk)
}

fn hull_polygon(walk: &[WalkEdge]) -> Vec<(i32, i32)> {
    let n = walk.len();
    let mut pts = Vec::new();
    for k in 0..n {
        let prev = walk[(k + n - 1) % n].to;
        let here = walk[k].to;
        let next = walk[(k + 1) % n].to;
        let d1 = (here.0 - prev.0, here.1 - prev.1);
        let d2 = (next.0 - here.0, next.1 - here.1);
        if d1.0 * d2.1 - d1.1 * d2.0 != 0 {
            pts.push(here);
        }
    }
    pts
}
