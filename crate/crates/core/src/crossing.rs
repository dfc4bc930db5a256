//! Annulus crossings of interfaces, discrete extremal length of quads, and
//! FK crossing probabilities of quads.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::curve::LatticeCurve;
use crate::domain::{DiscreteDomain, Site};
use crate::fk::{p_critical, BondConfiguration, BondGraph, FkAlgorithm, WireGroup};

pub const MIN_CROSSING_SAMPLES: usize = 100;
pub const CG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum CrossingError {
    #[error("annulus does not meet the domain")]
    VacuousAnnulus,
    #[error("invalid annulus: r = {r}, R = {big_r}")]
    InvalidAnnulus { r: f64, big_r: f64 },
    #[error("electrodes touch")]
    ElectrodesTouch,
    #[error("invalid quad: {0}")]
    InvalidQuad(String),
    #[error("need at least {MIN_CROSSING_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("conjugate gradient did not converge (relative residual {0})")]
    NoConvergence(f64),
}

/// `A(z0, r, R) = {r < |z − z0| < R}` in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpec {
    pub center: (f64, f64),
    pub r: f64,
    pub big_r: f64,
}

impl AnnulusSpec {
    pub fn new(center: (f64, f64), r: f64, big_r: f64) -> Result<Self, CrossingError> {
        if !(r > 0.0 && big_r > r && big_r.is_finite()) {
            return Err(CrossingError::InvalidAnnulus { r, big_r });
        }
        Ok(AnnulusSpec { center, r, big_r })
    }

    fn radius(&self, p: (f64, f64)) -> f64 {
        (p.0 - self.center.0).hypot(p.1 - self.center.1)
    }
}

/// Whether the curve has a subarc going from the inner to the outer circle
/// (either way) inside one component of `A ∩ Ω` whose removal leaves `a`
/// and `b` connected. Components are taken over lattice sites, a site
/// belonging to `A` when its position does.
pub fn detect_unforced_crossing(
    curve: &LatticeCurve,
    domain: &DiscreteDomain,
    annulus: &AnnulusSpec,
) -> Result<bool, CrossingError> {
    let n = domain.len();
    let in_a: Vec<bool> = (0..n)
        .map(|v| {
            let rho = annulus.radius(domain.site_position(v));
            rho > annulus.r && rho < annulus.big_r
        })
        .collect();
    if !in_a.iter().any(|&x| x) {
        return Err(CrossingError::VacuousAnnulus);
    }
    // components of A ∩ Ω
    let mut comp = vec![usize::MAX; n];
    let mut n_comp = 0;
    for s in 0..n {
        if !in_a[s] || comp[s] != usize::MAX {
            continue;
        }
        comp[s] = n_comp;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for u in domain.neighbors(v) {
                if in_a[u] && comp[u] == usize::MAX {
                    comp[u] = n_comp;
                    queue.push_back(u);
                }
            }
        }
        n_comp += 1;
    }
    let mut separating: Vec<Option<bool>> = vec![None; n_comp];
    let mut separates = |c: usize| -> bool {
        *separating[c].get_or_insert_with(|| {
            let (a, b) = (domain.a_mark(), domain.b_mark());
            if comp[a] == c || comp[b] == c {
                return true;
            }
            let mut seen = vec![false; n];
            seen[a] = true;
            let mut queue = VecDeque::from([a]);
            while let Some(v) = queue.pop_front() {
                if v == b {
                    return false;
                }
                for u in domain.neighbors(v) {
                    if !seen[u] && comp[u] != c {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            true
        })
    };

    #[derive(Clone, Copy, PartialEq)]
    enum Zone {
        Inner,
        Ring,
        Outer,
    }
    let phys = curve.physical_points(domain);
    let zone = |p: (f64, f64)| {
        let rho = annulus.radius(p);
        if rho <= annulus.r {
            Zone::Inner
        } else if rho >= annulus.big_r {
            Zone::Outer
        } else {
            Zone::Ring
        }
    };
    let sites_near = |k: usize| {
        let (x, y) = curve.points()[k];
        let (x0, x1) = (x.floor() as i32, x.ceil() as i32);
        let (y0, y1) = (y.floor() as i32, y.ceil() as i32);
        [(x0, y0), (x0, y1), (x1, y0), (x1, y1)]
            .into_iter()
            .filter_map(move |(sx, sy)| domain.index_of(Site::new(sx, sy)))
    };
    let mut last_edge: Option<(usize, Zone)> = None;
    for (k, &pt) in phys.iter().enumerate() {
        let z = zone(pt);
        if z == Zone::Ring {
            continue;
        }
        if let Some((start, z0)) = last_edge {
            if z0 != z && k > start + 1 {
                // subarc start+1..k lies in the ring and joins the two circles
                let mut votes = vec![0usize; n_comp];
                for j in start + 1..k {
                    for v in sites_near(j) {
                        if in_a[v] {
                            votes[comp[v]] += 1;
                        }
                    }
                }
                if let Some((c, _)) = votes.iter().enumerate().filter(|(_, &n)| n > 0).max_by_key(|(i, &n)| (n, usize::MAX - i)) {
                    if !separates(c) {
                        return Ok(true);
                    }
                }
            }
        }
        last_edge = Some((k, z));
    }
    Ok(false)
}

/// Boundary condition of one arc of a quad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcTag {
    Free,
    Wired,
}

/// Tags in arc order `(a b), (b c), (c d), (d a)`, written as e.g. `wfwf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryTags(pub [ArcTag; 4]);

impl BoundaryTags {
    pub const ALL_FREE: BoundaryTags = BoundaryTags([ArcTag::Free; 4]);
    pub const ALL_WIRED: BoundaryTags = BoundaryTags([ArcTag::Wired; 4]);
    /// Wired electrodes, free sides.
    pub const WIRED_ELECTRODES: BoundaryTags = BoundaryTags([ArcTag::Wired, ArcTag::Free, ArcTag::Wired, ArcTag::Free]);
    /// Free electrodes, wired sides.
    pub const FREE_ELECTRODES: BoundaryTags = BoundaryTags([ArcTag::Free, ArcTag::Wired, ArcTag::Free, ArcTag::Wired]);

    pub fn parse(s: &str) -> Option<Self> {
        let tags: Vec<ArcTag> = s
            .chars()
            .map(|c| match c {
                'w' | 'W' => Some(ArcTag::Wired),
                'f' | 'F' => Some(ArcTag::Free),
                _ => None,
            })
            .collect::<Option<_>>()?;
        tags.try_into().ok().map(BoundaryTags)
    }
}

impl fmt::Display for BoundaryTags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.0 {
            f.write_str(if t == ArcTag::Wired { "w" } else { "f" })?;
        }
        Ok(())
    }
}

/// Graph with four marked boundary arcs `(a b), (b c), (c d), (d a)`. The
/// electrodes of the extremal length and the crossing event are `(a b)` and
/// `(c d)`.
#[derive(Debug, Clone)]
pub struct DiscreteQuad {
    graph: Arc<BondGraph>,
    arcs: [Vec<usize>; 4],
    tags: BoundaryTags,
}

impl DiscreteQuad {
    /// Validates that the arcs are nonempty, disjoint and the graph connected.
    pub fn new(graph: BondGraph, arcs: [Vec<usize>; 4], tags: BoundaryTags) -> Result<Self, CrossingError> {
        let n = graph.vertex_count();
        let mut owner = vec![usize::MAX; n];
        for (i, arc) in arcs.iter().enumerate() {
            if arc.is_empty() {
                return Err(CrossingError::InvalidQuad(format!("arc {i} is empty")));
            }
            for &v in arc {
                if v >= n || owner[v] != usize::MAX {
                    return Err(CrossingError::InvalidQuad(format!("vertex {v} repeated or out of range")));
                }
                owner[v] = i;
            }
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in graph.incident(v) {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    count += 1;
                    queue.push_back(u as usize);
                }
            }
        }
        if count != n {
            return Err(CrossingError::InvalidQuad("graph is disconnected".into()));
        }
        Ok(DiscreteQuad { graph: Arc::new(graph), arcs, tags })
    }

    /// Grid `{0..=m} × {0..=n}`, vertex `(x, y)` at index `y (m + 1) + x`;
    /// `(a b)` the full left side, `(c d)` the full right side, `(b c)` and
    /// `(d a)` the top and bottom without corners.
    pub fn grid(m: usize, n: usize, tags: BoundaryTags) -> Result<Self, CrossingError> {
        if m < 2 || n < 1 {
            return Err(CrossingError::InvalidQuad(format!("grid {m}x{n} too small")));
        }
        let idx = |x: usize, y: usize| y * (m + 1) + x;
        let mut edges = Vec::new();
        for y in 0..=n {
            for x in 0..=m {
                if x < m {
                    edges.push((idx(x, y) as u32, idx(x + 1, y) as u32));
                }
                if y < n {
                    edges.push((idx(x, y) as u32, idx(x, y + 1) as u32));
                }
            }
        }
        let graph = BondGraph::new((m + 1) * (n + 1), edges);
        let left = (0..=n).map(|y| idx(0, y)).collect();
        let top = (1..m).map(|x| idx(x, n)).collect();
        let right = (0..=n).rev().map(|y| idx(m, y)).collect();
        let bottom = (1..m).rev().map(|x| idx(x, 0)).collect();
        Self::new(graph, [left, top, right, bottom], tags)
    }

    /// Quad on the sites of a domain, arcs given as runs of its boundary
    /// cycle starting at `a`: `cuts[i]` is the cycle position where arc `i + 1`
    /// begins.
    pub fn from_domain(domain: &DiscreteDomain, cuts: [usize; 3], tags: BoundaryTags) -> Result<Self, CrossingError> {
        let cycle: Vec<usize> = domain.boundary_cycle().collect();
        let [c1, c2, c3] = cuts;
        if !(0 < c1 && c1 < c2 && c2 < c3 && c3 < cycle.len()) {
            return Err(CrossingError::InvalidQuad(format!("bad cuts {cuts:?}")));
        }
        let arcs = [cycle[..c1].to_vec(), cycle[c1..c2].to_vec(), cycle[c2..c3].to_vec(), cycle[c3..].to_vec()];
        Self::new(BondGraph::from_domain(domain), arcs, tags)
    }

    pub fn graph(&self) -> &Arc<BondGraph> {
        &self.graph
    }

    pub fn arcs(&self) -> &[Vec<usize>; 4] {
        &self.arcs
    }

    pub fn tags(&self) -> BoundaryTags {
        self.tags
    }

    pub fn with_tags(mut self, tags: BoundaryTags) -> Self {
        self.tags = tags;
        self
    }

    /// Quad with the arcs relabelled so that `(b c)` and `(d a)` become the
    /// electrodes.
    pub fn rotated(&self) -> Self {
        let [a, b, c, d] = self.arcs.clone();
        let [ta, tb, tc, td] = self.tags.0;
        DiscreteQuad { graph: self.graph.clone(), arcs: [b, c, d, a], tags: BoundaryTags([tb, tc, td, ta]) }
    }

    /// Wire groups of the wired arcs, each arc wired on its own.
    pub fn wire_groups(&self, tags: BoundaryTags) -> Vec<WireGroup> {
        self.arcs
            .iter()
            .zip(tags.0)
            .filter(|(_, t)| *t == ArcTag::Wired)
            .map(|(arc, _)| WireGroup { vertices: arc.clone(), sign: None })
            .collect()
    }
}

/// Effective resistance between `(a b)` and `(c d)` of the unit-conductance
/// network, by conjugate gradient on the Dirichlet Laplacian. Infinite when
/// the electrodes lie in different components.
pub fn discrete_extremal_length(quad: &DiscreteQuad) -> Result<f64, CrossingError> {
    let g = &quad.graph;
    let n = g.vertex_count();
    // 0 = unknown, 1 = source (potential 1), 2 = sink (potential 0)
    let mut role = vec![0u8; n];
    for &v in &quad.arcs[0] {
        role[v] = 1;
    }
    for &v in &quad.arcs[2] {
        role[v] = 2;
    }
    for &(x, y) in g.edges() {
        if role[x as usize] + role[y as usize] == 3 {
            return Err(CrossingError::ElectrodesTouch);
        }
    }
    // restrict to the part reachable from the source
    let mut reach = vec![false; n];
    let mut queue: VecDeque<usize> = quad.arcs[0].iter().copied().collect();
    for &v in &quad.arcs[0] {
        reach[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &(u, _) in g.incident(v) {
            let u = u as usize;
            if !reach[u] {
                reach[u] = true;
                if role[u] == 0 {
                    queue.push_back(u);
                }
            }
        }
    }
    if !quad.arcs[2].iter().any(|&v| reach[v]) {
        return Ok(f64::INFINITY);
    }
    let unknowns: Vec<usize> = (0..n).filter(|&v| reach[v] && role[v] == 0).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in unknowns.iter().enumerate() {
        slot[v] = i;
    }
    let m = unknowns.len();
    let degree: Vec<f64> = unknowns.iter().map(|&v| g.incident(v).len() as f64).collect();
    let apply = |x: &[f64], out: &mut [f64]| {
        for (i, &v) in unknowns.iter().enumerate() {
            let mut s = degree[i] * x[i];
            for &(u, _) in g.incident(v) {
                let j = slot[u as usize];
                if j != usize::MAX {
                    s -= x[j];
                }
            }
            out[i] = s;
        }
    };
    // right-hand side: neighbours held at potential 1
    let rhs: Vec<f64> = unknowns
        .iter()
        .map(|&v| g.incident(v).iter().filter(|(u, _)| role[*u as usize] == 1).count() as f64)
        .collect();
    let mut phi = vec![0.0; m];
    if m > 0 {
        let mut r = rhs.clone();
        let mut p = r.clone();
        let mut ap = vec![0.0; m];
        let norm_b = rhs.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let mut rr: f64 = r.iter().map(|x| x * x).sum();
        let mut iter = 0;
        while rr.sqrt() > CG_TOLERANCE * norm_b {
            if iter > 20 * m + 100 {
                return Err(CrossingError::NoConvergence(rr.sqrt() / norm_b));
            }
            apply(&p, &mut ap);
            let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..m {
                phi[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new: f64 = r.iter().map(|x| x * x).sum();
            let beta = rr_new / rr;
            for i in 0..m {
                p[i] = r[i] + beta * p[i];
            }
            rr = rr_new;
            iter += 1;
        }
    }
    let potential = |u: usize| match role[u] {
        1 => 1.0,
        2 => 0.0,
        _ if slot[u] != usize::MAX => phi[slot[u]],
        _ => 0.0,
    };
    let current: f64 = quad.arcs[0]
        .iter()
        .flat_map(|&v| g.incident(v).iter().map(move |&(u, _)| u as usize))
        .filter(|&u| role[u] != 1)
        .map(|u| 1.0 - potential(u))
        .sum();
    Ok(1.0 / current)
}

/// Whether a path of open edges joins `(a b)` to `(c d)`. Boundary wiring
/// shapes the measure but is not part of the path.
pub fn crossing_event(quad: &DiscreteQuad, open: &[bool]) -> bool {
    let g = &quad.graph;
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = VecDeque::new();
    for &v in &quad.arcs[0] {
        seen[v] = true;
        queue.push_back(v);
    }
    let mut target = vec![false; g.vertex_count()];
    for &v in &quad.arcs[2] {
        target[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        if target[v] {
            return true;
        }
        for &(u, e) in g.incident(v) {
            if open[e as usize] && !seen[u as usize] {
                seen[u as usize] = true;
                queue.push_back(u as usize);
            }
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Sweeps discarded before the first sample and between samples.
pub const CROSSING_BURN_IN: usize = 200;
pub const CROSSING_SPACING: usize = 5;

/// Monte Carlo estimate of the FK crossing probability between `(a b)` and
/// `(c d)` at `p_c` under the given tags, from one Swendsen–Wang chain, with
/// binomial standard error.
pub fn crossing_probability_experiment<R: Rng + ?Sized>(
    quad: &DiscreteQuad,
    boundary: BoundaryTags,
    n_samples: usize,
    rng: &mut R,
) -> Result<CrossingEstimate, CrossingError> {
    if n_samples < MIN_CROSSING_SAMPLES {
        return Err(CrossingError::TooFewSamples(n_samples));
    }
    let p = p_critical();
    let open = vec![false; quad.graph.edge_count()];
    let mut config = BondConfiguration::new(quad.graph.clone(), quad.wire_groups(boundary), false, open);
    for _ in 0..CROSSING_BURN_IN {
        config.sweep(p, FkAlgorithm::SwendsenWang, rng);
    }
    let mut hits = 0usize;
    for _ in 0..n_samples {
        for _ in 0..CROSSING_SPACING {
            config.sweep(p, FkAlgorithm::SwendsenWang, rng);
        }
        hits += usize::from(crossing_event(quad, config.open_edges()));
    }
    let est = hits as f64 / n_samples as f64;
    Ok(CrossingEstimate { estimate: est, stderr: (est * (1.0 - est) / n_samples as f64).sqrt(), n: n_samples })
}

/// Row of the crossing table.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingRow {
    pub quad_id: String,
    pub l_d: f64,
    pub bc: BoundaryTags,
    pub result: CrossingEstimate,
}

/// CSV, header `quad_id,l_d,bc,estimate,stderr,n`.
pub fn crossings_csv(rows: &[CrossingRow]) -> String {
    let mut out = String::from("quad_id,l_d,bc,estimate,stderr,n\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.quad_id, r.l_d, r.bc, r.result.estimate, r.result.stderr, r.result.n
        );
    }
    out
}
