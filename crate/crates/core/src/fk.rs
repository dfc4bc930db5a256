//! Critical FK-Ising (random-cluster, q = 2) model with Dobrushin boundary
//! conditions, the Edwards–Sokal coupling, and the FK interface.
//!
//! A configuration lives on a [`BondGraph`]. Boundary wiring is expressed by
//! wire groups: every group is contracted to a single node when clusters are
//! counted. A group may carry a spin sign, which the coupling uses to force the
//! colour of its cluster. With `forbid_mixed` set, configurations joining
//! groups of opposite sign have zero weight.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::curve::LatticeCurve;
use crate::domain::{DiscreteDomain, Site};
use crate::spin::SpinConfiguration;
use crate::unionfind::UnionFind;

/// `√2 / (1 + √2)`.
pub fn p_critical() -> f64 {
    std::f64::consts::SQRT_2 / (1.0 + std::f64::consts::SQRT_2)
}

/// Undirected multigraph-free edge list with incidence lists.
#[derive(Debug, Clone)]
pub struct BondGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    incident: Vec<Vec<(u32, u32)>>,
}

impl BondGraph {
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut incident = vec![Vec::new(); n];
        for (e, &(x, y)) in edges.iter().enumerate() {
            assert!((x as usize) < n && (y as usize) < n && x != y, "bad edge {e}");
            incident[x as usize].push((y, e as u32));
            incident[y as usize].push((x, e as u32));
        }
        BondGraph { n, edges, incident }
    }

    pub fn from_domain(domain: &DiscreteDomain) -> Self {
        BondGraph::new(domain.len(), domain.edges().to_vec())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        let (x, y) = self.edges[e];
        (x as usize, y as usize)
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// `(neighbour, edge)` pairs at `v`.
    pub fn incident(&self, v: usize) -> &[(u32, u32)] {
        &self.incident[v]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireGroup {
    pub vertices: Vec<usize>,
    pub sign: Option<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondInit {
    AllClosed,
    AllOpen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkAlgorithm {
    /// `|E|` single-edge heat-bath updates at uniformly chosen edges.
    HeatBathSweep,
    /// One Swendsen–Wang sweep through the Edwards–Sokal coupling.
    SwendsenWang,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CouplingError {
    #[error("cluster containing vertex {0} carries both forced signs")]
    InconsistentCluster(usize),
    #[error("configuration has no domain attached")]
    NoDomain,
}

#[derive(Debug, Clone)]
pub struct BondConfiguration {
    graph: Arc<BondGraph>,
    domain: Option<Arc<DiscreteDomain>>,
    open: Vec<bool>,
    groups: Vec<WireGroup>,
    group_of: Vec<Option<u32>>,
    forbid_mixed: bool,
    uf: UnionFind,
    uf_dirty: bool,
}

impl BondConfiguration {
    pub fn new(graph: Arc<BondGraph>, groups: Vec<WireGroup>, forbid_mixed: bool, open: Vec<bool>) -> Self {
        assert_eq!(open.len(), graph.edge_count());
        let mut group_of = vec![None; graph.vertex_count()];
        for (g, grp) in groups.iter().enumerate() {
            for &v in &grp.vertices {
                assert!(group_of[v].is_none(), "vertex {v} in two wire groups");
                group_of[v] = Some(g as u32);
            }
        }
        let uf = UnionFind::new(graph.vertex_count());
        let mut c = BondConfiguration {
            graph,
            domain: None,
            open,
            groups,
            group_of,
            forbid_mixed,
            uf,
            uf_dirty: true,
        };
        c.rebuild();
        c
    }

    /// FK Dobrushin data: free on `[a b]`, the open arc `(b a)` wired.
    pub fn init_dobrushin_fk(domain: Arc<DiscreteDomain>, init: BondInit) -> Self {
        let graph = Arc::new(BondGraph::from_domain(&domain));
        let wired = domain.arc_ba_interior_mask();
        let group = WireGroup { vertices: (0..domain.len()).filter(|v| wired[*v]).collect(), sign: Some(1) };
        let open = vec![init == BondInit::AllOpen; graph.edge_count()];
        let mut c = BondConfiguration::new(graph, vec![group], false, open);
        c.domain = Some(domain);
        c
    }

    /// Bond side of the spin Dobrushin measure: `[a b]` wired with sign −1,
    /// `(b a)` wired with sign +1, the two never connected.
    pub fn spin_dobrushin_closed(domain: Arc<DiscreteDomain>) -> Self {
        let graph = Arc::new(BondGraph::from_domain(&domain));
        let minus = domain.arc_ab_mask();
        let plus = domain.arc_ba_interior_mask();
        let groups = vec![
            WireGroup { vertices: (0..domain.len()).filter(|v| minus[*v]).collect(), sign: Some(-1) },
            WireGroup { vertices: (0..domain.len()).filter(|v| plus[*v]).collect(), sign: Some(1) },
        ];
        let open = vec![false; graph.edge_count()];
        let mut c = BondConfiguration::new(graph, groups, true, open);
        c.domain = Some(domain);
        c
    }

    pub fn with_domain(mut self, domain: Arc<DiscreteDomain>) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn graph(&self) -> &Arc<BondGraph> {
        &self.graph
    }

    pub fn domain(&self) -> Option<&Arc<DiscreteDomain>> {
        self.domain.as_ref()
    }

    pub fn groups(&self) -> &[WireGroup] {
        &self.groups
    }

    pub fn open_edges(&self) -> &[bool] {
        &self.open
    }

    pub fn is_open(&self, e: usize) -> bool {
        self.open[e]
    }

    /// Dual edge states: a dual edge is open iff the primal edge it crosses is
    /// closed.
    pub fn dual_open(&self) -> Vec<bool> {
        self.open.iter().map(|o| !o).collect()
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|o| **o).count()
    }

    /// Overwrites edge `e`, keeping the cluster index consistent.
    pub fn set_edge(&mut self, e: usize, open: bool) {
        if self.open[e] == open {
            return;
        }
        self.open[e] = open;
        if open {
            if !self.uf_dirty {
                let (x, y) = self.graph.edge(e);
                self.uf.union(x, y);
            }
        } else {
            self.uf_dirty = true;
        }
    }

    fn rebuild(&mut self) {
        self.uf.reset();
        for grp in &self.groups {
            for w in grp.vertices.windows(2) {
                self.uf.union(w[0], w[1]);
            }
        }
        for (e, &(x, y)) in self.graph.edges.iter().enumerate() {
            if self.open[e] {
                self.uf.union(x as usize, y as usize);
            }
        }
        self.uf_dirty = false;
    }

    fn clean_uf(&mut self) -> &mut UnionFind {
        if self.uf_dirty {
            self.rebuild();
        }
        &mut self.uf
    }

    /// Number of clusters, each wire group counted as a single vertex.
    pub fn cluster_count(&mut self) -> usize {
        self.clean_uf().components()
    }

    /// Cluster count recomputed from scratch by breadth-first search.
    pub fn cluster_count_bfs(&self) -> usize {
        let n = self.graph.vertex_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if !seen[s] {
                count += 1;
                self.flood(s, None, &mut seen, |_| false);
            }
        }
        count
    }

    /// Whether `x` and `y` lie in the same cluster.
    pub fn connected(&mut self, x: usize, y: usize) -> bool {
        self.clean_uf().same(x, y)
    }

    /// Breadth-first flood from `s` over open edges (skipping `skip`) with wire
    /// groups contracted. Stops early when `stop` returns true.
    fn flood(&self, s: usize, skip: Option<usize>, seen: &mut [bool], mut stop: impl FnMut(usize) -> bool) -> bool {
        let mut queue = VecDeque::new();
        let visit = |v: usize, seen: &mut [bool], queue: &mut VecDeque<usize>| {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        };
        visit(s, seen, &mut queue);
        while let Some(v) = queue.pop_front() {
            if stop(v) {
                return true;
            }
            if let Some(g) = self.group_of[v] {
                for &w in &self.groups[g as usize].vertices {
                    visit(w, seen, &mut queue);
                }
            }
            for &(u, e) in self.graph.incident(v) {
                if self.open[e as usize] && Some(e as usize) != skip {
                    visit(u as usize, seen, &mut queue);
                }
            }
        }
        false
    }

    /// Signs of the wire groups reachable from `s` with edge `skip` removed.
    fn signs_off(&self, s: usize, skip: usize, seen: &mut [bool]) -> (bool, bool) {
        let mut plus = false;
        let mut minus = false;
        self.flood(s, Some(skip), seen, |v| {
            if let Some(g) = self.group_of[v] {
                match self.groups[g as usize].sign {
                    Some(1) => plus = true,
                    Some(-1) => minus = true,
                    _ => {}
                }
            }
            false
        });
        (plus, minus)
    }

    /// Conditional probability that edge `e` is open given all other edges.
    pub fn open_probability(&mut self, e: usize, p: f64) -> f64 {
        let (x, y) = self.graph.edge(e);
        let n = self.graph.vertex_count();
        let connected_off;
        let (mut plus, mut minus) = (false, false);
        if !self.open[e] && !self.forbid_mixed {
            connected_off = self.connected(x, y);
        } else {
            let mut seen = vec![false; n];
            (plus, minus) = self.signs_off(x, e, &mut seen);
            connected_off = seen[y];
            if !connected_off && self.forbid_mixed {
                let (py, my) = self.signs_off(y, e, &mut seen);
                plus |= py;
                minus |= my;
            }
        }
        if connected_off {
            return p;
        }
        if plus && minus {
            return 0.0;
        }
        p / (p + 2.0 * (1.0 - p))
    }

    /// Resamples edge `e` from its exact conditional law.
    pub fn heatbath_update<R: Rng + ?Sized>(&mut self, e: usize, p: f64, rng: &mut R) {
        let q = self.open_probability(e, p);
        let open = rng.random::<f64>() < q;
        self.set_edge(e, open);
    }

    /// One heat-bath update at a uniformly chosen edge.
    pub fn heatbath_step<R: Rng + ?Sized>(&mut self, p: f64, rng: &mut R) {
        let m = self.graph.edge_count();
        if m > 0 {
            let e = rng.random_range(0..m);
            self.heatbath_update(e, p, rng);
        }
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, p: f64, algorithm: FkAlgorithm, rng: &mut R) {
        match algorithm {
            FkAlgorithm::HeatBathSweep => {
                for _ in 0..self.graph.edge_count() {
                    self.heatbath_step(p, rng);
                }
            }
            FkAlgorithm::SwendsenWang => {
                let spins = self.color_clusters(rng).expect("sampler state violates its wiring constraints");
                self.open = bonds_for_spins(&self.graph, &spins, p, rng);
                self.uf_dirty = true;
            }
        }
    }

    /// Edwards–Sokal colouring: forced clusters take their group sign, all
    /// other clusters an independent fair sign, drawn in vertex order.
    pub fn color_clusters<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<i8>, CouplingError> {
        let n = self.graph.vertex_count();
        self.clean_uf();
        let mut color = vec![0i8; n];
        for grp in &self.groups {
            if let Some(s) = grp.sign {
                for &v in &grp.vertices {
                    let r = self.uf.find(v);
                    if color[r] == -s {
                        return Err(CouplingError::InconsistentCluster(v));
                    }
                    color[r] = s;
                }
            }
        }
        let mut spins = vec![0i8; n];
        for (v, s) in spins.iter_mut().enumerate() {
            let r = self.uf.find(v);
            if color[r] == 0 {
                color[r] = if rng.random::<bool>() { 1 } else { -1 };
            }
            *s = color[r];
        }
        Ok(spins)
    }

    /// FK interface from `a` to `b`: primal cluster of the wired arc on the
    /// left, dual cluster of the free arc on the right.
    pub fn extract_interface(&self) -> LatticeCurve {
        self.trace(false)
    }

    /// The same interface traced from `b` to `a` with the dual cluster on the
    /// left; equal to the reversal of [`Self::extract_interface`].
    pub fn extract_dual_interface(&self) -> LatticeCurve {
        self.trace(true)
    }

    fn trace(&self, reverse: bool) -> LatticeCurve {
        let d = self.domain.as_ref().expect("interface extraction needs a domain");
        let wired: Vec<bool> = {
            let g = self.group_of[d.before_a()].expect("before_a lies on the wired arc");
            let mut m = vec![false; d.len()];
            for &v in &self.groups[g as usize].vertices {
                m[v] = true;
            }
            m
        };
        let is_wired = |s: Site| d.index_of(s).is_some_and(|v| wired[v]);
        // Where the left vertex moves when crossing toward `p2`, if the edge is
        // open. Wired vertices meeting diagonally at a hull corner are joined
        // through the exterior, across the face `q`.
        let advance = |p: Site, p2: Site, q: (f64, f64)| -> Option<Site> {
            let x = d.index_of(p)?;
            let Some(y) = d.index_of(p2) else {
                let diag = Site::new((2.0 * q.0) as i32 - p.x, (2.0 * q.1) as i32 - p.y);
                return (wired[x] && is_wired(diag)).then_some(diag);
            };
            let open = (wired[x] && wired[y])
                || self.graph.incident(x).iter().any(|&(u, e)| u as usize == y && self.open[e as usize]);
            open.then_some(p2)
        };
        let (from, to) = ((d.site(d.before_a()), d.start_corner()), (d.site(d.after_b()), d.end_corner()));
        let ((mut p, mut q), goal) = if reverse { (to, from) } else { (from, to) };
        let mut points = vec![q];
        let limit = 8 * d.len() + 16;
        for _ in 0..limit {
            points.push(((p.x as f64 + q.0) / 2.0, (p.y as f64 + q.1) / 2.0));
            if (p, q) == goal {
                points.push(q);
                let mut curve = LatticeCurve::new(points, d.mesh());
                if reverse {
                    curve = curve.reversed();
                }
                return curve;
            }
            let sx = if q.0 > p.x as f64 { 1 } else { -1 };
            let sy = if q.1 > p.y as f64 { 1 } else { -1 };
            let vertical = (sx * sy > 0) != reverse;
            let (p2, q2) = if vertical {
                (Site::new(p.x, p.y + sy), (p.x as f64 - sx as f64 / 2.0, q.1))
            } else {
                (Site::new(p.x + sx, p.y), (q.0, p.y as f64 - sy as f64 / 2.0))
            };
            match advance(p, p2, q) {
                Some(next) => p = next,
                None => q = q2,
            }
        }
        panic!("FK interface did not close; boundary data is not Dobrushin");
    }
}

/// Spin → bond half of the coupling: each agreeing edge opens with
/// probability `p`, disagreeing edges stay closed.
pub fn bonds_for_spins<R: Rng + ?Sized>(graph: &BondGraph, spins: &[i8], p: f64, rng: &mut R) -> Vec<bool> {
    graph
        .edges()
        .iter()
        .map(|&(x, y)| spins[x as usize] == spins[y as usize] && rng.random::<f64>() < p)
        .collect()
}

/// Spin → FK direction of the Edwards–Sokal coupling for a Dobrushin spin
/// configuration.
pub fn spins_to_bonds<R: Rng + ?Sized>(config: &SpinConfiguration, p: f64, rng: &mut R) -> BondConfiguration {
    let mut bonds = BondConfiguration::spin_dobrushin_closed(config.domain().clone());
    bonds.open = bonds_for_spins(&bonds.graph, config.spins(), p, rng);
    bonds.uf_dirty = true;
    bonds
}

/// FK → spin direction of the coupling. Fails if a cluster joins the two
/// oppositely forced arcs.
pub fn bonds_to_spins<R: Rng + ?Sized>(
    bonds: &BondConfiguration,
    rng: &mut R,
) -> Result<SpinConfiguration, CouplingError> {
    let domain = bonds.domain.clone().ok_or(CouplingError::NoDomain)?;
    let mut b = bonds.clone();
    let spins = b.color_clusters(rng)?;
    Ok(SpinConfiguration::from_spins(domain, spins).expect("forced groups carry Dobrushin signs"))
}
