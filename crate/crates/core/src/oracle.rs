//! Exact enumeration of spin and FK measures on tiny instances.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::domain::DiscreteDomain;
use crate::fk::{BondGraph, WireGroup};
use crate::unionfind::UnionFind;

pub const MAX_FREE_SPINS: usize = 20;
pub const MAX_EDGES: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{got} free spins exceed the enumeration cap of {cap}")]
    TooManySpins { got: usize, cap: usize },
    #[error("{got} edges exceed the enumeration cap of {cap}")]
    TooManyEdges { got: usize, cap: usize },
    #[error("instance has more than 64 vertices")]
    TooManyVertices,
    #[error("every configuration has zero weight")]
    EmptySupport,
}

/// Probability table over configurations encoded as bit patterns.
///
/// Spin outcomes use bit `v` for vertex `v` being +1; FK outcomes use bit `e`
/// for edge `e` being open.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMeasure {
    outcomes: BTreeMap<u64, f64>,
}

impl ExactMeasure {
    fn from_weights(weights: impl IntoIterator<Item = (u64, f64)>) -> Result<Self, OracleError> {
        let mut outcomes = BTreeMap::new();
        let mut total = 0.0;
        for (k, w) in weights {
            if w > 0.0 {
                *outcomes.entry(k).or_insert(0.0) += w;
                total += w;
            }
        }
        if total <= 0.0 {
            return Err(OracleError::EmptySupport);
        }
        for w in outcomes.values_mut() {
            *w /= total;
        }
        Ok(ExactMeasure { outcomes })
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.outcomes.iter().map(|(k, p)| (*k, *p))
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn probability(&self, key: u64) -> f64 {
        self.outcomes.get(&key).copied().unwrap_or(0.0)
    }

    pub fn event_probability(&self, event: impl Fn(u64) -> bool) -> f64 {
        self.outcomes.iter().filter(|(k, _)| event(**k)).map(|(_, p)| p).sum()
    }

    pub fn expectation(&self, f: impl Fn(u64) -> f64) -> f64 {
        self.outcomes.iter().map(|(k, p)| p * f(*k)).sum()
    }

    /// Probability that bit `i` is set.
    pub fn marginal(&self, i: usize) -> f64 {
        self.event_probability(|k| k >> i & 1 == 1)
    }

    pub fn total_variation(&self, other: &ExactMeasure) -> f64 {
        let mut keys: Vec<u64> = self.outcomes.keys().chain(other.outcomes.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys.iter().map(|k| (self.probability(*k) - other.probability(*k)).abs()).sum::<f64>()
    }

    /// Total variation against empirical counts.
    pub fn total_variation_counts(&self, counts: &BTreeMap<u64, u64>) -> f64 {
        let n: u64 = counts.values().sum();
        let empirical = ExactMeasure {
            outcomes: counts.iter().map(|(k, c)| (*k, *c as f64 / n as f64)).collect(),
        };
        self.total_variation(&empirical)
    }
}

/// Gibbs measure `∝ exp(β Σ σx σy)` on `graph` with `fixed` spins held.
pub fn enumerate_spin_graph(graph: &BondGraph, fixed: &[Option<i8>], beta: f64) -> Result<ExactMeasure, OracleError> {
    let n = graph.vertex_count();
    if n > 64 {
        return Err(OracleError::TooManyVertices);
    }
    let free: Vec<usize> = (0..n).filter(|v| fixed[*v].is_none()).collect();
    if free.len() > MAX_FREE_SPINS {
        return Err(OracleError::TooManySpins { got: free.len(), cap: MAX_FREE_SPINS });
    }
    let base: u64 = (0..n).filter(|v| fixed[*v] == Some(1)).fold(0, |k, v| k | 1 << v);
    let mut weights = Vec::with_capacity(1 << free.len());
    let mut energies = Vec::with_capacity(1 << free.len());
    for bits in 0u64..1 << free.len() {
        let mut key = base;
        for (i, v) in free.iter().enumerate() {
            if bits >> i & 1 == 1 {
                key |= 1 << v;
            }
        }
        let s = |v: u32| if key >> v & 1 == 1 { 1i32 } else { -1 };
        let energy: i32 = graph.edges().iter().map(|&(x, y)| s(x) * s(y)).sum();
        energies.push((key, energy));
    }
    // shift by the maximum exponent for stability
    let emax = energies.iter().map(|e| e.1).max().unwrap_or(0);
    for (key, e) in energies {
        weights.push((key, (beta * (e - emax) as f64).exp()));
    }
    ExactMeasure::from_weights(weights)
}

/// Spin Dobrushin measure on a domain: `[a b]` at −1, `(b a)` at +1.
pub fn enumerate_spin(domain: &DiscreteDomain, beta: f64) -> Result<ExactMeasure, OracleError> {
    let graph = BondGraph::from_domain(domain);
    enumerate_spin_graph(&graph, &dobrushin_fixed(domain), beta)
}

pub fn dobrushin_fixed(domain: &DiscreteDomain) -> Vec<Option<i8>> {
    let minus = domain.arc_ab_mask();
    let plus = domain.arc_ba_interior_mask();
    (0..domain.len())
        .map(|v| {
            if minus[v] {
                Some(-1)
            } else if plus[v] {
                Some(1)
            } else {
                None
            }
        })
        .collect()
}

/// Number of clusters of the open edges in `mask`, each wire group contracted,
/// or `None` if a cluster joins groups of opposite sign while `forbid_mixed`.
pub fn clusters(graph: &BondGraph, groups: &[WireGroup], forbid_mixed: bool, mask: u64) -> Option<usize> {
    let mut uf = UnionFind::new(graph.vertex_count());
    for g in groups {
        for w in g.vertices.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    for (e, &(x, y)) in graph.edges().iter().enumerate() {
        if mask >> e & 1 == 1 {
            uf.union(x as usize, y as usize);
        }
    }
    if forbid_mixed {
        let mut sign = vec![0i8; graph.vertex_count()];
        for g in groups {
            if let (Some(s), Some(&v)) = (g.sign, g.vertices.first()) {
                let r = uf.find(v);
                if sign[r] == -s {
                    return None;
                }
                sign[r] = s;
            }
        }
    }
    Some(uf.components())
}

/// Random-cluster measure `∝ [p/(1−p)]^{o(ω)} 2^{c(ω)}` with wiring.
pub fn enumerate_fk(
    graph: &BondGraph,
    p: f64,
    groups: &[WireGroup],
    forbid_mixed: bool,
) -> Result<ExactMeasure, OracleError> {
    let m = graph.edge_count();
    if m > MAX_EDGES {
        return Err(OracleError::TooManyEdges { got: m, cap: MAX_EDGES });
    }
    let ratio = p / (1.0 - p);
    let mut weights = Vec::with_capacity(1 << m);
    for mask in 0u64..1 << m {
        if let Some(c) = clusters(graph, groups, forbid_mixed, mask) {
            let o = mask.count_ones() as i32;
            weights.push((mask, ratio.powi(o) * 2f64.powi(c as i32)));
        }
    }
    ExactMeasure::from_weights(weights)
}

/// Pushes an FK measure through the Edwards–Sokal colouring: forced groups
/// keep their sign, every other cluster is ±1 with probability ½ each.
pub fn es_pushforward(graph: &BondGraph, groups: &[WireGroup], fk: &ExactMeasure) -> ExactMeasure {
    let n = graph.vertex_count();
    let mut out: BTreeMap<u64, f64> = BTreeMap::new();
    for (mask, prob) in fk.outcomes() {
        let mut uf = UnionFind::new(n);
        for g in groups {
            for w in g.vertices.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        for (e, &(x, y)) in graph.edges().iter().enumerate() {
            if mask >> e & 1 == 1 {
                uf.union(x as usize, y as usize);
            }
        }
        let mut forced = vec![0i8; n];
        for g in groups {
            if let (Some(s), Some(&v)) = (g.sign, g.vertices.first()) {
                forced[uf.find(v)] = s;
            }
        }
        let roots: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();
        let free_roots: Vec<usize> = {
            let mut r: Vec<usize> = roots.iter().copied().filter(|r| forced[*r] == 0).collect();
            r.sort_unstable();
            r.dedup();
            r
        };
        let share = prob / (1u64 << free_roots.len()) as f64;
        for bits in 0u64..1 << free_roots.len() {
            let mut color = forced.clone();
            for (i, r) in free_roots.iter().enumerate() {
                color[*r] = if bits >> i & 1 == 1 { 1 } else { -1 };
            }
            let key = roots.iter().enumerate().fold(0u64, |k, (v, r)| if color[*r] > 0 { k | 1 << v } else { k });
            *out.entry(key).or_insert(0.0) += share;
        }
    }
    ExactMeasure { outcomes: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Shape;
    use crate::fk::p_critical;
    use crate::spin::beta_critical;
    use std::f64::consts::SQRT_2;

    fn grid(w: usize, h: usize) -> BondGraph {
        let id = |x: usize, y: usize| (y * w + x) as u32;
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    edges.push((id(x, y), id(x + 1, y)));
                }
                if y + 1 < h {
                    edges.push((id(x, y), id(x, y + 1)));
                }
            }
        }
        BondGraph::new(w * h, edges)
    }

    #[test]
    fn two_spins_one_edge() {
        let g = BondGraph::new(2, vec![(0, 1)]);
        let m = enumerate_spin_graph(&g, &[None, None], beta_critical()).unwrap();
        let agree = m.event_probability(|k| k == 0 || k == 3);
        // weights e^β vs e^-β: 1/(1+e^{-2β}) with e^{-2β_c} = √2 − 1
        assert!((agree - 1.0 / SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let g = grid(2, 3);
        let m = enumerate_spin_graph(&g, &[None; 6], 0.0).unwrap();
        assert_eq!(m.len(), 64);
        assert!(m.outcomes().all(|(_, p)| (p - 1.0 / 64.0).abs() < 1e-15));
    }

    #[test]
    fn global_flip_symmetry() {
        let g = grid(3, 2);
        let m = enumerate_spin_graph(&g, &[None; 6], 0.7).unwrap();
        for (k, p) in m.outcomes() {
            assert!((p - m.probability(!k & 0b11_1111)).abs() < 1e-15);
        }
        for v in 0..6 {
            assert!((m.marginal(v) - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn fk_single_edge() {
        let g = BondGraph::new(2, vec![(0, 1)]);
        let m = enumerate_fk(&g, p_critical(), &[], false).unwrap();
        assert!((m.marginal(0) - (SQRT_2 - 1.0)).abs() < 1e-14);
        let near_one = enumerate_fk(&g, 1.0 - 1e-9, &[], false).unwrap();
        assert!(near_one.marginal(0) > 1.0 - 1e-8);
    }

    #[test]
    fn fk_path_is_not_product() {
        // weights: none 8, one 4 (twice), both 2 at p = 1/2
        let g = BondGraph::new(3, vec![(0, 1), (1, 2)]);
        let m = enumerate_fk(&g, 0.5, &[], false).unwrap();
        assert!((m.marginal(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.probability(0b11) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn caps_are_errors() {
        let g = grid(4, 4);
        assert_eq!(
            enumerate_fk(&g, 0.5, &[], false).unwrap_err(),
            OracleError::TooManyEdges { got: 24, cap: 16 }
        );
        let big = grid(5, 5);
        assert!(matches!(enumerate_spin_graph(&big, &[None; 25], 0.1), Err(OracleError::TooManySpins { .. })));
    }

    #[test]
    fn edwards_sokal_is_measure_preserving() {
        let d = DiscreteDomain::build(Shape::Rectangle { width: 3.0, height: 2.0 }, 1.0, (0.0, 1.0), (3.0, 1.0)).unwrap();
        let fixed = dobrushin_fixed(&d);
        // edges inside one boundary arc are independent of everything else
        let edges: Vec<(u32, u32)> = d
            .edges()
            .iter()
            .copied()
            .filter(|&(x, y)| fixed[x as usize].is_none() || fixed[x as usize] != fixed[y as usize])
            .collect();
        let graph = BondGraph::new(d.len(), edges);
        let groups: Vec<WireGroup> = [-1i8, 1]
            .into_iter()
            .map(|s| WireGroup {
                vertices: (0..d.len()).filter(|v| fixed[*v] == Some(s)).collect(),
                sign: Some(s),
            })
            .collect();
        for beta in [0.2, beta_critical(), 0.9] {
            let p = 1.0 - (-2.0 * beta).exp();
            let fk = enumerate_fk(&graph, p, &groups, true).unwrap();
            let pushed = es_pushforward(&graph, &groups, &fk);
            let spin = enumerate_spin(&d, beta).unwrap();
            assert!(spin.total_variation(&enumerate_spin_graph(&graph, &fixed, beta).unwrap()) < 1e-12);
            assert!(pushed.total_variation(&spin) < 1e-10);
        }
        // free boundary, 2x3 grid
        let g = grid(2, 3);
        let fk = enumerate_fk(&g, p_critical(), &[], false).unwrap();
        let spin = enumerate_spin_graph(&g, &[None; 6], beta_critical()).unwrap();
        assert!(es_pushforward(&g, &[], &fk).total_variation(&spin) < 1e-10);
    }

    #[test]
    fn self_dual_quad_duality() {
        // 3 columns x 2 rows: left-right primal crossing vs top-bottom dual crossing
        let (w, h) = (3usize, 2usize);
        let g = grid(w, h);
        let fk = enumerate_fk(&g, p_critical(), &[], false).unwrap();
        let primal = |mask: u64| {
            let mut uf = UnionFind::new(w * h);
            for (e, &(x, y)) in g.edges().iter().enumerate() {
                if mask >> e & 1 == 1 {
                    uf.union(x as usize, y as usize);
                }
            }
            (0..h).any(|a| (0..h).any(|b| uf.same(a * w, b * w + w - 1)))
        };
        // dual vertices: faces (w-1)x(h-1), plus top (id F) and bottom (id F+1)
        let faces = (w - 1) * (h - 1);
        let dual = |mask: u64| {
            let mut uf = UnionFind::new(faces + 2);
            let face = |x: usize, y: usize| -> usize {
                if y == usize::MAX {
                    faces + 1
                } else if y >= h - 1 {
                    faces
                } else {
                    y * (w - 1) + x
                }
            };
            for (e, &(a, b)) in g.edges().iter().enumerate() {
                if mask >> e & 1 == 1 {
                    continue;
                }
                let (ax, ay) = (a as usize % w, a as usize / w);
                let (bx, by) = (b as usize % w, b as usize / w);
                if ay == by {
                    // horizontal primal edge separates the faces above and below
                    let x = ax.min(bx);
                    let below = if ay == 0 { face(x, usize::MAX) } else { face(x, ay - 1) };
                    uf.union(below, face(x, ay));
                } else if ax > 0 && ax < w - 1 {
                    let y = ay.min(by);
                    uf.union(face(ax - 1, y), face(ax, y));
                }
            }
            uf.same(faces, faces + 1)
        };
        let pp = fk.event_probability(primal);
        let pd = fk.event_probability(dual);
        assert!((pp + pd - 1.0).abs() < 1e-12);
        for mask in 0u64..1 << g.edge_count() {
            assert!(primal(mask) != dual(mask));
        }
    }
}
