//! Critical spin Ising model with Dobrushin boundary conditions and its
//! interface.
//!
//! The closed arc `[a b]` is frozen at −1 and the open arc `(b a)` at +1. The
//! Gibbs weight is `exp(β Σ σx σy)` over nearest-neighbor pairs, coupling 1,
//! no field.

use std::sync::Arc;

use rand::Rng;

use crate::curve::LatticeCurve;
use crate::domain::{DiscreteDomain, Site};
use crate::fk;

/// `½ log(1 + √2)`.
pub fn beta_critical() -> f64 {
    0.5 * (1.0 + std::f64::consts::SQRT_2).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteriorInit {
    UniformRandom,
    AllPlus,
    AllMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinAlgorithm {
    /// One sequential heat-free Metropolis pass over all free sites.
    MetropolisSweep,
    /// One Wolff cluster proposal; clusters reaching a frozen site are rejected.
    WolffCluster,
    /// One Swendsen–Wang sweep through the Edwards–Sokal coupling.
    SwendsenWang,
}

/// Resolution of faces with four alternating spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TurnRule {
    #[default]
    Rightmost,
    Leftmost,
}

#[derive(Debug, Clone)]
pub struct SpinConfiguration {
    domain: Arc<DiscreteDomain>,
    spins: Vec<i8>,
    frozen: Vec<bool>,
}

impl SpinConfiguration {
    /// Dobrushin boundary data plus the requested interior.
    pub fn init_dobrushin<R: Rng + ?Sized>(
        domain: Arc<DiscreteDomain>,
        interior: InteriorInit,
        rng: &mut R,
    ) -> Self {
        let n = domain.len();
        let minus = domain.arc_ab_mask();
        let plus = domain.arc_ba_interior_mask();
        let mut spins = vec![0i8; n];
        let mut frozen = vec![false; n];
        for v in 0..n {
            spins[v] = if minus[v] {
                frozen[v] = true;
                -1
            } else if plus[v] {
                frozen[v] = true;
                1
            } else {
                match interior {
                    InteriorInit::AllPlus => 1,
                    InteriorInit::AllMinus => -1,
                    InteriorInit::UniformRandom => {
                        if rng.random::<bool>() {
                            1
                        } else {
                            -1
                        }
                    }
                }
            };
        }
        SpinConfiguration { domain, spins, frozen }
    }

    /// Wraps explicit spins; frozen sites must carry their Dobrushin values.
    pub fn from_spins(domain: Arc<DiscreteDomain>, spins: Vec<i8>) -> Option<Self> {
        let minus = domain.arc_ab_mask();
        let plus = domain.arc_ba_interior_mask();
        if spins.len() != domain.len() || spins.iter().any(|s| *s != 1 && *s != -1) {
            return None;
        }
        let mut frozen = vec![false; spins.len()];
        for v in 0..spins.len() {
            if minus[v] {
                if spins[v] != -1 {
                    return None;
                }
                frozen[v] = true;
            } else if plus[v] {
                if spins[v] != 1 {
                    return None;
                }
                frozen[v] = true;
            }
        }
        Some(SpinConfiguration { domain, spins, frozen })
    }

    pub fn domain(&self) -> &Arc<DiscreteDomain> {
        &self.domain
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, v: usize) -> i8 {
        self.spins[v]
    }

    pub fn is_frozen(&self, v: usize) -> bool {
        self.frozen[v]
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    /// Spins as a bit pattern: bit `v` set iff site `v` is +1 (domains of at
    /// most 64 sites).
    pub fn pattern(&self) -> u64 {
        assert!(self.spins.len() <= 64);
        self.spins.iter().enumerate().fold(0, |k, (v, s)| if *s > 0 { k | 1 << v } else { k })
    }

    fn local_field(&self, v: usize) -> i32 {
        self.domain.neighbors(v).map(|u| self.spins[u] as i32).sum()
    }

    /// Probability that Metropolis accepts flipping site `v`.
    pub fn metropolis_acceptance(&self, v: usize, beta: f64) -> f64 {
        let delta = 2 * self.spins[v] as i32 * self.local_field(v);
        (-beta * delta as f64).exp().min(1.0)
    }

    /// Advances the chain by one step of `algorithm` at inverse temperature `beta`.
    pub fn mcmc_step<R: Rng + ?Sized>(&mut self, beta: f64, algorithm: SpinAlgorithm, rng: &mut R) {
        match algorithm {
            SpinAlgorithm::MetropolisSweep => self.metropolis_sweep(beta, rng),
            SpinAlgorithm::WolffCluster => {
                self.wolff_step(beta, rng);
            }
            SpinAlgorithm::SwendsenWang => self.swendsen_wang_step(beta, rng),
        }
    }

    fn metropolis_sweep<R: Rng + ?Sized>(&mut self, beta: f64, rng: &mut R) {
        // acceptance indexed by σ·h ∈ {-4..=4}
        let table: [f64; 9] =
            std::array::from_fn(|k| (-2.0 * beta * (k as f64 - 4.0)).exp().min(1.0));
        for v in 0..self.spins.len() {
            if self.frozen[v] {
                continue;
            }
            let sh = self.spins[v] as i32 * self.local_field(v);
            let acc = table[(sh + 4) as usize];
            if acc >= 1.0 || rng.random::<f64>() < acc {
                self.spins[v] = -self.spins[v];
            }
        }
    }

    /// One Wolff proposal. Returns whether a cluster was flipped.
    pub fn wolff_step<R: Rng + ?Sized>(&mut self, beta: f64, rng: &mut R) -> bool {
        let free: Vec<usize> = (0..self.spins.len()).filter(|v| !self.frozen[*v]).collect();
        if free.is_empty() {
            return false;
        }
        let seed = free[rng.random_range(0..free.len())];
        let p_add = 1.0 - (-2.0 * beta).exp();
        let s = self.spins[seed];
        let mut in_cluster = vec![false; self.spins.len()];
        in_cluster[seed] = true;
        let mut stack = vec![seed];
        let mut cluster = vec![seed];
        while let Some(v) = stack.pop() {
            for u in self.domain.neighbors(v) {
                if in_cluster[u] || self.spins[u] != s {
                    continue;
                }
                if rng.random::<f64>() < p_add {
                    if self.frozen[u] {
                        return false;
                    }
                    in_cluster[u] = true;
                    stack.push(u);
                    cluster.push(u);
                }
            }
        }
        for v in cluster {
            self.spins[v] = -s;
        }
        true
    }

    fn swendsen_wang_step<R: Rng + ?Sized>(&mut self, beta: f64, rng: &mut R) {
        let p = 1.0 - (-2.0 * beta).exp();
        let bonds = fk::spins_to_bonds(self, p, rng);
        let next = fk::bonds_to_spins(&bonds, rng)
            .expect("Edwards-Sokal bonds never join opposite frozen arcs");
        self.spins = next.spins;
    }

    /// Spin interface from `a` to `b` with +1 on its left and −1 on its right,
    /// drawn through midpoints of disagreeing edges.
    pub fn extract_interface(&self, rule: TurnRule) -> LatticeCurve {
        let d = &*self.domain;
        let spin_at = |s: Site| d.index_of(s).map(|v| self.spins[v]);
        let a = d.site(d.a_mark());
        let before_a = d.site(d.before_a());
        let b = d.site(d.b_mark());
        let after_b = d.site(d.after_b());

        let mut points = vec![d.start_corner()];
        let (mut u, mut v) = if before_a.is_adjacent(a) {
            (before_a, a)
        } else {
            let c = concave_corner(d, before_a, a);
            if spin_at(c) == Some(1) {
                (c, a)
            } else {
                (before_a, c)
            }
        };
        // terminal crossing, or terminal face centre for a diagonal transition
        let end_crossing = after_b.is_adjacent(b).then_some((after_b, b));
        let end_face = d.end_corner();

        let limit = 4 * d.len() + 16;
        for _ in 0..limit {
            let mid = ((u.x + v.x) as f64 / 2.0, (u.y + v.y) as f64 / 2.0);
            points.push(mid);
            if end_crossing == Some((u, v)) {
                points.push(d.end_corner());
                return LatticeCurve::new(points, d.mesh());
            }
            // heading keeps u on the left: rotate (u - v) clockwise
            let (dx, dy) = (u.y - v.y, -(u.x - v.x));
            let face = (mid.0 + dx as f64 / 2.0, mid.1 + dy as f64 / 2.0);
            if end_crossing.is_none() && face == end_face {
                points.push(end_face);
                return LatticeCurve::new(points, d.mesh());
            }
            let uf = Site::new(u.x + dx, u.y + dy);
            let vf = Site::new(v.x + dx, v.y + dy);
            // sites outside the domain continue the spin of the side they border
            let su = spin_at(uf).unwrap_or(1);
            let sv = spin_at(vf).unwrap_or(-1);
            (u, v) = match (su, sv) {
                (1, -1) => (uf, vf),
                (1, _) => (vf, v),
                (_, -1) => (u, uf),
                _ => match rule {
                    TurnRule::Rightmost => (vf, v),
                    TurnRule::Leftmost => (u, uf),
                },
            };
        }
        panic!("spin interface did not reach b; boundary data is not Dobrushin");
    }
}

/// For diagonal boundary neighbours, the common lattice neighbour that lies in
/// the domain.
pub(crate) fn concave_corner(d: &DiscreteDomain, s1: Site, s2: Site) -> Site {
    let c1 = Site::new(s1.x, s2.y);
    let c2 = Site::new(s2.x, s1.y);
    if d.contains(c1) {
        c1
    } else {
        debug_assert!(d.contains(c2));
        c2
    }
}
