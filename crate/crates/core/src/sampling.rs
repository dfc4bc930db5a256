//! Independent Markov chains producing interface samples, and their
//! conversion to driving functions. Every chain owns the RNG stream
//! `(seed, chain index)` and results are merged in chain order, so output
//! does not depend on the number of worker threads.

use std::sync::Arc;

use rayon::prelude::*;

use crate::conformal::UniformizerHandle;
use crate::curve::LatticeCurve;
use crate::domain::DiscreteDomain;
use crate::fk::{p_critical, BondConfiguration, BondInit, FkAlgorithm};
use crate::loewner::{sample_sle_drive, DrivingFunction};
use crate::rng::{purpose, stream};
use crate::spin::{beta_critical, InteriorInit, SpinAlgorithm, SpinConfiguration, TurnRule};
use crate::stats::{drive_from_interface, StatsError};

/// Markov chain used for interface samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Spin(SpinAlgorithm),
    Fk(FkAlgorithm),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainPlan {
    pub samples: usize,
    pub chains: usize,
    /// Sweeps discarded at the start of every chain.
    pub burn_in: usize,
    /// Sweeps between consecutive samples of a chain.
    pub decorrelation: usize,
}

impl ChainPlan {
    /// Samples drawn by chain `c`: an even split, remainder to the first chains.
    pub fn chain_len(&self, c: usize) -> usize {
        let chains = self.chains.max(1);
        self.samples / chains + usize::from(c < self.samples % chains)
    }
}

fn run_chain(domain: &Arc<DiscreteDomain>, sampler: Sampler, plan: &ChainPlan, seed: u64, chain: usize) -> Vec<LatticeCurve> {
    let mut rng = stream(seed, purpose::CHAIN + chain as u64);
    let n = plan.chain_len(chain);
    let mut out = Vec::with_capacity(n);
    match sampler {
        Sampler::Spin(alg) => {
            let beta = beta_critical();
            let mut s = SpinConfiguration::init_dobrushin(domain.clone(), InteriorInit::UniformRandom, &mut rng);
            for _ in 0..plan.burn_in {
                s.mcmc_step(beta, alg, &mut rng);
            }
            for _ in 0..n {
                for _ in 0..plan.decorrelation {
                    s.mcmc_step(beta, alg, &mut rng);
                }
                out.push(s.extract_interface(TurnRule::Rightmost));
            }
        }
        Sampler::Fk(alg) => {
            let p = p_critical();
            let mut b = BondConfiguration::init_dobrushin_fk(domain.clone(), BondInit::AllClosed);
            for _ in 0..plan.burn_in {
                b.sweep(p, alg, &mut rng);
            }
            for _ in 0..n {
                for _ in 0..plan.decorrelation {
                    b.sweep(p, alg, &mut rng);
                }
                out.push(b.extract_interface());
            }
        }
    }
    out
}

/// Interfaces from `plan.chains` independent chains, concatenated in chain
/// order.
pub fn sample_interfaces(domain: &Arc<DiscreteDomain>, sampler: Sampler, plan: &ChainPlan, seed: u64) -> Vec<LatticeCurve> {
    (0..plan.chains.max(1))
        .into_par_iter()
        .map(|c| run_chain(domain, sampler, plan, seed, c))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Drives of the given interfaces, in order. Each entry is the drive or the
/// extraction error of that interface.
pub fn drives_from_interfaces(
    curves: &[LatticeCurve],
    domain: &DiscreteDomain,
    handle: &UniformizerHandle<f64>,
    t_max: f64,
) -> Vec<Result<DrivingFunction<f64>, StatsError>> {
    curves.par_iter().map(|c| drive_from_interface(c, domain, handle, t_max)).collect()
}

/// `n` independent `√κ B` drives on `[0, t_end]`, drive `i` from stream
/// `(seed, SYNTHETIC + i)`.
pub fn synthetic_drives(kappa: f64, n: usize, t_end: f64, steps: usize, seed: u64) -> Vec<DrivingFunction<f64>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, purpose::SYNTHETIC + i as u64);
            sample_sle_drive(kappa, t_end, steps, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Shape;

    fn small() -> Arc<DiscreteDomain> {
        Arc::new(DiscreteDomain::build(Shape::Rectangle { width: 2.0, height: 1.0 }, 1.0 / 8.0, (0.0, 0.5), (2.0, 0.5)).unwrap())
    }

    #[test]
    fn chain_split() {
        let plan = ChainPlan { samples: 10, chains: 4, burn_in: 0, decorrelation: 1 };
        let lens: Vec<usize> = (0..4).map(|c| plan.chain_len(c)).collect();
        assert_eq!(lens, vec![3, 3, 2, 2]);
    }

    #[test]
    fn independent_of_thread_count() {
        let d = small();
        let plan = ChainPlan { samples: 12, chains: 5, burn_in: 5, decorrelation: 2 };
        for sampler in [Sampler::Spin(SpinAlgorithm::SwendsenWang), Sampler::Fk(FkAlgorithm::SwendsenWang)] {
            let run = |threads: usize| {
                rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| sample_interfaces(&d, sampler, &plan, 42))
            };
            let one = run(1);
            assert_eq!(one.len(), 12);
            assert_eq!(one, run(3));
        }
        let s1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| synthetic_drives(3.0, 7, 1.0, 10, 1));
        assert_eq!(s1, synthetic_drives(3.0, 7, 1.0, 10, 1));
    }

    #[test]
    fn sampled_interfaces_are_valid_and_extract() {
        let d = small();
        let h = UniformizerHandle::for_domain(&d).unwrap();
        let plan = ChainPlan { samples: 6, chains: 2, burn_in: 10, decorrelation: 3 };
        for sampler in [Sampler::Spin(SpinAlgorithm::SwendsenWang), Sampler::Fk(FkAlgorithm::HeatBathSweep)] {
            let curves = sample_interfaces(&d, sampler, &plan, 7);
            for c in &curves {
                c.check_invariants(&d).unwrap();
            }
            for drive in drives_from_interfaces(&curves, &d, &h, 0.2) {
                assert!(drive.unwrap().horizon() > 0.0);
            }
        }
    }
}
