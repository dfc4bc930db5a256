//! Monte Carlo samplers against exact enumeration on tiny instances. Each
//! check returns a summary line or the first discrepancy.

use std::collections::BTreeMap;
use std::sync::Arc;

use ising_sle::domain::{DiscreteDomain, Shape};
use ising_sle::fk::{p_critical, BondConfiguration, BondGraph, FkAlgorithm, WireGroup};
use ising_sle::oracle::{dobrushin_fixed, enumerate_fk, enumerate_spin, ExactMeasure};
use ising_sle::rng::stream;
use ising_sle::spin::{beta_critical, InteriorInit, SpinAlgorithm, SpinConfiguration};

const SAMPLES: usize = 100_000;

pub fn square(side: f64) -> Arc<DiscreteDomain> {
    Arc::new(DiscreteDomain::build(Shape::Rectangle { width: side, height: side }, 1.0, (0.0, side / 2.0), (side, side / 2.0)).unwrap())
}

const BATCHES: usize = 100;

/// Asserts every bit marginal of the chain output `keys` is within 3 sigma of
/// `exact`, sigma from batch means.
fn check_marginals(exact: &ExactMeasure, keys: &[u64], bits: usize, label: &str) -> Result<f64, String> {
    let mut worst = 0.0f64;
    let per = keys.len() / BATCHES;
    for i in 0..bits {
        let p = exact.marginal(i);
        let means: Vec<f64> =
            keys.chunks(per).map(|c| c.iter().filter(|k| *k >> i & 1 == 1).count() as f64 / c.len() as f64).collect();
        let est = means.iter().sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|m| (m - est).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        let sigma = (var / BATCHES as f64).sqrt().max((p * (1.0 - p) / keys.len() as f64).sqrt());
        if (est - p).abs() > 3.0 * sigma + 1e-9 {
            return Err(format!("{label} bit {i}: {est} vs {p} (sigma {sigma})"));
        }
        worst = worst.max((est - p).abs() / sigma.max(1e-12));
    }
    Ok(worst)
}

fn counts(keys: &[u64]) -> BTreeMap<u64, u64> {
    let mut c = BTreeMap::new();
    for &k in keys {
        *c.entry(k).or_insert(0) += 1;
    }
    c
}

/// 3×3 grid graph; vertex `3y + x`.
fn grid3() -> BondGraph {
    let mut edges = Vec::new();
    for y in 0..3u32 {
        for x in 0..3u32 {
            let v = 3 * y + x;
            if x < 2 {
                edges.push((v, v + 1));
            }
            if y < 2 {
                edges.push((v, v + 3));
            }
        }
    }
    BondGraph::new(9, edges)
}

pub fn spin_marginals() -> Result<String, String> {
    let mut worst = 0.0f64;
    let d = square(4.0);
    let beta = beta_critical();
    let exact = enumerate_spin(&d, beta).unwrap();
    assert!(dobrushin_fixed(&d).iter().filter(|s| s.is_none()).count() == 9);
    for (k, alg) in [SpinAlgorithm::MetropolisSweep, SpinAlgorithm::WolffCluster, SpinAlgorithm::SwendsenWang].into_iter().enumerate() {
        let mut rng = stream(100, k as u64);
        let mut s = SpinConfiguration::init_dobrushin(d.clone(), InteriorInit::UniformRandom, &mut rng);
        let spacing = if alg == SpinAlgorithm::WolffCluster { 6 } else { 2 };
        for _ in 0..200 {
            s.mcmc_step(beta, alg, &mut rng);
        }
        let keys: Vec<u64> = (0..SAMPLES)
            .map(|_| {
                for _ in 0..spacing {
                    s.mcmc_step(beta, alg, &mut rng);
                }
                s.pattern()
            })
            .collect();
        worst = worst.max(check_marginals(&exact, &keys, d.len(), &format!("{alg:?}"))?);
        let tv = exact.total_variation_counts(&counts(&keys));
        if tv >= 0.02 {
            return Err(format!("{alg:?} total variation {tv}"));
        }
    }
    Ok(format!("spin max {worst:.2} sigma"))
}

pub fn fk_marginals() -> Result<String, String> {
    let mut worst = 0.0f64;
    let g = Arc::new(grid3());
    let p = p_critical();
    let boundaries = [
        Vec::new(),
        vec![WireGroup { vertices: vec![2, 5, 8], sign: Some(1) }],
        vec![WireGroup { vertices: vec![0, 3], sign: None }, WireGroup { vertices: vec![5, 8], sign: None }],
    ];
    for (k, (alg, groups)) in [FkAlgorithm::HeatBathSweep, FkAlgorithm::SwendsenWang]
        .into_iter()
        .flat_map(|a| boundaries.iter().map(move |b| (a, b)))
        .enumerate()
    {
        let mut c = BondConfiguration::new(g.clone(), groups.clone(), false, vec![false; g.edge_count()]);
        let exact = enumerate_fk(c.graph(), p, c.groups(), false).unwrap();
        let mut rng = stream(200, k as u64);
        for _ in 0..200 {
            c.sweep(p, alg, &mut rng);
        }
        let keys: Vec<u64> = (0..SAMPLES)
            .map(|_| {
                c.sweep(p, alg, &mut rng);
                c.open_edges().iter().enumerate().fold(0u64, |m, (e, o)| if *o { m | 1 << e } else { m })
            })
            .collect();
        worst = worst.max(check_marginals(&exact, &keys, g.edge_count(), &format!("{alg:?} {groups:?}"))?);
    }
    Ok(format!("FK max {worst:.2} sigma"))
}

pub fn edwards_sokal_pushforward() -> Result<String, String> {
    let d = square(3.0);
    let exact = enumerate_spin(&d, beta_critical()).unwrap();
    let mut rng = stream(300, 0);
    let mut c = BondConfiguration::spin_dobrushin_closed(d.clone());
    let p = p_critical();
    for _ in 0..200 {
        c.sweep(p, FkAlgorithm::SwendsenWang, &mut rng);
    }
    let mut counts = BTreeMap::new();
    for _ in 0..SAMPLES {
        c.sweep(p, FkAlgorithm::SwendsenWang, &mut rng);
        let spins = c.color_clusters(&mut rng).unwrap();
        let key = spins.iter().enumerate().fold(0u64, |m, (v, s)| if *s > 0 { m | 1 << v } else { m });
        *counts.entry(key).or_insert(0u64) += 1;
    }
    let tv = exact.total_variation_counts(&counts);
    if tv < 0.02 {
        Ok(format!("ES TV {tv:.4}"))
    } else {
        Err(format!("ES total variation {tv}"))
    }
}

pub fn single_edge() -> Result<String, String> {
    let target = 2f64.sqrt() - 1.0;
    let g = Arc::new(BondGraph::new(2, vec![(0, 1)]));
    let exact = enumerate_fk(&g, p_critical(), &[], false).unwrap();
    if (exact.marginal(0) - target).abs() > 1e-12 {
        return Err(format!("oracle single edge {}", exact.marginal(0)));
    }
    let mut c = BondConfiguration::new(g, Vec::new(), false, vec![false]);
    let mut rng = stream(400, 0);
    let mut open = 0;
    for _ in 0..SAMPLES {
        c.sweep(p_critical(), FkAlgorithm::HeatBathSweep, &mut rng);
        open += usize::from(c.is_open(0));
    }
    let est = open as f64 / SAMPLES as f64;
    let sigma = (target * (1.0 - target) / SAMPLES as f64).sqrt();
    if (est - target).abs() < 3.0 * sigma {
        Ok(format!("edge {est:.4} vs {target:.4}"))
    } else {
        Err(format!("single edge {est} vs {target}"))
    }
}
