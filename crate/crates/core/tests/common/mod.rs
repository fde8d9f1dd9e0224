//! Brute-force reference implementations shared by the integration suites.
//! Each one works from definitions with plain loops and shares no code with
//! the library beyond its input types.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsbmf::{BipartiteGraph, CommunityCover};

pub fn random_graph(nd: usize, ng: usize, p: f64, seed: u64) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for d in 0..nd {
        for g in 0..ng {
            if rng.random::<f64>() < p {
                edges.push((d, g));
            }
        }
    }
    BipartiteGraph::new(nd, ng, edges).unwrap()
}

/// Random cover over `n` nodes: each node joins each community independently.
pub fn random_cover(n: usize, c: usize, p: f64, seed: u64) -> CommunityCover {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = (0..n)
        .map(|_| (0..c).filter(|_| rng.random::<f64>() < p).collect())
        .collect();
    CommunityCover::new(m, c).unwrap()
}

#[derive(Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub nd: u64,
    pub ng: u64,
    pub m: u64,
    pub m_bar: u64,
    pub m_under: u64,
}

/// m′ counted pair by pair: shared in-community neighbours for same-part
/// pairs, 1 per edge for cross pairs. m̄′ is the same count on the complete
/// biclique over the members; m̲′ follows its definition.
pub fn pair_counts(g: &BipartiteGraph, members: &[usize]) -> PairCounts {
    let nd = g.n_delta();
    let delta: Vec<usize> = members.iter().copied().filter(|&v| v < nd).collect();
    let gamma: Vec<usize> = members.iter().copied().filter(|&v| v >= nd).map(|v| v - nd).collect();
    let count = |edge: &dyn Fn(usize, usize) -> bool| -> u64 {
        let mut m = 0u64;
        for (i, &a) in delta.iter().enumerate() {
            for &b in &delta[i + 1..] {
                m += gamma.iter().filter(|&&x| edge(a, x) && edge(b, x)).count() as u64;
            }
        }
        for (i, &a) in gamma.iter().enumerate() {
            for &b in &gamma[i + 1..] {
                m += delta.iter().filter(|&&x| edge(x, a) && edge(x, b)).count() as u64;
            }
        }
        for &d in &delta {
            for &x in &gamma {
                m += u64::from(edge(d, x));
            }
        }
        m
    };
    let (a, b) = (delta.len() as u64, gamma.len() as u64);
    PairCounts {
        nd: a,
        ng: b,
        m: count(&|d, x| g.has_edge(d, x)),
        m_bar: count(&|_, _| true),
        m_under: (a + b).saturating_sub(1) + a.saturating_sub(1) + b.saturating_sub(1),
    }
}

/// Generalized partition density from pair counts.
pub fn density_oracle(g: &BipartiteGraph, cover: &CommunityCover) -> f64 {
    let n: usize = (0..cover.n()).map(|v| cover.of(v).len()).sum::<usize>()
        + (0..cover.n()).filter(|&v| cover.of(v).is_empty()).count();
    let mut total = 0.0;
    for alpha in 0..cover.communities() {
        let members: Vec<usize> = (0..cover.n()).filter(|&v| cover.of(v).contains(&alpha)).collect();
        if members.is_empty() {
            continue;
        }
        let pc = pair_counts(g, &members);
        if pc.nd == 0 || pc.ng == 0 || pc.m_bar == pc.m_under {
            continue;
        }
        let q = members.iter().map(|&v| cover.of(v).len()).max().unwrap() as f64;
        let d = (pc.m as f64 - pc.m_under as f64) / (pc.m_bar as f64 - pc.m_under as f64);
        total += d * members.len() as f64 / (q * n as f64);
    }
    total
}

/// max_j Σ_i |L_ij (A_ij − (UUᵀ)_ij)| + #empty rows, by loops.
pub fn objective_oracle(a: &Array2<f64>, l: &Array2<f64>, u: &Array2<u8>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            let uu: f64 = (0..u.ncols()).map(|k| f64::from(u[[i, k]] * u[[j, k]])).sum();
            col += (l[[i, j]] * (a[[i, j]] - uu)).abs();
        }
        worst = worst.max(col);
    }
    let empty = (0..n).filter(|&i| u.row(i).iter().all(|&x| x == 0)).count();
    worst + empty as f64
}

/// NMI as (H(X) + H(Y) − H(X,Y)) / sqrt(H(X) H(Y)) from probability tables.
pub fn nmi_oracle<T: std::hash::Hash + Eq + Clone>(x: &[T], y: &[T]) -> f64 {
    fn h<K>(counts: HashMap<K, usize>, n: f64) -> f64 {
        counts
            .values()
            .map(|&k| {
                let p = k as f64 / n;
                -p * p.ln()
            })
            .sum()
    }
    let n = x.len() as f64;
    let mut cx = HashMap::new();
    let mut cy = HashMap::new();
    let mut cxy = HashMap::new();
    for (a, b) in x.iter().zip(y) {
        *cx.entry(a.clone()).or_insert(0) += 1;
        *cy.entry(b.clone()).or_insert(0) += 1;
        *cxy.entry((a.clone(), b.clone())).or_insert(0) += 1;
    }
    let (hx, hy, hxy) = (h(cx, n), h(cy, n), h(cxy, n));
    (hx + hy - hxy) / (hx * hy).sqrt()
}

/// Planted partition given as sets, for order-insensitive comparison.
pub fn as_sets(cover: &CommunityCover) -> BTreeSet<Vec<usize>> {
    (0..cover.communities()).map(|a| cover.members(a)).filter(|m| !m.is_empty()).collect()
}

pub fn bicliques(sizes: &[(usize, usize)]) -> BipartiteGraph {
    let (mut d0, mut g0) = (0, 0);
    let mut edges = Vec::new();
    for &(nd, ng) in sizes {
        for d in 0..nd {
            for g in 0..ng {
                edges.push((d0 + d, g0 + g));
            }
        }
        d0 += nd;
        g0 += ng;
    }
    BipartiteGraph::new(d0, g0, edges).unwrap()
}
