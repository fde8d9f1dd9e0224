//! Planted bipartite benchmarks and prior sampling from ground truth.
//!
//! Every generator draws each Δ–Γ pair independently, so degree targets hold
//! in expectation. Node order is community-major on both sides.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bigraph::{BipartiteGraph, Part, PriorConstraints};
use crate::cover::CommunityCover;
use crate::error::{Error, Result};

/// Per-side size of a community in the two fixed-size families.
pub const BLOCK: usize = 32;
/// Communities in the two fixed-size families.
pub const FAMILY_COMMUNITIES: usize = 4;
/// Expected degree Z_in + Z_out in the non-overlapping family.
pub const TOTAL_DEGREE: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BenchmarkSpec {
    Classic {
        communities: usize,
        nodes_per_side: usize,
        p_in: f64,
        alpha: f64,
        seed: u64,
    },
    NonOverlapping {
        z_out: f64,
        seed: u64,
    },
    Overlapping {
        t: usize,
        z_in: f64,
        z_out: f64,
        seed: u64,
    },
}

impl BenchmarkSpec {
    pub fn generate(&self) -> Result<(BipartiteGraph, GroundTruth)> {
        match *self {
            BenchmarkSpec::Classic {
                communities,
                nodes_per_side,
                p_in,
                alpha,
                seed,
            } => gen_classic(communities, nodes_per_side, p_in, alpha, seed),
            BenchmarkSpec::NonOverlapping { z_out, seed } => gen_nonoverlapping(z_out, seed),
            BenchmarkSpec::Overlapping { t, z_in, z_out, seed } => gen_overlapping(t, seed, z_in, z_out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Cover over all nodes, Δ first.
    pub cover: CommunityCover,
    pub spec: BenchmarkSpec,
}

impl GroundTruth {
    /// Δ-side labels for a truth without overlaps.
    pub fn delta_labels(&self, n_delta: usize) -> Option<Vec<usize>> {
        (0..n_delta)
            .map(|v| match self.cover.of(v) {
                [a] => Some(*a),
                _ => None,
            })
            .collect()
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

/// Draws Δ–Γ edges where the probability depends on the Δ node's memberships
/// and the Γ node's (single) community.
fn sample_edges<R: Rng>(
    delta_memberships: &[Vec<usize>],
    gamma_community: &[usize],
    p_in: f64,
    p_out: f64,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for (d, ms) in delta_memberships.iter().enumerate() {
        for (g, gc) in gamma_community.iter().enumerate() {
            let p = if ms.contains(gc) { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((d, g));
            }
        }
    }
    edges
}

fn build(
    delta: Vec<Vec<usize>>,
    gamma: Vec<usize>,
    communities: usize,
    p_in: f64,
    p_out: f64,
    spec: BenchmarkSpec,
    seed: u64,
) -> Result<(BipartiteGraph, GroundTruth)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = sample_edges(&delta, &gamma, p_in, p_out, &mut rng);
    let graph = BipartiteGraph::new(delta.len(), gamma.len(), edges)?;
    let memberships = delta.into_iter().chain(gamma.into_iter().map(|g| vec![g])).collect();
    let cover = CommunityCover::new(memberships, communities)?;
    Ok((graph, GroundTruth { cover, spec }))
}

/// Equal-size planted partition with p_out = α·p_in.
pub fn gen_classic(
    communities: usize,
    nodes_per_side: usize,
    p_in: f64,
    alpha: f64,
    seed: u64,
) -> Result<(BipartiteGraph, GroundTruth)> {
    if communities == 0 || nodes_per_side == 0 {
        return Err(Error::OutOfRange("need at least one community and one node per side".into()));
    }
    if !(p_in > 0.0 && p_in <= 1.0) {
        return Err(Error::OutOfRange(format!("p_in = {p_in} must lie in (0, 1]")));
    }
    check_probability("alpha", alpha)?;
    let labels: Vec<usize> = (0..communities * nodes_per_side).map(|v| v / nodes_per_side).collect();
    build(
        labels.iter().map(|&l| vec![l]).collect(),
        labels,
        communities,
        p_in,
        alpha * p_in,
        BenchmarkSpec::Classic {
            communities,
            nodes_per_side,
            p_in,
            alpha,
            seed,
        },
        seed,
    )
}

/// Four communities of 32 + 32 nodes; a Δ node expects `16 − z_out`
/// neighbours inside its community and `z_out` outside.
pub fn gen_nonoverlapping(z_out: f64, seed: u64) -> Result<(BipartiteGraph, GroundTruth)> {
    if !(0.0..=TOTAL_DEGREE).contains(&z_out) {
        return Err(Error::OutOfRange(format!("z_out = {z_out} must lie in [0, 16]")));
    }
    let z_in = TOTAL_DEGREE - z_out;
    let n = FAMILY_COMMUNITIES * BLOCK;
    let labels: Vec<usize> = (0..n).map(|v| v / BLOCK).collect();
    build(
        labels.iter().map(|&l| vec![l]).collect(),
        labels,
        FAMILY_COMMUNITIES,
        z_in / BLOCK as f64,
        z_out / (n - BLOCK) as f64,
        BenchmarkSpec::NonOverlapping { z_out, seed },
        seed,
    )
}

/// Four communities of 32 + 32 nodes plus `t` extra Δ nodes shared by each
/// consecutive pair of communities. Δ order: the 32 own nodes of community
/// 0, the `t` nodes shared by 0 and 1, the own nodes of 1, and so on.
pub fn gen_overlapping(
    t: usize,
    seed: u64,
    z_in: f64,
    z_out: f64,
) -> Result<(BipartiteGraph, GroundTruth)> {
    if t > BLOCK {
        return Err(Error::OutOfRange(format!("t = {t} exceeds {BLOCK}")));
    }
    if z_in < 0.0 || z_out < 0.0 {
        return Err(Error::OutOfRange("degrees must be nonnegative".into()));
    }
    let mut delta = Vec::new();
    for alpha in 0..FAMILY_COMMUNITIES {
        delta.extend(std::iter::repeat_n(vec![alpha], BLOCK));
        if alpha + 1 < FAMILY_COMMUNITIES {
            delta.extend(std::iter::repeat_n(vec![alpha, alpha + 1], t));
        }
    }
    let gamma: Vec<usize> = (0..FAMILY_COMMUNITIES * BLOCK).map(|v| v / BLOCK).collect();
    // Equal Γ sizes make the per-pair rates identical across communities.
    let p_in = z_in / BLOCK as f64;
    let p_out = z_out / (gamma.len() - BLOCK) as f64;
    check_probability("z_in / n_gamma", p_in)?;
    check_probability("z_out / (sum n_gamma - n_gamma)", p_out)?;
    build(
        delta,
        gamma,
        FAMILY_COMMUNITIES,
        p_in,
        p_out,
        BenchmarkSpec::Overlapping { t, z_in, z_out, seed },
        seed,
    )
}

/// Samples `⌊fraction · k(k−1)/2⌋` distinct same-part pairs on `part`; pairs
/// sharing a true community become existence constraints, the rest absence.
pub fn sample_priors(
    truth: &CommunityCover,
    graph: &BipartiteGraph,
    part: Part,
    fraction: f64,
    gamma: f64,
    seed: u64,
) -> Result<PriorConstraints> {
    check_probability("fraction", fraction)?;
    let k = match part {
        Part::Delta => graph.n_delta(),
        Part::Gamma => graph.n_gamma(),
    };
    let total = k * k.saturating_sub(1) / 2;
    let count = ((fraction * total as f64).floor() as usize).min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut existence = Vec::new();
    let mut absence = Vec::new();
    for idx in index::sample(&mut rng, total, count).into_iter() {
        let (a, b) = unrank_pair(idx, k);
        let (ga, gb) = (graph.global(part, a), graph.global(part, b));
        let shared = truth.of(ga).iter().any(|c| truth.of(gb).contains(c));
        if shared {
            existence.push((ga, gb));
        } else {
            absence.push((ga, gb));
        }
    }
    PriorConstraints::new(existence, absence, gamma)
}

/// Index of pair `(a, b)`, `a < b`, in row-major order over the strict upper triangle.
fn unrank_pair(mut idx: usize, k: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = k - a - 1;
        if idx < row {
            return (a, a + 1 + idx);
        }
        idx -= row;
        a += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unrank_covers_all_pairs() {
        let k = 6;
        let pairs: Vec<_> = (0..k * (k - 1) / 2).map(|i| unrank_pair(i, k)).collect();
        let mut expected = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                expected.push((a, b));
            }
        }
        assert_eq!(pairs, expected);
    }

    #[test]
    fn classic_alpha_zero_is_block_diagonal() {
        let (g, _) = gen_classic(5, 6, 0.9, 0.0, 3).unwrap();
        assert!(g.edges().iter().all(|&(d, h)| d / 6 == h / 6));
        assert!(g.n_edges() > 0);
    }

    #[test]
    fn nonoverlapping_extremes() {
        let (g, truth) = gen_nonoverlapping(0.0, 1).unwrap();
        assert_eq!((g.n_delta(), g.n_gamma()), (128, 128));
        assert!(g.edges().iter().all(|&(d, h)| d / 32 == h / 32));
        assert_eq!(truth.cover.communities(), 4);

        let (g, _) = gen_nonoverlapping(16.0, 1).unwrap();
        assert!(g.edges().iter().all(|&(d, h)| d / 32 != h / 32));

        assert!(gen_nonoverlapping(16.5, 1).is_err());
        assert!(gen_nonoverlapping(-1.0, 1).is_err());
    }

    #[test]
    fn overlapping_counts() {
        let (g, truth) = gen_overlapping(8, 1, 10.0, 6.0).unwrap();
        assert_eq!(g.n_delta(), 128 + 24);
        let dual = (0..g.n_delta()).filter(|&v| truth.cover.of(v).len() == 2).count();
        assert_eq!(dual, 24);
        assert!((g.n_delta()..g.n()).all(|v| truth.cover.of(v).len() == 1));

        let (_, truth) = gen_overlapping(0, 1, 10.0, 6.0).unwrap();
        assert_eq!(truth.cover.overlapping(), 0);
        assert!(gen_overlapping(33, 1, 10.0, 6.0).is_err());
    }

    #[test]
    fn priors_fraction_edges() {
        let (g, truth) = gen_classic(2, 4, 0.5, 0.1, 1).unwrap();
        let none = sample_priors(&truth.cover, &g, Part::Delta, 0.0, 1.0, 1).unwrap();
        assert!(none.is_empty());

        let all = sample_priors(&truth.cover, &g, Part::Delta, 1.0, 1.0, 1).unwrap();
        assert_eq!(all.len(), 8 * 7 / 2);
        for &(a, b) in all.existence() {
            assert_eq!(a / 4, b / 4);
        }
        for &(a, b) in all.absence() {
            assert_ne!(a / 4, b / 4);
        }
    }

    #[test]
    fn priors_count_on_128_delta_nodes() {
        let (g, truth) = gen_nonoverlapping(4.0, 2).unwrap();
        let p = sample_priors(&truth.cover, &g, Part::Delta, 0.05, 1.0, 5).unwrap();
        // ⌊0.05 · 128·127/2⌋ = ⌊406.4⌋
        assert_eq!(p.len(), 406);
        assert!(p.existence().iter().chain(p.absence()).all(|&(a, b)| a < 128 && b < 128));
    }

    #[test]
    fn gamma_side_priors() {
        let (g, truth) = gen_classic(2, 3, 0.5, 0.1, 1).unwrap();
        let p = sample_priors(&truth.cover, &g, Part::Gamma, 1.0, 1.0, 1).unwrap();
        assert_eq!(p.len(), 15);
        assert!(p.existence().iter().all(|&(a, b)| a >= 6 && b >= 6));
    }
}
