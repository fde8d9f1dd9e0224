//! Partition density of covers, unipartite and bipartite, and the sweep over
//! community counts that uses it for model selection.
//!
//! A bipartite community is scored on its overlaid projection
//! `A′ = [[BBᵀ, B], [Bᵀ, BᵀB]]`, whose off-diagonal weight m′ is compared
//! against the bounds m̲′ (tree-like) and m̄′ (complete biclique).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bigraph::{BipartiteGraph, Part, PriorConstraints, UnipartiteGraph};
use crate::cover::CommunityCover;
use crate::error::{Error, Result};
use crate::factorize::{detect, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubnetworkCounts {
    pub n_delta: u64,
    pub n_gamma: u64,
    pub m_prime: u64,
    pub m_bar_prime: u64,
    pub m_under_prime: u64,
}

impl SubnetworkCounts {
    /// (m′ − m̲′)/(m̄′ − m̲′), or 0 when the bounds coincide.
    pub fn density(&self) -> f64 {
        if self.m_bar_prime == self.m_under_prime {
            return 0.0;
        }
        (self.m_prime as f64 - self.m_under_prime as f64)
            / (self.m_bar_prime as f64 - self.m_under_prime as f64)
    }

    pub fn size(&self) -> u64 {
        self.n_delta + self.n_gamma
    }
}

pub fn subnetwork_counts(
    graph: &BipartiteGraph,
    cover: &CommunityCover,
    alpha: usize,
) -> Result<SubnetworkCounts> {
    let members = cover.members(alpha);
    if members.is_empty() {
        return Err(Error::EmptyCommunity(alpha));
    }
    let (deltas, gammas): (Vec<usize>, Vec<usize>) =
        members.iter().partition(|&&v| v < graph.n_delta());
    if gammas.is_empty() {
        return Err(Error::OneSidedCommunity {
            alpha,
            part: Part::Delta,
        });
    }
    if deltas.is_empty() {
        return Err(Error::OneSidedCommunity {
            alpha,
            part: Part::Gamma,
        });
    }
    let gammas: Vec<usize> = gammas.iter().map(|&v| v - graph.n_delta()).collect();

    // B^(α) as 0/1 rows.
    let b: Vec<Vec<u64>> = deltas
        .iter()
        .map(|&d| gammas.iter().map(|&g| u64::from(graph.has_edge(d, g))).collect())
        .collect();
    let (nd, ng) = (deltas.len(), gammas.len());

    // Off-diagonal sums of BBᵀ and BᵀB, plus both copies of B.
    let mut off_diag = 0u64;
    for i in 0..nd {
        for k in 0..nd {
            if i != k {
                off_diag += (0..ng).map(|j| b[i][j] * b[k][j]).sum::<u64>();
            }
        }
    }
    for j in 0..ng {
        for l in 0..ng {
            if j != l {
                off_diag += (0..nd).map(|i| b[i][j] * b[i][l]).sum::<u64>();
            }
        }
    }
    off_diag += 2 * b.iter().flatten().sum::<u64>();

    let (nd, ng) = (nd as u64, ng as u64);
    Ok(SubnetworkCounts {
        n_delta: nd,
        n_gamma: ng,
        m_prime: off_diag / 2,
        m_bar_prime: nd * (nd - 1) / 2 * ng + ng * (ng - 1) / 2 * nd + nd * ng,
        m_under_prime: (nd - 1) + (ng - 1) + (nd + ng - 1),
    })
}

/// Per-community breakdown of the bipartite partition density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub value: f64,
    /// Σ n^(α) + number of outliers.
    pub total: usize,
    /// Communities whose members all sit in one part; scored as 0.
    pub one_sided: Vec<usize>,
    /// Communities with m̄′ = m̲′; scored as 0.
    pub degenerate: Vec<usize>,
    pub communities: Vec<CommunityTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityTerm {
    pub alpha: usize,
    pub size: usize,
    pub max_memberships: usize,
    pub density: f64,
    pub counts: Option<SubnetworkCounts>,
}

fn cover_total(cover: &CommunityCover) -> usize {
    let sizes: usize = cover.memberships().iter().map(Vec::len).sum();
    sizes + cover.outliers()
}

pub fn density_report(graph: &BipartiteGraph, cover: &CommunityCover) -> DensityReport {
    let total = cover_total(cover);
    let mut report = DensityReport {
        value: 0.0,
        total,
        one_sided: Vec::new(),
        degenerate: Vec::new(),
        communities: Vec::new(),
    };
    for alpha in 0..cover.communities() {
        let size = cover.members(alpha).len();
        if size == 0 {
            continue;
        }
        let q = cover.max_memberships(alpha);
        let (density, counts) = match subnetwork_counts(graph, cover, alpha) {
            Ok(counts) => {
                if counts.m_bar_prime == counts.m_under_prime {
                    report.degenerate.push(alpha);
                }
                (counts.density(), Some(counts))
            }
            Err(Error::OneSidedCommunity { .. }) => {
                log::warn!("community {alpha} has members in only one part; scored as 0");
                report.one_sided.push(alpha);
                (0.0, None)
            }
            Err(e) => unreachable!("nonempty community: {e}"),
        };
        report.communities.push(CommunityTerm {
            alpha,
            size,
            max_memberships: q,
            density,
            counts,
        });
    }
    report.value = sorted_sum(
        report
            .communities
            .iter()
            .map(|t| t.size as f64 / (t.max_memberships as f64 * total as f64) * t.density),
    );
    report
}

/// Order-independent sum, so relabeling communities cannot change the last bits.
fn sorted_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = terms.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// D′ = Σ_α (1/q^(α)) (n^(α)/N) D^(α)′.
pub fn partition_density_bipartite(graph: &BipartiteGraph, cover: &CommunityCover) -> f64 {
    density_report(graph, cover).value
}

/// D = Σ_α (1/q^(α)) (n^(α)/N) (m − (n−1)) / (n(n−1)/2 − (n−1)); communities
/// with at most two nodes contribute 0.
pub fn partition_density_unipartite(graph: &UnipartiteGraph, cover: &CommunityCover) -> f64 {
    let total = cover_total(cover);
    let mut terms = Vec::new();
    for alpha in 0..cover.communities() {
        let members = cover.members(alpha);
        let n = members.len() as u64;
        if n <= 2 {
            continue;
        }
        let mut m = 0u64;
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                m += u64::from(graph.has_edge(a, b));
            }
        }
        let lo = n - 1;
        let hi = n * (n - 1) / 2;
        let d = (m as f64 - lo as f64) / (hi as f64 - lo as f64);
        let q = cover.max_memberships(alpha) as f64;
        terms.push(n as f64 / (q * total as f64) * d);
    }
    sorted_sum(terms.into_iter())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub communities: usize,
    /// Mean density over successful restarts; `None` when every restart failed.
    pub mean_density: Option<f64>,
    pub max_density: Option<f64>,
    /// Density of the restart the solver selected.
    pub selected_density: Option<f64>,
    pub selected_objective: Option<f64>,
    pub successful_restarts: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub rows: Vec<SweepRow>,
    pub best_c: Option<usize>,
}

/// Runs the solver for each c and picks the c with the highest mean density;
/// ties go to the smaller c.
pub fn select_c(
    graph: &BipartiteGraph,
    priors: &PriorConstraints,
    c_range: impl IntoIterator<Item = usize>,
    config: &SolverConfig,
) -> Result<Selection> {
    let cs: Vec<usize> = c_range.into_iter().collect();
    if cs.is_empty() {
        return Err(Error::InvalidConfig("empty community range".into()));
    }
    if cs.contains(&0) {
        return Err(Error::InvalidConfig("community counts must be >= 1".into()));
    }
    let rows: Vec<SweepRow> = cs
        .par_iter()
        .map(|&c| {
            let cfg = SolverConfig {
                communities: c,
                ..config.clone()
            };
            match detect(graph, priors, &cfg) {
                Ok(r) => {
                    let densities: Vec<f64> = r.restarts.iter().filter_map(|o| o.density).collect();
                    SweepRow {
                        communities: c,
                        mean_density: Some(r.mean_density),
                        max_density: densities.iter().copied().reduce(f64::max),
                        selected_density: Some(r.density),
                        selected_objective: Some(r.objective),
                        successful_restarts: densities.len(),
                        error: None,
                    }
                }
                Err(e) => SweepRow {
                    communities: c,
                    mean_density: None,
                    max_density: None,
                    selected_density: None,
                    selected_objective: None,
                    successful_restarts: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for row in &rows {
        if let Some(d) = row.mean_density {
            let better = match best {
                None => true,
                Some((bc, bd)) => d > bd || (d == bd && row.communities < bc),
            };
            if better {
                best = Some((row.communities, d));
            }
        }
    }
    Ok(Selection {
        rows,
        best_c: best.map(|(c, _)| c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn biclique(nd: usize, ng: usize) -> BipartiteGraph {
        BipartiteGraph::new(nd, ng, (0..nd).flat_map(|d| (0..ng).map(move |g| (d, g)))).unwrap()
    }

    fn whole(n: usize) -> CommunityCover {
        CommunityCover::from_labels(&vec![0; n])
    }

    #[test]
    fn counts_complete_biclique() {
        let c = subnetwork_counts(&biclique(2, 2), &whole(4), 0).unwrap();
        assert_eq!((c.m_prime, c.m_bar_prime, c.m_under_prime), (8, 8, 5));
        assert_eq!(c.density(), 1.0);
    }

    #[test]
    fn counts_perfect_matching() {
        let g = BipartiteGraph::new(2, 2, [(0, 0), (1, 1)]).unwrap();
        let c = subnetwork_counts(&g, &whole(4), 0).unwrap();
        assert_eq!((c.m_prime, c.m_bar_prime, c.m_under_prime), (2, 8, 5));
        assert_eq!(partition_density_bipartite(&g, &whole(4)), -1.0);
    }

    #[test]
    fn counts_single_edge() {
        let c = subnetwork_counts(&biclique(1, 1), &whole(2), 0).unwrap();
        assert_eq!((c.m_prime, c.m_bar_prime, c.m_under_prime), (1, 1, 1));
        assert_eq!(c.density(), 0.0);
        let r = density_report(&biclique(1, 1), &whole(2));
        assert_eq!(r.degenerate, vec![0]);
    }

    #[test]
    fn two_bicliques_density_one() {
        let g = BipartiteGraph::new(
            4,
            4,
            [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (2, 3), (3, 2), (3, 3)],
        )
        .unwrap();
        let cover = CommunityCover::from_labels(&[0, 0, 1, 1, 0, 0, 1, 1]);
        assert_eq!(partition_density_bipartite(&g, &cover), 1.0);
    }

    #[test]
    fn empty_cover_density_zero() {
        let cover = CommunityCover::new(vec![vec![]; 4], 2).unwrap();
        assert_eq!(partition_density_bipartite(&biclique(2, 2), &cover), 0.0);
    }

    #[test]
    fn one_sided_is_flagged_not_fatal() {
        let g = biclique(2, 2);
        let cover = CommunityCover::from_labels(&[0, 0, 1, 1]);
        assert!(matches!(
            subnetwork_counts(&g, &cover, 0),
            Err(Error::OneSidedCommunity {
                part: Part::Delta,
                ..
            })
        ));
        let r = density_report(&g, &cover);
        assert_eq!(r.one_sided, vec![0, 1]);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn unipartite_examples() {
        let k5 = UnipartiteGraph::new(5, (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b)))).unwrap();
        assert_eq!(partition_density_unipartite(&k5, &whole(5)), 1.0);

        let path = UnipartiteGraph::new(5, (0..4).map(|a| (a, a + 1))).unwrap();
        assert_eq!(partition_density_unipartite(&path, &whole(5)), 0.0);

        let triangles =
            UnipartiteGraph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let cover = CommunityCover::from_labels(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(partition_density_unipartite(&triangles, &cover), 1.0);
    }

    #[test]
    fn overlap_discounts_weights() {
        // Node 0 sits in both communities: N = 3 + 3 = 6, q = 2 for both.
        let k = biclique(2, 2);
        let cover = CommunityCover::new(vec![vec![0, 1], vec![0], vec![0, 1], vec![1]], 2).unwrap();
        let r = density_report(&k, &cover);
        assert_eq!(r.total, 6);
        assert!(r.communities.iter().all(|t| t.max_memberships == 2));
    }
}
