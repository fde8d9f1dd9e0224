//! Graph model and block-matrix assembly.
//!
//! Nodes of a bipartite graph are indexed globally with the Δ part first:
//! Δ node `i` is row `i`, Γ node `j` is row `n_delta + j`. Every matrix built
//! here follows that layout, so block formulas can be checked positionally.

use std::collections::BTreeSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reliability weight used when none is given.
pub const DEFAULT_GAMMA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Delta,
    Gamma,
}

impl Part {
    pub fn other(self) -> Part {
        match self {
            Part::Delta => Part::Gamma,
            Part::Gamma => Part::Delta,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Part::Delta => "delta",
            Part::Gamma => "gamma",
        }
    }
}

impl std::str::FromStr for Part {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" | "d" => Ok(Part::Delta),
            "gamma" | "g" => Ok(Part::Gamma),
            other => Err(Error::Format(format!("unknown part '{other}'"))),
        }
    }
}

/// Consecutive blocks of global node indices, one per part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartLayout {
    offsets: Vec<usize>,
}

impl PartLayout {
    pub fn new(part_sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(part_sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &s in part_sizes {
            acc += s;
            offsets.push(acc);
        }
        PartLayout { offsets }
    }

    pub fn bipartite(n_delta: usize, n_gamma: usize) -> Self {
        Self::new(&[n_delta, n_gamma])
    }

    /// A single part: every pair of nodes is a same-part pair.
    pub fn unipartite(n: usize) -> Self {
        Self::new(&[n])
    }

    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn parts(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn range(&self, part: usize) -> std::ops::Range<usize> {
        self.offsets[part]..self.offsets[part + 1]
    }

    pub fn part_of(&self, node: usize) -> Option<usize> {
        if node >= self.n() {
            return None;
        }
        Some(self.offsets.partition_point(|&o| o <= node) - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_delta: usize,
    n_gamma: usize,
    edges: BTreeSet<(usize, usize)>,
    delta_labels: Option<Vec<String>>,
    gamma_labels: Option<Vec<String>>,
}

impl BipartiteGraph {
    /// Builds a graph from `(delta_index, gamma_index)` pairs. Repeated pairs
    /// are rejected; use [`crate::ingest::parse_edgelist`] for lenient input.
    pub fn new(
        n_delta: usize,
        n_gamma: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (d, g) in edges {
            if d >= n_delta || g >= n_gamma {
                return Err(Error::EdgeOutOfRange {
                    delta: d,
                    gamma: g,
                    n_delta,
                    n_gamma,
                });
            }
            if !set.insert((d, g)) {
                return Err(Error::DuplicateEdge(d, g));
            }
        }
        Ok(BipartiteGraph {
            n_delta,
            n_gamma,
            edges: set,
            delta_labels: None,
            gamma_labels: None,
        })
    }

    pub fn with_labels(mut self, delta: Vec<String>, gamma: Vec<String>) -> Result<Self> {
        if delta.len() != self.n_delta || gamma.len() != self.n_gamma {
            return Err(Error::InvalidGraph(format!(
                "label counts ({}, {}) do not match part sizes ({}, {})",
                delta.len(),
                gamma.len(),
                self.n_delta,
                self.n_gamma
            )));
        }
        self.delta_labels = Some(delta);
        self.gamma_labels = Some(gamma);
        Ok(self)
    }

    pub fn n_delta(&self) -> usize {
        self.n_delta
    }

    pub fn n_gamma(&self) -> usize {
        self.n_gamma
    }

    pub fn n(&self) -> usize {
        self.n_delta + self.n_gamma
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, delta: usize, gamma: usize) -> bool {
        self.edges.contains(&(delta, gamma))
    }

    pub fn layout(&self) -> PartLayout {
        PartLayout::bipartite(self.n_delta, self.n_gamma)
    }

    /// Part and within-part index of a global node index.
    pub fn locate(&self, node: usize) -> (Part, usize) {
        if node < self.n_delta {
            (Part::Delta, node)
        } else {
            (Part::Gamma, node - self.n_delta)
        }
    }

    pub fn global(&self, part: Part, index: usize) -> usize {
        match part {
            Part::Delta => index,
            Part::Gamma => self.n_delta + index,
        }
    }

    pub fn label(&self, node: usize) -> String {
        match self.locate(node) {
            (Part::Delta, i) => self
                .delta_labels
                .as_ref()
                .map(|l| l[i].clone())
                .unwrap_or_else(|| format!("d{i}")),
            (Part::Gamma, j) => self
                .gamma_labels
                .as_ref()
                .map(|l| l[j].clone())
                .unwrap_or_else(|| format!("g{j}")),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.n()).map(|v| self.label(v)).collect()
    }

    /// Global index of the node carrying `label`, if any.
    pub fn find_label(&self, label: &str) -> Option<usize> {
        (0..self.n()).find(|&v| self.label(v) == label)
    }

    /// The n_Δ×n_Γ biadjacency block B.
    pub fn biadjacency(&self) -> Array2<f64> {
        let mut b = Array2::zeros((self.n_delta, self.n_gamma));
        for &(d, g) in &self.edges {
            b[[d, g]] = 1.0;
        }
        b
    }

    pub fn degree(&self, node: usize) -> usize {
        match self.locate(node) {
            (Part::Delta, i) => self.edges.range((i, 0)..(i + 1, 0)).count(),
            (Part::Gamma, j) => self.edges.iter().filter(|&&(_, g)| g == j).count(),
        }
    }
}

/// A chain of parts Λ₁ … Λ_M with edges only between consecutive parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultipartiteGraph {
    part_sizes: Vec<usize>,
    layer_edges: Vec<BTreeSet<(usize, usize)>>,
}

impl MultipartiteGraph {
    /// `layer_edges[i]` holds `(a, b)` pairs with `a` in part `i` and `b` in part `i + 1`.
    pub fn new(part_sizes: Vec<usize>, layer_edges: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if part_sizes.len() < 2 {
            return Err(Error::InvalidGraph("an M-partite graph needs M >= 2".into()));
        }
        if layer_edges.len() != part_sizes.len() - 1 {
            return Err(Error::InvalidGraph(format!(
                "expected {} layers of edges, got {}",
                part_sizes.len() - 1,
                layer_edges.len()
            )));
        }
        let mut layers = Vec::with_capacity(layer_edges.len());
        for (i, edges) in layer_edges.into_iter().enumerate() {
            let (na, nb) = (part_sizes[i], part_sizes[i + 1]);
            let mut set = BTreeSet::new();
            for (a, b) in edges {
                if a >= na || b >= nb {
                    return Err(Error::EdgeOutOfRange {
                        delta: a,
                        gamma: b,
                        n_delta: na,
                        n_gamma: nb,
                    });
                }
                if !set.insert((a, b)) {
                    return Err(Error::DuplicateEdge(a, b));
                }
            }
            layers.push(set);
        }
        Ok(MultipartiteGraph {
            part_sizes,
            layer_edges: layers,
        })
    }

    pub fn part_sizes(&self) -> &[usize] {
        &self.part_sizes
    }

    pub fn layer_edges(&self) -> &[BTreeSet<(usize, usize)>] {
        &self.layer_edges
    }

    pub fn layout(&self) -> PartLayout {
        PartLayout::new(&self.part_sizes)
    }
}

impl From<&BipartiteGraph> for MultipartiteGraph {
    fn from(g: &BipartiteGraph) -> Self {
        MultipartiteGraph {
            part_sizes: vec![g.n_delta, g.n_gamma],
            layer_edges: vec![g.edges.clone()],
        }
    }
}

/// Simple undirected graph; edges stored as `(i, k)` with `i < k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnipartiteGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl UnipartiteGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(UnipartiteGraph { n, edges: set })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for &(i, k) in &self.edges {
            a[[i, k]] = 1.0;
            a[[k, i]] = 1.0;
        }
        a
    }
}

/// The observation weights L. Zero entries are unobserved.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMask {
    entries: Array2<f64>,
    gamma: f64,
}

impl WeightMask {
    pub fn new(entries: Array2<f64>, gamma: f64) -> Result<Self> {
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(Error::NegativeWeight(gamma));
        }
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::InvalidMask(format!("mask is {r}x{c}, not square")));
        }
        for i in 0..r {
            if entries[[i, i]] != 0.0 {
                return Err(Error::InvalidMask(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let v = entries[[i, j]];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidMask(format!("entry ({i}, {j}) = {v}")));
                }
                if v != entries[[j, i]] {
                    return Err(Error::InvalidMask(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(WeightMask { entries, gamma })
    }

    /// Every off-diagonal pair observed with weight `gamma`.
    pub fn full(n: usize, gamma: f64) -> Result<Self> {
        let mut e = Array2::from_elem((n, n), gamma);
        for i in 0..n {
            e[[i, i]] = 0.0;
        }
        Self::new(e, gamma)
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Sets a symmetric pair of entries, for per-entry reliabilities.
    pub fn set(&mut self, i: usize, j: usize, weight: f64) -> Result<()> {
        if weight < 0.0 || !weight.is_finite() {
            return Err(Error::NegativeWeight(weight));
        }
        if i == j {
            return Err(Error::InvalidMask(format!("cannot weight diagonal entry {i}")));
        }
        self.entries[[i, j]] = weight;
        self.entries[[j, i]] = weight;
        Ok(())
    }
}

/// Existence (C_e) and absence (C_a) knowledge on same-part node pairs,
/// in global node indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PriorConstraints {
    existence: BTreeSet<(usize, usize)>,
    absence: BTreeSet<(usize, usize)>,
    gamma: f64,
}

impl PriorConstraints {
    pub fn new(
        existence: impl IntoIterator<Item = (usize, usize)>,
        absence: impl IntoIterator<Item = (usize, usize)>,
        gamma: f64,
    ) -> Result<Self> {
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(Error::NegativeWeight(gamma));
        }
        let norm = |(a, b): (usize, usize)| -> Result<(usize, usize)> {
            if a == b {
                return Err(Error::SelfPrior(a));
            }
            Ok((a.min(b), a.max(b)))
        };
        let existence = existence.into_iter().map(norm).collect::<Result<BTreeSet<_>>>()?;
        let absence = absence.into_iter().map(norm).collect::<Result<BTreeSet<_>>>()?;
        if let Some(&(a, b)) = existence.intersection(&absence).next() {
            return Err(Error::ConflictingPrior(a, b));
        }
        Ok(PriorConstraints {
            existence,
            absence,
            gamma,
        })
    }

    pub fn empty() -> Self {
        PriorConstraints {
            gamma: DEFAULT_GAMMA,
            ..Default::default()
        }
    }

    pub fn existence(&self) -> &BTreeSet<(usize, usize)> {
        &self.existence
    }

    pub fn absence(&self) -> &BTreeSet<(usize, usize)> {
        &self.absence
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.existence.len() + self.absence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The symmetric n×n adjacency `[[0, B], [Bᵀ, 0]]`.
pub fn assemble_adjacency(graph: &BipartiteGraph) -> Array2<f64> {
    let n = graph.n();
    let nd = graph.n_delta();
    let mut a = Array2::zeros((n, n));
    for &(d, g) in graph.edges() {
        a[[d, nd + g]] = 1.0;
        a[[nd + g, d]] = 1.0;
    }
    a
}

/// L with `gamma` on both cross-part blocks and zeros elsewhere.
pub fn assemble_weight_mask(graph: &BipartiteGraph, gamma: f64) -> Result<WeightMask> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::NegativeWeight(gamma));
    }
    let n = graph.n();
    let nd = graph.n_delta();
    let mut l = Array2::zeros((n, n));
    for i in 0..nd {
        for j in nd..n {
            l[[i, j]] = gamma;
            l[[j, i]] = gamma;
        }
    }
    WeightMask::new(l, gamma)
}

/// Writes the prior knowledge into copies of A and L. Existence pairs become
/// observed edges, absence pairs observed non-edges, both with the priors' γ.
pub fn apply_priors(
    adjacency: &Array2<f64>,
    mask: &WeightMask,
    priors: &PriorConstraints,
    layout: &PartLayout,
) -> Result<(Array2<f64>, WeightMask)> {
    let mut a = adjacency.clone();
    let mut l = mask.entries().clone();
    let pairs = priors
        .existence()
        .iter()
        .map(|&p| (p, 1.0))
        .chain(priors.absence().iter().map(|&p| (p, 0.0)));
    for ((i, j), value) in pairs {
        let pi = layout.part_of(i).ok_or(Error::PriorOutOfRange(i))?;
        let pj = layout.part_of(j).ok_or(Error::PriorOutOfRange(j))?;
        if pi != pj {
            return Err(Error::CrossPartPrior(i, j));
        }
        a[[i, j]] = value;
        a[[j, i]] = value;
        l[[i, j]] = priors.gamma();
        l[[j, i]] = priors.gamma();
    }
    Ok((a, WeightMask::new(l, mask.gamma())?))
}

/// Block-tridiagonal A and L for a chain of parts.
pub fn assemble_multipartite(
    graph: &MultipartiteGraph,
    gamma: f64,
) -> Result<(Array2<f64>, WeightMask)> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::NegativeWeight(gamma));
    }
    let layout = graph.layout();
    let n = layout.n();
    let mut a = Array2::zeros((n, n));
    let mut l = Array2::zeros((n, n));
    for (layer, edges) in graph.layer_edges().iter().enumerate() {
        let rows = layout.range(layer);
        let cols = layout.range(layer + 1);
        for i in rows.clone() {
            for j in cols.clone() {
                l[[i, j]] = gamma;
                l[[j, i]] = gamma;
            }
        }
        for &(x, y) in edges {
            let (i, j) = (rows.start + x, cols.start + y);
            a[[i, j]] = 1.0;
            a[[j, i]] = 1.0;
        }
    }
    Ok((a, WeightMask::new(l, gamma)?))
}

/// One-mode projection: two nodes of `side` are linked when they share at
/// least one neighbour in the other part.
pub fn project_unipartite(graph: &BipartiteGraph, side: Part) -> UnipartiteGraph {
    let (n_side, n_other) = match side {
        Part::Delta => (graph.n_delta(), graph.n_gamma()),
        Part::Gamma => (graph.n_gamma(), graph.n_delta()),
    };
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n_other];
    for &(d, g) in graph.edges() {
        match side {
            Part::Delta => neighbours[g].push(d),
            Part::Gamma => neighbours[d].push(g),
        }
    }
    let mut edges = BTreeSet::new();
    for list in &neighbours {
        for (x, &a) in list.iter().enumerate() {
            for &b in &list[x + 1..] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    UnipartiteGraph { n: n_side, edges }
}
