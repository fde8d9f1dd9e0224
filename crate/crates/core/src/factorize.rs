//! The wSBMF solver.
//!
//! A restart runs three stages:
//!
//! 1. nonnegative alternating least squares on the biadjacency block B,
//!    giving `B ≈ U₁U₂ᵀ`, followed by column-max balancing of the factors;
//! 2. multiplicative updates for the masked symmetric model
//!    `min ‖L∘(A − UUᵀ)‖²_F`, started from `U = [U₁; U₂]` and finished with a
//!    row normalization;
//! 3. a grid search over a scalar threshold `u`, binarizing `U > u` and
//!    keeping the threshold with the smallest masked 1-norm residual plus
//!    outlier count.
//!
//! [`solve`] repeats this for several seeded restarts and keeps the best one.

use ndarray::{s, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bigraph::{
    apply_priors, assemble_adjacency, assemble_multipartite, assemble_weight_mask, BipartiteGraph,
    MultipartiteGraph, PriorConstraints, UnipartiteGraph, WeightMask,
};
use crate::cover::CommunityCover;
use crate::density;
use crate::error::{Error, Result};
use crate::linalg::solve_regularized;

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 1;

/// ALS initializations that produced an all-zero column are redrawn this many
/// times before the restart is given up.
const MAX_RESEEDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of communities c.
    pub communities: usize,
    /// ALS rounds (C₁).
    pub c1_iters: usize,
    /// Multiplicative-update rounds (C₂).
    pub c2_iters: usize,
    /// Number of candidate thresholds, spread uniformly over `[0, max U]`.
    pub threshold_grid: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Guard added to multiplicative-update denominators.
    pub epsilon: f64,
    /// Shift applied to singular normal equations in ALS.
    pub ridge: f64,
    /// Weight of observed cross-part entries.
    pub gamma: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            communities: 2,
            c1_iters: 10,
            c2_iters: 100,
            threshold_grid: 101,
            restarts: 10,
            seed: DEFAULT_SEED,
            epsilon: 1e-12,
            ridge: 1e-10,
            gamma: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn with_communities(communities: usize) -> Self {
        SolverConfig {
            communities,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.communities < 1 {
            return bad("communities must be >= 1");
        }
        if self.c1_iters < 1 || self.c2_iters < 1 {
            return bad("iteration counts must be >= 1");
        }
        if self.threshold_grid < 2 {
            return bad("threshold grid needs at least 2 points");
        }
        if self.restarts < 1 {
            return bad("restarts must be >= 1");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.ridge > 0.0) {
            return bad("ridge must be positive");
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return bad("gamma must be a nonnegative number");
        }
        Ok(())
    }
}

/// ALS factors of the biadjacency block: `B ≈ U₁U₂ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub u1: Array2<f64>,
    pub u2: Array2<f64>,
}

/// Row-stochastic membership strengths (rows of structurally isolated nodes stay zero).
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousMembership {
    values: Array2<f64>,
}

impl ContinuousMembership {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::OutOfRange("membership entries must be finite and >= 0".into()));
        }
        Ok(ContinuousMembership { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn communities(&self) -> usize {
        self.values.ncols()
    }

    /// Strongest community of each node; all-zero rows get label `c`.
    pub fn hard_labels(&self) -> Vec<usize> {
        let c = self.communities();
        self.values
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = c;
                let mut best_v = 0.0;
                for (j, &v) in row.iter().enumerate() {
                    if v > best_v {
                        best = j;
                        best_v = v;
                    }
                }
                best
            })
            .collect()
    }
}

/// A 0/1 membership matrix together with the threshold that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMembership {
    values: Array2<u8>,
    threshold: f64,
    objective: f64,
}

impl BinaryMembership {
    pub fn values(&self) -> &Array2<u8> {
        &self.values
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Objective value of this matrix (masked 1-norm residual plus outliers).
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn cover(&self) -> CommunityCover {
        CommunityCover::from_indicator(&self.values)
    }
}

pub fn als_init(b: ArrayView2<f64>, communities: usize, c1_iters: usize, seed: u64) -> FactorPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    als_init_with(b, communities, c1_iters, SolverConfig::default().ridge, &mut rng)
}

/// Nonnegative ALS: alternately solve the normal equations for one factor
/// and clamp negatives, starting from a uniform `[0, 1)` draw of `U₁`.
pub fn als_init_with<R: Rng + ?Sized>(
    b: ArrayView2<f64>,
    communities: usize,
    c1_iters: usize,
    ridge: f64,
    rng: &mut R,
) -> FactorPair {
    let (rows, cols) = b.dim();
    let mut u1 = Array2::from_shape_simple_fn((rows, communities), || rng.random::<f64>());
    let mut u2 = Array2::zeros((cols, communities));
    for _ in 0..c1_iters {
        // U₁ᵀU₁ · U₂ᵀ = U₁ᵀB
        let gram = u1.t().dot(&u1);
        let rhs = u1.t().dot(&b);
        u2 = solve_regularized(gram.view(), rhs.view(), ridge).reversed_axes();
        u2.mapv_inplace(|v| v.max(0.0));
        // U₂ᵀU₂ · U₁ᵀ = U₂ᵀBᵀ
        let gram = u2.t().dot(&u2);
        let rhs = u2.t().dot(&b.t());
        u1 = solve_regularized(gram.view(), rhs.view(), ridge).reversed_axes();
        u1.mapv_inplace(|v| v.max(0.0));
    }
    FactorPair { u1, u2 }
}

fn column_maxima(m: &Array2<f64>) -> Vec<f64> {
    m.columns()
        .into_iter()
        .map(|c| c.iter().fold(0.0f64, |a, &v| a.max(v)))
        .collect()
}

/// Rescales column j of both factors to the common maximum √(d₁ⱼ·d₂ⱼ),
/// leaving the product `U₁U₂ᵀ` unchanged.
pub fn normalize_factors(pair: &FactorPair) -> Result<FactorPair> {
    let d1 = column_maxima(&pair.u1);
    let d2 = column_maxima(&pair.u2);
    for (factor, d) in [("first", &d1), ("second", &d2)] {
        if let Some(column) = d.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::DegenerateColumn { factor, column });
        }
    }
    let mut u1 = pair.u1.clone();
    let mut u2 = pair.u2.clone();
    for j in 0..d1.len() {
        let s1 = (d2[j] / d1[j]).sqrt();
        let s2 = (d1[j] / d2[j]).sqrt();
        u1.column_mut(j).mapv_inplace(|v| v * s1);
        u2.column_mut(j).mapv_inplace(|v| v * s2);
    }
    Ok(FactorPair { u1, u2 })
}

/// `[U₁; U₂]`.
pub fn stack_factors(pair: &FactorPair) -> Array2<f64> {
    ndarray::concatenate(Axis(0), &[pair.u1.view(), pair.u2.view()])
        .expect("factors share a column count")
}

/// ‖L∘(A − UUᵀ)‖²_F
pub fn weighted_residual_sq(a: &Array2<f64>, l: &WeightMask, u: &Array2<f64>) -> f64 {
    let p = u.dot(&u.t());
    let mut total = 0.0;
    Zip::from(a).and(l.entries()).and(&p).for_each(|&a, &w, &p| {
        let r = w * (a - p);
        total += r * r;
    });
    total
}

/// Multiplicative updates `U ← U ∘ [(L∘A)U] / ([L∘(UUᵀ)]U + ε)` followed by
/// row normalization.
pub fn wsnmf_updates(
    a: &Array2<f64>,
    l: &WeightMask,
    u0: &Array2<f64>,
    c2_iters: usize,
    epsilon: f64,
) -> Result<ContinuousMembership> {
    run_updates(a, l, u0, c2_iters, epsilon, None)
}

/// Like [`wsnmf_updates`], also returning ‖L∘(A − UUᵀ)‖²_F before the first
/// update and after each one (before row normalization).
pub fn wsnmf_updates_traced(
    a: &Array2<f64>,
    l: &WeightMask,
    u0: &Array2<f64>,
    c2_iters: usize,
    epsilon: f64,
) -> Result<(ContinuousMembership, Vec<f64>)> {
    let mut trace = Vec::with_capacity(c2_iters + 1);
    let u = run_updates(a, l, u0, c2_iters, epsilon, Some(&mut trace))?;
    Ok((u, trace))
}

fn run_updates(
    a: &Array2<f64>,
    l: &WeightMask,
    u0: &Array2<f64>,
    c2_iters: usize,
    epsilon: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<ContinuousMembership> {
    let weights = l.entries();
    let target = weights * a;
    let mut u = u0.clone();
    if let Some(t) = trace.as_deref_mut() {
        t.push(weighted_residual_sq(a, l, &u));
    }
    for _ in 0..c2_iters {
        let numer = target.dot(&u);
        let gram = weights * &u.dot(&u.t());
        let denom = gram.dot(&u);
        Zip::from(&mut u)
            .and(&numer)
            .and(&denom)
            .for_each(|x, &n, &d| *x *= n / (d + epsilon));
        debug_assert!(u.iter().all(|&v| v >= 0.0), "update produced a negative entry");
        if let Some(t) = trace.as_deref_mut() {
            t.push(weighted_residual_sq(a, l, &u));
        }
    }
    // Nodes with no observed positive entry cannot receive any weight; their
    // rows stay zero and become outliers after thresholding.
    for (i, mut row) in u.rows_mut().into_iter().enumerate() {
        let sum: f64 = row.sum();
        if sum > 0.0 && sum.is_finite() {
            row.mapv_inplace(|v| v / sum);
        } else if target.row(i).iter().any(|&v| v > 0.0) {
            return Err(Error::ZeroRow(i));
        } else {
            row.fill(0.0);
        }
    }
    ContinuousMembership::new(u)
}

fn indicator_f64(u: &Array2<u8>) -> Array2<f64> {
    u.mapv(f64::from)
}

fn l1_objective(a: &Array2<f64>, l: &WeightMask, uf: &Array2<f64>) -> f64 {
    let p = uf.dot(&uf.t());
    let n = a.nrows();
    let mut col_sums = vec![0.0; n];
    Zip::indexed(a)
        .and(l.entries())
        .and(&p)
        .for_each(|(_, j), &a, &w, &p| col_sums[j] += (w * (a - p)).abs());
    let norm = col_sums.into_iter().fold(0.0, f64::max);
    let outliers = uf.rows().into_iter().filter(|r| r.iter().all(|&v| v == 0.0)).count();
    norm + outliers as f64
}

/// `‖L∘(A − UUᵀ)‖₁ + #{empty rows of U}`, with ‖·‖₁ the largest absolute column sum.
pub fn objective_l1(a: &Array2<f64>, l: &WeightMask, u: &Array2<u8>) -> f64 {
    l1_objective(a, l, &indicator_f64(u))
}

/// Elementwise `U > threshold`.
pub fn binarize(u: &Array2<f64>, threshold: f64) -> Array2<u8> {
    u.mapv(|v| u8::from(v > threshold))
}

/// `grid_size` uniform points from 0 to `max_value` inclusive.
pub fn threshold_grid(max_value: f64, grid_size: usize) -> Vec<f64> {
    let last = (grid_size - 1) as f64;
    (0..grid_size).map(|k| max_value * k as f64 / last).collect()
}

/// Picks the grid threshold minimizing [`objective_l1`] of `U > u`; ties go
/// to the smaller threshold.
pub fn threshold_search(
    u: &ContinuousMembership,
    a: &Array2<f64>,
    l: &WeightMask,
    grid_size: usize,
) -> BinaryMembership {
    let max_value = u.values().iter().fold(0.0f64, |m, &v| m.max(v));
    let mut best: Option<BinaryMembership> = None;
    for t in threshold_grid(max_value, grid_size.max(2)) {
        let values = binarize(u.values(), t);
        let objective = objective_l1(a, l, &values);
        if best.as_ref().is_none_or(|b| objective < b.objective) {
            best = Some(BinaryMembership {
                values,
                threshold: t,
                objective,
            });
        }
    }
    best.expect("grid is nonempty")
}

/// How a restart seeds the symmetric factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initializer {
    /// ALS on the `[0..n_delta, n_delta..]` block, factors stacked.
    Bipartite { n_delta: usize },
    /// ALS on the whole adjacency, the two balanced factors averaged.
    Symmetric,
}

/// A masked symmetric factorization problem: A, L and how to initialize.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub adjacency: Array2<f64>,
    pub mask: WeightMask,
    pub init: Initializer,
}

impl Problem {
    pub fn bipartite(graph: &BipartiteGraph, gamma: f64, priors: &PriorConstraints) -> Result<Self> {
        let a = assemble_adjacency(graph);
        let l = assemble_weight_mask(graph, gamma)?;
        let (adjacency, mask) = apply_priors(&a, &l, priors, &graph.layout())?;
        Ok(Problem {
            adjacency,
            mask,
            init: Initializer::Bipartite {
                n_delta: graph.n_delta(),
            },
        })
    }

    /// Bipartite problem with a caller-supplied mask (e.g. missing votes).
    pub fn bipartite_masked(
        graph: &BipartiteGraph,
        mask: WeightMask,
        priors: &PriorConstraints,
    ) -> Result<Self> {
        if mask.n() != graph.n() {
            return Err(Error::InvalidMask(format!(
                "mask is {}x{0}, graph has {} nodes",
                mask.n(),
                graph.n()
            )));
        }
        let a = assemble_adjacency(graph);
        let (adjacency, mask) = apply_priors(&a, &mask, priors, &graph.layout())?;
        Ok(Problem {
            adjacency,
            mask,
            init: Initializer::Bipartite {
                n_delta: graph.n_delta(),
            },
        })
    }

    /// Unipartite graph with every off-diagonal pair observed.
    pub fn unipartite(graph: &UnipartiteGraph, gamma: f64) -> Result<Self> {
        Ok(Problem {
            adjacency: graph.adjacency(),
            mask: WeightMask::full(graph.n(), gamma)?,
            init: Initializer::Symmetric,
        })
    }

    pub fn multipartite(
        graph: &MultipartiteGraph,
        gamma: f64,
        priors: &PriorConstraints,
    ) -> Result<Self> {
        let (a, l) = assemble_multipartite(graph, gamma)?;
        let (adjacency, mask) = apply_priors(&a, &l, priors, &graph.layout())?;
        Ok(Problem {
            adjacency,
            mask,
            init: Initializer::Symmetric,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    fn initial_factor<R: Rng>(&self, config: &SolverConfig, rng: &mut R) -> Result<Array2<f64>> {
        let c = config.communities;
        let mut last = None;
        for _ in 0..MAX_RESEEDS {
            let pair = match self.init {
                Initializer::Bipartite { n_delta } => {
                    let b = self.adjacency.slice(s![..n_delta, n_delta..]);
                    als_init_with(b, c, config.c1_iters, config.ridge, rng)
                }
                Initializer::Symmetric => {
                    als_init_with(self.adjacency.view(), c, config.c1_iters, config.ridge, rng)
                }
            };
            match normalize_factors(&pair) {
                Ok(p) => {
                    return Ok(match self.init {
                        Initializer::Bipartite { .. } => stack_factors(&p),
                        Initializer::Symmetric => (&p.u1 + &p.u2) * 0.5,
                    })
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub objective: Option<f64>,
    pub density: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub binary: BinaryMembership,
    pub continuous: ContinuousMembership,
    /// Objective of the selected restart.
    pub objective: f64,
    /// Partition density of the selected restart.
    pub density: f64,
    /// Partition density averaged over successful restarts.
    pub mean_density: f64,
    pub best_restart: usize,
    pub restarts: Vec<RestartOutcome>,
}

impl DetectionResult {
    pub fn cover(&self) -> CommunityCover {
        self.binary.cover()
    }

    pub fn successful_restarts(&self) -> usize {
        self.restarts.iter().filter(|r| r.error.is_none()).count()
    }
}

struct RestartRun {
    binary: BinaryMembership,
    continuous: ContinuousMembership,
    density: f64,
}

/// RNG for one restart: the master seed selects the key, the restart index the stream.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restart<F>(problem: &Problem, config: &SolverConfig, restart: usize, density_of: &F) -> Result<RestartRun>
where
    F: Fn(&CommunityCover) -> f64,
{
    let mut rng = restart_rng(config.seed, restart);
    let u0 = problem.initial_factor(config, &mut rng)?;
    let continuous = wsnmf_updates(
        &problem.adjacency,
        &problem.mask,
        &u0,
        config.c2_iters,
        config.epsilon,
    )?;
    let binary = threshold_search(&continuous, &problem.adjacency, &problem.mask, config.threshold_grid);
    let density = density_of(&binary.cover());
    Ok(RestartRun {
        binary,
        continuous,
        density,
    })
}

/// Runs every restart and keeps the one with the smallest objective, then
/// the highest density, then the lowest restart index.
pub fn solve<F>(problem: &Problem, config: &SolverConfig, density_of: F) -> Result<DetectionResult>
where
    F: Fn(&CommunityCover) -> f64 + Sync,
{
    config.validate()?;
    let n = problem.n();
    let c = config.communities;

    let target = problem.mask.entries() * &problem.adjacency;
    if target.iter().all(|&v| v == 0.0) {
        // Nothing observed to reconstruct: every node is an outlier.
        let values = Array2::zeros((n, c));
        let objective = objective_l1(&problem.adjacency, &problem.mask, &values);
        let binary = BinaryMembership {
            values,
            threshold: 0.0,
            objective,
        };
        let density = density_of(&binary.cover());
        return Ok(DetectionResult {
            continuous: ContinuousMembership::new(Array2::zeros((n, c)))?,
            binary,
            objective,
            density,
            mean_density: density,
            best_restart: 0,
            restarts: vec![RestartOutcome {
                restart: 0,
                objective: Some(objective),
                density: Some(density),
                error: None,
            }],
        });
    }

    let runs: Vec<Result<RestartRun>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(problem, config, r, &density_of))
        .collect();

    let mut outcomes = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, RestartRun)> = None;
    let mut density_sum = 0.0;
    let mut successes = 0usize;
    let mut last_err = None;
    for (restart, run) in runs.into_iter().enumerate() {
        match run {
            Ok(run) => {
                outcomes.push(RestartOutcome {
                    restart,
                    objective: Some(run.binary.objective),
                    density: Some(run.density),
                    error: None,
                });
                density_sum += run.density;
                successes += 1;
                let better = match &best {
                    None => true,
                    Some((_, b)) => {
                        run.binary.objective < b.binary.objective
                            || (run.binary.objective == b.binary.objective && run.density > b.density)
                    }
                };
                if better {
                    best = Some((restart, run));
                }
            }
            Err(e) => {
                log::debug!("restart {restart} failed: {e}");
                outcomes.push(RestartOutcome {
                    restart,
                    objective: None,
                    density: None,
                    error: Some(e.to_string()),
                });
                last_err = Some(e);
            }
        }
    }

    let (best_restart, run) = best.ok_or_else(|| Error::AllRestartsFailed {
        restarts: config.restarts,
        last: Box::new(last_err.expect("no successes implies an error")),
    })?;
    Ok(DetectionResult {
        objective: run.binary.objective,
        density: run.density,
        mean_density: density_sum / successes as f64,
        best_restart,
        binary: run.binary,
        continuous: run.continuous,
        restarts: outcomes,
    })
}

/// Full bipartite pipeline: assemble A and L, apply priors, solve, and score
/// covers with the bipartite partition density.
pub fn detect(
    graph: &BipartiteGraph,
    priors: &PriorConstraints,
    config: &SolverConfig,
) -> Result<DetectionResult> {
    let problem = Problem::bipartite(graph, config.gamma, priors)?;
    solve(&problem, config, |cover| density::partition_density_bipartite(graph, cover))
}

/// Bipartite pipeline with an explicit weight mask.
pub fn detect_masked(
    graph: &BipartiteGraph,
    mask: WeightMask,
    priors: &PriorConstraints,
    config: &SolverConfig,
) -> Result<DetectionResult> {
    let problem = Problem::bipartite_masked(graph, mask, priors)?;
    solve(&problem, config, |cover| density::partition_density_bipartite(graph, cover))
}

/// The unipartite baseline: the same solver with every off-diagonal pair observed.
pub fn detect_unipartite(graph: &UnipartiteGraph, config: &SolverConfig) -> Result<DetectionResult> {
    let problem = Problem::unipartite(graph, config.gamma)?;
    solve(&problem, config, |cover| density::partition_density_unipartite(graph, cover))
}
