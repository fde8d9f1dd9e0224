//! Scripted benchmark protocols.
//!
//! `fig2` sweeps the mixing level of the non-overlapping family and compares
//! wSBMF without priors, wSBMF with sampled Δ-side priors, and the same
//! solver run on the one-mode Δ projection. `fig3` sweeps the overlap size of
//! the overlapping family. Both score Δ nodes, since priors and planted
//! overlaps live there; `fig3` also scores the whole cover.
//!
//! Instance, prior and solver seeds are derived from the master seed and the
//! grid value itself, so extending a grid never reshuffles existing points.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bigraph::{project_unipartite, Part, PriorConstraints};
use crate::cover::CommunityCover;
use crate::density::select_c;
use crate::error::Result;
use crate::factorize::{detect, detect_unipartite, SolverConfig};
use crate::metrics::{gnmi, nmi, HardPartition};
use crate::synth::{gen_nonoverlapping, gen_overlapping, sample_priors, FAMILY_COMMUNITIES};

pub const FIG2_SCHEMA: &str = "wsbmf-fig2/1";
pub const FIG3_SCHEMA: &str = "wsbmf-fig3/1";

const STREAM_INSTANCE: u64 = 1;
const STREAM_PRIORS: u64 = 2;
const STREAM_SOLVER: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of keys into a child seed.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(master), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Summary {
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub grid: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub prior_fraction: f64,
    /// Solver settings; `communities` is the planted count, `seed` is ignored.
    pub solver: SolverConfig,
    /// Community range for the per-instance estimate of c, if wanted.
    pub estimate_c: Option<RangeInclusive<usize>>,
}

impl ProtocolConfig {
    pub fn fig2() -> Self {
        ProtocolConfig {
            grid: (0..=8).map(f64::from).collect(),
            replicates: 10,
            master_seed: 1,
            prior_fraction: 0.05,
            solver: SolverConfig::with_communities(FAMILY_COMMUNITIES),
            estimate_c: Some(2..=8),
        }
    }

    pub fn fig3() -> Self {
        ProtocolConfig {
            grid: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            ..Self::fig2()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub instance_seed: u64,
    pub wsbmf: f64,
    pub wsbmf_priors: f64,
    pub projection: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wsbmf_all_nodes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wsbmf_priors_all_nodes: Option<f64>,
    /// Share of planted multi-membership Δ nodes given two or more communities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap_recall: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_c: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_c_priors: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    /// z_out for fig2, t for fig3.
    pub x: f64,
    pub wsbmf: Summary,
    pub wsbmf_priors: Summary,
    pub projection: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wsbmf_all_nodes: Option<Summary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wsbmf_priors_all_nodes: Option<Summary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap_recall: Option<Summary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_c: Option<Summary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_c_priors: Option<Summary>,
    pub replicates: Vec<Replicate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub schema: String,
    /// `nmi` for fig2, `gnmi` for fig3.
    pub metric: String,
    pub config: ProtocolConfig,
    pub points: Vec<Point>,
}

fn solver_for(cfg: &ProtocolConfig, x: f64, r: usize) -> SolverConfig {
    SolverConfig {
        seed: derive_seed(cfg.master_seed, &[STREAM_SOLVER, x.to_bits(), r as u64]),
        ..cfg.solver.clone()
    }
}

fn delta_nodes(n_delta: usize) -> Vec<usize> {
    (0..n_delta).collect()
}

fn estimate(
    graph: &crate::BipartiteGraph,
    priors: &PriorConstraints,
    cfg: &ProtocolConfig,
    solver: &SolverConfig,
) -> Result<Option<usize>> {
    match &cfg.estimate_c {
        None => Ok(None),
        Some(range) => Ok(select_c(graph, priors, range.clone(), solver)?.best_c),
    }
}

fn fig2_replicate(cfg: &ProtocolConfig, z_out: f64, r: usize) -> Result<Replicate> {
    let key = [z_out.to_bits(), r as u64];
    let instance_seed = derive_seed(cfg.master_seed, &[STREAM_INSTANCE, key[0], key[1]]);
    let (graph, truth) = gen_nonoverlapping(z_out, instance_seed)?;
    let solver = solver_for(cfg, z_out, r);
    let nd = graph.n_delta();
    let truth_labels = HardPartition::new(truth.delta_labels(nd).expect("hard truth"));

    let priors = sample_priors(
        &truth.cover,
        &graph,
        Part::Delta,
        cfg.prior_fraction,
        1.0,
        derive_seed(cfg.master_seed, &[STREAM_PRIORS, key[0], key[1]]),
    )?;

    let score = |labels: Vec<usize>| -> Result<f64> {
        let found = HardPartition::new(labels).restrict(&delta_nodes(nd));
        nmi(&truth_labels, &found)
    };
    let plain = detect(&graph, &PriorConstraints::empty(), &solver)?;
    let with_priors = detect(&graph, &priors, &solver)?;
    let projected = project_unipartite(&graph, Part::Delta);
    let baseline = detect_unipartite(&projected, &solver)?;

    Ok(Replicate {
        instance_seed,
        wsbmf: score(plain.continuous.hard_labels())?,
        wsbmf_priors: score(with_priors.continuous.hard_labels())?,
        projection: score(baseline.continuous.hard_labels())?,
        wsbmf_all_nodes: None,
        wsbmf_priors_all_nodes: None,
        overlap_recall: None,
        estimated_c: estimate(&graph, &PriorConstraints::empty(), cfg, &solver)?,
        estimated_c_priors: estimate(&graph, &priors, cfg, &solver)?,
    })
}

fn fig3_replicate(cfg: &ProtocolConfig, t: f64, r: usize) -> Result<Replicate> {
    let key = [t.to_bits(), r as u64];
    let instance_seed = derive_seed(cfg.master_seed, &[STREAM_INSTANCE, key[0], key[1]]);
    let (graph, truth) = gen_overlapping(t as usize, instance_seed, 10.0, 6.0)?;
    let solver = solver_for(cfg, t, r);
    let nd = graph.n_delta();
    let delta = delta_nodes(nd);
    let truth_delta = truth.cover.restrict(&delta);

    let priors = sample_priors(
        &truth.cover,
        &graph,
        Part::Delta,
        cfg.prior_fraction,
        1.0,
        derive_seed(cfg.master_seed, &[STREAM_PRIORS, key[0], key[1]]),
    )?;
    let plain = detect(&graph, &PriorConstraints::empty(), &solver)?.cover();
    let with_priors = detect(&graph, &priors, &solver)?.cover();
    let projected = project_unipartite(&graph, Part::Delta);
    let baseline = detect_unipartite(&projected, &solver)?.cover();

    Ok(Replicate {
        instance_seed,
        wsbmf: gnmi(&truth_delta, &plain.restrict(&delta))?,
        wsbmf_priors: gnmi(&truth_delta, &with_priors.restrict(&delta))?,
        projection: gnmi(&truth_delta, &baseline)?,
        wsbmf_all_nodes: Some(gnmi(&truth.cover, &plain)?),
        wsbmf_priors_all_nodes: Some(gnmi(&truth.cover, &with_priors)?),
        overlap_recall: overlap_recall(&truth.cover, &plain),
        estimated_c: estimate(&graph, &PriorConstraints::empty(), cfg, &solver)?,
        estimated_c_priors: estimate(&graph, &priors, cfg, &solver)?,
    })
}

/// Fraction of truly multi-membership nodes that `found` also places in two
/// or more communities; `None` when the truth has no overlaps.
pub fn overlap_recall(truth: &CommunityCover, found: &CommunityCover) -> Option<f64> {
    let planted: Vec<usize> = (0..truth.n()).filter(|&v| truth.of(v).len() > 1).collect();
    if planted.is_empty() {
        return None;
    }
    let hit = planted.iter().filter(|&&v| found.of(v).len() > 1).count();
    Some(hit as f64 / planted.len() as f64)
}

fn summarize(x: f64, replicates: Vec<Replicate>) -> Point {
    let col = |f: fn(&Replicate) -> f64| Summary::of(&replicates.iter().map(f).collect::<Vec<_>>());
    let opt = |f: fn(&Replicate) -> Option<f64>| {
        let v: Option<Vec<f64>> = replicates.iter().map(f).collect();
        v.map(|v| Summary::of(&v))
    };
    Point {
        x,
        wsbmf: col(|r| r.wsbmf),
        wsbmf_priors: col(|r| r.wsbmf_priors),
        projection: col(|r| r.projection),
        wsbmf_all_nodes: opt(|r| r.wsbmf_all_nodes),
        wsbmf_priors_all_nodes: opt(|r| r.wsbmf_priors_all_nodes),
        overlap_recall: opt(|r| r.overlap_recall),
        estimated_c: opt(|r| r.estimated_c.map(|c| c as f64)),
        estimated_c_priors: opt(|r| r.estimated_c_priors.map(|c| c as f64)),
        replicates,
    }
}

fn run(
    cfg: &ProtocolConfig,
    schema: &str,
    metric: &str,
    replicate: fn(&ProtocolConfig, f64, usize) -> Result<Replicate>,
) -> Result<ProtocolReport> {
    let jobs: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|p| (0..cfg.replicates).map(move |r| (p, r)))
        .collect();
    let results: Vec<Result<Replicate>> = jobs
        .par_iter()
        .map(|&(p, r)| replicate(cfg, cfg.grid[p], r))
        .collect();
    let mut per_point: Vec<Vec<Replicate>> = vec![Vec::new(); cfg.grid.len()];
    for (&(p, _), res) in jobs.iter().zip(results) {
        per_point[p].push(res?);
    }
    Ok(ProtocolReport {
        schema: schema.to_string(),
        metric: metric.to_string(),
        config: cfg.clone(),
        points: cfg
            .grid
            .iter()
            .zip(per_point)
            .map(|(&x, reps)| summarize(x, reps))
            .collect(),
    })
}

/// Non-overlapping family over `cfg.grid` as z_out values, scored by NMI on Δ.
pub fn run_fig2(cfg: &ProtocolConfig) -> Result<ProtocolReport> {
    run(cfg, FIG2_SCHEMA, "nmi", fig2_replicate)
}

/// Overlapping family over `cfg.grid` as t values, scored by generalized NMI.
pub fn run_fig3(cfg: &ProtocolConfig) -> Result<ProtocolReport> {
    run(cfg, FIG3_SCHEMA, "gnmi", fig3_replicate)
}
