//! Text formats: edge lists, prior files, vote records and cover output.
//!
//! Edge list: UTF-8, `#` starts a comment, one `delta_id<ws>gamma_id` per
//! line. Node indices follow first appearance.
//!
//! Prior file: one `e <id1> <id2>` (existence) or `a <id1> <id2>` (absence)
//! per line, ids from the same part.
//!
//! Votes: CSV rows `voter,bill,vote` with vote one of `yea`, `nay`,
//! `abstain`; an optional `voter,bill,vote` header row is skipped.
//!
//! Cover TSV: a `# communities<TAB>c` line, then one row per node:
//! `id  part  communities  outlier  membership  entropy`, where communities
//! and membership are comma-separated (`-` when empty or absent).
//!
//! Cover JSON: see [`CoverDocument`]; `schema` is [`COVER_SCHEMA`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bigraph::{BipartiteGraph, Part, PriorConstraints, WeightMask};
use crate::cover::CommunityCover;
use crate::error::{Error, Result};
use crate::factorize::{DetectionResult, SolverConfig};
use crate::metrics::exponential_entropy;

pub const COVER_SCHEMA: &str = "wsbmf-cover/1";

/// Davis southern-women attendance data, 18 women × 14 events.
pub const WOMEN_TSV: &str = include_str!("../../../data/women.tsv");
pub const WOMEN_SHA256: &str = "25f7b873f69b64c7f6ddf26779c44093dca9c6a11cb77ae43e378e6a49bed718";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The bundled women network; panics if the embedded data was altered.
pub fn women() -> BipartiteGraph {
    assert_eq!(sha256_hex(WOMEN_TSV.as_bytes()), WOMEN_SHA256, "women.tsv hash changed");
    let g = parse_edgelist(WOMEN_TSV).expect("bundled data parses");
    assert_eq!((g.n_delta(), g.n_gamma(), g.n_edges()), (18, 14, 89));
    g
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

pub fn parse_edgelist(text: &str) -> Result<BipartiteGraph> {
    let mut delta: Vec<String> = Vec::new();
    let mut gamma: Vec<String> = Vec::new();
    let mut delta_idx: HashMap<String, usize> = HashMap::new();
    let mut gamma_idx: HashMap<String, usize> = HashMap::new();
    let mut edges = BTreeSet::new();
    for (line, body) in content_lines(text) {
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [d, g] = fields[..] else {
            return Err(Error::Parse {
                line,
                msg: format!("expected two ids, found {}", fields.len()),
            });
        };
        if gamma_idx.contains_key(d) || delta_idx.contains_key(g) || d == g {
            return Err(Error::Format(format!(
                "line {line}: edge {d} -- {g} would join two nodes of the same part"
            )));
        }
        let di = *delta_idx.entry(d.to_string()).or_insert_with(|| {
            delta.push(d.to_string());
            delta.len() - 1
        });
        let gi = *gamma_idx.entry(g.to_string()).or_insert_with(|| {
            gamma.push(g.to_string());
            gamma.len() - 1
        });
        if !edges.insert((di, gi)) {
            log::warn!("line {line}: duplicate edge {d} -- {g} ignored");
        }
    }
    if delta.is_empty() {
        return Err(Error::EmptyGraph);
    }
    BipartiteGraph::new(delta.len(), gamma.len(), edges)?.with_labels(delta, gamma)
}

pub fn write_edgelist(graph: &BipartiteGraph) -> String {
    let mut out = String::new();
    for &(d, g) in graph.edges() {
        let _ = writeln!(
            out,
            "{}\t{}",
            graph.label(d),
            graph.label(graph.global(Part::Gamma, g))
        );
    }
    out
}

/// Parses a prior file against the graph's node ids.
pub fn parse_priors(text: &str, graph: &BipartiteGraph, gamma: f64) -> Result<PriorConstraints> {
    let index: HashMap<String, usize> = (0..graph.n()).map(|v| (graph.label(v), v)).collect();
    let mut existence = Vec::new();
    let mut absence = Vec::new();
    for (line, body) in content_lines(text) {
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [kind, a, b] = fields[..] else {
            return Err(Error::Parse {
                line,
                msg: "expected `e|a <id1> <id2>`".into(),
            });
        };
        let lookup = |id: &str| {
            index.get(id).copied().ok_or_else(|| Error::Parse {
                line,
                msg: format!("unknown node id '{id}'"),
            })
        };
        let pair = (lookup(a)?, lookup(b)?);
        if graph.locate(pair.0).0 != graph.locate(pair.1).0 {
            return Err(Error::CrossPartPrior(pair.0, pair.1));
        }
        match kind {
            "e" => existence.push(pair),
            "a" => absence.push(pair),
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("constraint kind must be 'e' or 'a', got '{other}'"),
                })
            }
        }
    }
    PriorConstraints::new(existence, absence, gamma)
}

pub fn write_priors(priors: &PriorConstraints, graph: &BipartiteGraph) -> String {
    let mut out = String::new();
    for (kind, set) in [("e", priors.existence()), ("a", priors.absence())] {
        for &(a, b) in set {
            let _ = writeln!(out, "{kind}\t{}\t{}", graph.label(a), graph.label(b));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vote {
    Yea,
    Nay,
    Abstain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub voter: String,
    pub bill: String,
    pub vote: Vote,
}

pub fn parse_votes_csv(text: &str) -> Result<Vec<VoteRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if row.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, found {}", row.len()),
            });
        }
        if i == 0 && &row[0] == "voter" && &row[1] == "bill" && &row[2] == "vote" {
            continue;
        }
        let vote = match row[2].to_ascii_lowercase().as_str() {
            "yea" => Vote::Yea,
            "nay" => Vote::Nay,
            "abstain" => Vote::Abstain,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown vote '{other}'"),
                })
            }
        };
        out.push(VoteRecord {
            voter: row[0].to_string(),
            bill: row[1].to_string(),
            vote,
        });
    }
    Ok(out)
}

/// Voter–bill network after removing inactive voters and bills.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteNetwork {
    pub graph: BipartiteGraph,
    /// γ on observed votes, 0 on abstentions and on the within-part blocks.
    pub mask: WeightMask,
    pub removed_voters: Vec<String>,
    pub removed_bills: Vec<String>,
}

/// Repeatedly drops voters abstaining on more than `abstain_threshold` of
/// the remaining bills, then bills abstained on by more than that share of
/// the remaining voters, until nothing changes. A missing record counts as
/// an abstention. Voters and bills are indexed in sorted id order.
pub fn ingest_votes(records: &[VoteRecord], abstain_threshold: f64, gamma: f64) -> Result<VoteNetwork> {
    if records.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mut votes: BTreeMap<(&str, &str), Vote> = BTreeMap::new();
    for r in records {
        if let Some(prev) = votes.insert((&r.voter, &r.bill), r.vote) {
            if prev != r.vote {
                return Err(Error::Format(format!(
                    "conflicting votes for ({}, {})",
                    r.voter, r.bill
                )));
            }
        }
    }
    let vote_of = |v: &str, b: &str| votes.get(&(v, b)).copied().unwrap_or(Vote::Abstain);
    let mut voters: BTreeSet<&str> = records.iter().map(|r| r.voter.as_str()).collect();
    let mut bills: BTreeSet<&str> = records.iter().map(|r| r.bill.as_str()).collect();
    let all_voters = voters.clone();
    let all_bills = bills.clone();

    loop {
        let before = (voters.len(), bills.len());
        let nb = bills.len() as f64;
        voters.retain(|&v| {
            let abst = bills.iter().filter(|&&b| vote_of(v, b) == Vote::Abstain).count();
            abst as f64 <= abstain_threshold * nb
        });
        let nv = voters.len() as f64;
        bills.retain(|&b| {
            let abst = voters.iter().filter(|&&v| vote_of(v, b) == Vote::Abstain).count();
            abst as f64 <= abstain_threshold * nv
        });
        if (voters.len(), bills.len()) == before {
            break;
        }
    }
    if voters.is_empty() || bills.is_empty() {
        return Err(Error::EmptyResult);
    }

    let voters: Vec<&str> = voters.into_iter().collect();
    let bills: Vec<&str> = bills.into_iter().collect();
    let (nv, nb) = (voters.len(), bills.len());
    let mut edges = Vec::new();
    let mut l = Array2::zeros((nv + nb, nv + nb));
    for (i, v) in voters.iter().enumerate() {
        for (j, b) in bills.iter().enumerate() {
            match vote_of(v, b) {
                Vote::Yea => edges.push((i, j)),
                Vote::Nay => {}
                Vote::Abstain => continue,
            }
            l[[i, nv + j]] = gamma;
            l[[nv + j, i]] = gamma;
        }
    }
    let graph = BipartiteGraph::new(nv, nb, edges)?.with_labels(
        voters.iter().map(|s| s.to_string()).collect(),
        bills.iter().map(|s| s.to_string()).collect(),
    )?;
    let removed = |all: BTreeSet<&str>, kept: &[&str]| {
        all.into_iter()
            .filter(|x| !kept.contains(x))
            .map(str::to_string)
            .collect()
    };
    Ok(VoteNetwork {
        graph,
        mask: WeightMask::new(l, gamma)?,
        removed_voters: removed(all_voters, &voters),
        removed_bills: removed(all_bills, &bills),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverFormat {
    Tsv,
    Json,
}

impl std::str::FromStr for CoverFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(CoverFormat::Tsv),
            "json" => Ok(CoverFormat::Json),
            other => Err(Error::Format(format!("unknown cover format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverRecord {
    pub id: String,
    pub part: Part,
    pub communities: Vec<usize>,
    pub outlier: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
}

/// Serialized cover with optional solver context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverDocument {
    pub schema: String,
    pub communities: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub nodes: Vec<CoverRecord>,
}

impl CoverDocument {
    /// A bare cover, e.g. a planted ground truth.
    pub fn from_cover(graph: &BipartiteGraph, cover: &CommunityCover) -> Self {
        let nodes = (0..graph.n())
            .map(|v| CoverRecord {
                id: graph.label(v),
                part: graph.locate(v).0,
                communities: cover.of(v).to_vec(),
                outlier: cover.of(v).is_empty(),
                membership: None,
                entropy: None,
            })
            .collect();
        CoverDocument {
            schema: COVER_SCHEMA.to_string(),
            communities: cover.communities(),
            seed: None,
            config: None,
            objective: None,
            density: None,
            mean_density: None,
            threshold: None,
            nodes,
        }
    }

    pub fn from_result(graph: &BipartiteGraph, result: &DetectionResult, config: &SolverConfig) -> Self {
        let mut doc = Self::from_cover(graph, &result.cover());
        let all: Vec<usize> = (0..graph.n()).collect();
        let entropy = exponential_entropy(&result.continuous, &all);
        for (v, rec) in doc.nodes.iter_mut().enumerate() {
            rec.membership = Some(result.continuous.values().row(v).to_vec());
            rec.entropy = Some(entropy[v]);
        }
        doc.seed = Some(config.seed);
        doc.config = Some(config.clone());
        doc.objective = Some(result.objective);
        doc.density = Some(result.density);
        doc.mean_density = Some(result.mean_density);
        doc.threshold = Some(result.binary.threshold());
        doc
    }

    pub fn cover(&self) -> Result<CommunityCover> {
        CommunityCover::new(
            self.nodes.iter().map(|r| r.communities.clone()).collect(),
            self.communities,
        )
    }

    /// Membership matrix when every node carries one.
    pub fn membership(&self) -> Option<Array2<f64>> {
        let rows: Option<Vec<&Vec<f64>>> = self.nodes.iter().map(|r| r.membership.as_ref()).collect();
        let rows = rows?;
        let c = rows.first().map_or(0, |r| r.len());
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Array2::from_shape_vec((rows.len(), c), flat).ok()
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    if items.is_empty() {
        "-".to_string()
    } else {
        items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    }
}

pub fn write_cover(doc: &CoverDocument, format: CoverFormat) -> String {
    match format {
        CoverFormat::Json => {
            let mut s = serde_json::to_string_pretty(doc).expect("cover serializes");
            s.push('\n');
            s
        }
        CoverFormat::Tsv => {
            let mut out = String::new();
            let _ = writeln!(out, "# communities\t{}", doc.communities);
            let _ = writeln!(out, "# id\tpart\tcommunities\toutlier\tmembership\tentropy");
            for r in &doc.nodes {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    r.id,
                    r.part.as_str(),
                    join(&r.communities),
                    u8::from(r.outlier),
                    r.membership.as_deref().map_or("-".to_string(), join),
                    r.entropy.map_or("-".to_string(), |e| e.to_string()),
                );
            }
            out
        }
    }
}

/// Reads either cover format; JSON is recognized by a leading `{`.
pub fn parse_cover(text: &str) -> Result<CoverDocument> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()));
    }
    let mut communities = None;
    let mut nodes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        if let Some(meta) = line.strip_prefix('#') {
            let mut f = meta.split_whitespace();
            if f.next() == Some("communities") {
                let c = f.next().ok_or_else(|| perr("missing community count".into()))?;
                communities = Some(c.parse::<usize>().map_err(|e| perr(e.to_string()))?);
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(perr(format!("expected at least 3 tab-separated fields, found {}", fields.len())));
        }
        let list = |s: &str| -> Result<Vec<usize>> {
            if s == "-" || s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|e| perr(e.to_string())))
                .collect()
        };
        let communities_of = list(fields[2])?;
        let membership = match fields.get(4) {
            None | Some(&"-") => None,
            Some(s) => Some(
                s.split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| perr(e.to_string())))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let entropy = match fields.get(5) {
            None | Some(&"-") => None,
            Some(s) => Some(s.trim().parse::<f64>().map_err(|e| perr(e.to_string()))?),
        };
        nodes.push(CoverRecord {
            id: fields[0].to_string(),
            part: fields[1].parse()?,
            outlier: communities_of.is_empty(),
            communities: communities_of,
            membership,
            entropy,
        });
    }
    let communities = communities.unwrap_or_else(|| {
        nodes
            .iter()
            .flat_map(|r| r.communities.iter().map(|&c| c + 1))
            .max()
            .unwrap_or(0)
    });
    Ok(CoverDocument {
        schema: COVER_SCHEMA.to_string(),
        communities,
        seed: None,
        config: None,
        objective: None,
        density: None,
        mean_density: None,
        threshold: None,
        nodes,
    })
}
