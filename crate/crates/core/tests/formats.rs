mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wsbmf::ingest::{
    ingest_votes, parse_cover, parse_edgelist, parse_priors, parse_votes_csv, sha256_hex, women, write_cover,
    write_edgelist, write_priors, CoverDocument, CoverFormat, Vote, VoteRecord, WOMEN_SHA256, WOMEN_TSV,
};
use wsbmf::synth::{gen_overlapping, sample_priors};
use wsbmf::{detect, Error, Part, PriorConstraints, SolverConfig};

use common::random_graph;

#[test]
fn women_data_is_pinned() {
    assert_eq!(sha256_hex(WOMEN_TSV.as_bytes()), WOMEN_SHA256);
    let g = women();
    assert_eq!((g.n_delta(), g.n_gamma(), g.n_edges()), (18, 14, 89));
    assert_eq!(g.label(0), "Evelyn");
    let on_disk = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/women.tsv")).unwrap();
    assert_eq!(on_disk, WOMEN_TSV);
}

#[test]
fn edgelist_round_trip() {
    let g = women();
    let again = parse_edgelist(&write_edgelist(&g)).unwrap();
    assert_eq!(again.labels(), g.labels());
    assert_eq!(again.edges(), g.edges());
}

#[test]
fn edgelist_errors() {
    assert_eq!(parse_edgelist("# nothing\n"), Err(Error::EmptyGraph));
    assert!(matches!(parse_edgelist("a b c\n"), Err(Error::Parse { line: 1, .. })));
    // `x` appears first as Δ, then as Γ.
    assert!(matches!(parse_edgelist("x y\nz x\n"), Err(Error::Format(_))));
    let g = parse_edgelist("w1 e1\nw2 e1\nw1 e1\n").unwrap();
    assert_eq!((g.n_delta(), g.n_gamma(), g.n_edges()), (2, 1, 2));
}

#[test]
fn priors_round_trip() {
    let (g, truth) = gen_overlapping(2, 3, 10.0, 6.0).unwrap();
    let g = parse_edgelist(&write_edgelist(&g)).unwrap();
    let p = sample_priors(&truth.cover, &g, Part::Delta, 0.05, 1.0, 8).unwrap();
    assert_eq!(parse_priors(&write_priors(&p, &g), &g, 1.0).unwrap(), p);
    assert!(matches!(parse_priors("e d0 g0\n", &random_graph(2, 2, 1.0, 0), 1.0), Err(Error::CrossPartPrior(..))));
}

#[test]
fn cover_round_trip_both_formats() {
    let g = women();
    let config = SolverConfig::with_communities(3);
    let result = detect(&g, &PriorConstraints::empty(), &config).unwrap();
    let doc = CoverDocument::from_result(&g, &result, &config);
    for format in [CoverFormat::Tsv, CoverFormat::Json] {
        let text = write_cover(&doc, format);
        let back = parse_cover(&text).unwrap();
        assert_eq!(back.cover().unwrap(), result.cover());
        assert_eq!(back.membership().unwrap(), *result.continuous.values());
        assert_eq!(write_cover(&back, format), text, "{format:?} not stable");
    }
    let json = parse_cover(&write_cover(&doc, CoverFormat::Json)).unwrap();
    assert_eq!(json, doc);
}

#[test]
fn cover_output_marks_outliers() {
    let g = random_graph(1, 1, 1.0, 0);
    let cover = wsbmf::CommunityCover::new(vec![vec![0], vec![]], 1).unwrap();
    let text = write_cover(&CoverDocument::from_cover(&g, &cover), CoverFormat::Tsv);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, vec!["d0\tdelta\t0\t0\t-\t-", "g0\tgamma\t-\t1\t-\t-"]);
}

fn rec(v: &str, b: &str, vote: Vote) -> VoteRecord {
    VoteRecord {
        voter: v.into(),
        bill: b.into(),
        vote,
    }
}

#[test]
fn votes_csv_and_filtering() {
    let text = "voter,bill,vote\ns1,b1,yea\ns1,b2,nay\ns2,b1,abstain\ns2,b2,abstain\ns3,b1,yea\ns3,b2,yea\n";
    let records = parse_votes_csv(text).unwrap();
    assert_eq!(records.len(), 6);
    let net = ingest_votes(&records, 0.30, 1.0).unwrap();
    assert_eq!(net.removed_voters, vec!["s2"]);
    assert_eq!((net.graph.n_delta(), net.graph.n_gamma(), net.graph.n_edges()), (2, 2, 3));
    // The nay vote is an observed non-edge.
    assert_eq!(net.mask.entries()[[0, 3]], 1.0);
    assert!(matches!(parse_votes_csv("s1,b1,maybe\n"), Err(Error::Parse { line: 1, .. })));
    assert_eq!(ingest_votes(&[], 0.3, 1.0), Err(Error::EmptyResult));
}

#[test]
fn abstentions_are_masked_out() {
    let mut records = Vec::new();
    for v in 0..10 {
        for b in 0..10 {
            let vote = if (v, b) == (0, 0) { Vote::Abstain } else if (v + b) % 2 == 0 { Vote::Yea } else { Vote::Nay };
            records.push(rec(&format!("v{v}"), &format!("b{b}"), vote));
        }
    }
    let net = ingest_votes(&records, 0.30, 1.0).unwrap();
    assert_eq!(net.graph.n(), 20);
    let l = net.mask.entries();
    assert_eq!(l[[0, 10]], 0.0);
    assert_eq!(l[[10, 0]], 0.0);
    assert_eq!(l[[1, 10]], 1.0);
    assert_eq!(l[[0, 1]], 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn vote_filtering_is_order_independent(seed in any::<u64>(), threshold in 0.0f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut records = Vec::new();
        for v in 0..8 {
            for b in 0..12 {
                let vote = match rand::Rng::random_range(&mut rng, 0..4) {
                    0 => Vote::Abstain,
                    1 => continue,
                    2 => Vote::Nay,
                    _ => Vote::Yea,
                };
                records.push(rec(&format!("s{v}"), &format!("b{b}"), vote));
            }
        }
        let base = ingest_votes(&records, threshold, 1.0);
        records.shuffle(&mut rng);
        prop_assert_eq!(base, ingest_votes(&records, threshold, 1.0));
    }
}
