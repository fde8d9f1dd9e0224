//! Agreement scores between community assignments, and membership fuzziness.
//!
//! # Generalized NMI for covers
//!
//! For an overlapping cover, the natural random variable attached to a node is
//! its membership indicator vector `X_v ∈ {0,1}^c`. Picking a node uniformly
//! at random makes `(X, Y)` a pair of discrete random variables whose joint
//! law is the empirical distribution of `(indicator in truth, indicator in
//! found)` pairs. [`gnmi`] returns
//!
//! ```text
//!     I(X; Y) / sqrt(H(X) · H(Y))
//! ```
//!
//! computed exactly from that empirical law. At most `n` distinct indicator
//! vectors occur, so no per-community approximation of the joint entropy is
//! needed. Properties that follow directly:
//!
//! * for hard partitions the indicator vector is a one-hot encoding of the
//!   label, so the value coincides with [`nmi`];
//! * identical covers give 1, since `I(X; X) = H(X)`;
//! * it is invariant under relabeling communities in either cover;
//! * a node whose membership set differs between the covers splits or merges
//!   a pattern class, which makes `I < max(H(X), H(Y))` and the score drops
//!   below 1.
//!
//! Outliers contribute the all-zero indicator vector, i.e. their own class.
//!
//! When one cover gives every node the same membership set its entropy is 0
//! and the ratio is 0/0. Two such covers are the same partition up to
//! relabeling and score 1; against a non-constant cover the score is 0.

use std::collections::HashMap;
use std::hash::Hash;

use crate::cover::CommunityCover;
use crate::error::{Error, Result};
use crate::factorize::ContinuousMembership;

/// One label per node over some stated node subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardPartition {
    labels: Vec<usize>,
}

impl HardPartition {
    pub fn new(labels: Vec<usize>) -> Self {
        HardPartition { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn restrict(&self, nodes: &[usize]) -> HardPartition {
        HardPartition {
            labels: nodes.iter().map(|&v| self.labels[v]).collect(),
        }
    }
}

/// Normalized mutual information with the geometric-mean normalization and
/// natural logs. A partition with a single cluster has zero entropy and the
/// score is defined as 0.
pub fn nmi(truth: &HardPartition, found: &HardPartition) -> Result<f64> {
    if truth.len() != found.len() {
        return Err(Error::LengthMismatch(truth.len(), found.len()));
    }
    if truth.is_empty() {
        return Err(Error::EmptyPartition);
    }
    Ok(normalized_mi(truth.labels(), found.labels()).unwrap_or_else(|| {
        log::warn!("a partition has a single cluster; NMI is 0/0 and reported as 0");
        0.0
    }))
}

/// `None` when either side has zero entropy.
fn normalized_mi<A, B>(x: &[A], y: &[B]) -> Option<f64>
where
    A: Hash + Eq + Clone,
    B: Hash + Eq + Clone,
{
    let n = x.len() as f64;
    let mut joint: HashMap<(A, B), usize> = HashMap::new();
    let mut px: HashMap<A, usize> = HashMap::new();
    let mut py: HashMap<B, usize> = HashMap::new();
    for (a, b) in x.iter().zip(y) {
        *joint.entry((a.clone(), b.clone())).or_default() += 1;
        *px.entry(a.clone()).or_default() += 1;
        *py.entry(b.clone()).or_default() += 1;
    }
    // Σ n_i ln(n_i / n), negative of n·H.
    fn plogp<K>(counts: &HashMap<K, usize>, n: f64) -> f64 {
        sorted_sum(counts.values().map(|&k| {
            let k = k as f64;
            k * (k / n).ln()
        }))
    }
    let hx = plogp(&px, n);
    let hy = plogp(&py, n);
    if hx == 0.0 || hy == 0.0 {
        return None;
    }
    let mi = sorted_sum(joint.iter().map(|((a, b), &k)| {
        let k = k as f64;
        k * (k * n / (px[a] as f64 * py[b] as f64)).ln()
    }));
    Some((mi / (hx * hy).sqrt()).clamp(0.0, 1.0))
}

/// Sums in a fixed order so that results do not depend on hash iteration
/// order and swapping the arguments gives bit-identical values.
fn sorted_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = terms.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Generalized NMI between two covers of the same nodes; see the module docs.
pub fn gnmi(truth: &CommunityCover, found: &CommunityCover) -> Result<f64> {
    if truth.n() != found.n() {
        return Err(Error::LengthMismatch(truth.n(), found.n()));
    }
    if truth.n() == 0 {
        return Err(Error::EmptyPartition);
    }
    let empty = |c: &CommunityCover| c.memberships().iter().all(Vec::is_empty);
    if empty(truth) || empty(found) {
        log::warn!("a cover has no assigned nodes; generalized NMI reported as 0");
        return Ok(0.0);
    }
    let (t, f) = (truth.memberships(), found.memberships());
    Ok(normalized_mi(t, f).unwrap_or_else(|| {
        // Both constant covers agree up to relabeling; one constant cover against
        // a varying one carries no information.
        let constant = |m: &[Vec<usize>]| m.iter().all(|x| x == &m[0]);
        if constant(t) && constant(f) {
            1.0
        } else {
            log::warn!("a cover puts every node in the same communities; generalized NMI reported as 0");
            0.0
        }
    }))
}

/// `e^{H_v}` with `H_v = −Σ_j U_vj ln U_vj` for each requested node.
pub fn exponential_entropy(u: &ContinuousMembership, nodes: &[usize]) -> Vec<f64> {
    nodes
        .iter()
        .map(|&v| {
            let h: f64 = u
                .values()
                .row(v)
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.ln())
                .sum();
            h.exp()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn hp(v: &[usize]) -> HardPartition {
        HardPartition::new(v.to_vec())
    }

    #[test]
    fn nmi_identity_and_independence() {
        let p = hp(&[0, 0, 1, 1]);
        assert!((nmi(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        assert!(nmi(&p, &hp(&[0, 1, 0, 1])).unwrap().abs() < 1e-12);
    }

    #[test]
    fn nmi_refinement_case() {
        // Hand evaluation with exact counts:
        //   n_ij: (A,A)=2, (B,B)=1, (B,C)=1; n = 4
        //   numerator   = 2 ln(2·4/(2·2)) + ln(4/(2·1)) + ln(4/(2·1)) = 4 ln 2
        //   H terms     = 4 ln(1/2) and 2 ln(1/2) + 2 ln(1/4) = −6 ln 2
        //   NMI         = 4 ln2 / sqrt(4 ln2 · 6 ln2) = 4/sqrt(24) = sqrt(2/3)
        let v = nmi(&hp(&[0, 0, 1, 1]), &hp(&[0, 0, 1, 2])).unwrap();
        assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn nmi_errors_and_degenerate() {
        assert_eq!(nmi(&hp(&[0]), &hp(&[0, 1])), Err(Error::LengthMismatch(1, 2)));
        assert_eq!(nmi(&hp(&[]), &hp(&[])), Err(Error::EmptyPartition));
        assert_eq!(nmi(&hp(&[0, 0, 0]), &hp(&[0, 1, 2])).unwrap(), 0.0);
    }

    #[test]
    fn gnmi_identity_and_overlap_loss() {
        let truth = CommunityCover::new(vec![vec![0], vec![0, 1], vec![1], vec![1], vec![0]], 2).unwrap();
        assert!((gnmi(&truth, &truth).unwrap() - 1.0).abs() < 1e-12);
        let mut m = truth.memberships().to_vec();
        m[1] = vec![0];
        let found = CommunityCover::new(m, 2).unwrap();
        assert!(gnmi(&truth, &found).unwrap() < 1.0);
    }

    #[test]
    fn gnmi_constant_covers() {
        let all = CommunityCover::new(vec![vec![0]; 3], 1).unwrap();
        assert_eq!(gnmi(&all, &all).unwrap(), 1.0);
        assert_eq!(gnmi(&all, &CommunityCover::from_labels(&[0, 1, 1])).unwrap(), 0.0);
    }

    #[test]
    fn gnmi_empty_cover_is_zero() {
        let truth = CommunityCover::from_labels(&[0, 1, 0]);
        let empty = CommunityCover::new(vec![vec![]; 3], 2).unwrap();
        assert_eq!(gnmi(&truth, &empty).unwrap(), 0.0);
    }

    #[test]
    fn entropy_examples() {
        let u = ContinuousMembership::new(array![[1.0, 0.0], [0.5, 0.5], [0.9, 0.1]]).unwrap();
        let e = exponential_entropy(&u, &[0, 1, 2]);
        assert_eq!(e[0], 1.0);
        assert!((e[1] - 2.0).abs() < 1e-12);
        let oracle = (-(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln())).exp();
        assert!((e[2] - oracle).abs() < 1e-12);
    }
}
