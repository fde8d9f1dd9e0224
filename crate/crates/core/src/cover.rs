use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node → set of communities. An empty set marks an outlier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityCover {
    memberships: Vec<Vec<usize>>,
    communities: usize,
}

impl CommunityCover {
    pub fn new(memberships: Vec<Vec<usize>>, communities: usize) -> Result<Self> {
        let mut memberships = memberships;
        for (node, m) in memberships.iter_mut().enumerate() {
            m.sort_unstable();
            m.dedup();
            if let Some(&bad) = m.iter().find(|&&a| a >= communities) {
                return Err(Error::OutOfRange(format!(
                    "node {node} assigned to community {bad} of {communities}"
                )));
            }
        }
        Ok(CommunityCover {
            memberships,
            communities,
        })
    }

    /// One community per node.
    pub fn from_labels(labels: &[usize]) -> Self {
        let c = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
        CommunityCover {
            memberships: labels.iter().map(|&l| vec![l]).collect(),
            communities: c,
        }
    }

    /// Row supports of a 0/1 membership matrix.
    pub fn from_indicator(u: &Array2<u8>) -> Self {
        let memberships = u
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        CommunityCover {
            memberships,
            communities: u.ncols(),
        }
    }

    pub fn n(&self) -> usize {
        self.memberships.len()
    }

    pub fn communities(&self) -> usize {
        self.communities
    }

    pub fn memberships(&self) -> &[Vec<usize>] {
        &self.memberships
    }

    pub fn of(&self, node: usize) -> &[usize] {
        &self.memberships[node]
    }

    pub fn members(&self, alpha: usize) -> Vec<usize> {
        self.memberships
            .iter()
            .enumerate()
            .filter(|(_, m)| m.binary_search(&alpha).is_ok())
            .map(|(v, _)| v)
            .collect()
    }

    pub fn outliers(&self) -> usize {
        self.memberships.iter().filter(|m| m.is_empty()).count()
    }

    pub fn overlapping(&self) -> usize {
        self.memberships.iter().filter(|m| m.len() > 1).count()
    }

    /// Maximum membership count among the members of `alpha`; 0 when empty.
    pub fn max_memberships(&self, alpha: usize) -> usize {
        self.memberships
            .iter()
            .filter(|m| m.binary_search(&alpha).is_ok())
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }

    /// Cover restricted to `nodes`, in the given order.
    pub fn restrict(&self, nodes: &[usize]) -> CommunityCover {
        CommunityCover {
            memberships: nodes.iter().map(|&v| self.memberships[v].clone()).collect(),
            communities: self.communities,
        }
    }

    pub fn to_indicator(&self) -> Array2<u8> {
        let mut u = Array2::zeros((self.n(), self.communities));
        for (v, m) in self.memberships.iter().enumerate() {
            for &a in m {
                u[[v, a]] = 1;
            }
        }
        u
    }
}
