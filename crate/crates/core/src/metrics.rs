//! Matching estimated sources to true ones, the average error distance and
//! the minimum infection-region covering fraction.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graph::{Graph, NodeId, UNREACHED};
use crate::partition::Partition;

/// Matching sizes above this are refused; the search is exhaustive.
pub const MAX_MATCHING: usize = 8;

/// Minimum-cost injective pairing between true and estimated sources.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    /// `(index into truth, index into estimate)` pairs, by truth index.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of hop distances over the pairs.
    pub cost: usize,
}

impl Matching {
    /// Estimate index matched to truth index `i`, if any.
    pub fn estimate_for(&self, i: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == i).map(|p| p.1)
    }
}

/// Pairs `min(|est|, |truth|)` sources so that the summed hop distance is
/// minimal. Among optimal pairings the lexicographically first (in truth
/// order) wins.
pub fn match_sources(g: &Graph, est: &[NodeId], truth: &[NodeId]) -> Result<Matching> {
    if est.is_empty() || truth.is_empty() {
        return arg("both source sets must be non-empty");
    }
    if est.len().max(truth.len()) > MAX_MATCHING {
        return Err(Error::Refused(format!(
            "exhaustive matching is limited to {MAX_MATCHING} sources"
        )));
    }
    for &v in est.iter().chain(truth) {
        if v >= g.node_count() {
            return arg(format!("node {v} outside graph of {} nodes", g.node_count()));
        }
    }
    // dist[i][j] = d(truth[i], est[j])
    let mut dist = Vec::with_capacity(truth.len());
    for &t in truth {
        let d = g.hop_distances(t);
        let row: Vec<usize> = est.iter().map(|&e| d[e]).collect();
        if row.contains(&UNREACHED) {
            return arg(format!("true source {t} cannot reach every estimate"));
        }
        dist.push(row);
    }

    // Injections from the smaller side into the larger one.
    let truth_smaller = truth.len() <= est.len();
    let (small, large) = if truth_smaller {
        (truth.len(), est.len())
    } else {
        (est.len(), truth.len())
    };
    let cost_of = |s: usize, l: usize| if truth_smaller { dist[s][l] } else { dist[l][s] };
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut current = Vec::with_capacity(small);
    let mut used = vec![false; large];
    fn search(
        s: usize,
        small: usize,
        large: usize,
        acc: usize,
        cost_of: &dyn Fn(usize, usize) -> usize,
        current: &mut Vec<usize>,
        used: &mut [bool],
        best: &mut Option<(usize, Vec<usize>)>,
    ) {
        if let Some((b, _)) = best {
            if acc >= *b {
                return;
            }
        }
        if s == small {
            *best = Some((acc, current.clone()));
            return;
        }
        for l in 0..large {
            if !used[l] {
                used[l] = true;
                current.push(l);
                search(s + 1, small, large, acc + cost_of(s, l), cost_of, current, used, best);
                current.pop();
                used[l] = false;
            }
        }
    }
    search(0, small, large, 0, &cost_of, &mut current, &mut used, &mut best);
    let (cost, assign) = best.expect("non-empty sets have a matching");
    let mut pairs: Vec<(usize, usize)> = assign
        .into_iter()
        .enumerate()
        .map(|(s, l)| if truth_smaller { (s, l) } else { (l, s) })
        .collect();
    pairs.sort_unstable();
    Ok(Matching { pairs, cost })
}

/// Penalty weight per miscounted source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Penalty {
    Constant(f64),
    Named(PenaltyName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyName {
    /// The diameter of the infection graph.
    Diameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub eta_penalty: Penalty,
}

impl MetricConfig {
    pub fn constant(eta: f64) -> MetricConfig {
        MetricConfig {
            eta_penalty: Penalty::Constant(eta),
        }
    }

    pub fn diameter() -> MetricConfig {
        MetricConfig {
            eta_penalty: Penalty::Named(PenaltyName::Diameter),
        }
    }

    fn resolve(&self, g: &Graph) -> Result<f64> {
        match self.eta_penalty {
            Penalty::Constant(x) if x >= 0.0 && x.is_finite() => Ok(x),
            Penalty::Constant(x) => arg(format!("penalty must be nonnegative, got {x}")),
            Penalty::Named(PenaltyName::Diameter) => Ok(g.diameter() as f64),
        }
    }
}

/// `(sum of matched distances + eta * ||est| - |truth||) / |truth|`.
pub fn error_distance(g: &Graph, est: &[NodeId], truth: &[NodeId], cfg: &MetricConfig) -> Result<f64> {
    let m = match_sources(g, est, truth)?;
    let eta = cfg.resolve(g)?;
    Ok(error_distance_with(&m, est.len(), truth.len(), eta))
}

/// [`error_distance`] for an existing matching and a resolved penalty.
pub fn error_distance_with(m: &Matching, est_len: usize, truth_len: usize, eta: f64) -> f64 {
    (m.cost as f64 + eta * est_len.abs_diff(truth_len) as f64) / truth_len as f64
}

/// Minimum over true regions of the fraction of the region covered by its
/// matched estimated region; unmatched true regions count as uncovered.
pub fn region_covering(truth: &Partition, est: &Partition, m: &Matching) -> Result<f64> {
    if truth.assignment().keys().ne(est.assignment().keys()) {
        return arg("partitions cover different node sets");
    }
    let sizes: Vec<usize> = truth.regions().iter().map(Vec::len).collect();
    let mut hits = vec![0usize; truth.region_count()];
    for (&v, &r) in truth.assignment() {
        if let Some(e) = m.estimate_for(r) {
            if est.region_of(v) == Some(e) {
                hits[r] += 1;
            }
        }
    }
    Ok(hits
        .iter()
        .zip(&sizes)
        .map(|(&h, &s)| h as f64 / s as f64)
        .fold(1.0, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn split(n: usize, cut: usize, centers: Vec<NodeId>) -> Partition {
        let m: BTreeMap<NodeId, usize> = (0..n).map(|v| (v, usize::from(v >= cut))).collect();
        Partition::new(centers, m).unwrap()
    }

    #[test]
    fn matching_examples() {
        let g = path(10);
        assert_eq!(match_sources(&g, &[3], &[3]).unwrap().cost, 0);
        let m = match_sources(&g, &[9, 0], &[0, 9]).unwrap();
        assert_eq!((m.cost, m.pairs.clone()), (0, vec![(0, 1), (1, 0)]));
        let g = path(5);
        let m = match_sources(&g, &[1], &[0, 4]).unwrap();
        assert_eq!((m.cost, m.pairs), (1, vec![(0, 0)]));
        assert!(match_sources(&g, &[], &[1]).is_err());
    }

    #[test]
    fn error_distance_examples() {
        let g = path(5);
        for eta in [0.0, 3.0] {
            assert_eq!(error_distance(&g, &[1, 3], &[3, 1], &MetricConfig::constant(eta)).unwrap(), 0.0);
        }
        assert_eq!(error_distance(&g, &[0], &[0, 4], &MetricConfig::constant(0.0)).unwrap(), 0.0);
        assert_eq!(error_distance(&g, &[0], &[0, 4], &MetricConfig::diameter()).unwrap(), 2.0);
        assert_eq!(error_distance(&g, &[2, 0], &[2], &MetricConfig::diameter()).unwrap(), 4.0);
        assert!(error_distance(&g, &[0], &[1], &MetricConfig::constant(-1.0)).is_err());
    }

    #[test]
    fn covering_examples() {
        let truth = split(5, 3, vec![0, 4]);
        let m = Matching {
            pairs: vec![(0, 0), (1, 1)],
            cost: 0,
        };
        assert_eq!(region_covering(&truth, &truth, &m).unwrap(), 1.0);
        let est = split(5, 2, vec![0, 4]);
        assert!((region_covering(&truth, &est, &m).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let lone = Partition::whole(0, 0..5);
        let m = Matching {
            pairs: vec![(0, 0)],
            cost: 0,
        };
        assert_eq!(region_covering(&truth, &lone, &m).unwrap(), 0.0);
        let other = Partition::whole(0, 0..4);
        assert!(region_covering(&truth, &other, &m).is_err());
    }

    #[test]
    fn penalty_serde() {
        let c: MetricConfig = serde_json::from_str(r#"{"eta_penalty":"diameter"}"#).unwrap();
        assert_eq!(c, MetricConfig::diameter());
        let c: MetricConfig = serde_json::from_str(r#"{"eta_penalty":2.5}"#).unwrap();
        assert_eq!(c, MetricConfig::constant(2.5));
    }
}
