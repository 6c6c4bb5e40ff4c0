//! Scoring recommendations against held-out edges, and information-gain
//! analysis of link instances.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::graph::EdgeList;
use crate::prediction::{PruneSplit, Recommendations};
use crate::rng::rng_from_seed;

/// Precision and recall are reported for every list length `1..=EVAL_DEPTH`.
pub const EVAL_DEPTH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Ratio of sums over targets.
    #[default]
    Micro,
    /// Mean of per-target ratios.
    PerTarget,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRow {
    pub n: usize,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    /// Targets with at least one held-out edge.
    pub targets: usize,
    /// Parameter echo, rendered into report headers.
    pub config: Vec<(String, String)>,
}

impl EvalReport {
    pub fn at(&self, n: usize) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn precision_at(&self, n: usize) -> f64 {
        self.at(n).map_or(f64::NAN, |r| r.precision)
    }

    pub fn recall_at(&self, n: usize) -> f64 {
        self.at(n).map_or(f64::NAN, |r| r.recall)
    }

    pub fn with_config(mut self, config: Vec<(String, String)>) -> Self {
        self.config = config;
        self
    }

    /// Row-wise mean of several reports over the same depths.
    pub fn mean(reports: &[EvalReport]) -> Result<EvalReport> {
        let first = reports
            .first()
            .ok_or_else(|| Error::param("cannot average zero reports"))?;
        let k = reports.len() as f64;
        let rows = first
            .rows
            .iter()
            .map(|row| {
                let (p, r) = reports.iter().fold((0.0, 0.0), |(p, r), rep| {
                    (p + rep.precision_at(row.n), r + rep.recall_at(row.n))
                });
                EvalRow {
                    n: row.n,
                    precision: p / k,
                    recall: r / k,
                }
            })
            .collect();
        Ok(EvalReport {
            rows,
            targets: reports.iter().map(|r| r.targets).sum::<usize>() / reports.len(),
            config: first.config.clone(),
        })
    }
}

/// P@N and R@N for N = 1..=10.
///
/// A recommended pair counts as a hit when it is a held-out edge. Only
/// targets with at least one held-out edge take part. Each held-out edge is a
/// miss for both of its endpoints.
pub fn evaluate(
    recs: &Recommendations,
    held_out: &EdgeList,
    averaging: Averaging,
) -> Result<EvalReport> {
    let held_out = held_out.normalized();
    if held_out.is_empty() {
        return Err(Error::EmptyHeldOut);
    }
    let n = recs.lists.len().max(held_out.implied_vertex_count());
    let mut missing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, v) in held_out.iter() {
        missing[u].push(v);
        missing[v].push(u);
    }
    for row in missing.iter_mut() {
        row.sort_unstable();
    }
    let empty = Vec::new();
    let mut hits = [0usize; EVAL_DEPTH];
    let mut shown = [0usize; EVAL_DEPTH];
    let mut total_misses = 0usize;
    let mut mean_p = [0.0f64; EVAL_DEPTH];
    let mut mean_r = [0.0f64; EVAL_DEPTH];
    let mut precision_targets = [0usize; EVAL_DEPTH];
    let mut targets = 0usize;
    for (u, miss) in missing.iter().enumerate() {
        if miss.is_empty() {
            continue;
        }
        targets += 1;
        total_misses += miss.len();
        let list = recs.lists.get(u).unwrap_or(&empty);
        let mut running = 0;
        for depth in 0..EVAL_DEPTH {
            if let Some(&(cand, _)) = list.get(depth) {
                if miss.binary_search(&cand).is_ok() {
                    running += 1;
                }
            }
            let len = list.len().min(depth + 1);
            hits[depth] += running;
            shown[depth] += len;
            if len > 0 {
                mean_p[depth] += running as f64 / len as f64;
                precision_targets[depth] += 1;
            }
            mean_r[depth] += running as f64 / miss.len() as f64;
        }
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    let rows = (0..EVAL_DEPTH)
        .map(|d| {
            let (precision, recall) = match averaging {
                Averaging::Micro => (
                    ratio(hits[d] as f64, shown[d] as f64),
                    ratio(hits[d] as f64, total_misses as f64),
                ),
                Averaging::PerTarget => (
                    ratio(mean_p[d], precision_targets[d] as f64),
                    ratio(mean_r[d], targets as f64),
                ),
            };
            EvalRow {
                n: d + 1,
                precision,
                recall,
            }
        })
        .collect();
    Ok(EvalReport {
        rows,
        targets,
        config: Vec::new(),
    })
}

/// A labelled vertex pair with the scores of both endpoints, read from the
/// observed graph. Suffix 1 is the target, suffix 2 the candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkInstance {
    pub target: usize,
    pub candidate: usize,
    pub auth1: f64,
    pub auth2: f64,
    pub deg1: f64,
    pub deg2: f64,
    pub trans1: f64,
    pub trans2: f64,
    pub label: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceFeature {
    Authority1,
    Authority2,
    Degree1,
    Degree2,
    Transitivity1,
    Transitivity2,
}

impl InstanceFeature {
    pub const ALL: [InstanceFeature; 6] = [
        InstanceFeature::Authority1,
        InstanceFeature::Authority2,
        InstanceFeature::Degree1,
        InstanceFeature::Degree2,
        InstanceFeature::Transitivity1,
        InstanceFeature::Transitivity2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceFeature::Authority1 => "authority_1",
            InstanceFeature::Authority2 => "authority_2",
            InstanceFeature::Degree1 => "degree_1",
            InstanceFeature::Degree2 => "degree_2",
            InstanceFeature::Transitivity1 => "transitivity_1",
            InstanceFeature::Transitivity2 => "transitivity_2",
        }
    }

    pub fn value(self, inst: &LinkInstance) -> f64 {
        match self {
            InstanceFeature::Authority1 => inst.auth1,
            InstanceFeature::Authority2 => inst.auth2,
            InstanceFeature::Degree1 => inst.deg1,
            InstanceFeature::Degree2 => inst.deg2,
            InstanceFeature::Transitivity1 => inst.trans1,
            InstanceFeature::Transitivity2 => inst.trans2,
        }
    }
}

impl fmt::Display for InstanceFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceFeature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InstanceFeature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::param(format!("unknown instance feature `{s}`")))
    }
}

fn make_instance(
    split: &PruneSplit,
    features: &FeatureSet,
    a: usize,
    b: usize,
    label: bool,
) -> LinkInstance {
    let g = &split.observed;
    let (target, candidate) = if (g.degree(a), a) <= (g.degree(b), b) {
        (a, b)
    } else {
        (b, a)
    };
    LinkInstance {
        target,
        candidate,
        auth1: features.authority.values[target],
        auth2: features.authority.values[candidate],
        deg1: features.degree.values[target],
        deg2: features.degree.values[candidate],
        trans1: features.transitivity.values[target],
        trans2: features.transitivity.values[candidate],
        label,
    }
}

/// One positive instance per held-out edge and `neg_ratio` negatives per
/// positive, drawn uniformly from pairs that are not edges of the original
/// graph. The endpoint with fewer observed neighbours is the target (ties:
/// lower id).
pub fn build_instances(
    split: &PruneSplit,
    features: &FeatureSet,
    neg_ratio: usize,
    seed: u64,
) -> Result<Vec<LinkInstance>> {
    if neg_ratio < 1 {
        return Err(Error::param("neg_ratio must be >= 1"));
    }
    let n = split.observed.vertex_count();
    for scores in [
        &features.authority,
        &features.degree,
        &features.transitivity,
    ] {
        if scores.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: scores.len(),
            });
        }
    }
    let original = split.original()?;
    let positives = split.held_out.normalized();
    let wanted = positives.len() * neg_ratio;
    let non_edges = n * n.saturating_sub(1) / 2 - original.edge_count();
    if wanted > non_edges {
        return Err(Error::Degenerate(format!(
            "graph too dense: {wanted} negatives requested, only {non_edges} non-edges exist"
        )));
    }
    let mut out: Vec<LinkInstance> = positives
        .iter()
        .map(|(a, b)| make_instance(split, features, a, b, true))
        .collect();
    let mut rng = rng_from_seed(seed);
    let negatives: Vec<(usize, usize)> = if 4 * wanted >= non_edges {
        let all: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !original.contains_edge(u, v))
            .collect();
        let mut picked = index::sample(&mut rng, all.len(), wanted).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| all[i]).collect()
    } else {
        let mut seen = HashSet::with_capacity(wanted);
        let mut pairs = Vec::with_capacity(wanted);
        while pairs.len() < wanted {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v || original.contains_edge(u, v) {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                pairs.push(key);
            }
        }
        pairs
    };
    out.extend(
        negatives
            .into_iter()
            .map(|(a, b)| make_instance(split, features, a, b, false)),
    );
    Ok(out)
}

/// Shannon entropy in bits of a two-class count.
pub fn binary_entropy(pos: usize, neg: usize) -> f64 {
    let total = (pos + neg) as f64;
    [pos, neg]
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Equal-frequency bin index for every value.
///
/// Values are ranked; tied values share their mid-rank and therefore their
/// bin, so a constant column falls into a single bin. Bin boundaries depend
/// only on the order of the values.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let len = values.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0; len];
    let mut start = 0;
    while start < len {
        let mut end = start + 1;
        while end < len && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let mid_rank = (start + end - 1) as f64 / 2.0;
        let bin = (((mid_rank + 0.5) * bins as f64 / len as f64).floor() as usize).min(bins - 1);
        for &i in &order[start..end] {
            out[i] = bin;
        }
        start = end;
    }
    out
}

/// `H(label) − H(label | binned values)` in bits.
pub fn information_gain_of(values: &[f64], labels: &[bool], bins: usize) -> Result<f64> {
    if values.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: values.len(),
        });
    }
    if bins < 1 {
        return Err(Error::param("need at least one bin"));
    }
    if values.len() < 2 {
        return Err(Error::Degenerate("need at least two instances".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite feature value {bad}")));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Degenerate("instances carry a single label".into()));
    }
    let binned = equal_frequency_bins(values, bins);
    let mut counts = vec![(0usize, 0usize); bins];
    for (&b, &l) in binned.iter().zip(labels) {
        if l {
            counts[b].0 += 1;
        } else {
            counts[b].1 += 1;
        }
    }
    let total = labels.len() as f64;
    let conditional: f64 = counts
        .iter()
        .filter(|(p, q)| p + q > 0)
        .map(|&(p, q)| (p + q) as f64 / total * binary_entropy(p, q))
        .sum();
    Ok((binary_entropy(pos, neg) - conditional).max(0.0))
}

pub fn information_gain(
    instances: &[LinkInstance],
    feature: InstanceFeature,
    bins: usize,
) -> Result<f64> {
    let values: Vec<f64> = instances.iter().map(|i| feature.value(i)).collect();
    let labels: Vec<bool> = instances.iter().map(|i| i.label).collect();
    information_gain_of(&values, &labels, bins)
}

/// Information gain of all six features, highest first (ties by name).
pub fn rank_features(
    instances: &[LinkInstance],
    bins: usize,
) -> Result<Vec<(InstanceFeature, f64)>> {
    let mut out = InstanceFeature::ALL
        .into_iter()
        .map(|f| Ok((f, information_gain(instances, f, bins)?)))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.name().cmp(b.0.name())));
    Ok(out)
}
