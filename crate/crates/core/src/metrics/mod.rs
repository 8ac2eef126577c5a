//! Bibliometric indicators over a partitioned citation network.

mod matrix;
mod rank_size;

pub use matrix::{format_value, MatrixKind, MetricsMatrix, DECIMALS};
pub use rank_size::{rank_size_fit, FitResult};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{CommunityError, Partition};
use crate::graph::{CitationGraph, NodeSet};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("need at least 2 sizes, got {0}")]
    TooFewPoints(usize),
    #[error("sizes must be strictly positive, got {0}")]
    NonPositiveSize(f64),
    #[error("unknown community label {0}")]
    UnknownLabel(u32),
    #[error("community {0} has no outgoing citation link")]
    NoOutgoingLinks(u32),
    #[error("node set `{0}` is empty")]
    EmptySet(String),
    #[error("need at least 2 node sets")]
    TooFewSets,
    #[error("subnetwork `{0}` has no counted node")]
    NoCountedNodes(String),
    #[error("z-normalization needs at least 2 rows")]
    TooFewRows,
    #[error("not a probability vector: {0}")]
    InvalidProbability(String),
    #[error(transparent)]
    Community(#[from] CommunityError),
}

/// Citation links leaving each selected community, in percent, by receiving
/// community. The last column, `Others`, collects links to communities that
/// were not selected.
pub fn inter_citation_matrix(
    g: &CitationGraph,
    p: &Partition,
    selected: &[u32],
) -> Result<MetricsMatrix, MetricsError> {
    if !g.is_directed() {
        return Err(CommunityError::UndirectedInput.into());
    }
    let k = p.community_count();
    if let Some(&bad) = selected.iter().find(|&&l| l as usize >= k) {
        return Err(MetricsError::UnknownLabel(bad));
    }
    let labels = p.labels_for(g)?;
    let others = selected.len();
    let mut column = vec![others; k];
    for (col, &l) in selected.iter().enumerate() {
        column[l as usize] = col;
    }
    let mut counts = vec![vec![0usize; others + 1]; k];
    for &(u, v) in g.edges() {
        let (cu, cv) = (labels[u as usize] as usize, labels[v as usize] as usize);
        counts[cu][column[cv]] += 1;
    }
    let mut values = Vec::with_capacity(selected.len());
    for &l in selected {
        let row = &counts[l as usize];
        let total: usize = row.iter().sum();
        if total == 0 {
            return Err(MetricsError::NoOutgoingLinks(l));
        }
        values.push(row.iter().map(|&c| 100.0 * c as f64 / total as f64).collect());
    }
    let mut col_labels: Vec<String> = selected.iter().map(u32::to_string).collect();
    col_labels.push("Others".to_string());
    Ok(MetricsMatrix {
        row_labels: selected.iter().map(u32::to_string).collect(),
        col_labels,
        values,
        kind: MatrixKind::InterCitationPercent,
    })
}

/// Set-overlap index used for chapter similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapIndex {
    /// `2 |A ∩ B| / (|A| + |B|)`.
    #[default]
    Dice,
    /// `|A ∩ B| / |A ∪ B|`.
    Jaccard,
}

/// Similarity of two node sets, `2 |A ∩ B| / (|A| + |B|)`.
pub fn jaccard_similarity(a: &NodeSet, b: &NodeSet) -> Result<f64, MetricsError> {
    overlap(a, b, OverlapIndex::Dice)
}

pub fn overlap(a: &NodeSet, b: &NodeSet, index: OverlapIndex) -> Result<f64, MetricsError> {
    for s in [a, b] {
        if s.is_empty() {
            return Err(MetricsError::EmptySet(s.label.clone()));
        }
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let common = small.members.iter().filter(|m| large.members.contains(*m)).count() as f64;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    Ok(match index {
        OverlapIndex::Dice => 2.0 * common / (na + nb),
        OverlapIndex::Jaccard => common / (na + nb - common),
    })
}

/// Pairwise similarity of labeled node sets: symmetric, unit diagonal.
pub fn jaccard_matrix(sets: &[NodeSet], index: OverlapIndex) -> Result<MetricsMatrix, MetricsError> {
    if sets.len() < 2 {
        return Err(MetricsError::TooFewSets);
    }
    let n = sets.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let s = if i == j {
                if sets[i].is_empty() {
                    return Err(MetricsError::EmptySet(sets[i].label.clone()));
                }
                1.0
            } else {
                overlap(&sets[i], &sets[j], index)?
            };
            values[i][j] = s;
            values[j][i] = s;
        }
    }
    let labels: Vec<String> = sets.iter().map(|s| s.label.clone()).collect();
    Ok(MetricsMatrix {
        row_labels: labels.clone(),
        col_labels: labels,
        values,
        kind: MatrixKind::Jaccard,
    })
}

/// Which subnetwork nodes enter the composition counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelFilter {
    /// Only papers directly citing the seeds (crawl depth 1).
    #[default]
    FirstLevelOnly,
    AllNodes,
}

/// Row `i`: share of subnetwork `i`'s counted nodes in each community.
pub fn composition_matrix(
    subnetworks: &[NodeSet],
    g: &CitationGraph,
    p: &Partition,
    filter: LevelFilter,
) -> Result<MetricsMatrix, MetricsError> {
    let k = p.community_count();
    let mut values = Vec::with_capacity(subnetworks.len());
    for sub in subnetworks {
        let mut counts = vec![0usize; k];
        let mut total = 0usize;
        for id in &sub.members {
            if filter == LevelFilter::FirstLevelOnly {
                let i = g
                    .index_of(id)
                    .ok_or_else(|| CommunityError::Uncovered(id.clone()))?;
                if g.attrs(i).depth != 1 {
                    continue;
                }
            }
            let label = p.label_of(id).ok_or_else(|| CommunityError::Uncovered(id.clone()))?;
            counts[label as usize] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(MetricsError::NoCountedNodes(sub.label.clone()));
        }
        values.push(counts.iter().map(|&c| c as f64 / total as f64).collect());
    }
    Ok(MetricsMatrix {
        row_labels: subnetworks.iter().map(|s| s.label.clone()).collect(),
        col_labels: (0..k).map(|l| l.to_string()).collect(),
        values,
        kind: MatrixKind::CompositionProb,
    })
}

/// Denominator of the column standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdKind {
    /// Divide by `n`: the rows are the whole population.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

/// Column-wise z-scores `(x - mean) / std` with the population standard
/// deviation. Constant columns become zeros.
pub fn znormalize_columns(m: &MetricsMatrix) -> Result<MetricsMatrix, MetricsError> {
    znormalize_columns_with(m, StdKind::Population)
}

pub fn znormalize_columns_with(m: &MetricsMatrix, std_kind: StdKind) -> Result<MetricsMatrix, MetricsError> {
    let rows = m.values.len();
    if rows < 2 {
        return Err(MetricsError::TooFewRows);
    }
    let cols = m.col_labels.len();
    let mut values = vec![vec![0.0; cols]; rows];
    for j in 0..cols {
        let column: Vec<f64> = m.values.iter().map(|r| r[j]).collect();
        let mean = column.iter().sum::<f64>() / rows as f64;
        let denom = match std_kind {
            StdKind::Population => rows as f64,
            StdKind::Sample => (rows - 1) as f64,
        };
        let var = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / denom;
        let std = var.sqrt();
        // A column equal up to rounding is treated as constant.
        if std <= 1e-12 * mean.abs().max(1.0) {
            continue;
        }
        for (i, x) in column.iter().enumerate() {
            values[i][j] = (x - mean) / std + 0.0;
        }
    }
    Ok(MetricsMatrix {
        row_labels: m.row_labels.clone(),
        col_labels: m.col_labels.clone(),
        values,
        kind: MatrixKind::CompositionZnorm,
    })
}

/// Herfindahl concentration `Σ p_j²` of a probability vector.
///
/// The squares are formed without rounding error and summed exactly, so
/// the result is the correctly rounded value of the sum for the given
/// inputs.
pub fn herfindahl_index(row: &[f64]) -> Result<f64, MetricsError> {
    if row.is_empty() {
        return Err(MetricsError::InvalidProbability("empty vector".into()));
    }
    if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(MetricsError::InvalidProbability(format!("entry {x}")));
    }
    let total = exact_sum(row.iter().copied());
    if (total - 1.0).abs() > 1e-6 {
        return Err(MetricsError::InvalidProbability(format!("entries sum to {total}")));
    }
    Ok(exact_sum(row.iter().flat_map(|&p| {
        let hi = p * p;
        let lo = p.mul_add(p, -hi);
        [hi, lo]
    })))
}

/// Herfindahl index of every row of a probability matrix.
pub fn herfindahl_rows(m: &MetricsMatrix) -> Result<Vec<(String, f64)>, MetricsError> {
    m.row_labels
        .iter()
        .zip(&m.values)
        .map(|(label, row)| Ok((label.clone(), herfindahl_index(row)?)))
        .collect()
}

/// Correctly rounded sum of finite values (Shewchuk's exact partials).
fn exact_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut n) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Round half-way cases using the sign of the next partial.
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// Nodes shared by two sets.
pub fn common_nodes(a: &NodeSet, b: &NodeSet) -> BTreeSet<String> {
    a.members.intersection(&b.members).cloned().collect()
}
