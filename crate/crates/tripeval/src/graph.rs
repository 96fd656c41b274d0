//! Origin-destination trip graphs and the similarity score between them.
//!
//! A trip table induces a directed graph over zones: every row adds one edge
//! from its pickup zone to its drop-off zone. The edge-count fractions form a
//! probability distribution over ordered zone pairs, and two graphs are
//! compared by one minus the total variation distance between those
//! distributions.

use std::collections::BTreeMap;
use std::io::Write;

use crate::data::DataTable;
use crate::error::{Error, Result};

/// Directed origin-destination graph with integer edge counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripGraph {
    zone_ids: Vec<String>,
    /// (pickup zone, dropoff zone) -> trip count; only counts >= 1 stored.
    edge_counts: BTreeMap<(String, String), u64>,
    total_trips: u64,
}

impl TripGraph {
    pub fn zone_ids(&self) -> &[String] {
        &self.zone_ids
    }

    pub fn edge_counts(&self) -> &BTreeMap<(String, String), u64> {
        &self.edge_counts
    }

    pub fn total_trips(&self) -> u64 {
        self.total_trips
    }

    /// The same graph with self-loop trips (pickup zone == dropoff zone)
    /// removed. Errors if nothing remains.
    pub fn without_self_loops(&self) -> Result<TripGraph> {
        let edge_counts: BTreeMap<_, _> = self
            .edge_counts
            .iter()
            .filter(|((i, j), _)| i != j)
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        if edge_counts.is_empty() {
            return Err(Error::EmptyGraph);
        }
        Ok(from_counts(edge_counts))
    }
}

fn from_counts(edge_counts: BTreeMap<(String, String), u64>) -> TripGraph {
    let mut zones: Vec<String> = edge_counts
        .keys()
        .flat_map(|(i, j)| [i.clone(), j.clone()])
        .collect();
    zones.sort();
    zones.dedup();
    let total = edge_counts.values().sum();
    TripGraph {
        zone_ids: zones,
        edge_counts,
        total_trips: total,
    }
}

/// Count one directed edge per row of `table`, pickup zone to dropoff zone.
/// Self-loops are kept; use [`TripGraph::without_self_loops`] to drop them.
pub fn build_graph(table: &DataTable, pickup_col: &str, dropoff_col: &str) -> Result<TripGraph> {
    let schema = table.schema();
    for name in [pickup_col, dropoff_col] {
        if !matches!(schema.kind_of(name)?, crate::data::ColumnKind::Categorical) {
            return Err(Error::NotCategorical(name.to_string()));
        }
    }
    if table.n_rows() == 0 {
        return Err(Error::EmptyGraph);
    }
    let pu = schema.index_of(pickup_col)?;
    let dc = schema.index_of(dropoff_col)?;
    let mut edge_counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for row in table.rows() {
        let i = row[pu].as_str().expect("categorical cell").to_string();
        let j = row[dc].as_str().expect("categorical cell").to_string();
        *edge_counts.entry((i, j)).or_insert(0) += 1;
    }
    Ok(from_counts(edge_counts))
}

/// Edge-count fractions of a graph: a probability distribution over ordered
/// zone pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistribution {
    probabilities: BTreeMap<(String, String), f64>,
}

impl EdgeDistribution {
    pub fn probabilities(&self) -> &BTreeMap<(String, String), f64> {
        &self.probabilities
    }

    /// Build directly from probabilities; they must be in (0, 1] and sum
    /// to 1 within 1e-12.
    pub fn from_probabilities(probabilities: BTreeMap<(String, String), f64>) -> Result<Self> {
        let sum: f64 = probabilities.values().sum();
        if probabilities.is_empty() || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "edge probabilities sum to {sum}, expected 1"
            )));
        }
        if probabilities.values().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::InvalidParameter(
                "edge probabilities must lie in (0, 1]".into(),
            ));
        }
        Ok(EdgeDistribution { probabilities })
    }
}

/// Divide every edge count by the graph total.
pub fn edge_distribution(graph: &TripGraph) -> Result<EdgeDistribution> {
    if graph.total_trips == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = graph.total_trips as f64;
    Ok(EdgeDistribution {
        probabilities: graph
            .edge_counts
            .iter()
            .map(|(k, &c)| (k.clone(), c as f64 / n))
            .collect(),
    })
}

/// Similarity between two edge distributions: one minus their total
/// variation distance, summed over the union of supports. 1 means identical
/// edge fractions, 0 means disjoint supports.
pub fn graph_similarity(real: &EdgeDistribution, synth: &EdgeDistribution) -> f64 {
    // Merge the two sorted maps so terms accumulate in one canonical key
    // order; the score then comes out bit-identical under argument swap.
    let mut l1 = 0.0;
    let mut left = real.probabilities.iter().peekable();
    let mut right = synth.probabilities.iter().peekable();
    loop {
        match (left.peek(), right.peek()) {
            (Some((lk, p)), Some((rk, q))) => match lk.cmp(rk) {
                std::cmp::Ordering::Less => {
                    l1 += **p;
                    left.next();
                }
                std::cmp::Ordering::Greater => {
                    l1 += **q;
                    right.next();
                }
                std::cmp::Ordering::Equal => {
                    l1 += (**p - **q).abs();
                    left.next();
                    right.next();
                }
            },
            (Some((_, p)), None) => {
                l1 += **p;
                left.next();
            }
            (None, Some((_, q))) => {
                l1 += **q;
                right.next();
            }
            (None, None) => break,
        }
    }
    let score = 1.0 - 0.5 * l1;
    score.clamp(0.0, 1.0)
}

/// Write the graph as an edge-list CSV: `src,dst,count,probability`.
pub fn write_edge_list<W: Write>(graph: &TripGraph, writer: W) -> Result<()> {
    let dist = edge_distribution(graph)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["src", "dst", "count", "probability"])?;
    for ((src, dst), count) in &graph.edge_counts {
        let p = dist.probabilities[&(src.clone(), dst.clone())];
        w.write_record([
            src.as_str(),
            dst.as_str(),
            &count.to_string(),
            &format!("{p}"),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<edge list>".into(),
        source,
    })?;
    Ok(())
}
