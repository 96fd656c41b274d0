//! Property tests over randomly generated tables and distributions.

use std::collections::BTreeMap;

use proptest::collection::vec;
use proptest::prelude::*;

use tripeval::data::{Cell, ColumnKind, DataTable, Encoder, TableSchema};
use tripeval::graph::{graph_similarity, EdgeDistribution};
use tripeval::ot::wasserstein_1d;
use tripeval::privacy::percentile;

/// Mixed-type trip tables: one categorical, one integer, one float column.
fn arb_table() -> impl Strategy<Value = DataTable> {
    let row = (0u8..5, -50i64..50, -1000f64..1000f64);
    vec(row, 1..40).prop_map(|rows| {
        let schema = TableSchema::new(
            vec![
                ("zone".into(), ColumnKind::Categorical),
                ("count".into(), ColumnKind::Integer),
                ("value".into(), ColumnKind::Float),
            ],
            None,
        )
        .unwrap();
        let cells = rows
            .into_iter()
            .map(|(z, n, v)| {
                vec![
                    Cell::Cat(format!("Z{z}")),
                    Cell::Int(n),
                    Cell::Float(v),
                ]
            })
            .collect();
        DataTable::new(schema, cells).unwrap()
    })
}

fn arb_edge_distribution() -> impl Strategy<Value = EdgeDistribution> {
    vec((0u8..6, 0u8..6, 0.01f64..1.0), 1..10).prop_map(|entries| {
        let mut weights: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (i, j, w) in entries {
            *weights
                .entry((format!("z{i}"), format!("z{j}")))
                .or_insert(0.0) += w;
        }
        let total: f64 = weights.values().sum();
        let mut probabilities: BTreeMap<(String, String), f64> = weights
            .into_iter()
            .map(|(k, w)| (k, w / total))
            .collect();
        let sum: f64 = probabilities.values().sum();
        let first = probabilities.keys().next().unwrap().clone();
        *probabilities.get_mut(&first).unwrap() += 1.0 - sum;
        EdgeDistribution::from_probabilities(probabilities).unwrap()
    })
}

proptest! {
    /// Encoded matrices are always finite, numerics live in [0, 1] on the
    /// fitting table, and every one-hot block sums to exactly 0 or 1.
    #[test]
    fn encoding_invariants(table in arb_table(), other in arb_table()) {
        let encoder = Encoder::fit(&table).unwrap();
        for (who, t) in [("fit", &table), ("other", &other)] {
            let encoded = encoder.encode(t).unwrap();
            let map = encoder.column_map();
            for r in 0..encoded.n_rows() {
                let row = encoded.row(r);
                prop_assert!(row.iter().all(|v| v.is_finite()), "{who}: non-finite entry");
                // zone block: indicators summing to 1 (seen) or 0 (unseen).
                let block = &row[map[0].start..map[0].start + map[0].width];
                let sum: f64 = block.iter().sum();
                prop_assert!(sum == 0.0 || sum == 1.0);
                prop_assert!(block.iter().all(|v| *v == 0.0 || *v == 1.0));
                // numeric columns clamped to [0, 1].
                for span in &map[1..] {
                    let v = row[span.start];
                    prop_assert!((0.0..=1.0).contains(&v), "{who}: numeric {v} out of range");
                }
            }
        }
    }

    /// Graph similarity is symmetric, bounded and exact on identity.
    #[test]
    fn graph_similarity_invariants(a in arb_edge_distribution(), b in arb_edge_distribution()) {
        prop_assert_eq!(graph_similarity(&a, &a), 1.0);
        let ab = graph_similarity(&a, &b);
        let ba = graph_similarity(&b, &a);
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    /// The 1-D closed form is a metric on equal-size samples.
    #[test]
    fn wasserstein_1d_is_a_metric(
        x in vec(-100f64..100.0, 1..30),
        shuffle_seed in 0u64..1000,
    ) {
        let w_self = wasserstein_1d(&x, &x).unwrap();
        prop_assert_eq!(w_self, 0.0);

        // Permutation invariance via a deterministic rotation.
        let k = (shuffle_seed as usize) % x.len();
        let mut rotated = x.clone();
        rotated.rotate_left(k);
        prop_assert_eq!(wasserstein_1d(&x, &rotated).unwrap(), 0.0);
    }

    /// Percentiles interpolate monotonically within the sorted list.
    #[test]
    fn percentile_is_monotone(
        mut values in vec(-1000f64..1000.0, 1..50),
        lo in 0.01f64..100.0,
        hi in 0.01f64..100.0,
    ) {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let p_lo = percentile(&values, lo).unwrap();
        let p_hi = percentile(&values, hi).unwrap();
        prop_assert!(p_lo <= p_hi + 1e-12);
        prop_assert!(p_hi <= *values.last().unwrap() + 1e-12);
        prop_assert!(p_lo >= values[0] - 1e-12);
    }
}
