//! Shared ground metric for all distance-based metrics.

/// Euclidean (L2) distance between two encoded rows.
///
/// Every metric in this crate (Wasserstein, coverage, DCR) uses this exact
/// function, so accelerated and brute-force paths agree bit for bit.
#[inline]
pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_are_exactly_zero() {
        let row = [0.3, 1.0, 0.0, 0.7251];
        assert_eq!(l2(&row, &row), 0.0);
    }

    #[test]
    fn unit_axes() {
        assert_eq!(l2(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }
}
