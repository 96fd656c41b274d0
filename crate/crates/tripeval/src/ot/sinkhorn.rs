//! Entropically regularized transport in the log domain.

use rayon::prelude::*;

use crate::error::{Error, Result};

pub(crate) struct SinkhornOutcome {
    /// Transport-cost readout sum pi_ij * c_ij (entropy term excluded).
    pub cost: f64,
    pub iterations: usize,
}

/// Log-stabilized Sinkhorn between marginals `a` (rows, length n) and `b`
/// (columns, length m) over the row-major cost matrix.
///
/// Warm-starts at coarse regularization and halves it down to `epsilon`;
/// convergence is declared when the largest row-marginal violation of the
/// implied coupling drops to `tolerance` (column marginals are exact after
/// every column update by construction). `max_iters` counts full
/// (row, column) update rounds including the warm-up.
pub(crate) fn sinkhorn(
    a: &[f64],
    b: &[f64],
    costs: &[f64],
    epsilon: f64,
    max_iters: usize,
    tolerance: f64,
) -> Result<SinkhornOutcome> {
    let n = a.len();
    let m = b.len();
    assert_eq!(costs.len(), n * m);
    if epsilon <= 0.0 {
        return Err(Error::InvalidParameter("sinkhorn epsilon must be > 0".into()));
    }

    let log_a: Vec<f64> = a.iter().map(|v| v.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|v| v.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];

    // Column-major copy so the g-update walks memory contiguously.
    let mut costs_t = vec![0.0; n * m];
    costs_t.par_chunks_mut(n).enumerate().for_each(|(j, col)| {
        for (i, slot) in col.iter_mut().enumerate() {
            *slot = costs[i * m + j];
        }
    });

    let mean_cost = costs.iter().sum::<f64>() / costs.len() as f64;
    let mut eps_level = (mean_cost * 0.5).max(epsilon);
    let mut iterations = 0usize;

    while iterations < max_iters {
        let warming = eps_level > epsilon;
        update_f(&mut f, &g, &log_a, costs, eps_level, m);
        update_g(&f, &mut g, &log_b, &costs_t, eps_level, n);
        iterations += 1;

        if warming {
            // A handful of rounds per level is enough for a warm start.
            if iterations.is_multiple_of(6) {
                eps_level = (eps_level * 0.5).max(epsilon);
            }
            continue;
        }
        if iterations.is_multiple_of(10) || iterations == max_iters {
            let violation = row_violation(&f, &g, a, costs, epsilon, n, m);
            if violation <= tolerance {
                return Ok(SinkhornOutcome {
                    cost: transport_cost(&f, &g, costs, epsilon, m),
                    iterations,
                });
            }
        }
    }

    let violation = row_violation(&f, &g, a, costs, epsilon, n, m);
    if violation <= tolerance {
        return Ok(SinkhornOutcome {
            cost: transport_cost(&f, &g, costs, epsilon, m),
            iterations,
        });
    }
    Err(Error::SinkhornDiverged {
        iterations,
        violation,
        tolerance,
    })
}

fn update_f(f: &mut [f64], g: &[f64], log_a: &[f64], costs: &[f64], eps: f64, m: usize) {
    f.par_iter_mut().enumerate().for_each(|(i, fi)| {
        let row = &costs[i * m..(i + 1) * m];
        *fi = eps * (log_a[i] - log_sum_exp(row, g, eps));
    });
}

fn update_g(f: &[f64], g: &mut [f64], log_b: &[f64], costs_t: &[f64], eps: f64, n: usize) {
    g.par_iter_mut().enumerate().for_each(|(j, gj)| {
        let col = &costs_t[j * n..(j + 1) * n];
        *gj = eps * (log_b[j] - log_sum_exp(col, f, eps));
    });
}

/// log sum_k exp((dual_k - cost_k) / eps), max-shifted for stability.
fn log_sum_exp(cost: &[f64], dual: &[f64], eps: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (c, d) in cost.iter().zip(dual) {
        let e = (d - c) / eps;
        if e > best {
            best = e;
        }
    }
    let mut sum = 0.0;
    for (c, d) in cost.iter().zip(dual) {
        sum += ((d - c) / eps - best).exp();
    }
    best + sum.ln()
}

/// Largest absolute difference between the coupling's row marginals and `a`.
fn row_violation(
    f: &[f64],
    g: &[f64],
    a: &[f64],
    costs: &[f64],
    eps: f64,
    n: usize,
    m: usize,
) -> f64 {
    let per_row: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = &costs[i * m..(i + 1) * m];
            let mut sum = 0.0;
            for (c, gj) in row.iter().zip(g) {
                sum += ((f[i] + gj - c) / eps).exp();
            }
            (sum - a[i]).abs()
        })
        .collect();
    per_row.iter().cloned().fold(0.0, f64::max)
}

fn transport_cost(f: &[f64], g: &[f64], costs: &[f64], eps: f64, m: usize) -> f64 {
    let n = f.len();
    let per_row: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = &costs[i * m..(i + 1) * m];
            let mut sum = 0.0;
            for (c, gj) in row.iter().zip(g) {
                sum += ((f[i] + gj - c) / eps).exp() * c;
            }
            sum
        })
        .collect();
    per_row.iter().sum()
}
