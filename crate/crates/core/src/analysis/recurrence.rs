//! Forward recurrences for expected branch lengths.
//!
//! With p_{n,k} the probability of landing at k blocks right after a
//! collision from n, the expected external branch length a_n = E[T_1^(n)]
//! satisfies
//!
//!   a_1 = 0,  a_n = c_n + sum_{k=1}^{n-1} p_{n,k} (k-1)/n a_k,  c_n = 1/g_n,
//!
//! and b_n = E[mu^(n) L_total^(n) / n] satisfies
//!
//!   b_1 = 0,  b_n = mu^(n)/g_n + sum_{k=1}^{n-1} p_{n,k} k mu^(n)/(n mu^(k)) b_k.
//!
//! The sum index k is the number of blocks after the collision, so p_{n,1}
//! (all n blocks merging) carries weight k-1 = 0 in the first recurrence but
//! not in the second. Both recurrences read p from the same RateTable as the
//! simulator; closed forms are reserved for test oracles.

use crate::error::Result;
use crate::measure::{integrate, FiniteMeasure, Weight};
use crate::simulator::RateTable;

/// Solve the external-branch recurrence up to the table's n_max.
///
/// `c(n)` supplies the per-step cost for n > seeds.len(); `seeds` preloads
/// a_1..a_{n0} (the perturbed variant); empty seeds mean a_1 = 0. Returns a
/// vector indexed by n with entry 0 unused. Zero-rate rows yield infinity.
pub fn solve_external_recurrence(
    table: &RateTable,
    c: impl Fn(usize) -> f64,
    seeds: &[f64],
) -> Vec<f64> {
    let n_max = table.n_max();
    let mut a = vec![0.0f64; n_max + 1];
    let n0 = seeds.len().max(1);
    a[1] = 0.0;
    for (i, &s) in seeds.iter().enumerate() {
        a[i + 1] = s;
    }
    for n in (n0 + 1)..=n_max {
        if table.is_absorbing(n) {
            a[n] = f64::INFINITY;
            continue;
        }
        let g = table.g(n);
        let row = table.row(n); // merger sizes j = 2..=n, landing at k = n-j+1
        let mut acc = 0.0;
        for (idx, &rate) in row.iter().enumerate() {
            let j = idx + 2;
            let k = n - j + 1;
            if k >= 2 {
                acc += rate * (k as f64 - 1.0) * a[k];
            }
        }
        a[n] = c(n) + acc / (g * n as f64);
    }
    a
}

/// mu^(n) for n = 1..=n_max (mu^(1) integrates over [1,1], i.e. any atom at 1).
pub fn mu_sequence(m: &FiniteMeasure, n_max: usize) -> Result<Vec<f64>> {
    let mut mu = vec![0.0f64; n_max + 1];
    for (n, slot) in mu.iter_mut().enumerate().skip(1) {
        *slot = integrate(m, &Weight::InvX, 1.0 / n as f64, 1.0)?;
    }
    Ok(mu)
}

/// Solve the total-length recurrence up to the table's n_max.
///
/// `mu[k]` is mu^(k) (index 0 unused); zeros are substituted by 1 inside the
/// recursion to keep the divisions valid.
pub fn solve_total_recurrence(table: &RateTable, mu: &[f64]) -> Vec<f64> {
    let n_max = table.n_max();
    assert!(mu.len() > n_max, "need mu^(k) up to n_max");
    let safe_mu = |k: usize| if mu[k] == 0.0 { 1.0 } else { mu[k] };
    let mut b = vec![0.0f64; n_max + 1];
    b[1] = 0.0;
    for n in 2..=n_max {
        if table.is_absorbing(n) {
            b[n] = f64::INFINITY;
            continue;
        }
        let g = table.g(n);
        let mu_n = safe_mu(n);
        let row = table.row(n);
        let mut acc = 0.0;
        for (idx, &rate) in row.iter().enumerate() {
            let j = idx + 2;
            let k = n - j + 1;
            if k >= 2 {
                acc += rate * (k as f64) * b[k] / safe_mu(k);
            }
        }
        b[n] = mu_n / g + mu_n * acc / (g * n as f64);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kingman_two_leaf_spot_value() {
        // c_n = 1/g_n = 2/(n(n-1)); a_2 = c_2 = 1 (one Exp(1) merge)
        let t = RateTable::build(10, &FiniteMeasure::kingman()).unwrap();
        let a = solve_external_recurrence(&t, |n| 1.0 / t.g(n), &[]);
        assert!((a[2] - 1.0).abs() < 1e-12);
        // Kingman: only pairwise mergers, a_n = 2/(n(n-1)) + (n-2)/n a_{n-1};
        // replay independently
        let mut expect = vec![0.0f64; 11];
        for n in 2..=10usize {
            let nf = n as f64;
            expect[n] = 2.0 / (nf * (nf - 1.0)) + (nf - 2.0) / nf * expect[n - 1];
        }
        for n in 2..=10 {
            assert!((a[n] - expect[n]).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn total_recurrence_two_leaf_closed_form() {
        // b_2 = mu^(2)/g_2: the k=1 term vanishes with b_1 = 0
        let m = FiniteMeasure::lebesgue();
        let t = RateTable::build(5, &m).unwrap();
        let mu = mu_sequence(&m, 5).unwrap();
        let b = solve_total_recurrence(&t, &mu);
        assert!((b[2] - mu[2] / t.g(2)).abs() < 1e-12);
    }

    #[test]
    fn recursion_is_prefix_stable() {
        // a_n and b_n computed from a larger table agree with a smaller one
        let m = FiniteMeasure::lebesgue();
        let small = RateTable::build(60, &m).unwrap();
        let large = RateTable::build(90, &m).unwrap();
        let a_small = solve_external_recurrence(&small, |n| 1.0 / small.g(n), &[]);
        let a_large = solve_external_recurrence(&large, |n| 1.0 / large.g(n), &[]);
        for n in 2..=60 {
            assert!(
                (a_small[n] - a_large[n]).abs() <= 1e-12 * a_small[n].abs().max(1e-12),
                "n={n}: {} vs {}",
                a_small[n],
                a_large[n]
            );
        }
        let mu = mu_sequence(&m, 90).unwrap();
        let b_small = solve_total_recurrence(&small, &mu[..61].to_vec());
        let b_large = solve_total_recurrence(&large, &mu);
        for n in 2..=60 {
            assert!((b_small[n] - b_large[n]).abs() <= 1e-12 * b_small[n].abs().max(1e-12));
        }
    }

    #[test]
    fn null_measure_rows_are_infinite() {
        let t = RateTable::build(4, &FiniteMeasure::null()).unwrap();
        let a = solve_external_recurrence(&t, |_| 0.0, &[]);
        assert!(a[2].is_infinite());
    }
}
