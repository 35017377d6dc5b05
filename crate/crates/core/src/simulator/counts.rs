//! Block-count-only simulation.
//!
//! Large-n statistics runs never need full partitions: the block counting
//! process is an autonomous jump chain, and the branch statistics the limit
//! theorems address project onto it exactly. Per event the number of merged
//! blocks that were original singletons is hypergeometric given the merger
//! size, and a tracked leaf's membership among the merged singletons is a
//! sequential urn draw, so the joint law of (tmrca, L_ext, L_total, X1, T_1,
//! T_2) matches full-partition simulation exactly.

use rand::Rng;

use super::RateTable;
use crate::rng::exp_variate;

/// Branch statistics from a counts-mode run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountsSummary {
    pub tmrca: f64,
    pub l_ext: f64,
    pub l_total: f64,
    pub x1: u32,
    /// External branch length of tracked leaf 1.
    pub t1: f64,
    /// External branch length of tracked leaf 2 (0 when n < 2).
    pub t2: f64,
    /// The chain hit a zero-rate row; time-horizon statistics are invalid.
    pub absorbed: bool,
}

/// Hypergeometric draw: number of successes in `draws` picks without
/// replacement from `total` items of which `success` are marked.
#[inline]
pub(crate) fn hypergeometric(
    total: usize,
    success: usize,
    draws: usize,
    rng: &mut impl Rng,
) -> usize {
    debug_assert!(success <= total && draws <= total);
    let mut hits = 0usize;
    let mut s = success;
    let mut t = total;
    for _ in 0..draws {
        if s == 0 {
            break;
        }
        if rng.random::<f64>() * (t as f64) < s as f64 {
            hits += 1;
            s -= 1;
        }
        t -= 1;
    }
    hits
}

/// Simulate the block counting process from n singletons and return the
/// projected branch statistics. Leaves 1 and 2 are tracked individually.
pub fn simulate_counts(n: usize, table: &RateTable, rng: &mut impl Rng) -> CountsSummary {
    assert!(
        n <= table.n_max() || n <= 1,
        "n = {n} exceeds table n_max {}",
        table.n_max()
    );
    let mut out = CountsSummary {
        tmrca: 0.0,
        l_ext: 0.0,
        l_total: 0.0,
        x1: 0,
        t1: 0.0,
        t2: 0.0,
        absorbed: false,
    };
    if n <= 1 {
        return out;
    }
    let mut b = n; // blocks
    let mut s = n; // remaining original singletons
    let mut alive1 = true;
    let mut alive2 = true;
    let mut t = 0.0;
    let mut first = true;
    while b > 1 {
        if table.is_absorbing(b) {
            out.absorbed = true;
            break;
        }
        let dt = exp_variate(rng, table.g(b));
        t += dt;
        out.l_total += dt * b as f64;
        out.l_ext += dt * s as f64;
        let k = table.sample_merger_size(b, rng);
        if first {
            out.x1 = (k - 1) as u32;
            first = false;
        }
        // singletons swallowed by this merger
        let ms = hypergeometric(b, s, k, rng);
        if ms > 0 {
            // tracked leaves are uniform among the s singletons
            let mut remaining_hits = ms;
            let mut remaining_singletons = s;
            if alive1 {
                if rng.random::<f64>() * (remaining_singletons as f64) < remaining_hits as f64 {
                    alive1 = false;
                    out.t1 = t;
                    remaining_hits -= 1;
                }
                remaining_singletons -= 1;
            }
            if alive2 && remaining_singletons > 0 {
                if rng.random::<f64>() * (remaining_singletons as f64) < remaining_hits as f64 {
                    alive2 = false;
                    out.t2 = t;
                }
            }
            s -= ms;
        }
        b = b - k + 1;
    }
    out.tmrca = t;
    out
}
