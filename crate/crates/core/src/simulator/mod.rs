//! Exact jump-chain simulation of the coalescent and its branch statistics.
//!
//! The engine precomputes one [`RateTable`] per measure: the binomial-weighted
//! merger rates C(b,k) lambda_{b,k} for every 2 <= k <= b <= n_max. Only the
//! bottom row b = n_max is integrated; the rest follows from the Pascal-type
//! recursion
//!
//!   C(b,k) lambda_{b,k} = (b+1-k)/(b+1) * C(b+1,k) lambda_{b+1,k}
//!                       +   (k+1)/(b+1) * C(b+1,k+1) lambda_{b+1,k+1},
//!
//! whose coefficients lie in (0,1): n_max quadratures and O(n_max^2) stable
//! arithmetic instead of O(n_max^2) quadratures, with the recursion identity
//! doubling as a correctness oracle against direct quadrature.

mod counts;

pub use counts::{simulate_counts, CountsSummary};

use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::{weighted_merger_rate, FiniteMeasure};
use crate::partition::LabeledPartition;
use crate::rng::exp_variate;

/// Cached merger rates for all block counts up to `n_max`.
#[derive(Debug, Clone)]
pub struct RateTable {
    n_max: usize,
    /// Flat triangle of C(b,k) lambda_{b,k}; row b >= 2 starts at
    /// (b-1)(b-2)/2 and holds k = 2..=b.
    terms: Vec<f64>,
    /// g[b] = sum of row b (g[0] = g[1] = 0).
    g: Vec<f64>,
}

#[inline]
fn row_offset(b: usize) -> usize {
    (b - 1) * (b - 2) / 2
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = acc + v;
        comp += if acc.abs() >= v.abs() {
            (acc - t) + v
        } else {
            (v - t) + acc
        };
        acc = t;
    }
    acc + comp
}

impl RateTable {
    /// Build the table for the measure up to `n_max` blocks.
    pub fn build(n_max: usize, m: &FiniteMeasure) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::Domain(format!(
                "rate table needs n_max >= 2, got {n_max}"
            )));
        }
        let len = row_offset(n_max) + (n_max - 1);
        let mut terms = vec![0.0f64; len];

        // bottom row by quadrature
        let bottom = row_offset(n_max);
        for k in 2..=n_max {
            terms[bottom + k - 2] = weighted_merger_rate(n_max, k, m)?;
        }
        // Pascal upward (decreasing b); all coefficients in (0,1)
        for b in (2..n_max).rev() {
            let (lower, upper) = terms.split_at_mut(row_offset(b + 1));
            let row_b = &mut lower[row_offset(b)..row_offset(b) + (b - 1)];
            let row_b1 = &upper[..b];
            let bp1 = (b + 1) as f64;
            for k in 2..=b {
                let kf = k as f64;
                row_b[k - 2] = ((bp1 - kf) * row_b1[k - 2] + (kf + 1.0) * row_b1[k - 1]) / bp1;
            }
        }

        let mut g = vec![0.0f64; n_max + 1];
        for b in 2..=n_max {
            let off = row_offset(b);
            g[b] = neumaier_sum(terms[off..off + (b - 1)].iter().copied());
        }
        Ok(RateTable { n_max, terms, g })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// C(b,k) lambda_{b,k}.
    pub fn merge_rate(&self, b: usize, k: usize) -> f64 {
        debug_assert!((2..=self.n_max).contains(&b) && (2..=b).contains(&k));
        self.terms[row_offset(b) + k - 2]
    }

    /// The row of weighted rates for block count b (k = 2..=b).
    pub fn row(&self, b: usize) -> &[f64] {
        let off = row_offset(b);
        &self.terms[off..off + (b - 1)]
    }

    /// Total merger rate g_b.
    pub fn g(&self, b: usize) -> f64 {
        self.g[b]
    }

    /// True when no merger can occur from b blocks.
    pub fn is_absorbing(&self, b: usize) -> bool {
        b < 2 || self.g[b] == 0.0
    }

    /// p_{b, b-k+1}: probability that a jump from b blocks merges exactly k.
    pub fn merger_size_prob(&self, b: usize, k: usize) -> f64 {
        self.merge_rate(b, k) / self.g[b]
    }

    /// p_{b, j}: probability of landing at j blocks right after a collision
    /// from b blocks (j = b-k+1 for merger size k).
    pub fn jump_prob(&self, b: usize, j: usize) -> f64 {
        debug_assert!((1..b).contains(&j));
        self.merger_size_prob(b, b - j + 1)
    }

    /// Draw a merger size k from row b. Linear scan from k = 2; the expected
    /// number of steps is E[k], which is small for every measure used here.
    pub fn sample_merger_size(&self, b: usize, rng: &mut impl Rng) -> usize {
        debug_assert!(!self.is_absorbing(b));
        let row = self.row(b);
        let u: f64 = rng.random::<f64>() * self.g[b];
        let mut acc = 0.0;
        for (i, &t) in row.iter().enumerate() {
            acc += t;
            if u <= acc {
                return i + 2;
            }
        }
        b
    }
}

/// One coalescence of the jump chain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalescentEvent {
    pub time: f64,
    /// Indices of the merged blocks in the canonical order of the partition
    /// immediately before this event.
    pub merged: Vec<u32>,
    /// Number of blocks right after the event.
    pub blocks_after: u32,
}

/// A time-ordered list of coalescence events started from n singletons.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalescentPath {
    pub n: usize,
    pub events: Vec<CoalescentEvent>,
    /// Set when the chain hit a zero-rate row before reaching one block.
    pub absorbed: bool,
}

impl CoalescentPath {
    pub fn is_complete(&self) -> bool {
        !self.absorbed
    }

    /// Absorption time at a single block.
    pub fn tmrca(&self) -> Result<f64> {
        if self.absorbed {
            return Err(Error::IncompletePath {
                blocks: self.final_block_count(),
            });
        }
        Ok(self.events.last().map_or(0.0, |e| e.time))
    }

    pub fn final_block_count(&self) -> usize {
        self.events
            .last()
            .map_or(self.n, |e| e.blocks_after as usize)
    }

    /// Block count as a right-continuous step function of time.
    pub fn block_count_at(&self, t: f64) -> usize {
        let mut count = self.n;
        for e in &self.events {
            if e.time <= t {
                count = e.blocks_after as usize;
            } else {
                break;
            }
        }
        count
    }

    /// Replay the partition trajectory: the value before any event is the
    /// partition of singletons; `visit` receives each event together with the
    /// partition right after it.
    pub fn replay<F: FnMut(&CoalescentEvent, &LabeledPartition)>(
        &self,
        mut visit: F,
    ) -> Result<()> {
        let mut p = LabeledPartition::singletons(self.n);
        for e in &self.events {
            let ids: Vec<usize> = e.merged.iter().map(|&i| i as usize).collect();
            p = p.merge(&ids)?;
            visit(e, &p);
        }
        Ok(())
    }
}

/// Draw a uniform k-subset of {0..b-1}. Floyd's algorithm for small k,
/// partial Fisher-Yates when k is a large fraction of b.
pub(crate) fn uniform_subset(b: usize, k: usize, rng: &mut impl Rng) -> Vec<u32> {
    debug_assert!(k <= b);
    if k * k <= 4 * b {
        let mut chosen: Vec<u32> = Vec::with_capacity(k);
        for j in (b - k)..b {
            let t = rng.random_range(0..=j) as u32;
            if chosen.contains(&t) {
                chosen.push(j as u32);
            } else {
                chosen.push(t);
            }
        }
        chosen.sort_unstable();
        chosen
    } else {
        let mut idx: Vec<u32> = (0..b as u32).collect();
        for j in 0..k {
            let t = rng.random_range(j..b);
            idx.swap(j, t);
        }
        let mut chosen = idx[..k].to_vec();
        chosen.sort_unstable();
        chosen
    }
}

/// Simulate the jump chain from n singletons: Exp(g_b) holding times, merger
/// sizes from the cached row distribution, uniform block subsets. The path is
/// deterministic given the stream. Zero-rate rows absorb and are flagged, not
/// errored.
pub fn simulate(n: usize, table: &RateTable, rng: &mut impl Rng) -> CoalescentPath {
    assert!(
        n <= table.n_max(),
        "n = {n} exceeds table n_max {}",
        table.n_max()
    );
    let mut events = Vec::new();
    let mut b = n;
    let mut t = 0.0;
    while b > 1 {
        if table.is_absorbing(b) {
            return CoalescentPath {
                n,
                events,
                absorbed: true,
            };
        }
        t += exp_variate(rng, table.g(b));
        let k = table.sample_merger_size(b, rng);
        let merged = uniform_subset(b, k, rng);
        b = b - k + 1;
        events.push(CoalescentEvent {
            time: t,
            merged,
            blocks_after: b as u32,
        });
    }
    CoalescentPath {
        n,
        events,
        absorbed: false,
    }
}

/// Per-replicate branch statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateSummary {
    pub tmrca: f64,
    /// Total external branch length, sum of the T_i.
    pub l_ext: f64,
    /// Total branch length, sum over inter-event intervals of
    /// duration * block count.
    pub l_total: f64,
    /// Block-count drop at the first collision.
    pub x1: u32,
    /// External branch length of element 1.
    pub t1: f64,
    /// External branch length of element 2 (0 when n < 2).
    pub t2: f64,
    /// T_i for every element.
    pub external: Vec<f64>,
}

/// Extract branch statistics from a complete path.
pub fn summarize(path: &CoalescentPath) -> Result<ReplicateSummary> {
    if path.absorbed {
        return Err(Error::IncompletePath {
            blocks: path.final_block_count(),
        });
    }
    let n = path.n;
    if n <= 1 {
        return Ok(ReplicateSummary {
            tmrca: 0.0,
            l_ext: 0.0,
            l_total: 0.0,
            x1: 0,
            t1: 0.0,
            t2: 0.0,
            external: vec![0.0; n],
        });
    }
    let mut external = vec![f64::INFINITY; n];
    let mut block_members: Vec<Vec<u32>> = (1..=n as u32).map(|e| vec![e]).collect();
    let mut l_total = 0.0;
    let mut prev_t = 0.0;
    for e in &path.events {
        l_total += (e.time - prev_t) * block_members.len() as f64;
        prev_t = e.time;
        let mut union: Vec<u32> = Vec::new();
        for &i in e.merged.iter().rev() {
            let b = block_members.remove(i as usize);
            if b.len() == 1 && external[b[0] as usize - 1].is_infinite() {
                external[b[0] as usize - 1] = e.time;
            }
            union.extend(b);
        }
        union.sort_unstable();
        let pos = block_members
            .binary_search_by_key(&union[0], |b| b[0])
            .unwrap_err();
        block_members.insert(pos, union);
    }
    let tmrca = prev_t;
    let l_ext = external.iter().sum();
    Ok(ReplicateSummary {
        tmrca,
        l_ext,
        l_total,
        x1: n as u32 - path.events[0].blocks_after,
        t1: external[0],
        t2: external[1],
        external,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::lambda_rate;
    use crate::rng::substream;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn kingman_table_only_pairwise() {
        let t = RateTable::build(5, &FiniteMeasure::kingman()).unwrap();
        for b in 2..=5 {
            assert!(rel_close(t.merger_size_prob(b, 2), 1.0, 1e-14));
            for k in 3..=b {
                assert_eq!(t.merger_size_prob(b, k), 0.0);
            }
            let expect = (b * (b - 1)) as f64 / 2.0;
            assert!(rel_close(t.g(b), expect, 1e-12));
        }
    }

    #[test]
    fn lebesgue_table_hand_computed_row_4() {
        // lambda_{4,2} = 1/3, lambda_{4,3} = 1/6, lambda_{4,4} = 1/3, g_4 = 3
        let t = RateTable::build(4, &FiniteMeasure::lebesgue()).unwrap();
        assert!(rel_close(t.g(4), 3.0, 1e-10));
        assert!(rel_close(t.merger_size_prob(4, 2), 2.0 / 3.0, 1e-10));
        assert!(rel_close(t.merger_size_prob(4, 3), 2.0 / 9.0, 1e-10));
        assert!(rel_close(t.merger_size_prob(4, 4), 1.0 / 9.0, 1e-10));
    }

    #[test]
    fn lebesgue_terms_closed_form() {
        // C(b,k) lambda_{b,k} = b / (k (k-1)) for the Lebesgue measure
        let t = RateTable::build(200, &FiniteMeasure::lebesgue()).unwrap();
        for (b, k) in [
            (2usize, 2usize),
            (7, 3),
            (50, 17),
            (200, 2),
            (200, 200),
            (137, 99),
        ] {
            let expect = b as f64 / (k * (k - 1)) as f64;
            assert!(
                rel_close(t.merge_rate(b, k), expect, 1e-9),
                "b={b} k={k}: {} vs {expect}",
                t.merge_rate(b, k)
            );
        }
        for b in [2usize, 10, 100, 200] {
            assert!(rel_close(t.g(b), b as f64 - 1.0, 1e-9));
        }
    }

    #[test]
    fn null_measure_rows_absorbing() {
        let t = RateTable::build(3, &FiniteMeasure::null()).unwrap();
        assert!(t.is_absorbing(2));
        assert!(t.is_absorbing(3));
        let mut rng = substream(1, 0);
        let path = simulate(3, &t, &mut rng);
        assert!(path.absorbed);
        assert!(path.events.is_empty());
        assert!(summarize(&path).is_err());
    }

    #[test]
    fn row_sums_normalize() {
        for m in [
            FiniteMeasure::lebesgue(),
            FiniteMeasure::beta(0.5, 1.0).unwrap(),
            FiniteMeasure::kingman(),
        ] {
            let t = RateTable::build(300, &m).unwrap();
            for b in 2..=300 {
                let p_sum: f64 = (2..=b).map(|k| t.merger_size_prob(b, k)).sum();
                assert!((p_sum - 1.0).abs() < 1e-12, "b={b}: {p_sum}");
            }
        }
    }

    #[test]
    fn table_matches_direct_quadrature_spot_checks() {
        let m = FiniteMeasure::beta(1.5, 1.0).unwrap();
        let t = RateTable::build(120, &m).unwrap();
        for (b, k) in [(2usize, 2usize), (17, 5), (80, 2), (120, 60), (99, 99)] {
            let direct = crate::measure::integrate(
                &m,
                &crate::measure::Weight::BinomMergerKernel {
                    b: b as u32,
                    k: k as u32,
                },
                0.0,
                1.0,
            )
            .unwrap();
            assert!(
                rel_close(t.merge_rate(b, k), direct, 1e-8),
                "b={b} k={k}: {} vs {direct}",
                t.merge_rate(b, k)
            );
        }
    }

    #[test]
    fn single_leaf_path_is_empty() {
        let t = RateTable::build(2, &FiniteMeasure::kingman()).unwrap();
        let mut rng = substream(3, 0);
        let path = simulate(1, &t, &mut rng);
        assert!(path.events.is_empty());
        assert!(!path.absorbed);
        let s = summarize(&path).unwrap();
        assert_eq!(s.tmrca, 0.0);
        assert_eq!(s.l_total, 0.0);
    }

    #[test]
    fn kingman_two_leaves_mean_merge_time() {
        // g_2 = 1 for the Dirac mass: event time is Exp(1)
        let t = RateTable::build(2, &FiniteMeasure::kingman()).unwrap();
        let reps = 100_000u64;
        let mut acc = 0.0;
        for i in 0..reps {
            let mut rng = substream(11, i);
            let path = simulate(2, &t, &mut rng);
            acc += path.tmrca().unwrap();
        }
        let mean = acc / reps as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn summarize_three_leaf_example() {
        // events: {1},{2} merge at t1; everything at t2
        let path = CoalescentPath {
            n: 3,
            events: vec![
                CoalescentEvent {
                    time: 0.5,
                    merged: vec![0, 1],
                    blocks_after: 2,
                },
                CoalescentEvent {
                    time: 1.25,
                    merged: vec![0, 1],
                    blocks_after: 1,
                },
            ],
            absorbed: false,
        };
        let s = summarize(&path).unwrap();
        assert_eq!(s.external, vec![0.5, 0.5, 1.25]);
        assert_eq!(s.t1, 0.5);
        assert_eq!(s.x1, 1);
        assert!((s.l_total - (3.0 * 0.5 + 2.0 * 0.75)).abs() < 1e-15);
        assert!((s.l_ext - 2.25).abs() < 1e-15);
        assert_eq!(s.tmrca, 1.25);
    }

    #[test]
    fn two_leaf_summary_identities() {
        let t = RateTable::build(2, &FiniteMeasure::lebesgue()).unwrap();
        let mut rng = substream(7, 0);
        let path = simulate(2, &t, &mut rng);
        let s = summarize(&path).unwrap();
        assert_eq!(s.t1, s.tmrca);
        assert_eq!(s.t2, s.tmrca);
        assert!((s.l_ext - 2.0 * s.tmrca).abs() < 1e-15);
        assert!((s.l_total - 2.0 * s.tmrca).abs() < 1e-15);
        assert_eq!(s.x1, 1);
    }

    #[test]
    fn l_total_equals_independent_recount() {
        let t = RateTable::build(40, &FiniteMeasure::lebesgue()).unwrap();
        for i in 0..50 {
            let mut rng = substream(23, i);
            let path = simulate(40, &t, &mut rng);
            let s = summarize(&path).unwrap();
            // independent recount straight off the event list
            let mut recount = 0.0;
            let mut prev = 0.0;
            let mut blocks = 40f64;
            for e in &path.events {
                recount += (e.time - prev) * blocks;
                prev = e.time;
                blocks = f64::from(e.blocks_after);
            }
            assert!((s.l_total - recount).abs() <= 1e-12 * recount.max(1.0));
            // block count drops by k-1
            let mut b = 40u32;
            for e in &path.events {
                assert_eq!(e.blocks_after, b - (e.merged.len() as u32 - 1));
                b = e.blocks_after;
            }
        }
    }

    #[test]
    fn first_jump_distribution_lebesgue_n4() {
        // frequencies of the first merger size against the hand-computed
        // vector (2/3, 2/9, 1/9)
        let t = RateTable::build(4, &FiniteMeasure::lebesgue()).unwrap();
        let reps = 100_000u64;
        let mut counts = [0u64; 3];
        for i in 0..reps {
            let mut rng = substream(31, i);
            let k = t.sample_merger_size(4, &mut rng);
            counts[k - 2] += 1;
        }
        let expected = [2.0 / 3.0, 2.0 / 9.0, 1.0 / 9.0];
        let mut chi2 = 0.0;
        for (c, p) in counts.iter().zip(expected) {
            let e = p * reps as f64;
            chi2 += (*c as f64 - e).powi(2) / e;
        }
        // 2 dof; chi2 < 13.8 is p > 0.001
        assert!(chi2 < 13.8, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn exchangeability_of_first_merge() {
        // P(element i is in the first merger) identical across i
        let n = 6;
        let t = RateTable::build(n, &FiniteMeasure::lebesgue()).unwrap();
        let reps = 20_000u64;
        let mut hits = [0u64; 6];
        for i in 0..reps {
            let mut rng = substream(37, i);
            let path = simulate(n, &t, &mut rng);
            let first = &path.events[0];
            for &b in &first.merged {
                hits[b as usize] += 1; // blocks are singletons at event 1
            }
        }
        let mean = hits.iter().sum::<u64>() as f64 / 6.0;
        let p = mean / reps as f64;
        let se = (p * (1.0 - p) * reps as f64).sqrt();
        for h in hits {
            assert!(
                (h as f64 - mean).abs() < 3.0 * se,
                "hits = {hits:?}, mean = {mean}, se = {se}"
            );
        }
    }

    #[test]
    fn lambda_rate_consistent_with_table() {
        let m = FiniteMeasure::beta(0.5, 2.0).unwrap();
        let t = RateTable::build(30, &m).unwrap();
        for (b, k) in [(5usize, 3usize), (30, 2), (12, 12)] {
            let lam = lambda_rate(b, k, &m).unwrap();
            let lbinom = libm::lgamma(b as f64 + 1.0)
                - libm::lgamma(k as f64 + 1.0)
                - libm::lgamma((b - k) as f64 + 1.0);
            assert!(
                rel_close(t.merge_rate(b, k), lam * lbinom.exp(), 1e-8),
                "b={b} k={k}"
            );
        }
    }
}
