//! Deterministic numerics: the g_n/(n mu^(n)) condition diagnostics with the
//! f-function representation, branch-length recurrences, and the
//! goodness-of-fit machinery used to verify limit laws.

mod ks;
mod laws;
mod recurrence;

pub use ks::{
    chi_square_sf, chi_square_test, correlation, kolmogorov_sf, ks_statistic_sorted, ks_test,
    ks_two_sample, mean_se,
};
pub use laws::{alpha_star, LimitLaw};
pub use recurrence::{mu_sequence, solve_external_recurrence, solve_total_recurrence};

use serde::Serialize;

use crate::error::Result;
use crate::measure::{functionals, integrate, quad::adaptive_quad, FiniteMeasure, Weight};

/// Per-n diagnostics row.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionRow {
    pub n: usize,
    pub g_n: f64,
    pub mu_n: f64,
    pub mu_bar_n: f64,
    /// g_n / (n mu^(n)); infinite when mu^(n) = 0.
    pub ratio: f64,
    /// mu-bar^(n) / (n mu^(n)), the first piece of the equivalent split.
    pub mu_bar_ratio: f64,
    /// n Lambda([0,1/n)) / mu^(n), the second piece.
    pub mass_below_ratio: f64,
    /// f(1/n) from the integral representation; NaN when undefined.
    pub f_value: f64,
    pub degenerate: bool,
}

/// Diagnostics for the vanishing-ratio condition across a grid of n values.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub rows: Vec<ConditionRow>,
    pub mass_at_zero: f64,
    /// Set when an atom at 0 exists (the condition then fails outright) or
    /// the ratio fails to decrease across the grid.
    pub condition_violated: bool,
}

/// mu^(1/y) = int_y^1 x^{-1} Lambda(dx).
fn mu_inv(m: &FiniteMeasure, y: f64) -> Result<f64> {
    integrate(m, &Weight::InvX, y, 1.0)
}

/// int_0^y mu^(1/x) dx by nested quadrature: the outer integrand evaluates
/// the measure module per point. Outer tolerance is looser than the inner
/// 1e-10 since f is diagnostic, not load-bearing.
fn integral_of_mu_inv(m: &FiniteMeasure, y: f64) -> Result<f64> {
    let inner = |x: f64| mu_inv(m, x).unwrap_or(f64::NAN);
    adaptive_quad(
        &inner,
        0.0,
        y,
        1e-6,
        &[y * 1e-6, y * 1e-4, y * 1e-2, y * 0.1, y * 0.5],
    )
}

/// f(y) = 1 - y mu^(1/y) / int_0^y mu^(1/x) dx, the representation's
/// correction function. NaN when the denominator vanishes.
pub fn f_function(m: &FiniteMeasure, y: f64) -> Result<f64> {
    let num = y * mu_inv(m, y)?;
    let den = integral_of_mu_inv(m, y)?;
    if den == 0.0 {
        return Ok(f64::NAN);
    }
    Ok(1.0 - num / den)
}

/// Compute the condition diagnostics across an n grid. Rows with
/// mu^(n) = 0 are flagged degenerate rather than erroring.
pub fn condition_diagnostics(m: &FiniteMeasure, n_grid: &[usize]) -> Result<ConditionReport> {
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let f = functionals(n, m)?;
        let nf = n as f64;
        let (ratio, mu_bar_ratio, mass_below_ratio, f_value) = if f.degenerate {
            let inf = if f.g_n > 0.0 { f64::INFINITY } else { f64::NAN };
            (inf, inf, inf, f64::NAN)
        } else {
            (
                f.g_n / (nf * f.mu_n),
                f.mu_bar_n / (nf * f.mu_n),
                nf * f.mass_below / f.mu_n,
                f_function(m, 1.0 / nf)?,
            )
        };
        rows.push(ConditionRow {
            n,
            g_n: f.g_n,
            mu_n: f.mu_n,
            mu_bar_n: f.mu_bar_n,
            ratio,
            mu_bar_ratio,
            mass_below_ratio,
            f_value,
            degenerate: f.degenerate,
        });
    }
    let mass_at_zero = m.mass_at(0.0);
    let decreasing = rows.len() < 2
        || (rows.first().unwrap().ratio.is_finite()
            && rows.last().unwrap().ratio < rows.first().unwrap().ratio);
    Ok(ConditionReport {
        rows,
        mass_at_zero,
        condition_violated: mass_at_zero > 0.0 || !decreasing,
    })
}

/// Trend ratios of the corollary: (mu^(n))^k / n, mu^(n)/mu^(n-M), mu^(n)/mu^(n eps).
#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub n: usize,
    pub mu_pow_over_n: f64,
    pub mu_shift_ratio: f64,
    pub mu_eps_ratio: f64,
    pub degenerate: bool,
}

pub fn corollary_ratios(
    m: &FiniteMeasure,
    n_grid: &[usize],
    k: f64,
    shift_m: usize,
    eps: f64,
) -> Result<Vec<RatioRow>> {
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let mu_n = mu_inv(m, 1.0 / n as f64)?;
        let degenerate = mu_n == 0.0;
        let shifted = n.saturating_sub(shift_m).max(2);
        let mu_shift = mu_inv(m, 1.0 / shifted as f64)?;
        let scaled = ((n as f64 * eps).floor() as usize).max(2);
        let mu_eps = mu_inv(m, 1.0 / scaled as f64)?;
        rows.push(RatioRow {
            n,
            mu_pow_over_n: mu_n.powf(k) / n as f64,
            mu_shift_ratio: if mu_shift > 0.0 { mu_n / mu_shift } else { f64::NAN },
            mu_eps_ratio: if mu_eps > 0.0 { mu_n / mu_eps } else { f64::NAN },
            degenerate,
        });
    }
    Ok(rows)
}
