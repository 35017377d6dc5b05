//! Integral functionals of a finite measure: merger rates, total rates and
//! the mu^(n) normalizers.

use serde::Serialize;

use super::{integrate_piece, FiniteMeasure, Weight};
use crate::error::{Error, Result};

/// Integrate `weight` against the measure over the closed interval [lo, hi].
///
/// Atoms at the endpoints are included. An atom at 0 combined with a weight
/// singular there is rejected, as is any density piece whose integral against
/// the weight diverges on the interval.
pub fn integrate(m: &FiniteMeasure, w: &Weight, lo: f64, hi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(Error::Domain(format!(
            "interval [{lo}, {hi}] must lie within [0,1]"
        )));
    }
    let mut total = 0.0;
    for a in &m.atoms {
        if a.x < lo || a.x > hi {
            continue;
        }
        if a.x == 0.0 && w.singular_at_zero() {
            return Err(Error::NonIntegrable(format!(
                "atom at 0 (mass {}) against singular weight {w:?}",
                a.mass
            )));
        }
        total += a.mass * w.eval(a.x);
    }
    for p in &m.pieces {
        let (plo, phi) = p.support();
        let clo = plo.max(lo);
        let chi = phi.min(hi);
        if clo < chi {
            total += integrate_piece(p, w, clo, chi)?;
        }
    }
    Ok(total)
}

/// lambda_{b,k} = int x^{k-2} (1-x)^{b-k} Lambda(dx) for 2 <= k <= b.
///
/// An atom at 0 contributes its mass iff k = 2.
pub fn lambda_rate(b: usize, k: usize, m: &FiniteMeasure) -> Result<f64> {
    check_bk(b, k)?;
    integrate(
        m,
        &Weight::MergerKernel {
            b: b as u32,
            k: k as u32,
        },
        0.0,
        1.0,
    )
}

/// C(b,k) lambda_{b,k}, evaluated with the binomial coefficient folded into
/// the integrand so large b stays representable.
pub fn weighted_merger_rate(b: usize, k: usize, m: &FiniteMeasure) -> Result<f64> {
    check_bk(b, k)?;
    integrate(
        m,
        &Weight::BinomMergerKernel {
            b: b as u32,
            k: k as u32,
        },
        0.0,
        1.0,
    )
}

fn check_bk(b: usize, k: usize) -> Result<()> {
    if k < 2 || k > b {
        return Err(Error::Domain(format!(
            "merger rate needs 2 <= k <= b, got b={b}, k={k}"
        )));
    }
    Ok(())
}

/// g_b by the defining summation sum_k C(b,k) lambda_{b,k}.
pub fn total_rate_sum(b: usize, m: &FiniteMeasure) -> Result<f64> {
    if b < 2 {
        return Err(Error::Domain(format!("total rate needs b >= 2, got {b}")));
    }
    let mut acc = 0.0;
    let mut comp = 0.0;
    for k in 2..=b {
        let term = weighted_merger_rate(b, k, m)?;
        let t = acc + term;
        comp += if acc.abs() >= term.abs() {
            (acc - t) + term
        } else {
            (term - t) + acc
        };
        acc = t;
    }
    Ok(acc + comp)
}

/// g_b by the single-integral form, valid once the atom at 0 is split off:
/// C(b,2) Lambda({0}) + int (1-(1-x)^b - bx(1-x)^{b-1}) x^{-2} Lambda'(dx).
pub fn total_rate_integral(b: usize, m: &FiniteMeasure) -> Result<f64> {
    if b < 2 {
        return Err(Error::Domain(format!("total rate needs b >= 2, got {b}")));
    }
    let mass0 = m.mass_at(0.0);
    let mut rest = m.clone();
    rest.atoms.retain(|a| a.x != 0.0);
    let bf = b as f64;
    let cont = integrate(&rest, &Weight::TotalRate { n: b as u32 }, 0.0, 1.0)?;
    Ok(mass0 * bf * (bf - 1.0) / 2.0 + cont)
}

/// Total merger rate g_b from b blocks.
///
/// Both routes agree to relative 1e-8 (checked by tests); the summation is
/// used for small b where it is cheap, the integral form for large b where
/// b - 1 separate quadratures would dominate.
pub fn total_rate(b: usize, m: &FiniteMeasure) -> Result<f64> {
    if b <= 64 {
        total_rate_sum(b, m)
    } else {
        total_rate_integral(b, m)
    }
}

/// The scalar functionals attached to a sample size n.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeasureFunctionals {
    /// mu^(n) = int_{1/n}^1 x^{-1} Lambda(dx).
    pub mu_n: f64,
    /// mu-bar^(n) = int_{1/n}^1 x^{-2} Lambda(dx).
    pub mu_bar_n: f64,
    /// Total merger rate g_n.
    pub g_n: f64,
    /// Lambda([0, 1/n)).
    pub mass_below: f64,
    /// Set when mu^(n) = 0; downstream normalizations substitute 1.
    pub degenerate: bool,
}

/// Compute mu^(n), mu-bar^(n), g_n and the mass below 1/n.
pub fn functionals(n: usize, m: &FiniteMeasure) -> Result<MeasureFunctionals> {
    if n < 2 {
        return Err(Error::Domain(format!("functionals need n >= 2, got {n}")));
    }
    let c = 1.0 / n as f64;
    let mu_n = integrate(m, &Weight::InvX, c, 1.0)?;
    let mu_bar_n = integrate(m, &Weight::InvX2, c, 1.0)?;
    let g_n = total_rate(n, m)?;
    let mass_below = m.restrict_below(c).total_mass()?;
    Ok(MeasureFunctionals {
        mu_n,
        mu_bar_n,
        g_n,
        mass_below,
        degenerate: mu_n == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn lebesgue_inv_x_is_log() {
        // int_{1/n}^1 x^{-1} dx = ln n
        let m = FiniteMeasure::lebesgue();
        for n in [2usize, 10, 100, 22026] {
            let v = integrate(&m, &Weight::InvX, 1.0 / n as f64, 1.0).unwrap();
            assert!(
                rel_close(v, (n as f64).ln(), 1e-9),
                "n={n}: {v} vs {}",
                (n as f64).ln()
            );
        }
    }

    #[test]
    fn null_measure_integrates_to_zero() {
        let m = FiniteMeasure::null();
        assert_eq!(integrate(&m, &Weight::InvX2, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(integrate(&m, &Weight::One, 0.2, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn beta_half_inv_x_closed_form() {
        // Beta(0.5, 1): density Gamma(1.5)/(Gamma(0.5)Gamma(1)) x^{-1/2} = 0.5 x^{-1/2}
        // int_{0.01}^1 x^{-1} 0.5 x^{-1/2} dx = 0.5 * 2 (100^{1/2} - 1) = 9
        let m = FiniteMeasure::beta(0.5, 1.0).unwrap();
        let v = integrate(&m, &Weight::InvX, 0.01, 1.0).unwrap();
        assert!(rel_close(v, 9.0, 1e-9), "{v}");
    }

    #[test]
    fn atom_at_zero_with_singular_weight_rejected() {
        let m = FiniteMeasure::kingman();
        assert!(matches!(
            integrate(&m, &Weight::InvX, 0.0, 1.0),
            Err(Error::NonIntegrable(_))
        ));
        assert!(matches!(
            integrate(&m, &Weight::InvX2, 0.0, 1.0),
            Err(Error::NonIntegrable(_))
        ));
        // but fine when the interval excludes 0
        assert_eq!(integrate(&m, &Weight::InvX, 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn divergent_piece_rejected() {
        let m = FiniteMeasure::lebesgue();
        assert!(matches!(
            integrate(&m, &Weight::InvX, 0.0, 1.0),
            Err(Error::NonIntegrable(_))
        ));
        assert!(integrate(&FiniteMeasure::log_pow(1.0, 1.0, 0.5).unwrap(), &Weight::InvX, 0.0, 1.0).is_err());
        // beta with a > 1 is integrable against x^{-1} from 0
        let m15 = FiniteMeasure::beta(1.5, 1.0).unwrap();
        let v = integrate(&m15, &Weight::InvX, 0.0, 1.0).unwrap();
        // 1.5 * int_0^1 x^{-0.5} x^{... } : density = 1.5 x^{0.5}, weight x^{-1}
        // int = 1.5 int_0^1 x^{-0.5} dx = 3
        assert!(rel_close(v, 3.0, 1e-8), "{v}");
    }

    #[test]
    fn lambda_rate_examples() {
        let dirac = FiniteMeasure::kingman();
        assert_eq!(lambda_rate(5, 2, &dirac).unwrap(), 1.0);
        assert_eq!(lambda_rate(5, 3, &dirac).unwrap(), 0.0);
        let leb = FiniteMeasure::lebesgue();
        let v = lambda_rate(4, 3, &leb).unwrap();
        assert!(rel_close(v, 1.0 / 6.0, 1e-10), "{v}");
        assert!(lambda_rate(4, 1, &leb).is_err());
        assert!(lambda_rate(4, 5, &leb).is_err());
    }

    #[test]
    fn total_rate_examples() {
        let leb = FiniteMeasure::lebesgue();
        for n in [2usize, 5, 10, 100, 1000] {
            let g = total_rate(n, &leb).unwrap();
            assert!(rel_close(g, n as f64 - 1.0, 1e-9), "n={n}: {g}");
        }
        let dirac = FiniteMeasure::kingman();
        for n in [2usize, 7, 64, 200] {
            let g = total_rate(n, &dirac).unwrap();
            let expect = (n * (n - 1)) as f64 / 2.0;
            assert!(rel_close(g, expect, 1e-12), "n={n}: {g}");
        }
    }

    #[test]
    fn total_rate_beta_against_beta_function_oracle() {
        // lambda_{10,k} = Beta(k - 0.5, 10 - k + 1) / Beta(1.5, 1)
        let m = FiniteMeasure::beta(1.5, 1.0).unwrap();
        let g = total_rate_sum(10, &m).unwrap();
        let mut oracle = 0.0;
        let lbeta0 = super::super::ln_beta(1.5, 1.0);
        for k in 2..=10u32 {
            let lb = super::super::ln_beta(f64::from(k) - 0.5, 11.0 - f64::from(k));
            let lbinom = libm::lgamma(11.0) - libm::lgamma(f64::from(k) + 1.0)
                - libm::lgamma(11.0 - f64::from(k));
            oracle += (lbinom + lb - lbeta0).exp();
        }
        assert!(rel_close(g, oracle, 1e-9), "{g} vs {oracle}");
    }

    #[test]
    fn sum_and_integral_routes_agree() {
        let measures = [
            FiniteMeasure::lebesgue(),
            FiniteMeasure::beta(1.5, 1.0).unwrap(),
            FiniteMeasure::beta(0.5, 2.0).unwrap(),
            FiniteMeasure::log_pow(1.0, 1.0, 0.5).unwrap(),
            FiniteMeasure::new(vec![Atom { x: 0.3, mass: 0.7 }], vec![]).unwrap(),
        ];
        for m in &measures {
            for b in [2usize, 3, 5, 10, 20, 50] {
                let s = total_rate_sum(b, m).unwrap();
                let i = total_rate_integral(b, m).unwrap();
                assert!(rel_close(s, i, 1e-8), "b={b} m={m:?}: {s} vs {i}");
            }
        }
    }

    #[test]
    fn functionals_examples() {
        let leb = FiniteMeasure::lebesgue();
        // n = e^10 rounded: mu^(n) = ln n
        let n = 22026usize;
        let f = functionals(n, &leb).unwrap();
        assert!(rel_close(f.mu_n, (n as f64).ln(), 1e-9));
        assert!(!f.degenerate);

        let nul = FiniteMeasure::null();
        let f0 = functionals(100, &nul).unwrap();
        assert_eq!(f0.mu_n, 0.0);
        assert_eq!(f0.g_n, 0.0);
        assert_eq!(f0.mu_bar_n, 0.0);
        assert_eq!(f0.mass_below, 0.0);
        assert!(f0.degenerate);

        // Kingman: all mass at 0, so mu and mu-bar vanish and g = C(n,2)
        let f2 = functionals(50, &FiniteMeasure::kingman()).unwrap();
        assert_eq!(f2.mu_n, 0.0);
        assert!(f2.degenerate);
        assert!(rel_close(f2.g_n, 1225.0, 1e-12));
        assert_eq!(f2.mass_below, 1.0);
    }

    #[test]
    fn beta_half_functionals_closed_form() {
        // mu^(n) for Beta(0.5,1) is exactly sqrt(n) - 1
        let m = FiniteMeasure::beta(0.5, 1.0).unwrap();
        let f = functionals(1000, &m).unwrap();
        let exact = 1000f64.sqrt() - 1.0;
        assert!(rel_close(f.mu_n, exact, 1e-8), "{} vs {exact}", f.mu_n);
        // the paper's leading-order form Gamma(a+b)/((1-a)Gamma(a)Gamma(b)) n^{1-a}
        // carries an O(1) correction (= -1 here); at n = 10^4 it is within 2%
        let f4 = functionals(10_000, &m).unwrap();
        let leading = 100.0;
        assert!((f4.mu_n - leading).abs() / leading < 0.02);
    }

    #[test]
    fn mu_monotone_and_dominated_by_mu_bar() {
        for m in [
            FiniteMeasure::lebesgue(),
            FiniteMeasure::beta(1.5, 1.0).unwrap(),
            FiniteMeasure::log_pow(2.0, 1.0, 0.5).unwrap(),
        ] {
            let mut prev = 0.0;
            for n in [2usize, 4, 8, 64, 512] {
                let f = functionals(n, &m).unwrap();
                assert!(f.mu_n >= prev - 1e-12);
                assert!(f.mu_bar_n >= f.mu_n - 1e-12);
                // mu-bar >= restricted mass
                let mass_above = integrate(&m, &Weight::One, 1.0 / n as f64, 1.0).unwrap();
                assert!(f.mu_n >= mass_above - 1e-10);
                prev = f.mu_n;
            }
        }
    }

    #[test]
    fn restriction_additivity() {
        let m = FiniteMeasure::new(
            vec![Atom { x: 0.5, mass: 0.3 }],
            FiniteMeasure::lebesgue().pieces,
        )
        .unwrap();
        for c in [0.1, 0.25, 0.5, 0.9] {
            let below = m.restrict_below(c);
            let above = m.restrict_from(c);
            for w in [Weight::One, Weight::InvX] {
                let whole = integrate(&m, &w, 0.05, 1.0).unwrap();
                let parts = integrate(&below, &w, 0.05, 1.0).unwrap()
                    + integrate(&above, &w, 0.05, 1.0).unwrap();
                assert!(
                    (whole - parts).abs() < 1e-10 * whole.max(1.0),
                    "c={c} w={w:?}: {whole} vs {parts}"
                );
            }
        }
    }

    #[test]
    fn pascal_identity_against_quadrature() {
        // lambda_{b,k} = lambda_{b+1,k} + lambda_{b+1,k+1}
        let measures = [
            FiniteMeasure::lebesgue(),
            FiniteMeasure::beta(0.5, 1.0).unwrap(),
            FiniteMeasure::beta(1.5, 2.0).unwrap(),
        ];
        for m in &measures {
            for (b, k) in [(2usize, 2usize), (5, 3), (10, 2), (10, 10), (30, 17)] {
                let lhs = lambda_rate(b, k, m).unwrap();
                let rhs = lambda_rate(b + 1, k, m).unwrap() + lambda_rate(b + 1, k + 1, m).unwrap();
                assert!(
                    rel_close(lhs, rhs, 1e-8),
                    "b={b} k={k}: {lhs} vs {rhs}"
                );
            }
        }
    }
}
