//! Goodness-of-fit statistics for the Monte Carlo verification harness.

use crate::analysis::laws::LimitLaw;
use crate::error::{Error, Result};

/// Supremum distance between the empirical CDF of a sorted sample and `cdf`.
pub fn ks_statistic_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i as f64 + 1.0) / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov survival function: P(sup |B(F)| > z) for z = sqrt(n) D.
pub fn kolmogorov_sf(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    let mut p = 0.0;
    for j in 1..200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * z * z).exp();
        p += if j % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against a named limit law.
/// Returns (statistic, asymptotic p-value). The sample is sorted in place.
pub fn ks_test(sample: &mut [f64], law: &LimitLaw) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = ks_statistic_sorted(sample, |x| law.cdf(x));
    let n = sample.len() as f64;
    Ok((d, kolmogorov_sf(n.sqrt() * d)))
}

/// Two-sample Kolmogorov-Smirnov test. Both samples are sorted in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len(), b.len());
    let mut d = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] == x {
            i += 1;
        }
        while j < nb && b[j] == x {
            j += 1;
        }
        let fa = i as f64 / na as f64;
        let fb = j as f64 / nb as f64;
        d = d.max((fa - fb).abs());
    }
    let n_eff = (na as f64 * nb as f64) / (na + nb) as f64;
    Ok((d, kolmogorov_sf(n_eff.sqrt() * d)))
}

/// Regularized upper incomplete gamma Q(s, x); survival of Gamma(s, 1).
pub fn gamma_q(s: f64, x: f64) -> f64 {
    if x < 0.0 || s <= 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return 1.0;
    }
    if x < s + 1.0 {
        // series for P(s,x)
        let mut sum = 1.0 / s;
        let mut term = sum;
        let mut a = s;
        for _ in 0..500 {
            a += 1.0;
            term *= x / a;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        1.0 - sum * (-x + s * x.ln() - libm::lgamma(s)).exp()
    } else {
        // Lentz continued fraction for Q(s,x)
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / 1e-300;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < 1e-300 {
                d = 1e-300;
            }
            c = b + an / c;
            if c.abs() < 1e-300 {
                c = 1e-300;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x + s * x.ln() - libm::lgamma(s)).exp() * h
    }
}

/// Chi-square survival function with `dof` degrees of freedom.
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    gamma_q(dof as f64 / 2.0, x / 2.0)
}

/// Pearson chi-square test of observed counts against expected probabilities.
/// Returns (statistic, p-value) with k-1 degrees of freedom.
pub fn chi_square_test(observed: &[u64], expected_probs: &[f64]) -> Result<(f64, f64)> {
    if observed.is_empty() || observed.len() != expected_probs.len() {
        return Err(Error::EmptySample);
    }
    let total: u64 = observed.iter().sum();
    let mut chi2 = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * total as f64;
        if e > 0.0 {
            chi2 += (o as f64 - e).powi(2) / e;
        } else if o > 0 {
            return Ok((f64::INFINITY, 0.0));
        }
    }
    Ok((chi2, chi_square_sf(chi2, observed.len() - 1)))
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Pearson correlation coefficient.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}
