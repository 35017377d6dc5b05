//! Named integrand weights shared by every integral functional of a measure.
//!
//! All merger-rate functionals are integrals of `weight(x) * Lambda(dx)` for a
//! weight in this enum. Weights that mix huge binomial coefficients with tiny
//! kernels are evaluated in log space so that entries remain representable for
//! block counts in the thousands.

/// Integrand applied to a measure under [`integrate`](crate::measure::integrate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// 1 (plain mass).
    One,
    /// x^{-1}.
    InvX,
    /// x^{-2}.
    InvX2,
    /// x^{k-2} (1-x)^{b-k}, the k-of-b merger kernel.
    MergerKernel { b: u32, k: u32 },
    /// C(b,k) x^{k-2} (1-x)^{b-k}, the merger kernel carrying its binomial
    /// coefficient. Integrating this directly avoids overflow of C(b,k)
    /// against an underflowing kernel integral.
    BinomMergerKernel { b: u32, k: u32 },
    /// (1 - (1-x)^n - n x (1-x)^{n-1}) x^{-2}, the total-rate integrand.
    TotalRate { n: u32 },
    /// (1 - (1-x)^m) x^{-1}, the per-block external-merger hazard integrand.
    ExternalHazard { m: u32 },
}

fn ln_binom(b: u32, k: u32) -> f64 {
    libm::lgamma(f64::from(b) + 1.0) - libm::lgamma(f64::from(k) + 1.0)
        - libm::lgamma(f64::from(b - k) + 1.0)
}

/// (1-x)^e computed as exp(e ln(1-x)); exact at the endpoints.
fn pow_1mx(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        (e * (-x).ln_1p()).exp()
    }
}

/// Stable evaluation of (1 - (1-x)^n - n x (1-x)^{n-1}) / x^2.
///
/// For n*x small the three leading terms cancel catastrophically, so the
/// equivalent binomial tail sum over k >= 2 (built multiplicatively, no
/// explicit binomial coefficients) is used there.
fn total_rate_integrand(n: u32, x: f64) -> f64 {
    let nf = f64::from(n);
    if n < 2 {
        return 0.0;
    }
    if x <= 0.0 {
        return nf * (nf - 1.0) / 2.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if nf * x < 0.5 {
        // sum_{k=2}^n C(n,k) x^{k-2} (1-x)^{n-k}, term ratio < 1/2
        let mut term = nf * (nf - 1.0) / 2.0 * pow_1mx(x, nf - 2.0);
        let ratio_base = x / (1.0 - x);
        let mut acc = term;
        let mut k = 2u32;
        while k < n {
            term *= (nf - f64::from(k)) / (f64::from(k) + 1.0) * ratio_base;
            acc += term;
            k += 1;
            if term < acc * 1e-17 {
                break;
            }
        }
        acc
    } else {
        // 1 - (1 + (n-1)x)(1-x)^{n-1}, no cancellation once nx >= 1/2
        let s = (nf - 1.0) * x;
        let z = s.ln_1p() + (nf - 1.0) * (-x).ln_1p();
        -z.exp_m1() / (x * x)
    }
}

impl Weight {
    /// Evaluate the weight at `x` in [0,1]. Singular weights return infinity
    /// at 0; callers screen atoms before evaluating.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Weight::One => 1.0,
            Weight::InvX => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / x
                }
            }
            Weight::InvX2 => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / (x * x)
                }
            }
            Weight::MergerKernel { b, k } => {
                debug_assert!(k >= 2 && k <= b);
                if x == 0.0 {
                    return if k == 2 { 1.0 } else { 0.0 };
                }
                if x == 1.0 {
                    return if k == b { 1.0 } else { 0.0 };
                }
                ((f64::from(k) - 2.0) * x.ln() + f64::from(b - k) * (-x).ln_1p()).exp()
            }
            Weight::BinomMergerKernel { b, k } => {
                debug_assert!(k >= 2 && k <= b);
                if x == 0.0 {
                    return if k == 2 {
                        f64::from(b) * (f64::from(b) - 1.0) / 2.0
                    } else {
                        0.0
                    };
                }
                if x == 1.0 {
                    return if k == b { 1.0 } else { 0.0 };
                }
                (ln_binom(b, k) + (f64::from(k) - 2.0) * x.ln() + f64::from(b - k) * (-x).ln_1p())
                    .exp()
            }
            Weight::TotalRate { n } => total_rate_integrand(n, x),
            Weight::ExternalHazard { m } => {
                if x == 0.0 {
                    f64::from(m)
                } else {
                    -(f64::from(m) * (-x).ln_1p()).exp_m1() / x
                }
            }
        }
    }

    /// True when the weight diverges at x = 0 (an atom there is rejected).
    pub fn singular_at_zero(&self) -> bool {
        matches!(self, Weight::InvX | Weight::InvX2)
    }

    /// Power alpha such that weight(x) ~ c * x^alpha as x -> 0+.
    pub fn power_at_zero(&self) -> f64 {
        match *self {
            Weight::One | Weight::TotalRate { .. } | Weight::ExternalHazard { .. } => 0.0,
            Weight::InvX => -1.0,
            Weight::InvX2 => -2.0,
            Weight::MergerKernel { k, .. } | Weight::BinomMergerKernel { k, .. } => {
                f64::from(k) - 2.0
            }
        }
    }

    /// Interior points where the integrand changes scale; used to seed
    /// adaptive subdivision so that narrow kernel peaks are not missed by the
    /// first coarse quadrature pass.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Weight::One | Weight::InvX | Weight::InvX2 => Vec::new(),
            Weight::MergerKernel { b, k } | Weight::BinomMergerKernel { b, k } => {
                let bf = f64::from(b);
                let kf = f64::from(k);
                let mut pts = Vec::with_capacity(8);
                // kernel mode and a few widths around it
                if b > 2 {
                    let mode = (kf - 2.0) / (bf - 2.0);
                    let sigma = (kf.max(1.0)).sqrt() / bf;
                    for m in [-8.0, -2.0, 0.0, 2.0, 8.0, 32.0] {
                        pts.push(mode + m * sigma);
                    }
                }
                // small-x scales matter for low k
                pts.push(1.0 / bf);
                pts.push(10.0 / bf);
                pts.push(100.0 / bf);
                pts
            }
            Weight::TotalRate { n } | Weight::ExternalHazard { m: n } => {
                let nf = f64::from(n).max(2.0);
                vec![0.1 / nf, 1.0 / nf, 10.0 / nf, 100.0 / nf]
            }
        }
    }
}
