//! The limit laws that scaled external branch lengths converge to.

/// Named limit distribution with closed-form CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLaw {
    /// Exponential with unit rate.
    Exp1,
    /// Limit of n T^(n) under the Kingman coalescent: density 8/(2+x)^3.
    KingmanExternal,
    /// Limit T(a,b) of n^{1-a} T^(n) for the Beta(a,b) coalescent, 0 < a < 1:
    /// density (G/( (1-a) Gamma(b))) (1 + (G/((2-a) Gamma(b))) x)^{-(3-2a)/(1-a)}
    /// with G = Gamma(a+b).
    BetaExternal { a: f64, b: f64 },
    /// The conjectured limit T_c of mu^(n) T^(n) when g_n/(n mu^(n)) -> c > 0:
    /// density Gamma(2-alpha*) (1+cx)^{-alpha*/(alpha*-1)-1} where alpha*
    /// solves (alpha-1) Gamma(2-alpha)/alpha = c.
    Conjecture { c: f64, alpha_star: f64 },
}

impl LimitLaw {
    /// Build the conjecture law for a given c, solving for alpha*.
    pub fn conjecture(c: f64) -> Self {
        LimitLaw::Conjecture {
            c,
            alpha_star: alpha_star(c),
        }
    }

    /// The conjecture law specialized to a Beta(a, b) coalescent with
    /// 0 < a < 1, where c = (1-a) Gamma(a) / (2-a).
    pub fn conjecture_for_beta(a: f64) -> Self {
        let c = (1.0 - a) * libm::tgamma(a) / (2.0 - a);
        LimitLaw::conjecture(c)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            LimitLaw::Exp1 => -(-x).exp_m1(),
            LimitLaw::KingmanExternal => 1.0 - 4.0 / ((2.0 + x) * (2.0 + x)),
            LimitLaw::BetaExternal { a, b } => {
                let g = libm::tgamma(a + b);
                let c2 = g / ((2.0 - a) * libm::tgamma(b));
                // exponent 1 - (3-2a)/(1-a) = -(2-a)/(1-a)
                1.0 - (1.0 + c2 * x).powf(-(2.0 - a) / (1.0 - a))
            }
            LimitLaw::Conjecture { c, alpha_star } => {
                let beta = alpha_star / (alpha_star - 1.0);
                1.0 - (1.0 + c * x).powf(-beta)
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match *self {
            LimitLaw::Exp1 => (-x).exp(),
            LimitLaw::KingmanExternal => 8.0 / (2.0 + x).powi(3),
            LimitLaw::BetaExternal { a, b } => {
                let g = libm::tgamma(a + b);
                let coef = g / ((1.0 - a) * libm::tgamma(b));
                let c2 = g / ((2.0 - a) * libm::tgamma(b));
                coef * (1.0 + c2 * x).powf(-(3.0 - 2.0 * a) / (1.0 - a))
            }
            LimitLaw::Conjecture { c, alpha_star } => {
                let beta = alpha_star / (alpha_star - 1.0);
                libm::tgamma(2.0 - alpha_star) * (1.0 + c * x).powf(-beta - 1.0)
            }
        }
    }
}

/// Solve (alpha - 1) Gamma(2 - alpha) / alpha = c for alpha in (1, 2) by
/// bisection to 1e-10. The left side runs from 0 to +infinity across the
/// interval, so the root exists and is unique for every c > 0.
pub fn alpha_star(c: f64) -> f64 {
    assert!(c > 0.0, "alpha* needs c > 0");
    let h = |alpha: f64| (alpha - 1.0) * libm::tgamma(2.0 - alpha) / alpha - c;
    let mut lo = 1.0 + 1e-14;
    let mut hi = 2.0 - 1e-14;
    debug_assert!(h(lo) < 0.0 && h(hi) > 0.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
