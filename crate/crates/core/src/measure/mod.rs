//! Finite measures on [0,1] and their integral functionals.
//!
//! A measure is a list of atoms plus named density pieces (constant, beta
//! kernel, log-power). The characteristic measure of a coalescent, its noise
//! and main restrictions, and every rate functional in this crate are built
//! from this one type.

mod functionals;
pub mod quad;
mod weight;

pub use functionals::{
    functionals, integrate, lambda_rate, total_rate, total_rate_integral, total_rate_sum,
    weighted_merger_rate, MeasureFunctionals,
};
pub use weight::Weight;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

fn default_lo() -> f64 {
    0.0
}
fn default_hi() -> f64 {
    1.0
}

/// A named density piece supported on an interval of [0,1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DensityPiece {
    /// Constant density `c`.
    Const {
        c: f64,
        #[serde(default = "default_lo")]
        lo: f64,
        #[serde(default = "default_hi")]
        hi: f64,
    },
    /// `weight * x^{a-1}(1-x)^{b-1} / Beta(a,b)`.
    Beta {
        a: f64,
        b: f64,
        weight: f64,
        #[serde(default = "default_lo")]
        lo: f64,
        #[serde(default = "default_hi")]
        hi: f64,
    },
    /// `p * (ln(1/x))^q`.
    LogPow {
        p: f64,
        q: f64,
        #[serde(default = "default_lo")]
        lo: f64,
        #[serde(default = "default_hi")]
        hi: f64,
    },
}

impl DensityPiece {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DensityPiece::Const { lo, hi, .. }
            | DensityPiece::Beta { lo, hi, .. }
            | DensityPiece::LogPow { lo, hi, .. } => (lo, hi),
        }
    }

    fn with_support(&self, lo: f64, hi: f64) -> Self {
        let mut p = self.clone();
        match &mut p {
            DensityPiece::Const { lo: l, hi: h, .. }
            | DensityPiece::Beta { lo: l, hi: h, .. }
            | DensityPiece::LogPow { lo: l, hi: h, .. } => {
                *l = lo;
                *h = hi;
            }
        }
        p
    }

    /// Density value at x inside the support.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            DensityPiece::Const { c, .. } => c,
            DensityPiece::Beta { a, b, weight, .. } => {
                if x <= 0.0 || x >= 1.0 {
                    // endpoint values only matter as limits; quadrature never
                    // evaluates at the closed endpoints
                    return if x == 0.0 && a == 1.0 || x == 1.0 && b == 1.0 {
                        weight / beta_fn(a, b)
                    } else {
                        0.0
                    };
                }
                let ln = (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b);
                weight * ln.exp()
            }
            DensityPiece::LogPow { p, q, .. } => {
                if x <= 0.0 {
                    f64::INFINITY
                } else if x >= 1.0 {
                    0.0
                } else if q == 0.0 {
                    p
                } else {
                    p * (-x.ln()).powf(q)
                }
            }
        }
    }

    /// Power alpha with density(x) ~ c x^alpha as x -> 0+ (log factors aside).
    fn power_at_zero(&self) -> f64 {
        match *self {
            DensityPiece::Const { .. } => 0.0,
            DensityPiece::Beta { a, .. } => a - 1.0,
            DensityPiece::LogPow { .. } => 0.0,
        }
    }

    /// Exponent of the slowly-varying log factor at 0.
    fn log_power_at_zero(&self) -> f64 {
        match *self {
            DensityPiece::LogPow { q, .. } => q,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support();
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || !(lo < hi) {
            return Err(Error::InvalidMeasure(format!(
                "piece support [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
            )));
        }
        match *self {
            DensityPiece::Const { c, .. } => {
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::InvalidMeasure(format!("const density c = {c}")));
                }
            }
            DensityPiece::Beta { a, b, weight, .. } => {
                if !(a > 0.0) || !(b > 0.0) || !(weight > 0.0)
                    || !a.is_finite() || !b.is_finite() || !weight.is_finite()
                {
                    return Err(Error::InvalidMeasure(format!(
                        "beta kernel needs a > 0, b > 0, weight > 0 (got a={a}, b={b}, weight={weight})"
                    )));
                }
            }
            DensityPiece::LogPow { p, q, hi, .. } => {
                if !(p > 0.0) || !(q >= 0.0) || !p.is_finite() || !q.is_finite() {
                    return Err(Error::InvalidMeasure(format!(
                        "log-power piece needs p > 0, q >= 0 (got p={p}, q={q})"
                    )));
                }
                if hi > 1.0 - 1e-15 && q > 0.0 {
                    // (ln 1/x)^q vanishes at 1; still integrable, fine
                }
            }
        }
        Ok(())
    }

    /// Total mass of the piece over its support, by quadrature.
    pub fn mass(&self) -> Result<f64> {
        let m = FiniteMeasure {
            atoms: Vec::new(),
            pieces: vec![self.clone()],
        };
        integrate(&m, &Weight::One, 0.0, 1.0)
    }
}

pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}
pub(crate) fn beta_fn(a: f64, b: f64) -> f64 {
    ln_beta(a, b).exp()
}

/// A finite measure on [0,1]: atoms plus density pieces. The null measure
/// (no atoms, no pieces) is legal everywhere; a coalescent driven by it never
/// jumps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FiniteMeasure {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub pieces: Vec<DensityPiece>,
}

impl FiniteMeasure {
    pub fn new(atoms: Vec<Atom>, pieces: Vec<DensityPiece>) -> Result<Self> {
        let m = FiniteMeasure { atoms, pieces };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !(0.0..=1.0).contains(&a.x) || !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {} with mass {}",
                    a.x, a.mass
                )));
            }
        }
        for i in 0..self.atoms.len() {
            for j in (i + 1)..self.atoms.len() {
                if self.atoms[i].x == self.atoms[j].x {
                    return Err(Error::InvalidMeasure(format!(
                        "duplicate atom location {}",
                        self.atoms[i].x
                    )));
                }
            }
        }
        for p in &self.pieces {
            p.validate()?;
        }
        Ok(())
    }

    /// The null measure.
    pub fn null() -> Self {
        FiniteMeasure::default()
    }

    pub fn is_null(&self) -> bool {
        self.atoms.is_empty() && self.pieces.is_empty()
    }

    /// Dirac mass at 0: the Kingman coalescent.
    pub fn kingman() -> Self {
        FiniteMeasure {
            atoms: vec![Atom { x: 0.0, mass: 1.0 }],
            pieces: Vec::new(),
        }
    }

    /// Lebesgue measure on [0,1]: the Bolthausen-Sznitman coalescent.
    pub fn lebesgue() -> Self {
        FiniteMeasure {
            atoms: Vec::new(),
            pieces: vec![DensityPiece::Const {
                c: 1.0,
                lo: 0.0,
                hi: 1.0,
            }],
        }
    }

    /// Beta(a,b) measure on [0,1] with unit weight.
    pub fn beta(a: f64, b: f64) -> Result<Self> {
        FiniteMeasure::new(
            Vec::new(),
            vec![DensityPiece::Beta {
                a,
                b,
                weight: 1.0,
                lo: 0.0,
                hi: 1.0,
            }],
        )
    }

    /// Density p (ln 1/x)^q on [0, r).
    pub fn log_pow(p: f64, q: f64, r: f64) -> Result<Self> {
        FiniteMeasure::new(
            Vec::new(),
            vec![DensityPiece::LogPow {
                p,
                q,
                lo: 0.0,
                hi: r,
            }],
        )
    }

    /// Parse a preset name: `kingman`, `lebesgue`, `beta:a,b`, `logpow:p,q,r`.
    pub fn from_preset(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidMeasure(format!("preset '{s}': {msg}"));
        if s == "kingman" {
            return Ok(FiniteMeasure::kingman());
        }
        if s == "lebesgue" {
            return Ok(FiniteMeasure::lebesgue());
        }
        if let Some(rest) = s.strip_prefix("beta:") {
            let parts: Vec<f64> = rest
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            if parts.len() != 2 {
                return Err(bad("expected beta:a,b"));
            }
            return FiniteMeasure::beta(parts[0], parts[1]);
        }
        if let Some(rest) = s.strip_prefix("logpow:") {
            let parts: Vec<f64> = rest
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            if parts.len() != 3 {
                return Err(bad("expected logpow:p,q,r"));
            }
            return FiniteMeasure::log_pow(parts[0], parts[1], parts[2]);
        }
        Err(bad("unknown preset (kingman | lebesgue | beta:a,b | logpow:p,q,r)"))
    }

    /// Parse the JSON document format:
    /// `{"atoms":[{"x":0.0,"mass":1.0}],"pieces":[{"family":"beta","a":0.5,"b":1.0,"weight":1.0,"lo":0.0,"hi":1.0}]}`
    pub fn from_json(s: &str) -> Result<Self> {
        let m: FiniteMeasure = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serializes")
    }

    pub fn mass_at(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.x == x)
            .map(|a| a.mass)
            .sum()
    }

    /// Total mass; quadrature over pieces.
    pub fn total_mass(&self) -> Result<f64> {
        integrate(self, &Weight::One, 0.0, 1.0)
    }

    /// Restriction to [0, c): atoms strictly below c, pieces clipped.
    /// An atom exactly at the split point belongs to the upper part.
    pub fn restrict_below(&self, c: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .copied()
            .filter(|a| a.x < c)
            .collect();
        let pieces = self
            .pieces
            .iter()
            .filter_map(|p| {
                let (lo, hi) = p.support();
                let nhi = hi.min(c);
                (lo < nhi).then(|| p.with_support(lo, nhi))
            })
            .collect();
        FiniteMeasure { atoms, pieces }
    }

    /// Restriction to [c, 1]: atoms at or above c, pieces clipped.
    pub fn restrict_from(&self, c: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .copied()
            .filter(|a| a.x >= c)
            .collect();
        let pieces = self
            .pieces
            .iter()
            .filter_map(|p| {
                let (lo, hi) = p.support();
                let nlo = lo.max(c);
                (nlo < hi).then(|| p.with_support(nlo, hi))
            })
            .collect();
        FiniteMeasure { atoms, pieces }
    }

    /// The noise/main split at 1/n used throughout: (Lambda 1_[0,1/n), Lambda 1_[1/n,1]).
    pub fn split_at_inverse(&self, n: usize) -> (Self, Self) {
        let c = 1.0 / n as f64;
        (self.restrict_below(c), self.restrict_from(c))
    }

    /// Sum measure. Atoms at identical locations are merged.
    pub fn add(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        for oa in &other.atoms {
            if let Some(a) = atoms.iter_mut().find(|a| a.x == oa.x) {
                a.mass += oa.mass;
            } else {
                atoms.push(*oa);
            }
        }
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        FiniteMeasure { atoms, pieces }
    }

    /// Certified difference self - smaller, or NotDominated.
    ///
    /// Dominance is syntactic: every atom of `smaller` must sit at an atom of
    /// `self` with no more mass, and every piece of `smaller` must match a
    /// piece of `self` with identical family, shape parameters and support and
    /// a dominating coefficient. Semantic dominance across unlike families is
    /// rejected rather than guessed.
    pub fn try_subtract(&self, smaller: &Self) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        for sa in &smaller.atoms {
            match atoms.iter_mut().find(|a| a.x == sa.x) {
                Some(a) if a.mass >= sa.mass => a.mass -= sa.mass,
                _ => {
                    return Err(Error::NotDominated(format!(
                        "atom at {} with mass {} not covered",
                        sa.x, sa.mass
                    )))
                }
            }
        }
        atoms.retain(|a| a.mass > 0.0);

        let mut pieces = self.pieces.clone();
        for sp in &smaller.pieces {
            let pos = pieces.iter().position(|p| pieces_comparable(p, sp));
            let Some(i) = pos else {
                return Err(Error::NotDominated(format!(
                    "no matching piece for {sp:?}"
                )));
            };
            let remaining = subtract_coeff(&pieces[i], sp)?;
            match remaining {
                Some(p) => pieces[i] = p,
                None => {
                    pieces.remove(i);
                }
            }
        }
        Ok(FiniteMeasure { atoms, pieces })
    }
}

/// Same family, same shape parameters, same support.
fn pieces_comparable(big: &DensityPiece, small: &DensityPiece) -> bool {
    if big.support() != small.support() {
        return false;
    }
    match (big, small) {
        (DensityPiece::Const { .. }, DensityPiece::Const { .. }) => true,
        (
            DensityPiece::Beta { a: a1, b: b1, .. },
            DensityPiece::Beta { a: a2, b: b2, .. },
        ) => a1 == a2 && b1 == b2,
        (
            DensityPiece::LogPow { q: q1, .. },
            DensityPiece::LogPow { q: q2, .. },
        ) => q1 == q2,
        _ => false,
    }
}

fn subtract_coeff(big: &DensityPiece, small: &DensityPiece) -> Result<Option<DensityPiece>> {
    let not_dom = |c1: f64, c2: f64| {
        Error::NotDominated(format!("coefficient {c2} exceeds {c1}"))
    };
    match (big, small) {
        (DensityPiece::Const { c: c1, lo, hi }, DensityPiece::Const { c: c2, .. }) => {
            if c1 < c2 {
                return Err(not_dom(*c1, *c2));
            }
            Ok((c1 > c2).then(|| DensityPiece::Const {
                c: c1 - c2,
                lo: *lo,
                hi: *hi,
            }))
        }
        (
            DensityPiece::Beta {
                a,
                b,
                weight: w1,
                lo,
                hi,
            },
            DensityPiece::Beta { weight: w2, .. },
        ) => {
            if w1 < w2 {
                return Err(not_dom(*w1, *w2));
            }
            Ok((w1 > w2).then(|| DensityPiece::Beta {
                a: *a,
                b: *b,
                weight: w1 - w2,
                lo: *lo,
                hi: *hi,
            }))
        }
        (
            DensityPiece::LogPow { p: p1, q, lo, hi },
            DensityPiece::LogPow { p: p2, .. },
        ) => {
            if p1 < p2 {
                return Err(not_dom(*p1, *p2));
            }
            Ok((p1 > p2).then(|| DensityPiece::LogPow {
                p: p1 - p2,
                q: *q,
                lo: *lo,
                hi: *hi,
            }))
        }
        _ => Err(Error::NotDominated("unlike families".into())),
    }
}

pub(crate) use piece_integration::integrate_piece;

mod piece_integration {
    use super::*;
    use quad::adaptive_quad;

    /// Below this point the substitution x = e^{-u} is applied; it tames the
    /// x^{-1}, x^{-2} and beta-kernel singularities near 0.
    const EPS_LOG: f64 = 1e-3;
    const REL_TOL: f64 = 1e-10;

    /// Integrate density * weight over the clipped support [lo, hi].
    pub fn integrate_piece(
        piece: &DensityPiece,
        w: &Weight,
        lo: f64,
        hi: f64,
    ) -> Result<f64> {
        if lo >= hi {
            return Ok(0.0);
        }
        // combined behaviour at 0: density ~ x^dp (ln 1/x)^q, weight ~ x^wp
        let delta = 1.0 + piece.power_at_zero() + w.power_at_zero();
        let logq = piece.log_power_at_zero();
        if lo == 0.0 && delta <= 0.0 {
            return Err(Error::NonIntegrable(format!(
                "piece {piece:?} against weight {w:?} diverges at 0 (power {delta})"
            )));
        }

        let f = {
            let piece = piece.clone();
            let w = *w;
            move |x: f64| piece.density(x) * w.eval(x)
        };

        let mut total = 0.0;
        let split = EPS_LOG.min(hi).max(lo);
        if lo < split && (lo == 0.0 || lo < EPS_LOG) {
            // log-domain part on [lo, split]
            let u_lo = -split.ln();
            let u_hi = if lo > 0.0 {
                (-lo.ln()).min(700.0)
            } else {
                // truncate where the transformed integrand has decayed away
                (u_lo + (55.0 + 15.0 * logq) / delta).min(700.0)
            };
            if u_hi > u_lo {
                let g = |u: f64| {
                    let x = (-u).exp();
                    f(x) * x
                };
                let mut breaks: Vec<f64> = w
                    .breakpoints()
                    .into_iter()
                    .chain(piece_breaks(piece))
                    .filter(|x| *x > (-u_hi).exp() && *x < split)
                    .map(|x| -x.ln())
                    .collect();
                breaks.push(u_lo + 2.0);
                breaks.push(u_lo + 10.0);
                let v = adaptive_quad(&g, u_lo, u_hi, REL_TOL, &breaks)?;
                let mut part = v;
                if lo == 0.0 && u_hi < 700.0 {
                    // first-order tail beyond the truncation point
                    part += g(u_hi) / delta;
                }
                total += part;
            }
        }
        if hi > split {
            let direct_lo = split.max(lo);
            let breaks: Vec<f64> = w
                .breakpoints()
                .into_iter()
                .chain(piece_breaks(piece))
                .collect();
            total += adaptive_quad(&f, direct_lo, hi, REL_TOL, &breaks)?;
        }
        Ok(total)
    }

    fn piece_breaks(p: &DensityPiece) -> Vec<f64> {
        match *p {
            // beta kernels with b > 1 decay near 1; give the engine a hint
            DensityPiece::Beta { a, b, .. } => {
                let mut v = Vec::new();
                if a != 1.0 {
                    v.extend([1e-2, 0.1]);
                }
                if b != 1.0 {
                    v.push(0.9);
                }
                v
            }
            DensityPiece::LogPow { .. } => vec![1e-2, 0.1],
            DensityPiece::Const { .. } => Vec::new(),
        }
    }
}
