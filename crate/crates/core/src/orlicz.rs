//! Orlicz functions and the Orlicz (Luxemburg-type) norm of weighted samples.

use serde::{Deserialize, Serialize};

use crate::error::{OlexError, Result};

/// Relative width at which the norm bisection stops.
pub const NORM_REL_TOL: f64 = 1e-12;

/// JSON form of an Orlicz function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PhiSpec {
    Power { p: f64 },
    ExpMinusOne,
    PowerOf { base: Box<PhiSpec>, p: f64 },
    Table { knots: Vec<[f64; 2]> },
}

/// Piecewise-linear convex interpolant through `(t, φ(t))` knots starting at
/// the origin, continued linearly with the last slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexTable {
    t: Vec<f64>,
    v: Vec<f64>,
    slopes: Vec<f64>,
}

impl ConvexTable {
    pub fn new(knots: &[[f64; 2]]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(OlexError::Config("table φ needs at least two knots".into()));
        }
        if knots[0] != [0.0, 0.0] {
            return Err(OlexError::Config(format!(
                "table φ must start at (0, 0), got {:?}",
                knots[0]
            )));
        }
        let t: Vec<f64> = knots.iter().map(|k| k[0]).collect();
        let v: Vec<f64> = knots.iter().map(|k| k[1]).collect();
        if t.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(OlexError::Config("table φ knots must be finite".into()));
        }
        let mut slopes = Vec::with_capacity(t.len() - 1);
        for i in 1..t.len() {
            let dt = t[i] - t[i - 1];
            if dt <= 0.0 {
                return Err(OlexError::Config(format!("table φ knots not increasing at {i}")));
            }
            let s = (v[i] - v[i - 1]) / dt;
            if s <= 0.0 {
                return Err(OlexError::Config(format!("table φ not strictly increasing at knot {i}")));
            }
            if let Some(prev) = slopes.last() {
                if s < *prev * (1.0 - 1e-12) {
                    return Err(OlexError::Config(format!("table φ not convex at knot {i}")));
                }
            }
            slopes.push(s);
        }
        Ok(ConvexTable { t, v, slopes })
    }

    fn segment(&self, x: f64) -> usize {
        match self.t.partition_point(|&ti| ti <= x) {
            0 => 0,
            k => (k - 1).min(self.slopes.len() - 1),
        }
    }

    fn value(&self, x: f64) -> f64 {
        let i = self.segment(x);
        self.v[i] + self.slopes[i] * (x - self.t[i])
    }

    /// Right derivative; a step function.
    fn derivative(&self, x: f64) -> f64 {
        self.slopes[self.segment(x)]
    }

    fn inverse(&self, s: f64) -> f64 {
        let i = match self.v.partition_point(|&vi| vi <= s) {
            0 => 0,
            k => (k - 1).min(self.slopes.len() - 1),
        };
        self.t[i] + (s - self.v[i]) / self.slopes[i]
    }

    pub fn knots(&self) -> Vec<[f64; 2]> {
        self.t.iter().zip(&self.v).map(|(a, b)| [*a, *b]).collect()
    }
}

/// A convex, strictly increasing φ: [0, ∞) → [0, ∞) with φ(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum OrliczFunction {
    /// φ(t) = t^p, p ≥ 1.
    Power(f64),
    /// φ(t) = e^t − 1.
    ExpMinusOne,
    /// φ(t) = base(t)^p, p ≥ 1.
    PowerOf(Box<OrliczFunction>, f64),
    Table(ConvexTable),
}

impl OrliczFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(OlexError::Config(format!("power φ needs finite p ≥ 1, got {p}")));
        }
        Ok(OrliczFunction::Power(p))
    }

    pub fn exp_minus_one() -> Self {
        OrliczFunction::ExpMinusOne
    }

    /// `base^p`. Powers of powers collapse to a single power.
    pub fn power_of(base: OrliczFunction, p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(OlexError::Config(format!("power_of needs finite p ≥ 1, got {p}")));
        }
        Ok(match base {
            OrliczFunction::Power(q) => OrliczFunction::Power(q * p),
            other => OrliczFunction::PowerOf(Box::new(other), p),
        })
    }

    pub fn table(knots: &[[f64; 2]]) -> Result<Self> {
        let phi = OrliczFunction::Table(ConvexTable::new(knots)?);
        phi.validate()?;
        Ok(phi)
    }

    pub fn from_spec(spec: &PhiSpec) -> Result<Self> {
        match spec {
            PhiSpec::Power { p } => Self::power(*p),
            PhiSpec::ExpMinusOne => Ok(Self::exp_minus_one()),
            PhiSpec::PowerOf { base, p } => Self::power_of(Self::from_spec(base)?, *p),
            PhiSpec::Table { knots } => Self::table(knots),
        }
    }

    pub fn to_spec(&self) -> PhiSpec {
        match self {
            OrliczFunction::Power(p) => PhiSpec::Power { p: *p },
            OrliczFunction::ExpMinusOne => PhiSpec::ExpMinusOne,
            OrliczFunction::PowerOf(b, p) => PhiSpec::PowerOf { base: Box::new(b.to_spec()), p: *p },
            OrliczFunction::Table(t) => PhiSpec::Table { knots: t.knots() },
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            OrliczFunction::Power(p) => t.powf(*p),
            OrliczFunction::ExpMinusOne => t.exp_m1(),
            OrliczFunction::PowerOf(b, p) => b.value(t).powf(*p),
            OrliczFunction::Table(tab) => tab.value(t),
        }
    }

    /// φ′(t). For tables this is the right derivative of a piecewise-linear
    /// function, which is not continuous; see [`Self::is_c1`].
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            OrliczFunction::Power(p) => {
                if *p == 1.0 {
                    1.0
                } else {
                    p * t.powf(p - 1.0)
                }
            }
            OrliczFunction::ExpMinusOne => t.exp(),
            OrliczFunction::PowerOf(b, p) => {
                let bv = b.value(t);
                let pow = if *p == 1.0 { 1.0 } else { bv.powf(p - 1.0) };
                p * pow * b.derivative(t)
            }
            OrliczFunction::Table(tab) => tab.derivative(t),
        }
    }

    pub fn inverse(&self, s: f64) -> f64 {
        match self {
            OrliczFunction::Power(p) => s.powf(1.0 / p),
            OrliczFunction::ExpMinusOne => s.ln_1p(),
            OrliczFunction::PowerOf(b, p) => b.inverse(s.powf(1.0 / p)),
            OrliczFunction::Table(tab) => tab.inverse(s),
        }
    }

    /// Whether φ′ is continuous on [0, ∞), as the isotropy machinery needs.
    pub fn is_c1(&self) -> bool {
        match self {
            OrliczFunction::Power(_) | OrliczFunction::ExpMinusOne => true,
            OrliczFunction::PowerOf(b, _) => b.is_c1(),
            OrliczFunction::Table(_) => false,
        }
    }

    /// Lattice checks of φ(0) = 0, strict monotonicity, midpoint convexity
    /// and inverse consistency on [0, 4].
    pub fn validate(&self) -> Result<()> {
        if self.value(0.0) != 0.0 {
            return Err(OlexError::Config(format!("φ(0) = {} ≠ 0", self.value(0.0))));
        }
        let lattice: Vec<f64> = (0..=64).map(|k| k as f64 / 16.0).collect();
        for w in lattice.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.value(a), self.value(b));
            if !(fb > fa) {
                return Err(OlexError::Config(format!("φ not strictly increasing on [{a}, {b}]")));
            }
        }
        for &a in &lattice {
            for &b in &lattice {
                let mid = self.value(0.5 * (a + b));
                let avg = 0.5 * (self.value(a) + self.value(b));
                if mid > avg + 1e-12 * (1.0 + avg.abs()) {
                    return Err(OlexError::Config(format!("φ not convex between {a} and {b}")));
                }
            }
            let back = self.inverse(self.value(a));
            if (back - a).abs() > 1e-10 * (1.0 + a) {
                return Err(OlexError::Config(format!("φ⁻¹(φ({a})) = {back}")));
            }
        }
        Ok(())
    }
}

/// Nonnegative samples `f_i` with positive masses `m_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples {
    values: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl WeightedSamples {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(OlexError::Config(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(OlexError::Config(format!("weight {i} is {} (must be > 0)", weights[i])));
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(OlexError::Config(format!("value {i} is {} (must be ≥ 0)", values[i])));
        }
        let total = weights.iter().sum();
        if values.is_empty() {
            return Err(OlexError::DegenerateInput("no samples".into()));
        }
        Ok(WeightedSamples { values, weights, total })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn scaled(&self, c: f64) -> Self {
        WeightedSamples {
            values: self.values.iter().map(|v| v * c).collect(),
            weights: self.weights.clone(),
            total: self.total,
        }
    }

    /// (1/total)·Σ m_i g(f_i).
    pub fn mean_of(&self, g: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self.values.iter().zip(&self.weights).map(|(v, w)| w * g(*v)).sum();
        s / self.total
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// The unique λ₀ > 0 with (1/total)·Σ m_i φ(f_i/λ₀) = φ(1).
///
/// The left side is continuous and strictly decreasing in λ, tends to ∞ as
/// λ → 0⁺ and to 0 as λ → ∞, so bracketing and bisection always succeed.
pub fn orlicz_norm(samples: &WeightedSamples, phi: &OrliczFunction) -> Result<f64> {
    let hi0 = samples.max_value();
    if hi0 <= 0.0 {
        return Err(OlexError::DegenerateInput(
            "all samples are zero; the Orlicz norm needs f ≠ 0 on a set of positive mass".into(),
        ));
    }
    let target = phi.value(1.0);
    // > 0 when λ is too small
    let excess = |lam: f64| samples.mean_of(|v| phi.value(v / lam)) - target;

    let mut hi = hi0;
    while excess(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = samples
        .values()
        .iter()
        .copied()
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(hi);
    while !(excess(lo) >= 0.0) || lo == hi {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(OlexError::Numeric("Orlicz norm bracket collapsed".into()));
        }
    }
    for _ in 0..200 {
        if hi - lo <= NORM_REL_TOL * 1e-2 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = excess(mid);
        // NaN only arises from ∞/∞ ratios when λ underflows; treat as too small
        if e >= 0.0 || e.is_nan() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// φ⁻¹((1/total)·Σ m_i φ(f_i)).
pub fn phi_mean(samples: &WeightedSamples, phi: &OrliczFunction) -> Result<f64> {
    let mean = samples.mean_of(|v| phi.value(v));
    if !mean.is_finite() {
        return Err(OlexError::Numeric(format!(
            "φ overflows on samples up to {}; rescale the bodies or use smaller ratios",
            samples.max_value()
        )));
    }
    Ok(phi.inverse(mean))
}
