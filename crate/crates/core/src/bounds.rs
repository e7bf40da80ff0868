//! Scalar bound calculus for a single edge and for paths.
//!
//! For an edge with budget `ε`, a value `x` at one endpoint caps the value at
//! the other endpoint by
//!
//! ```text
//! B_ε(x) = min { e^ε x, (x - 1 + e^ε) / e^ε }
//! ```
//!
//! and floors it by the inverse map `L_ε`. Folding `B` along a path yields the
//! bound one vertex induces on another through that path.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack within which an out-of-range probability is clamped instead of rejected.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// A probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&value) {
            return Err(Error::ProbabilityOutOfRange(value));
        }
        Ok(Probability(value.clamp(0.0, 1.0)))
    }

    /// Clamps into `[0, 1]`; for values produced by bound arithmetic.
    pub(crate) fn saturating(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }

    pub fn min(self, other: Self) -> Self {
        Probability(self.0.min(other.0))
    }

    pub fn max(self, other: Self) -> Self {
        Probability(self.0.max(other.0))
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A nonnegative finite privacy budget on the natural-log scale.
///
/// `e^ε` is computed once at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epsilon {
    value: f64,
    exp: f64,
}

impl Epsilon {
    pub const ZERO: Epsilon = Epsilon {
        value: 0.0,
        exp: 1.0,
    };

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFiniteEpsilon(value));
        }
        if value < 0.0 {
            return Err(Error::NegativeEpsilon(value));
        }
        // -0.0 would otherwise survive and print as "-0"
        let value = value + 0.0;
        Ok(Epsilon {
            value,
            exp: value.exp(),
        })
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.value
    }

    /// `e^ε`.
    #[inline]
    pub fn exp(self) -> f64 {
        self.exp
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Epsilon::new(value)
    }
}

/// Budgets `ε_0, …, ε_{n-1}` along a path `v_0, …, v_n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpsilonSeq(Vec<Epsilon>);

impl EpsilonSeq {
    pub fn new(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .map(|&e| Epsilon::new(e))
            .collect::<Result<Vec<_>>>()
            .map(EpsilonSeq)
    }

    pub fn constant(eps: Epsilon, len: usize) -> Self {
        EpsilonSeq(vec![eps; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Epsilon] {
        &self.0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|e| e.value())
    }
}

impl From<Vec<Epsilon>> for EpsilonSeq {
    fn from(v: Vec<Epsilon>) -> Self {
        EpsilonSeq(v)
    }
}

/// Which of the two upper bounds is binding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `e^ε x`
    Multiplicative,
    /// `(x - 1 + e^ε) / e^ε`
    Affine,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Multiplicative => "multiplicative",
            Branch::Affine => "affine",
        }
    }
}

/// `B_ε(x)` together with the branch that attains it. The affine branch is
/// reported only when it is strictly smaller.
#[inline]
pub fn edge_upper_bound_branch(x: Probability, eps: Epsilon) -> (Probability, Branch) {
    if eps.value() == 0.0 {
        return (x, Branch::Multiplicative);
    }
    let x = x.get();
    let e = eps.exp();
    let multiplicative = e * x;
    // (x - 1 + e) / e written so that x = 1 maps to exactly 1
    let affine = 1.0 - (1.0 - x) / e;
    let (raw, branch) = if affine < multiplicative {
        (affine, Branch::Affine)
    } else {
        (multiplicative, Branch::Multiplicative)
    };
    // B_ε(x) >= x holds exactly; keep it under rounding too
    (Probability(raw.clamp(x, 1.0)), branch)
}

/// `B_ε(x) = min { e^ε x, (x - 1 + e^ε) / e^ε }`, the tightest upper bound `x`
/// imposes across an edge with budget `ε`.
#[inline]
pub fn edge_upper_bound(x: Probability, eps: Epsilon) -> Probability {
    edge_upper_bound_branch(x, eps).0
}

/// `L_ε(x) = max { e^{-ε} x, 1 - e^ε (1 - x) }`, the tightest lower bound `x`
/// imposes across an edge. Inverse of [`edge_upper_bound`] for `ε > 0`.
#[inline]
pub fn edge_lower_bound(x: Probability, eps: Epsilon) -> Probability {
    let x = x.get();
    let e = eps.exp();
    let raw = (x / e).max(1.0 - e * (1.0 - x));
    Probability(raw.clamp(0.0, x))
}

/// `1 / (e^ε + 1)`: at or below this value the multiplicative branch binds.
pub fn branch_threshold(eps: Epsilon) -> Probability {
    Probability(1.0 / (eps.exp() + 1.0))
}

/// Left fold of [`edge_upper_bound`] along `eps` starting at `alpha`.
pub fn path_upper_bound(eps: &[Epsilon], alpha: Probability) -> Probability {
    eps.iter().fold(alpha, |x, &e| edge_upper_bound(x, e))
}

/// Left fold of [`edge_lower_bound`] along `eps` starting at `x`.
///
/// Folding over the reversed sequence inverts [`path_upper_bound`].
pub fn path_lower_bound(eps: &[Epsilon], x: Probability) -> Probability {
    eps.iter().fold(x, |y, &e| edge_lower_bound(y, e))
}
