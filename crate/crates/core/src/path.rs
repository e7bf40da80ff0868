//! Optimal mechanism on a path `v_0, …, v_n` seeded at `v_0`, with every
//! other vertex labelled 1.
//!
//! The optimum follows the multiplicative bound `e^{ε_i} x` until the value
//! crosses `1 / (e^{ε_i} + 1)` and the affine bound from then on; it never
//! switches back when every budget is positive. The crossover index is `τ`.

use crate::bounds::{edge_upper_bound_branch, Branch, Epsilon, EpsilonSeq, Probability};
use crate::error::{Error, Result};

/// Slack, in units of the crossing budget, under which the crossover
/// inequality is treated as tight. Keeps `τ` stable for inputs that sit
/// exactly on a crossover, e.g. `α = e^{-kε} / (1 + e^ε)`.
const TAU_SNAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PathMechanism {
    /// `p*(v_0), …, p*(v_n)`.
    pub values: Vec<Probability>,
    /// First edge index at which the affine bound binds; `None` if it never does.
    pub tau: Option<usize>,
}

impl PathMechanism {
    /// Binding branch on edge `i` (from `v_i` to `v_{i+1}`).
    pub fn regime(&self, edge: usize) -> Branch {
        match self.tau {
            Some(t) if edge >= t => Branch::Affine,
            _ => Branch::Multiplicative,
        }
    }
}

/// Iterates the one-edge optimum `p*(v_{i+1}) = B_{ε_i}(p*(v_i))`.
pub fn optimal_path_recurrence(alpha: Probability, eps: &EpsilonSeq) -> PathMechanism {
    let mut values = Vec::with_capacity(eps.len() + 1);
    values.push(alpha);
    let mut tau = None;
    let mut x = alpha;
    for (i, &e) in eps.as_slice().iter().enumerate() {
        let (next, branch) = edge_upper_bound_branch(x, e);
        if branch == Branch::Affine && tau.is_none() {
            tau = Some(i);
        }
        values.push(next);
        x = next;
    }
    PathMechanism { values, tau }
}

/// Closed-form optimum. Requires `α > 0` and every budget strictly positive.
///
/// `τ` is the smallest `i` with `1/α ≤ e^{ε_0 + … + ε_{i-1}} (e^{ε_i} + 1)`
/// (empty sum for `i = 0`). Vertices up to `τ` take `e^{ε_0 + … + ε_{i-1}} α`;
/// past `τ`, with `P = ε_0 + … + ε_{τ-1}` and `D = ε_τ + … + ε_{i-1}`,
/// `p*(v_i) = e^{P - D} α + 1 - e^{-D}`. All sums stay in the exponent.
pub fn optimal_path_closed_form(alpha: Probability, eps: &EpsilonSeq) -> Result<PathMechanism> {
    if alpha.get() <= 0.0 {
        return Err(Error::ZeroAlpha);
    }
    if let Some(e) = eps.as_slice().iter().find(|e| e.value() <= 0.0) {
        return Err(Error::NonPositiveEpsilon(e.value()));
    }
    let eps = eps.as_slice();
    let a = alpha.get();
    let ln_alpha = a.ln();

    // prefix[i] = ε_0 + … + ε_{i-1}
    let mut prefix = Vec::with_capacity(eps.len() + 1);
    prefix.push(0.0);
    for e in eps {
        prefix.push(prefix.last().unwrap() + e.value());
    }

    let tau = eps.iter().enumerate().position(|(i, e)| {
        // ln(1/α) ≤ prefix[i] + ln(e^{ε_i} + 1)
        let slack = -ln_alpha - prefix[i] - e.exp().ln_1p();
        slack <= TAU_SNAP * e.value()
    });

    let values = (0..=eps.len())
        .map(|i| {
            let raw = match tau {
                Some(t) if i > t => {
                    let before = prefix[t];
                    let after = prefix[i] - prefix[t];
                    a * (before - after).exp() - (-after).exp_m1()
                }
                _ => a * prefix[i].exp(),
            };
            Probability::saturating(raw)
        })
        .collect();
    Ok(PathMechanism { values, tau })
}

/// `max(0, ⌈(1/ε) ln(1 / (α (1 + e^ε)))⌉)`: the crossover index of a path
/// with constant budget `ε`.
pub fn homogeneous_tau(alpha: Probability, eps: Epsilon) -> Result<usize> {
    if alpha.get() <= 0.0 {
        return Err(Error::ZeroAlpha);
    }
    if eps.value() <= 0.0 {
        return Err(Error::NonPositiveEpsilon(eps.value()));
    }
    let q = (-alpha.get().ln() - eps.exp().ln_1p()) / eps.value();
    let nearest = q.round();
    let tau = if (q - nearest).abs() <= TAU_SNAP {
        nearest
    } else {
        q.ceil()
    };
    Ok(tau.max(0.0) as usize)
}
