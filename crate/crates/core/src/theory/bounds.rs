//! The two level-based runtime bounds and their population-size conditions.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Parameters of a level-based argument over `m` levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    pub m: usize,
    /// Upgrade probabilities `s_j` for the `m − 1` non-top levels.
    pub s: Vec<f64>,
    pub p0: f64,
    pub delta: f64,
    pub gamma0: f64,
    pub lambda: f64,
}

impl LevelParams {
    /// Same upgrade probability on every level.
    pub fn uniform(m: usize, s_star: f64, p0: f64, delta: f64, gamma0: f64, lambda: f64) -> Self {
        Self {
            m,
            s: vec![s_star; m.saturating_sub(1)],
            p0,
            delta,
            gamma0,
            lambda,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    pub fn s_star(&self) -> f64 {
        self.s.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if self.m < 2 || self.s.len() != self.m - 1 {
            return param(format!("need m ≥ 2 and m − 1 upgrade probabilities (m={}, got {})", self.m, self.s.len()));
        }
        if let Some(s) = self.s.iter().find(|s| !unit(**s)) {
            return param(format!("upgrade probability {s} outside (0, 1]"));
        }
        if !unit(self.p0) || !unit(self.delta) {
            return param(format!("p0={} and delta={} must lie in (0, 1]", self.p0, self.delta));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < 1.0) {
            return param(format!("gamma0={} must lie in (0, 1)", self.gamma0));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return param(format!("lambda={} must be positive", self.lambda));
        }
        Ok(())
    }
}

/// `ln(max(x, e))`: logarithms inside order expressions are at least 1.
pub fn clamped_ln(x: f64) -> f64 {
    x.max(std::f64::consts::E).ln()
}

/// Smallest `λ` satisfying the (M4) population-size condition,
/// `4/(γ₀δ²) · ln(128m / (γ₀ s_* δ²))`.
pub fn m4_required_lambda(p: &LevelParams) -> f64 {
    let g = p.gamma0;
    let d2 = p.delta * p.delta;
    4.0 / (g * d2) * (128.0 * p.m as f64 / (g * p.s_star() * d2)).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelBound {
    /// Upper bound on the expected number of evaluations.
    pub value: f64,
    pub m4_required_lambda: f64,
    pub m4_holds: bool,
    /// Some level's logarithm `ln(6δλ/(4 + γ₀s_jδλ))` is ≤ 0.
    pub log_below_one: bool,
}

/// `(8/δ²) Σ_j (λ ln(6δλ/(4 + γ₀ s_j δλ)) + 1/(γ₀ s_j))`.
pub fn level_bound(p: &LevelParams) -> Result<LevelBound> {
    p.validate()?;
    let (d, g, l) = (p.delta, p.gamma0, p.lambda);
    let mut log_below_one = false;
    let sum: f64 = p
        .s
        .iter()
        .map(|&s| {
            let arg = 6.0 * d * l / (4.0 + g * s * d * l);
            log_below_one |= arg <= 1.0;
            l * arg.ln() + 1.0 / (g * s)
        })
        .sum();
    let required = m4_required_lambda(p);
    Ok(LevelBound {
        value: 8.0 / (d * d) * sum,
        m4_required_lambda: required,
        m4_holds: l >= required,
        log_below_one,
    })
}

/// Right-hand side of (M4′) at the current `λ`:
/// `8/(γ₀δ²) · ln((C m/δ)(ln λ + 1/(γ₀ s_* λ)))`.
pub fn m4_prime_rhs(p: &LevelParams, c: f64) -> f64 {
    let g = p.gamma0;
    let inner = c * p.m as f64 / p.delta * (p.lambda.ln() + 1.0 / (g * p.s_star() * p.lambda));
    8.0 / (g * p.delta * p.delta) * inner.ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderBound {
    /// Asymptotic-order value, not a guaranteed bound.
    pub order_value: f64,
    pub label: String,
    pub m4_prime_constant: f64,
    pub m4_prime_rhs: f64,
    pub m4_prime_holds: bool,
}

/// `C_impl · (mλ ln(γ₀λ)/δ + (1/δ) Σ_j 1/(γ₀ s_j))`, with the logarithm clamped
/// to at least 1.
pub fn order_bound(p: &LevelParams, multiplier: f64, m4_constant: f64) -> Result<OrderBound> {
    p.validate()?;
    if !(multiplier > 0.0 && m4_constant > 0.0) {
        return param("multiplier and (M4') constant must be positive");
    }
    let (d, g, l) = (p.delta, p.gamma0, p.lambda);
    let first = p.m as f64 * l * clamped_ln(g * l) / d;
    let second: f64 = p.s.iter().map(|&s| 1.0 / (g * s)).sum::<f64>() / d;
    let rhs = m4_prime_rhs(p, m4_constant);
    Ok(OrderBound {
        order_value: multiplier * (first + second),
        label: "order value".into(),
        m4_prime_constant: m4_constant,
        m4_prime_rhs: rhs,
        m4_prime_holds: l >= rhs,
    })
}
