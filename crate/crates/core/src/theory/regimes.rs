//! Parameter regimes: derived mutation rates, level-based parameters, minimum
//! population sizes and runtime bounds for each positive regime, plus the
//! stagnation thresholds of the standard-rate negative regime.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use super::bounds::{level_bound, order_bound, clamped_ln, m4_required_lambda, LevelParams};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegimeInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    /// Block length of a decomposed function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    /// Rate constant `c ∈ (0,1)` of the low-mutation regimes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_constant: Option<f64>,
    /// Scaling base `c > e^χ` of the exponentially scaled regime.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Largest ratio `a_i / a_j` between weights.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    /// Per-bit mutation rate `χ/n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    /// Exact (M4) requirement of the level-based bound at these parameters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m4_required_lambda: Option<f64>,
    /// Closed-form runtime bound at `λ = λ_min`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_bound_at_lambda_min: Option<f64>,
    /// Closed-form runtime bound at the user's `λ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_bound: Option<f64>,
    /// General level-based bound evaluated at the user's `λ` (or `λ_min`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level_bound: Option<f64>,
    /// Asymptotic-order value with the configured multiplier.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_chi: Option<f64>,
    /// `α = 2/(1 − ε′)` with `ε′ = (χ − ln 2)/(2e)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_n: Option<f64>,
    /// `b(n)/n < min{1/5, 1/2 − √(ψ(2−ψ)/4)}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_condition_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_bit_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximation_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: String,
    /// `"bound"`, `"order value"` or `"thresholds"`.
    pub label: String,
    pub inputs: RegimeInputs,
    pub derived: Derived,
    pub feasible: bool,
    pub reasons: Vec<String>,
    pub notes: Vec<String>,
    /// Level-based parameters at the user's `λ` (or `λ_min`), for auditing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level_params: Option<LevelParams>,
}

impl RegimeReport {
    fn new(regime: &str, label: &str, inputs: RegimeInputs) -> Self {
        Self {
            regime: regime.into(),
            label: label.into(),
            inputs,
            derived: Derived::default(),
            feasible: true,
            reasons: Vec::new(),
            notes: Vec::new(),
            level_params: None,
        }
    }

    fn infeasible(&mut self, reason: impl Into<String>) {
        self.feasible = false;
        self.reasons.push(reason.into());
    }
}

fn no_flip(rate: f64, n: usize) -> f64 {
    (n as f64 * (-rate).ln_1p()).exp()
}

/// Closed-form bound of the low-rate linear regime,
/// `(2⁷n²a₁²/c²)(nλ ln(3δλ/2) + 4en³a₁/(c(1−c)))` with `δ = c/(4na₁)`.
pub fn low_rate_bound(n: usize, a1: f64, c: f64, lambda: f64) -> f64 {
    let nf = n as f64;
    let delta = c / (4.0 * nf * a1);
    128.0 * nf * nf * a1 * a1 / (c * c)
        * (nf * lambda * (1.5 * delta * lambda).ln() + 4.0 * E * nf.powi(3) * a1 / (c * (1.0 - c)))
}

/// Low mutation rate `χ = (1−c)/(n a₁)` on linear functions with integer weights.
pub fn regime_low_rate(n: usize, a1: f64, c: f64, lambda: Option<f64>) -> RegimeReport {
    let mut r = RegimeReport::new(
        "low_rate",
        "bound",
        RegimeInputs {
            n: Some(n),
            a1: Some(a1),
            rate_constant: Some(c),
            lambda,
            ..Default::default()
        },
    );
    if n == 0 {
        r.infeasible("n must be at least 1");
    }
    if !(c > 0.0 && c < 1.0) {
        r.infeasible("rate constant c must lie in (0, 1)");
    }
    if !(a1 >= 1.0 && a1.fract() == 0.0) {
        r.infeasible("largest weight a1 must be an integer ≥ 1");
    }
    if !r.feasible {
        return r;
    }
    let nf = n as f64;
    let chi = (1.0 - c) / (nf * a1);
    let rate = chi / nf;
    let s_star = (1.0 - c) / (E * nf * nf * a1);
    let gamma0 = c / 4.0;
    let delta = c / (4.0 * nf * a1);
    let p0 = no_flip(rate, n);
    let lambda_min =
        256.0 * nf * nf * a1 * a1 / c.powi(3) * (((nf + 1.0).powi(5) * a1.powi(3) / (c * (1.0 - c))).ln() + 11.0);
    let at = lambda.unwrap_or(lambda_min);
    let params = LevelParams::uniform(n + 1, s_star, p0, delta, gamma0, at);
    let required = m4_required_lambda(&params);
    r.derived = Derived {
        chi: Some(chi),
        rate: Some(rate),
        delta: Some(delta),
        gamma0: Some(gamma0),
        s_star: Some(s_star),
        p0: Some(p0),
        m: Some(n + 1),
        lambda_min: Some(lambda_min),
        m4_required_lambda: Some(required),
        t_bound_at_lambda_min: Some(low_rate_bound(n, a1, c, lambda_min)),
        t_bound: Some(low_rate_bound(n, a1, c, at)),
        level_bound: level_bound(&params).ok().map(|b| b.value),
        ..Default::default()
    };
    if lambda_min < required {
        r.notes.push(format!(
            "printed lambda_min {lambda_min:.6e} is below the exact (M4) requirement {required:.6e}"
        ));
    }
    if let Some(l) = lambda {
        if l < lambda_min {
            r.notes.push(format!("lambda {l} is below lambda_min; the bound is not guaranteed"));
        }
    }
    r.level_params = Some(params);
    r
}

/// Same low-rate regime with the multiplicative up-drift bound
/// `O(n²a₁λ log(na₁) + n³a₁²)` for `λ ≥ c′n²a₁² ln(na₁)`.
pub fn regime_low_rate_order(
    n: usize,
    a1: f64,
    c: f64,
    c_prime: f64,
    k: f64,
    lambda: Option<f64>,
    multiplier: f64,
) -> RegimeReport {
    let mut r = regime_low_rate(n, a1, c, lambda);
    r.regime = "low_rate_order".into();
    r.label = "order value".into();
    r.inputs.c_prime = Some(c_prime);
    r.inputs.k = Some(k);
    r.inputs.multiplier = Some(multiplier);
    if !(c_prime > 0.0 && k > 0.0 && multiplier > 0.0) {
        r.infeasible("c', K and the multiplier must be positive");
    }
    if !r.feasible {
        return r;
    }
    r.notes.clear();
    let nf = n as f64;
    let na = nf * a1;
    let lambda_min = c_prime * nf * nf * a1 * a1 * na.ln();
    let at = lambda.unwrap_or(lambda_min);
    let order = multiplier * (nf * nf * a1 * at * clamped_ln(na) + nf.powi(3) * a1 * a1);
    let params = r.level_params.take().expect("feasible report has level params").with_lambda(at);
    r.derived.lambda_min = Some(lambda_min);
    r.derived.t_bound_at_lambda_min = None;
    r.derived.t_bound = None;
    r.derived.order_value = Some(order);
    r.derived.m4_required_lambda = None;
    r.derived.level_bound = order_bound(&params, multiplier, 1.0).ok().map(|b| b.order_value);
    if at > na.powf(k) {
        r.notes.push(format!("lambda {at} exceeds (n a1)^K = {}", na.powf(k)));
    }
    r.level_params = Some(params);
    r
}

/// Closed-form bound of the scaled regime,
/// `(8/ε²)(λn ln(3ελ/2) + n²ec/(εχ))`.
pub fn scaled_bound(n: usize, chi: f64, c: f64, lambda: f64) -> f64 {
    let eps = (c / chi.exp()).cbrt() - 1.0;
    let nf = n as f64;
    8.0 / (eps * eps) * (lambda * nf * (1.5 * eps * lambda).ln() + nf * nf * E * c / (eps * chi))
}

/// Exponential fitness scaling `c^f` with standard rate `χ/n`, `c > e^χ`.
pub fn regime_scaled(n: usize, chi: f64, c: f64, lambda: Option<f64>) -> RegimeReport {
    let mut r = RegimeReport::new(
        "scaled",
        "bound",
        RegimeInputs {
            n: Some(n),
            chi: Some(chi),
            scale_base: Some(c),
            lambda,
            ..Default::default()
        },
    );
    if n == 0 {
        r.infeasible("n must be at least 1");
    }
    if !(chi > 0.0 && chi <= n as f64) {
        r.infeasible("chi must satisfy 0 < chi ≤ n");
    }
    if !(c > chi.exp()) {
        r.infeasible("scaling base must satisfy c > e^chi");
    }
    if !r.feasible {
        return r;
    }
    let nf = n as f64;
    let eps = (c / chi.exp()).cbrt() - 1.0;
    let gamma0 = eps / c;
    let rate = chi / nf;
    let s_star = chi / (E * nf);
    let p0 = no_flip(rate, n);
    let lambda_min = 4.0 * c / eps.powi(3) * (128.0 * (nf + 1.0).powi(2) * c * E / (eps.powi(3) * chi)).ln();
    let at = lambda.unwrap_or(lambda_min);
    let params = LevelParams::uniform(n + 1, s_star, p0, eps.min(1.0), gamma0, at);
    r.derived = Derived {
        chi: Some(chi),
        rate: Some(rate),
        epsilon: Some(eps),
        delta: Some(eps),
        gamma0: Some(gamma0),
        s_star: Some(s_star),
        p0: Some(p0),
        m: Some(n + 1),
        lambda_min: Some(lambda_min),
        m4_required_lambda: Some(m4_required_lambda(&params)),
        t_bound_at_lambda_min: Some(scaled_bound(n, chi, c, lambda_min)),
        t_bound: Some(scaled_bound(n, chi, c, at)),
        level_bound: level_bound(&params).ok().map(|b| b.value),
        ..Default::default()
    };
    if eps > 1.0 {
        r.notes.push("epsilon exceeds 1; level-based parameters use delta = 1".into());
    }
    r.notes.push("the (M3) margin relies on p0 ≥ e^-chi/(1+epsilon), which holds for sufficiently large n".into());
    r.level_params = Some(params);
    r
}

/// Low-rate regime on separable decomposed functions with blocks of length ≤ r.
#[allow(clippy::too_many_arguments)]
pub fn regime_decomposed(
    n: usize,
    a1: f64,
    block_len: usize,
    c: f64,
    c_prime: f64,
    k: f64,
    lambda: Option<f64>,
    multiplier: f64,
) -> RegimeReport {
    let mut r = RegimeReport::new(
        "decomposed",
        "order value",
        RegimeInputs {
            n: Some(n),
            a1: Some(a1),
            block_len: Some(block_len),
            rate_constant: Some(c),
            c_prime: Some(c_prime),
            k: Some(k),
            lambda,
            multiplier: Some(multiplier),
            ..Default::default()
        },
    );
    if n == 0 || block_len == 0 || block_len > n {
        r.infeasible("need 1 ≤ r ≤ n");
    }
    if !(c > 0.0 && c < 1.0) {
        r.infeasible("rate constant c must lie in (0, 1)");
    }
    if !(a1 >= 1.0 && a1.fract() == 0.0) {
        r.infeasible("largest weight a1 must be an integer ≥ 1");
    }
    if !(c_prime > 0.0 && k > 0.0 && multiplier > 0.0) {
        r.infeasible("c', K and the multiplier must be positive");
    }
    if !r.feasible {
        return r;
    }
    let nf = n as f64;
    let rf = block_len as i32;
    let na = nf * a1;
    let blocks = n.div_ceil(block_len);
    let chi = (1.0 - c) / na;
    let rate = chi / nf;
    let s_star = (1.0 - c).powi(rf) / (E * nf.powi(2 * rf) * a1.powi(rf));
    let gamma0 = c / 4.0;
    let delta = c / (4.0 * na);
    let p0 = no_flip(rate, n);
    let lambda_min = c_prime * nf * nf * a1 * a1 * block_len as f64 * na.ln();
    let at = lambda.unwrap_or(lambda_min);
    let order = multiplier
        * (nf * nf * a1 * at * clamped_ln(na) + nf.powi(2 * rf + 2) * a1.powi(rf + 1) * (1.0 - c).powi(-rf));
    let params = LevelParams::uniform(blocks + 1, s_star, p0, delta, gamma0, at);
    r.derived = Derived {
        chi: Some(chi),
        rate: Some(rate),
        delta: Some(delta),
        gamma0: Some(gamma0),
        s_star: Some(s_star),
        p0: Some(p0),
        m: Some(blocks + 1),
        lambda_min: Some(lambda_min),
        order_value: Some(order),
        level_bound: order_bound(&params, multiplier, 1.0).ok().map(|b| b.order_value),
        ..Default::default()
    };
    if n % block_len != 0 {
        r.notes.push(format!("r does not divide n; assuming {blocks} blocks"));
    }
    if at > na.powf(k) {
        r.notes.push(format!("lambda {at} exceeds (n a1)^K = {}", na.powf(k)));
    }
    r.level_params = Some(params);
    r
}

/// `ψ = ln 2/(2χ) + 1/2`.
pub fn psi(chi: f64) -> f64 {
    LN_2 / (2.0 * chi) + 0.5
}

/// `M(χ) = (1 − √(ψ(2−ψ)))/2`, written with `r = ln 2/χ` as
/// `(1 − √(r/2 − r²/4 + 3/4))/2`.
pub fn m_chi(chi: f64) -> f64 {
    let r = LN_2 / chi;
    (1.0 - (r / 2.0 - r * r / 4.0 + 0.75).sqrt()) / 2.0
}

/// Zero-bit count that the population does not go below:
/// `(n(1−ε)/2)(1 − √(q − q² + 3/4))` with `q = ln 2/(2χ)`.
pub fn zero_bit_floor(n: usize, chi: f64, epsilon: f64) -> f64 {
    let q = LN_2 / (2.0 * chi);
    n as f64 * (1.0 - epsilon) / 2.0 * (1.0 - (q - q * q + 0.75).sqrt())
}

/// Approximation-factor threshold `1 − (1/(2r))(1 − √(q − q² + 3/4))` for
/// weights within a factor `r` of each other.
pub fn approximation_threshold(chi: f64, weight_ratio: f64) -> f64 {
    let q = LN_2 / (2.0 * chi);
    1.0 - (1.0 / (2.0 * weight_ratio)) * (1.0 - (q - q * q + 0.75).sqrt())
}

/// Thresholds of the standard-rate regime (`χ > ln 2`, plain proportionate
/// selection, large populations).
pub fn negative_regime(chi: f64, epsilon: f64, weight_ratio: Option<f64>, n: Option<usize>) -> RegimeReport {
    let mut r = RegimeReport::new(
        "negative",
        "thresholds",
        RegimeInputs {
            n,
            chi: Some(chi),
            epsilon: Some(epsilon),
            weight_ratio,
            ..Default::default()
        },
    );
    if !(chi > LN_2) {
        r.infeasible("regime inapplicable: requires chi > ln 2");
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        r.infeasible("epsilon must lie in (0, 1)");
    }
    if let Some(w) = weight_ratio {
        if !(w >= 1.0) {
            r.infeasible("weight ratio must be ≥ 1");
        }
    }
    let p = psi(chi);
    let m = m_chi(chi);
    let eps_prime = (chi - LN_2) / (2.0 * E);
    r.derived = Derived {
        chi: Some(chi),
        psi: Some(p),
        m_chi: Some(m),
        alpha_bound: (chi > LN_2).then(|| 2.0 / (1.0 - eps_prime)),
        approximation_threshold: weight_ratio.map(|w| approximation_threshold(chi, w)),
        ..Default::default()
    };
    if let Some(n) = n {
        let nf = n as f64;
        let b_n = nf * (1.0 - epsilon / 2.0) * m;
        r.derived.rate = Some(chi / nf);
        r.derived.a_n = Some(nf * (1.0 - epsilon) * m);
        r.derived.b_n = Some(b_n);
        r.derived.zero_bit_floor = Some(zero_bit_floor(n, chi, epsilon));
        let limit = (0.2f64).min(0.5 - (p * (2.0 - p) / 4.0).sqrt());
        r.derived.drift_condition_holds = Some(b_n / nf < limit);
    }
    if weight_ratio.is_some() {
        r.notes.push(
            "approximation threshold: solutions with f(x)/f* at or below this value are the ones excluded \
             by the printed inequality; read together with the zero-bit floor, solutions above it are the \
             ones the EA is not expected to reach"
                .into(),
        );
    }
    r.notes.push("failure probability has unspecified constants; treated qualitatively (stagnation)".into());
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn low_rate_example() {
        let r = regime_low_rate(10, 1.0, 0.5, None);
        assert!(r.feasible);
        let d = &r.derived;
        assert!(rel(d.chi.unwrap(), 0.05) < 1e-12);
        assert!(rel(d.rate.unwrap(), 0.005) < 1e-12);
        assert!(rel(d.lambda_min.unwrap(), 4.99e6) < 1e-3, "{}", d.lambda_min.unwrap());
        assert!(rel(d.gamma0.unwrap(), 0.125) < 1e-15);
        assert!(rel(d.delta.unwrap(), 1.0 / 80.0) < 1e-14);
        assert_eq!(d.m, Some(11));
        assert!(!r.notes.is_empty(), "printed lambda_min falls short of (M4) here");
    }

    #[test]
    fn low_rate_limits_and_onemax_rate() {
        let hi = regime_low_rate(10, 1.0, 1.0 - 1e-9, None);
        assert!(hi.derived.chi.unwrap() < 1e-9);
        assert!(hi.derived.lambda_min.unwrap() > regime_low_rate(10, 1.0, 0.9, None).derived.lambda_min.unwrap());
        for n in [5usize, 20, 64] {
            let r = regime_low_rate(n, 1.0, 0.3, None);
            assert!(rel(r.derived.rate.unwrap(), 0.7 / (n * n) as f64) < 1e-12);
        }
        assert!(!regime_low_rate(10, 1.0, 1.0, None).feasible);
        assert!(!regime_low_rate(10, 1.5, 0.5, None).feasible);
    }

    #[test]
    fn general_bound_dominated_by_closed_form() {
        for n in (5..=50).step_by(5) {
            for c in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let r = regime_low_rate(n, 1.0, c, None);
                let lmin = r.derived.lambda_min.unwrap();
                for lambda in [lmin, 2.0 * lmin, 10.0 * lmin] {
                    let rr = regime_low_rate(n, 1.0, c, Some(lambda));
                    let general = rr.derived.level_bound.unwrap();
                    let closed = rr.derived.t_bound.unwrap();
                    assert!(general <= closed, "n={n} c={c}: {general} > {closed}");
                }
            }
        }
    }

    #[test]
    fn low_rate_order_examples() {
        let r = regime_low_rate_order(20, 1.0, 0.5, 1.0, 3.0, None, 1.0);
        assert!(rel(r.derived.lambda_min.unwrap(), 400.0 * 20f64.ln()) < 1e-12);
        assert!((r.derived.lambda_min.unwrap() - 1198.3).abs() < 0.05);
        let a = regime_low_rate_order(20, 1.0, 0.5, 1.0, 3.0, None, 1.0).derived.lambda_min.unwrap();
        let b = regime_low_rate_order(20, 2.0, 0.5, 1.0, 3.0, None, 1.0).derived.lambda_min.unwrap();
        assert!(rel(b / a, 4.0 * 40f64.ln() / 20f64.ln()) < 1e-12);
        // λ = n² ln n gives order n⁴ log² n.
        let n = 1000usize;
        let nf = n as f64;
        let lambda = nf * nf * nf.ln();
        let r = regime_low_rate_order(n, 1.0, 0.5, 1.0, 3.0, Some(lambda), 1.0);
        let ratio = r.derived.order_value.unwrap() / (nf.powi(4) * nf.ln().powi(2));
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
        assert_eq!(r.label, "order value");
    }

    #[test]
    fn scaled_examples() {
        let r = regime_scaled(100, 1.0, 8.0, None);
        assert!(r.feasible);
        let eps = r.derived.epsilon.unwrap();
        assert!((eps - 0.43306).abs() < 5e-6, "{eps}");
        assert!(rel(r.derived.gamma0.unwrap(), eps / 8.0) < 1e-15);
        let lmin = 32.0 / eps.powi(3) * (128.0 * 101.0f64.powi(2) * 8.0 * E / eps.powi(3)).ln();
        assert!(rel(r.derived.lambda_min.unwrap(), lmin) < 1e-12);
        assert!(!regime_scaled(100, 1.0, E, None).feasible);
        assert!(!regime_scaled(100, 1.0, 2.0, None).feasible);
        // λ_min covers the exact (M4) requirement.
        assert!(r.derived.lambda_min.unwrap() >= r.derived.m4_required_lambda.unwrap());
    }

    #[test]
    fn decomposed_examples() {
        let r = regime_decomposed(20, 1.0, 2, 0.5, 1.0, 3.0, None, 1.0);
        assert!((r.derived.lambda_min.unwrap() - 2396.6).abs() < 0.05);
        let s = r.derived.s_star.unwrap();
        assert!(rel(s, 0.25 / (E * 160_000.0)) < 1e-12);
        assert!((s - 5.75e-7).abs() < 5e-10);
        assert_eq!(r.derived.m, Some(11));
        let r1 = regime_decomposed(20, 1.0, 1, 0.5, 1.0, 3.0, None, 1.0);
        let t6 = regime_low_rate_order(20, 1.0, 0.5, 1.0, 3.0, None, 1.0);
        assert!(rel(r1.derived.lambda_min.unwrap(), t6.derived.lambda_min.unwrap()) < 1e-15);
        assert!(rel(r1.derived.s_star.unwrap(), t6.derived.s_star.unwrap()) < 1e-15);
    }

    #[test]
    fn negative_regime_examples() {
        assert!(m_chi(LN_2).abs() < 1e-15);
        assert!(!negative_regime(LN_2, 0.2, None, None).feasible);
        assert!((m_chi(1e12) - (1.0 - 0.75f64.sqrt()) / 2.0).abs() < 1e-9);
        assert!((m_chi(1e12) - 0.066987).abs() < 1e-6);
        assert!((psi(1.0) - 0.84657).abs() < 1e-5);
        assert!((approximation_threshold(2.0, 1.0) - 0.97256).abs() < 1e-5);
        let r = negative_regime(1.0, 0.2, Some(1.0), Some(100));
        assert!(r.feasible);
        let floor = r.derived.zero_bit_floor.unwrap();
        assert!(rel(floor, 100.0 * 0.8 * m_chi(1.0)) < 1e-12);
        assert_eq!(r.derived.drift_condition_holds, Some(true));
    }

    #[test]
    fn m_chi_increases_with_chi() {
        let grid: Vec<f64> = (1..200).map(|k| LN_2 + 0.05 * k as f64).collect();
        for w in grid.windows(2) {
            assert!(m_chi(w[1]) > m_chi(w[0]));
        }
    }

    #[test]
    fn calculators_are_pure() {
        let a = serde_json::to_string(&regime_scaled(50, 1.0, 8.0, Some(60.0))).unwrap();
        let b = serde_json::to_string(&regime_scaled(50, 1.0, 8.0, Some(60.0))).unwrap();
        assert_eq!(a, b);
    }
}
