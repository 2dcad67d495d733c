//! Checks the four level-based conditions against a fitness function, a
//! regime's parameters and observed populations.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::bounds::{m4_prime_rhs, m4_required_lambda, LevelParams};
use super::regimes::RegimeReport;
use crate::bits::{BitString, Population};
use crate::diagnostics::{cumulative_selection_prob, gamma_grid};
use crate::engine::RunTrace;
use crate::error::{param, Result};
use crate::fitness::FitnessSpec;
use crate::operators::SelectionMode;

/// Largest `n` for which (M1) and (M2) are verified over all `2ⁿ` sources.
pub const EXHAUSTIVE_LIMIT: usize = 12;

const REL_TOL: f64 = 1e-12;

/// Where (M3) populations come from.
#[derive(Clone, Copy, Debug)]
pub enum AuditSource<'a> {
    /// Sampled snapshots of a run (β at the run's γ grid).
    Trace(&'a RunTrace),
    /// Explicit populations under a selection mode.
    Populations(&'a [Population], SelectionMode),
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct M1Level {
    pub level: usize,
    pub s_required: f64,
    /// Probability of the single-block or single-bit upgrade move.
    pub analytic: Option<f64>,
    /// Smallest upgrade probability over all sources in the level.
    pub exhaustive_min: Option<f64>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct M1Report {
    pub levels: Vec<M1Level>,
    pub exhaustive: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct M2Report {
    pub p0_required: f64,
    /// `(1 − χ/n)ⁿ`.
    pub p0_actual: f64,
    pub exhaustive_min: Option<f64>,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct M3Report {
    pub evaluated: bool,
    pub gammas: Vec<f64>,
    pub populations: usize,
    /// Populations skipped because they contain an optimum.
    pub skipped_optimal: usize,
    pub checks: usize,
    pub violations: usize,
    /// Smallest `β / ((1+δ)γ/p₀)` seen.
    pub min_margin: Option<f64>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct M4Report {
    pub lambda: f64,
    pub required_lambda: f64,
    pub holds: bool,
    /// (M4′) right-hand side with constant 1.
    pub m4_prime_rhs: f64,
    pub m4_prime_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub regime: String,
    pub m1: M1Report,
    pub m2: M2Report,
    pub m3: M3Report,
    pub m4: M4Report,
    /// Checks that could not be run, with the reason.
    pub unsupported: Vec<String>,
}

/// Audits (M1)–(M4′) for `spec` under the parameters of `regime`.
pub fn audit_conditions(spec: &FitnessSpec, regime: &RegimeReport, source: AuditSource<'_>) -> Result<AuditReport> {
    let Some(params) = regime.level_params.as_ref() else {
        return param(format!("regime {} has no level parameters (infeasible inputs?)", regime.regime));
    };
    params.validate()?;
    let Some(rate) = regime.derived.rate else {
        return param("regime report carries no mutation rate");
    };
    let n = spec.n();
    if regime.inputs.n.is_some_and(|rn| rn != n) {
        return param(format!("regime is for n={}, spec has n={n}", regime.inputs.n.unwrap_or(0)));
    }
    if spec.level_count() != params.m {
        return param(format!(
            "spec has {} levels but the regime assumes m={}",
            spec.level_count(),
            params.m
        ));
    }
    let mut unsupported = Vec::new();
    let integer_only = matches!(regime.regime.as_str(), "low_rate" | "low_rate_order" | "decomposed");
    let integral_ok = !integer_only || (spec.is_integral() && spec.scale_base().is_none());
    if !integral_ok {
        unsupported.push("integer-weight checks requested for a scaled or non-integral spec".to_string());
    }

    let distance_prob = distance_probabilities(n, rate);
    let analytic = if rate > 0.5 {
        unsupported.push("analytic (M1) needs a mutation rate ≤ 1/2".into());
        None
    } else if !integral_ok {
        None
    } else {
        Some(analytic_upgrade(spec, &distance_prob))
    };
    let exhaustive = (n <= EXHAUSTIVE_LIMIT).then(|| exhaustive_transitions(spec, &distance_prob));

    let mut m1_levels = Vec::with_capacity(params.m - 1);
    for (j, &s) in params.s.iter().enumerate() {
        let a = analytic.as_ref().map(|v| v[j]);
        let e = exhaustive.as_ref().and_then(|(up, _)| up[j]);
        let ok = |p: f64| p >= s * (1.0 - REL_TOL);
        let holds = match (a, e) {
            (_, Some(e)) => ok(e),
            (Some(a), None) => ok(a),
            (None, None) => false,
        };
        m1_levels.push(M1Level {
            level: j,
            s_required: s,
            analytic: a,
            exhaustive_min: e,
            holds,
        });
    }
    let m1 = M1Report {
        holds: m1_levels.iter().all(|l| l.holds),
        exhaustive: exhaustive.is_some(),
        levels: m1_levels,
    };

    let p0_actual = distance_prob[0];
    let m2_min = exhaustive.as_ref().and_then(|(_, stay)| *stay);
    let m2 = M2Report {
        p0_required: params.p0,
        p0_actual,
        exhaustive_min: m2_min,
        holds: p0_actual >= params.p0 * (1.0 - REL_TOL) && m2_min.map_or(true, |m| m >= params.p0 * (1.0 - REL_TOL)),
    };

    let m3 = if integral_ok {
        audit_m3(spec, params, source)?
    } else {
        M3Report::default()
    };

    let required = m4_required_lambda(params);
    let rhs = m4_prime_rhs(params, 1.0);
    let m4 = M4Report {
        lambda: params.lambda,
        required_lambda: required,
        holds: params.lambda >= required,
        m4_prime_rhs: rhs,
        m4_prime_holds: params.lambda >= rhs,
    };

    Ok(AuditReport {
        regime: regime.regime.clone(),
        m1,
        m2,
        m3,
        m4,
        unsupported,
    })
}

/// `p_d = rate^d (1−rate)^{n−d}` for `d = 0..=n`.
fn distance_probabilities(n: usize, rate: f64) -> Vec<f64> {
    let (lr, lk) = (rate.ln(), (-rate).ln_1p());
    (0..=n).map(|d| (d as f64 * lr + (n - d) as f64 * lk).exp()).collect()
}

/// Per level `j`, the probability of the canonical upgrade move from any
/// source in `A_j`: flip one 0-bit among the `j+1` heaviest positions, or
/// solve one of the `j+1` heaviest blocks touching only its own bits.
fn analytic_upgrade(spec: &FitnessSpec, pd: &[f64]) -> Vec<f64> {
    let levels = spec.level_count() - 1;
    match spec.as_decomp() {
        Some(d) => {
            let mut worst = 0usize;
            (0..levels)
                .map(|j| {
                    if j < d.block_count() {
                        let (positions, satisfying) = d.block(j);
                        worst = worst.max(max_repair_distance(positions.len(), satisfying));
                    }
                    pd[worst]
                })
                .collect()
        }
        None => vec![pd[1]; levels],
    }
}

/// Largest Hamming distance from an unsatisfying block assignment to the
/// nearest satisfying one.
fn max_repair_distance(len: usize, satisfying: &[u64]) -> usize {
    let size = 1usize << len;
    let mut dist = vec![usize::MAX; size];
    let mut queue = VecDeque::new();
    for &a in satisfying {
        dist[a as usize] = 0;
        queue.push_back(a as usize);
    }
    while let Some(a) = queue.pop_front() {
        for k in 0..len {
            let b = a ^ (1 << k);
            if dist[b] == usize::MAX {
                dist[b] = dist[a] + 1;
                queue.push_back(b);
            }
        }
    }
    dist.into_iter().max().unwrap_or(0)
}

/// Exact `min_{x∈A_j} p_mut(A_{≥j+1} | x)` per level and
/// `min_{x∉A_top} p_mut(A_{≥level(x)} | x)`, summing over all `2ⁿ` targets.
fn exhaustive_transitions(spec: &FitnessSpec, pd: &[f64]) -> (Vec<Option<f64>>, Option<f64>) {
    let n = spec.n();
    let size = 1u64 << n;
    let partition = spec.partition();
    let levels: Vec<usize> = (0..size)
        .map(|i| partition.level_of_value(spec.evaluate_unchecked(&BitString::from_index(n, i))))
        .collect();
    let top = spec.level_count() - 1;
    let mut up = vec![None::<f64>; top];
    let mut stay = None::<f64>;
    for x in 0..size {
        let lx = levels[x as usize];
        if lx == top {
            continue;
        }
        let (mut p_up, mut p_stay) = (0.0, 0.0);
        for (y, &ly) in levels.iter().enumerate() {
            if ly >= lx {
                let p = pd[(x ^ y as u64).count_ones() as usize];
                p_stay += p;
                if ly > lx {
                    p_up += p;
                }
            }
        }
        up[lx] = Some(up[lx].map_or(p_up, |m: f64| m.min(p_up)));
        stay = Some(stay.map_or(p_stay, |m: f64| m.min(p_stay)));
    }
    (up, stay)
}

fn audit_m3(spec: &FitnessSpec, params: &LevelParams, source: AuditSource<'_>) -> Result<M3Report> {
    let within = |g: f64| g <= params.gamma0 * (1.0 + 1e-12);
    let required = |g: f64| (1.0 + params.delta) * g / params.p0;
    let mut r = M3Report {
        evaluated: !matches!(source, AuditSource::None),
        ..Default::default()
    };
    let record = |r: &mut M3Report, gamma: f64, beta: f64| {
        let margin = beta / required(gamma);
        r.checks += 1;
        if margin < 1.0 - REL_TOL {
            r.violations += 1;
        }
        r.min_margin = Some(r.min_margin.map_or(margin, |m: f64| m.min(margin)));
    };
    match source {
        AuditSource::None => {}
        AuditSource::Trace(trace) => {
            for rec in &trace.records {
                r.populations += 1;
                if rec.optimum_present() {
                    r.skipped_optimal += 1;
                    continue;
                }
                for b in rec.beta.iter().filter(|b| within(b.gamma)) {
                    record(&mut r, b.gamma, b.beta);
                }
            }
            if let Some(first) = trace.records.first() {
                r.gammas = first.beta.iter().map(|b| b.gamma).filter(|g| within(*g)).collect();
            }
        }
        AuditSource::Populations(pops, mode) => {
            r.gammas = gamma_grid(Some(params.gamma0)).into_iter().filter(|g| within(*g)).collect();
            let top = spec.level_count() - 1;
            for pop in pops {
                r.populations += 1;
                let fitness = pop.iter().map(|x| spec.evaluate(x)).collect::<Result<Vec<f64>>>()?;
                if fitness.iter().any(|&f| spec.partition().level_of_value(f) == top) {
                    r.skipped_optimal += 1;
                    continue;
                }
                for &g in &r.gammas.clone() {
                    let beta = match spec.scale_base() {
                        Some(_) => {
                            let logs = pop
                                .iter()
                                .map(|x| spec.scaled_log_value(x).expect("scaled spec"))
                                .collect::<Result<Vec<f64>>>()?;
                            let probs = crate::operators::softmax(&logs);
                            crate::diagnostics::beta_from_probs(&fitness, &probs, g)?
                        }
                        None => cumulative_selection_prob(&fitness, g, mode)?,
                    };
                    record(&mut r, g, beta);
                }
            }
        }
    }
    r.holds = r.violations == 0;
    Ok(r)
}
