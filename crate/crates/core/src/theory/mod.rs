//! Closed-form runtime bounds, regime calculators and the condition auditor.

mod audit;
mod bounds;
mod regimes;

pub use audit::{
    audit_conditions, AuditReport, AuditSource, M1Level, M1Report, M2Report, M3Report, M4Report,
    EXHAUSTIVE_LIMIT,
};
pub use bounds::{
    level_bound, order_bound, clamped_ln, m4_prime_rhs, m4_required_lambda, LevelParams, LevelBound,
    OrderBound,
};
pub use regimes::{
    approximation_threshold, m_chi, negative_regime, psi, regime_low_rate, regime_low_rate_order, regime_scaled,
    regime_decomposed, low_rate_bound, scaled_bound, zero_bit_floor, Derived, RegimeInputs, RegimeReport,
};
