//! Subexponential tail relation for the busy period.
//!
//! When the service tail is regularly varying, 1 − Y(t) = L·t^{−α}, the
//! busy-period tail inherits the same exponent with its level lifted by
//! (1−ρ)^{−α−1}. The slowly varying factor is narrowed to a constant;
//! nothing measurable here distinguishes the general case.

use super::AnalyticsError;

/// Service tail 1 − Y(t) = L·t^{−α} with constant L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSpec {
    /// Tail exponent α ≥ 1.
    pub alpha: f64,
    /// The constant standing in for the slowly varying factor L(t).
    pub slowly_varying_constant: f64,
}

impl TailSpec {
    pub fn new(alpha: f64, slowly_varying_constant: f64) -> Result<Self, AnalyticsError> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(AnalyticsError::BadTailSpec {
                reason: "exponent must be at least 1",
            });
        }
        if !(slowly_varying_constant > 0.0 && slowly_varying_constant.is_finite()) {
            return Err(AnalyticsError::BadTailSpec {
                reason: "level must be positive and finite",
            });
        }
        Ok(Self {
            alpha,
            slowly_varying_constant,
        })
    }
}

/// Predicted busy-period tail (1 − τ(t)) ≈ (1−ρ)^{−α−1}·L·t^{−α}.
pub fn tail_prediction(t: f64, rho: f64, tail: &TailSpec) -> Result<f64, AnalyticsError> {
    if !(0.0..1.0).contains(&rho) {
        return Err(AnalyticsError::Utilization { rho });
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(AnalyticsError::BadTime { value: t });
    }
    Ok((1.0 - rho).powf(-tail.alpha - 1.0)
        * tail.slowly_varying_constant
        * t.powf(-tail.alpha))
}
