//! M/M/1 busy-period density and M/G/1 moment formulas.

use super::bessel::bessel_i1_scaled;
use super::quad::adaptive_simpson;
use super::AnalyticsError;

/// First four raw moments of a service-time distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceMoments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl ServiceMoments {
    /// Validates positivity and the Cauchy-Schwarz chain
    /// E[Y]² ≤ E[Y²], E[Y²]² ≤ E[Y]E[Y³], E[Y³]² ≤ E[Y²]E[Y⁴].
    pub fn new(m1: f64, m2: f64, m3: f64, m4: f64) -> Result<Self, AnalyticsError> {
        for m in [m1, m2, m3, m4] {
            if !(m > 0.0 && m.is_finite()) {
                return Err(AnalyticsError::BadMoments {
                    reason: "moments must be positive and finite",
                });
            }
        }
        if m2 < m1 * m1 || m1 * m3 < m2 * m2 || m2 * m4 < m3 * m3 {
            return Err(AnalyticsError::BadMoments {
                reason: "sequence violates Cauchy-Schwarz",
            });
        }
        Ok(Self { m1, m2, m3, m4 })
    }

    /// Exponential service with rate μ: E[Y^k] = k!/μ^k.
    pub fn exponential(mu: f64) -> Result<Self, AnalyticsError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(AnalyticsError::BadRate { value: mu });
        }
        Self::new(
            1.0 / mu,
            2.0 / (mu * mu),
            6.0 / mu.powi(3),
            24.0 / mu.powi(4),
        )
    }

    /// Deterministic service of length d: E[Y^k] = d^k.
    pub fn deterministic(d: f64) -> Result<Self, AnalyticsError> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(AnalyticsError::BadRate { value: d });
        }
        Self::new(d, d * d, d.powi(3), d.powi(4))
    }
}

fn validate_rates(lambda: f64, mu: f64) -> Result<(), AnalyticsError> {
    for r in [lambda, mu] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(AnalyticsError::BadRate { value: r });
        }
    }
    let rho = lambda / mu;
    if rho >= 1.0 {
        return Err(AnalyticsError::Utilization { rho });
    }
    Ok(())
}

/// Busy-period density √(μ/λ)·e^{−(λ+μ)t}·I₁(2√(λμ)t)/t for M/M/1,
/// evaluated in the overflow-safe form
/// √(μ/λ)·e^{−(√μ−√λ)²t}·[e^{−x}I₁(x)]/t with x = 2√(λμ)t.
pub fn busy_density_mm1(t: f64, lambda: f64, mu: f64) -> Result<f64, AnalyticsError> {
    validate_rates(lambda, mu)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(AnalyticsError::BadTime { value: t });
    }
    Ok(density_unchecked(t, lambda, mu))
}

fn density_unchecked(t: f64, lambda: f64, mu: f64) -> f64 {
    let x = 2.0 * (lambda * mu).sqrt() * t;
    let gap = mu.sqrt() - lambda.sqrt();
    (mu / lambda).sqrt() * (-gap * gap * t).exp() * bessel_i1_scaled(x) / t
}

/// Density extended by its t → 0⁺ limit μ, so quadrature can use 0 as an
/// endpoint.
fn density_extended(t: f64, lambda: f64, mu: f64) -> f64 {
    if t == 0.0 {
        mu
    } else {
        density_unchecked(t, lambda, mu)
    }
}

/// Prob(τ ≤ t) by quadrature of the density.
pub fn busy_cdf_mm1(t: f64, lambda: f64, mu: f64, tol: f64) -> Result<f64, AnalyticsError> {
    validate_rates(lambda, mu)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(AnalyticsError::BadTime { value: t });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(adaptive_simpson(
        |u| density_extended(u, lambda, mu),
        0.0,
        t,
        tol,
    ))
}

/// T with ∫_T^∞ density < eps.
///
/// density(t)·e^{at} is decreasing in t (a = (√μ−√λ)²), so the remainder
/// past T is at most density(T)/a.
pub fn upper_cutoff_mm1(lambda: f64, mu: f64, eps: f64) -> Result<f64, AnalyticsError> {
    validate_rates(lambda, mu)?;
    let a = (mu.sqrt() - lambda.sqrt()).powi(2);
    let mut t = 1.0f64;
    while density_unchecked(t, lambda, mu) / a > eps && t < 1e300 {
        t *= 2.0;
    }
    Ok(t)
}

/// k-th raw busy-period moment ∫ t^k·density dt; k = 0 recovers the total
/// mass 1.
pub fn busy_moment_mm1(k: u32, lambda: f64, mu: f64, tol: f64) -> Result<f64, AnalyticsError> {
    validate_rates(lambda, mu)?;
    let a = (mu.sqrt() - lambda.sqrt()).powi(2);
    // Past T ≥ 2k/a the integrand is bounded by T^k·density(T)·e^{−(a/2)(t−T)},
    // so the discarded tail is under 2·T^k·density(T)/a.
    let mut t_max: f64 = (2.0 * k as f64 / a).max(1.0);
    while t_max.powi(k as i32) * density_unchecked(t_max, lambda, mu) * 2.0 / a > 0.5 * tol
        && t_max < 1e300
    {
        t_max *= 2.0;
    }
    let integrand = |t: f64| {
        if t == 0.0 {
            if k == 0 {
                mu
            } else {
                0.0
            }
        } else {
            t.powi(k as i32) * density_unchecked(t, lambda, mu)
        }
    };
    Ok(adaptive_simpson(integrand, 0.0, t_max, 0.5 * tol))
}

/// Fourth busy-period moment for M/G/1 without reneging:
/// E[Y⁴]/(1−ρ)⁵ + 10λE[Y²]E[Y³]/(1−ρ)⁶ + 15λ²(E[Y²])³/(1−ρ)⁷, ρ = λE[Y].
///
/// λ = 0 is allowed and collapses to E[Y⁴]: the busy period is a single
/// service.
pub fn busy_moment4(lambda: f64, moments: &ServiceMoments) -> Result<f64, AnalyticsError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(AnalyticsError::BadRate { value: lambda });
    }
    let rho = lambda * moments.m1;
    if rho >= 1.0 {
        return Err(AnalyticsError::Utilization { rho });
    }
    let u = 1.0 - rho;
    Ok(moments.m4 / u.powi(5)
        + 10.0 * lambda * moments.m2 * moments.m3 / u.powi(6)
        + 15.0 * lambda * lambda * moments.m2.powi(3) / u.powi(7))
}
