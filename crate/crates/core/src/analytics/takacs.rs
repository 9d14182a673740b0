//! Busy-period transform via the Takacs functional equation.
//!
//! For an M/G/1 queue with arrival rate λ and service LST Y*, the
//! busy-period LST solves τ*(s) = Y*(s + λ − λτ*(s)). Iterating from
//! x₀ = 0 walks monotonically up to the smallest root, which is the
//! probabilistically meaningful one; root-finding could land on the
//! other branch.

use super::AnalyticsError;

/// Iteration cap. Convergence is linear with rate ≈ ρ at s = 0, so even
/// ρ = 0.999 resolves the tolerance within a few tens of thousands of steps.
const MAX_ITER: u32 = 1_000_000;
/// Absolute step tolerance for the fixed point.
const TOL: f64 = 1e-14;
/// Step for the fourth-derivative stencil. Balances h⁴ truncation against
/// the 1e-14 fixed-point noise divided by h⁴; −3h stays inside the
/// convergence strip of every transform used here.
const H4: f64 = 2e-3;
/// Step for the first-derivative difference at 0.
const H1: f64 = 1e-4;

/// τ*(s) for arrival rate `lambda` and service LST `service_lst`.
///
/// `s` is normally nonnegative. Slightly negative values inside the
/// transform's convergence strip are accepted as well (the moment helpers
/// difference across 0); past the singularity the iteration blows up and
/// reports it.
pub fn takacs_lst<F>(s: f64, lambda: f64, service_lst: F) -> Result<f64, AnalyticsError>
where
    F: Fn(f64) -> f64,
{
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(AnalyticsError::BadRate { value: lambda });
    }
    if !s.is_finite() {
        return Err(AnalyticsError::OutsideDomain { s });
    }
    let mut x = 0.0f64;
    let mut step = f64::INFINITY;
    for iterations in 1..=MAX_ITER {
        let next = service_lst(s + lambda - lambda * x);
        if !next.is_finite() || next.abs() > 1e12 {
            return Err(AnalyticsError::NoConvergence {
                iterations,
                last_step: step,
                value: next,
            });
        }
        step = (next - x).abs();
        x = next;
        if step < TOL {
            return Ok(x);
        }
    }
    Err(AnalyticsError::NoConvergence {
        iterations: MAX_ITER,
        last_step: step,
        value: x,
    })
}

/// Closed-form M/M/1 busy-period LST: the smaller root of
/// λτ² − (λ+μ+s)τ + μ = 0.
pub fn mm1_busy_lst(s: f64, lambda: f64, mu: f64) -> Result<f64, AnalyticsError> {
    for r in [lambda, mu] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(AnalyticsError::BadRate { value: r });
        }
    }
    let rho = lambda / mu;
    if rho >= 1.0 {
        return Err(AnalyticsError::Utilization { rho });
    }
    let b = lambda + mu + s;
    let disc = b * b - 4.0 * lambda * mu;
    if disc < 0.0 {
        return Err(AnalyticsError::OutsideDomain { s });
    }
    Ok((b - disc.sqrt()) / (2.0 * lambda))
}

/// First derivative of `f` at 0 by central difference.
pub fn derivative1_central<F: FnMut(f64) -> f64>(mut f: F, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

/// Fourth derivative of `f` at 0 by the 7-point central stencil
/// (truncation O(h⁴)).
pub fn derivative4_central<F: FnMut(f64) -> f64>(mut f: F, h: f64) -> f64 {
    const W: [f64; 7] = [-1.0 / 6.0, 2.0, -6.5, 28.0 / 3.0, -6.5, 2.0, -1.0 / 6.0];
    let mut acc = 0.0;
    for (i, w) in W.iter().enumerate() {
        acc += w * f((i as f64 - 3.0) * h);
    }
    acc / (h * h * h * h)
}

/// E[τ] from the transform: −dτ*/ds at 0.
pub fn busy_mean_from_lst<F>(lambda: f64, service_lst: F) -> Result<f64, AnalyticsError>
where
    F: Fn(f64) -> f64,
{
    let mut failure = None;
    let mean = -derivative1_central(
        |s| eval_or_flag(s, lambda, &service_lst, &mut failure),
        H1,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(mean),
    }
}

/// E[τ⁴] from the transform: d⁴τ*/ds⁴ at 0.
pub fn busy_moment4_from_lst<F>(lambda: f64, service_lst: F) -> Result<f64, AnalyticsError>
where
    F: Fn(f64) -> f64,
{
    let mut failure = None;
    let m4 = derivative4_central(
        |s| eval_or_flag(s, lambda, &service_lst, &mut failure),
        H4,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(m4),
    }
}

/// Stencil evaluation that records the first transform failure instead of
/// panicking inside the difference formula.
fn eval_or_flag<F: Fn(f64) -> f64>(
    s: f64,
    lambda: f64,
    service_lst: &F,
    failure: &mut Option<AnalyticsError>,
) -> f64 {
    match takacs_lst(s, lambda, service_lst) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_lst(mu: f64) -> impl Fn(f64) -> f64 {
        move |s| mu / (mu + s)
    }

    fn det_lst(d: f64) -> impl Fn(f64) -> f64 {
        move |s| (-d * s).exp()
    }

    #[test]
    fn value_at_zero_is_one() {
        assert!((takacs_lst(0.0, 0.5, exp_lst(1.0)).unwrap() - 1.0).abs() < 1e-13);
        assert!((takacs_lst(0.0, 0.5, det_lst(1.0)).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn matches_mm1_closed_form_over_the_grid() {
        for i in 0..=100 {
            let s = 0.1 * i as f64;
            let fixed = takacs_lst(s, 0.5, exp_lst(1.0)).unwrap();
            let closed = mm1_busy_lst(s, 0.5, 1.0).unwrap();
            assert!((fixed - closed).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn nonincreasing_in_s_and_inside_unit_interval() {
        let mut prev = f64::INFINITY;
        for i in 0..=50 {
            let s = 0.2 * i as f64;
            let v = takacs_lst(s, 0.5, det_lst(1.0)).unwrap();
            assert!(v > 0.0 && v <= 1.0 + 1e-14);
            assert!(v <= prev + 1e-14, "s = {s}");
            prev = v;
        }
    }

    // Reference values from a 40-digit fixed-point solve (mpmath).
    #[test]
    fn md1_spot_values() {
        let cases = [
            (0.5, 0.46392190597306886949),
            (1.0, 0.25325090929611204242),
            (2.0, 0.085677838500170177946),
        ];
        for (s, want) in cases {
            let got = takacs_lst(s, 0.5, det_lst(1.0)).unwrap();
            assert!((got - want).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn mean_from_transform_matches_moment_identity() {
        // E[τ] = E[Y]/(1−ρ) = 2 for both test queues.
        let mm1 = busy_mean_from_lst(0.5, exp_lst(1.0)).unwrap();
        assert!((mm1 - 2.0).abs() < 1e-6, "got {mm1}");
        let md1 = busy_mean_from_lst(0.5, det_lst(1.0)).unwrap();
        assert!((md1 - 2.0).abs() < 1e-6, "got {md1}");
    }

    #[test]
    fn fourth_derivative_matches_moment_formula_values() {
        let mm1 = busy_moment4_from_lst(0.5, exp_lst(1.0)).unwrap();
        assert!((mm1 - 8448.0).abs() / 8448.0 < 1e-4, "got {mm1}");
        let md1 = busy_moment4_from_lst(0.5, det_lst(1.0)).unwrap();
        assert!((md1 - 832.0).abs() / 832.0 < 1e-4, "got {md1}");
    }

    #[test]
    fn stencils_are_correct_on_analytic_functions() {
        let d1 = derivative1_central(f64::sin, 1e-5);
        assert!((d1 - 1.0).abs() < 1e-10);
        let d4 = derivative4_central(|x| (2.0 * x).exp(), 1e-2);
        assert!((d4 - 16.0).abs() / 16.0 < 1e-6);
        // x⁶ has zero fourth derivative contribution error at this order.
        let quartic = derivative4_central(|x| x.powi(4), 1e-3);
        assert!((quartic - 24.0).abs() < 1e-4);
    }

    #[test]
    fn reports_divergence_past_the_abscissa() {
        // For M/M/1(0.5, 1) the transform's singularity sits at
        // s = −(√μ−√λ)² ≈ −0.0858; s = −1 is far outside.
        assert!(takacs_lst(-1.0, 0.5, exp_lst(1.0)).is_err());
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(matches!(
            takacs_lst(1.0, 0.0, exp_lst(1.0)),
            Err(AnalyticsError::BadRate { .. })
        ));
        assert!(matches!(
            mm1_busy_lst(1.0, 1.0, 1.0),
            Err(AnalyticsError::Utilization { .. })
        ));
    }
}
