//! A-priori estimates for `|A(α) - q(α)|` and the integral lemma behind them.

use std::f64::consts::{E, PI};

use crate::amplitude::AmplitudeProfile;
use crate::error::{Error, Result};
use crate::output;
use crate::potential::Potential;

/// Relative slack applied when comparing a measured value with a bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// `((a+b+1)^{n+1} / (n+1)) · ||f||`, the bound on `∫₀ᵃ (x+b)ⁿ f(x) dx` for
/// non-negative `f` with unit-window norm `||f||`.
pub fn lemma1_bound(norm_f: f64, a: f64, b: f64, n: u32) -> f64 {
    let m = f64::from(n + 1);
    (a + b + 1.0).powf(m) / m * norm_f
}

/// `(1/2) Q² {exp(2√2 √‖q‖ α) + exp(2e ‖q‖ α)/√(2π)}` from `Q = Q(α)` and `‖q‖`.
pub fn exponential_bound(q_abs: f64, norm: f64, alpha: f64) -> f64 {
    if q_abs == 0.0 {
        return 0.0;
    }
    let first = (2.0 * 2f64.sqrt() * norm.sqrt() * alpha).exp();
    let second = (2.0 * E * norm * alpha).exp() / (2.0 * PI).sqrt();
    0.5 * q_abs * q_abs * (first + second)
}

/// `Q² Σ_{n>=0} αⁿ (α+n)ⁿ ‖q‖ⁿ / (n!)²`, the series behind the exponential
/// estimates.
pub fn series_bound(q_abs: f64, norm: f64, alpha: f64) -> f64 {
    crate::amplitude::neumann_remainder_majorant(q_abs, norm, alpha, 0)
}

/// `(1/2) Q² {1 + exp(2√2 √‖q‖ α) + (exp(2e ‖q‖ α) - 1)/√(2π)}`.
///
/// Majorizes [`series_bound`] term by term. [`exponential_bound`] drops half
/// of the `n = 0` term and can fall below `|A - q|` when `q` vanishes near
/// the origin.
pub fn corrected_exponential_bound(q_abs: f64, norm: f64, alpha: f64) -> f64 {
    if q_abs == 0.0 {
        return 0.0;
    }
    let first = (2.0 * 2f64.sqrt() * norm.sqrt() * alpha).exp();
    let second = (2.0 * E * norm * alpha).exp_m1() / (2.0 * PI).sqrt();
    0.5 * q_abs * q_abs * (1.0 + first + second)
}

/// Exponential amplitude bound for potentials with finite unit-window norm.
pub fn amplitude_bound(q: &Potential, alpha: f64) -> Result<f64> {
    let norm = q.local_l1_norm();
    if !norm.is_finite() {
        return Err(Error::InfiniteNorm);
    }
    Ok(exponential_bound(q.cumulative_abs(alpha), norm, alpha))
}

/// [`corrected_exponential_bound`] for `q`.
pub fn amplitude_bound_corrected(q: &Potential, alpha: f64) -> Result<f64> {
    let norm = q.local_l1_norm();
    if !norm.is_finite() {
        return Err(Error::InfiniteNorm);
    }
    Ok(corrected_exponential_bound(
        q.cumulative_abs(alpha),
        norm,
        alpha,
    ))
}

/// `Q(α)² e^{α Q(α)}` for integrable potentials.
pub fn amplitude_bound_l1(q: &Potential, alpha: f64) -> Result<f64> {
    q.total_abs().ok_or(Error::NotIntegrable)?;
    let q_abs = q.cumulative_abs(alpha);
    Ok(q_abs * q_abs * (alpha * q_abs).exp())
}

/// `s · Σ_{n>=1} sⁿ α^{2n} / (n!(n+1)!)` for bounded potentials, `s = sup|q|`.
pub fn amplitude_bound_linf(sup_q: f64, alpha: f64) -> f64 {
    if sup_q == 0.0 || alpha == 0.0 {
        return 0.0;
    }
    let x = sup_q * alpha * alpha;
    let mut term = x / 2.0; // n = 1
    let mut sum = term;
    let mut n = 1.0;
    loop {
        term *= x / ((n + 1.0) * (n + 2.0));
        sum += term;
        n += 1.0;
        if term <= 1e-16 * sum {
            break;
        }
    }
    sup_q * sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub alpha: f64,
    /// Measured `|A(α) - q(α)|`.
    pub lhs: f64,
    /// Tightest applicable bound.
    pub rhs: f64,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn new(alpha: f64, lhs: f64, rhs: f64) -> Self {
        Self {
            alpha,
            lhs,
            rhs,
            satisfied: lhs <= rhs * (1.0 + BOUND_SLACK),
        }
    }
}

/// Checks each sample of `profile` against the tightest bound available for
/// the class of `q` (local L¹, L¹, L^∞).
pub fn check_amplitude_bounds(profile: &AmplitudeProfile, q: &Potential) -> Vec<BoundReport> {
    let norm = q.local_l1_norm();
    let integrable = q.total_abs().is_some();
    let sup = q.sup_abs();
    profile
        .samples
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let alpha = profile.alpha(j);
            let q_abs = q.cumulative_abs(alpha);
            let mut rhs = f64::INFINITY;
            if norm.is_finite() {
                rhs = rhs.min(corrected_exponential_bound(q_abs, norm, alpha));
            }
            if integrable {
                rhs = rhs.min(q_abs * q_abs * (alpha * q_abs).exp());
            }
            if sup.is_finite() {
                rhs = rhs.min(amplitude_bound_linf(sup, alpha));
            }
            BoundReport::new(alpha, (a - q.eval(alpha)).abs(), rhs)
        })
        .collect()
}

/// CSV with header `alpha,lhs,rhs,ok`.
pub fn reports_to_csv(reports: &[BoundReport]) -> String {
    output::table(
        "alpha,lhs,rhs,ok",
        reports.iter().map(|r| {
            [
                output::num(r.alpha),
                output::num(r.lhs),
                output::num(r.rhs),
                r.satisfied.to_string(),
            ]
        }),
    )
}
