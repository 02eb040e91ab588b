//! `m(-k²)` from the amplitude by a truncated Laplace transform, with a
//! certified tail bound, plus asymptotic and Herglotz diagnostics.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::amplitude::AmplitudeProfile;
use crate::error::{Error, Result};
use crate::output;
use crate::potential::Potential;
use crate::response::ResponseKernel;

pub use crate::potential::convergence_threshold;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MEvaluation {
    pub k: Complex64,
    pub m: Complex64,
    pub alpha_max: f64,
    pub quadrature_estimate: f64,
    /// `inf` when `Re k` is not above the convergence threshold.
    pub tail_bound: f64,
}

impl MEvaluation {
    pub fn verified(&self) -> bool {
        self.tail_bound.is_finite()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpectralOptions {
    /// Truncate at the smallest grid extent whose tail bound is below this;
    /// `None` integrates over the whole grid.
    pub tail_tol: Option<f64>,
    /// Evaluate below the threshold (tail bound reported as `inf`).
    pub allow_unverified: bool,
}

/// `∫_a^∞ (α+1)² e^{-βα} dα` for `β > 0`.
fn poly_exp_tail(a: f64, beta: f64) -> f64 {
    let b = a + 1.0;
    (-beta * a).exp() * (b * b / beta + 2.0 * b / (beta * beta) + 2.0 / (beta * beta * beta))
}

/// Tail bound from the norm alone; `inf` if the exponents do not decay.
fn tail_bound_norm(norm: f64, alpha_max: f64, re_k: f64) -> f64 {
    if norm == 0.0 {
        return 0.0;
    }
    let s = 2.0 * re_k;
    let beta1 = s - 2.0 * 2f64.sqrt() * norm.sqrt();
    let beta2 = s - 2.0 * E * norm;
    if !(re_k > 0.0 && beta1 > 0.0 && beta2 > 0.0) {
        return f64::INFINITY;
    }
    let direct = norm * (-s * alpha_max).exp() / (1.0 - (-s).exp());
    let growth = 0.5
        * norm
        * norm
        * (poly_exp_tail(alpha_max, beta1)
            + poly_exp_tail(alpha_max, beta2) / (2.0 * PI).sqrt()
            + (1.0 - 1.0 / (2.0 * PI).sqrt()) * poly_exp_tail(alpha_max, s));
    direct + growth
}

fn checked_norm(q: &Potential, k: Complex64, allow_unverified: bool) -> Result<Option<f64>> {
    let norm = q.local_l1_norm();
    if !norm.is_finite() {
        return Err(Error::InfiniteNorm);
    }
    let threshold = convergence_threshold(norm);
    if k.re > threshold && k.re > 0.0 {
        Ok(Some(norm))
    } else if allow_unverified && k.re > 0.0 {
        Ok(None)
    } else {
        Err(Error::Threshold {
            re_k: k.re,
            threshold,
        })
    }
}

/// Bound on `|∫_{α_max}^∞ A(α) e^{-2αk} dα|`.
pub fn tail_bound(q: &Potential, alpha_max: f64, k: Complex64) -> Result<f64> {
    let norm = checked_norm(q, k, false)?.unwrap_or_default();
    Ok(tail_bound_norm(norm, alpha_max, k.re))
}

/// Trapezoid sums at `h` and `2h` over `samples[..=end]` times `weight(j)`.
fn trapezoid_pair(
    samples: &[f64],
    h: f64,
    end: usize,
    weight: impl Fn(usize) -> Complex64,
) -> (Complex64, f64) {
    let terms: Vec<Complex64> = (0..=end).map(|j| samples[j] * weight(j)).collect();
    let fine = if end == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        let inner: Complex64 = terms[1..end].iter().sum();
        (inner + 0.5 * (terms[0] + terms[end])) * h
    };
    let even = end - end % 2;
    let estimate = if even < 2 {
        0.0
    } else {
        let sum_fine: Complex64 =
            terms[1..even].iter().sum::<Complex64>() + 0.5 * (terms[0] + terms[even]);
        let sum_coarse: Complex64 =
            terms[2..even].iter().step_by(2).sum::<Complex64>() + 0.5 * (terms[0] + terms[even]);
        (sum_fine * h - sum_coarse * (2.0 * h)).norm() / 3.0
    };
    (fine, estimate)
}

/// Grid index at which to truncate: the smallest one whose tail bound meets
/// the tolerance (binary search, the bound is monotone), else the last.
fn truncation(norm: Option<f64>, h: f64, last: usize, re_k: f64, tol: Option<f64>) -> (usize, f64) {
    let Some(norm) = norm else {
        return (last, f64::INFINITY);
    };
    let bound = |j: usize| tail_bound_norm(norm, j as f64 * h, re_k);
    let Some(tol) = tol else {
        return (last, bound(last));
    };
    if bound(last) > tol {
        return (last, bound(last));
    }
    let (mut lo, mut hi) = (0usize, last);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if bound(mid) <= tol {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    (lo, bound(lo))
}

/// `m(-k²) = -k - ∫₀^{α_max} A(α) e^{-2αk} dα` over the whole grid.
pub fn m_from_amplitude(a: &AmplitudeProfile, q: &Potential, k: Complex64) -> Result<MEvaluation> {
    m_from_amplitude_with(a, q, k, &SpectralOptions::default())
}

pub fn m_from_amplitude_with(
    a: &AmplitudeProfile,
    q: &Potential,
    k: Complex64,
    opts: &SpectralOptions,
) -> Result<MEvaluation> {
    let norm = checked_norm(q, k, opts.allow_unverified)?;
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty amplitude profile".into()));
    }
    let (end, tail) = truncation(norm, a.h, a.len() - 1, k.re, opts.tail_tol);
    let (integral, estimate) =
        trapezoid_pair(&a.samples, a.h, end, |j| (-2.0 * a.alpha(j) * k).exp());
    finish(k, -k - integral, end as f64 * a.h, estimate, tail)
}

/// `m(-k²) = -k + ∫₀^{t_max} e^{-kt} r(t) dt`.
pub fn m_from_response(r: &ResponseKernel, q: &Potential, k: Complex64) -> Result<MEvaluation> {
    m_from_response_with(r, q, k, &SpectralOptions::default())
}

pub fn m_from_response_with(
    r: &ResponseKernel,
    q: &Potential,
    k: Complex64,
    opts: &SpectralOptions,
) -> Result<MEvaluation> {
    let norm = checked_norm(q, k, opts.allow_unverified)?;
    if r.samples.is_empty() {
        return Err(Error::InvalidArgument("empty response kernel".into()));
    }
    // the tail is measured in α = t/2
    let (end, tail) = truncation(norm, 0.5 * r.h_t, r.samples.len() - 1, k.re, opts.tail_tol);
    let (integral, estimate) = trapezoid_pair(&r.samples, r.h_t, end, |j| (-r.t(j) * k).exp());
    finish(k, -k + integral, 0.5 * r.t(end), estimate, tail)
}

fn finish(
    k: Complex64,
    m: Complex64,
    alpha_max: f64,
    estimate: f64,
    tail: f64,
) -> Result<MEvaluation> {
    if !(m.re.is_finite() && m.im.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "m is not finite at k = {k}"
        )));
    }
    Ok(MEvaluation {
        k,
        m,
        alpha_max,
        quadrature_estimate: estimate,
        tail_bound: tail,
    })
}

/// Independent evaluations over `ks`, in input order.
pub fn m_sweep(
    a: &AmplitudeProfile,
    q: &Potential,
    ks: &[Complex64],
    opts: &SpectralOptions,
) -> Vec<Result<MEvaluation>> {
    ks.par_iter()
        .map(|k| m_from_amplitude_with(a, q, *k, opts))
        .collect()
}

/// `|k(m + k) + q(0)/2|`.
pub fn asymptotic_residual(q0: f64, k: f64, m: Complex64) -> f64 {
    (k * (m + k) + q0 / 2.0).norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HerglotzReport {
    pub im_z: f64,
    pub im_m: f64,
    pub agrees: bool,
}

/// Whether `Im m` has the sign of `Im z`, `z = -k²`.
pub fn herglotz_check(m: Complex64, k: Complex64) -> HerglotzReport {
    let im_z = -2.0 * k.re * k.im;
    let agrees = im_z != 0.0 && im_z.signum() == m.im.signum() && m.im != 0.0;
    HerglotzReport {
        im_z,
        im_m: m.im,
        agrees,
    }
}

/// CSV with header `re_k,im_k,re_m,im_m,tail_bound,quad_est`.
pub fn evaluations_to_csv(evals: &[MEvaluation]) -> String {
    output::table(
        "re_k,im_k,re_m,im_m,tail_bound,quad_est",
        evals.iter().map(|e| {
            [
                e.k.re,
                e.k.im,
                e.m.re,
                e.m.im,
                e.tail_bound,
                e.quadrature_estimate,
            ]
            .map(output::num)
        }),
    )
}

fn json_number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(output::num(x))
    }
}

/// JSON report: the CSV fields per row plus `config` echoed verbatim.
pub fn evaluations_to_json(evals: &[MEvaluation], config: Value) -> Value {
    let rows: Vec<Value> = evals
        .iter()
        .map(|e| {
            json!({
                "re_k": e.k.re,
                "im_k": e.k.im,
                "re_m": e.m.re,
                "im_m": e.m.im,
                "alpha_max": e.alpha_max,
                "tail_bound": json_number(e.tail_bound),
                "quad_est": e.quadrature_estimate,
            })
        })
        .collect();
    json!({ "config": config, "evaluations": rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::solve_amplitude_march;
    use crate::response::response_kernel_from_amplitude;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn threshold_values() {
        assert_eq!(convergence_threshold(0.0), 0.0);
        assert!((convergence_threshold(1.0) - 2.0 * E).abs() < 1e-15);
        assert!((convergence_threshold(0.125) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_bound_examples() {
        let q = Potential::constant(1.0);
        let b = tail_bound(&q, 8.0, c(6.0, 0.0)).unwrap();
        assert!(b <= 1e-6, "{b}");
        assert_eq!(
            tail_bound(&Potential::zero(), 0.0, c(1.0, 0.0)).unwrap(),
            0.0
        );
        assert!(matches!(
            tail_bound(&q, 8.0, c(5.0, 0.0)),
            Err(Error::Threshold { .. })
        ));
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let b = tail_bound(&q, i as f64 * 0.5, c(6.0, -0.5)).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(prev < 1e-40);
    }

    #[test]
    fn free_case_is_exact() {
        let a = solve_amplitude_march(&Potential::zero(), 3.0, 0.01).unwrap();
        let e = m_from_amplitude(&a, &Potential::zero(), c(7.0, 0.0)).unwrap();
        assert_eq!(e.m, c(-7.0, 0.0));
        assert_eq!(e.tail_bound, 0.0);
        let r = ResponseKernel::new(0.02, vec![0.0; 11]);
        assert_eq!(
            m_from_response(&r, &Potential::zero(), c(3.0, 1.0))
                .unwrap()
                .m,
            c(-3.0, -1.0)
        );
    }

    #[test]
    fn constant_potential_and_paths() {
        let q = Potential::constant(1.0);
        let a = solve_amplitude_march(&q, 8.0, 1.0 / 200.0).unwrap();
        let r = response_kernel_from_amplitude(&a);
        let opts = SpectralOptions {
            tail_tol: Some(1e-6),
            allow_unverified: false,
        };
        for k in [c(6.0, 0.0), c(8.0, -0.7), c(10.0, 0.3)] {
            let e = m_from_amplitude_with(&a, &q, k, &opts).unwrap();
            let exact = -(k * k + 1.0).sqrt();
            assert!((e.m - exact).norm() <= 1e-4 * exact.norm());
            assert!(e.tail_bound <= 1e-6 && e.alpha_max < 8.0);
            let f = m_from_response_with(&r, &q, k, &opts).unwrap();
            assert!((e.m - f.m).norm() <= 1e-10);
            assert_eq!(e.alpha_max, f.alpha_max);
        }
    }

    #[test]
    fn unverified_region() {
        let q = Potential::constant(1.0);
        let a = solve_amplitude_march(&q, 4.0, 0.01).unwrap();
        assert!(matches!(
            m_from_amplitude(&a, &q, c(3.0, 0.0)),
            Err(Error::Threshold { .. })
        ));
        let opts = SpectralOptions {
            tail_tol: None,
            allow_unverified: true,
        };
        let e = m_from_amplitude_with(&a, &q, c(3.0, 0.0), &opts).unwrap();
        assert!(!e.verified());
        assert_eq!(e.alpha_max, 4.0);
    }

    #[test]
    fn residuals_and_signs() {
        assert_eq!(asymptotic_residual(0.0, 5.0, c(-5.0, 0.0)), 0.0);
        let k = 40.0;
        let res = asymptotic_residual(1.0, k, c(-(k * k + 1.0_f64).sqrt(), 0.0));
        assert!((res - 1.0 / (8.0 * k * k)).abs() < 1e-7, "{res}");
        let k = c(7.0, -1.0);
        let report = herglotz_check(-k, k);
        assert_eq!(report.im_z, 14.0);
        assert!(report.agrees);
        assert!(herglotz_check(-(k * k + 1.0).sqrt(), k).agrees);
        assert!(!herglotz_check(c(-7.0, -1.0), k).agrees);
    }

    #[test]
    fn quadrature_estimate_tracks_error() {
        let q = Potential::exp_decay(1.0, 1.0);
        let k = c(8.0, 0.0);
        let fine =
            m_from_amplitude(&solve_amplitude_march(&q, 6.0, 1.0 / 400.0).unwrap(), &q, k).unwrap();
        let coarse =
            m_from_amplitude(&solve_amplitude_march(&q, 6.0, 1.0 / 100.0).unwrap(), &q, k).unwrap();
        assert!(fine.quadrature_estimate < coarse.quadrature_estimate);
        assert!(coarse.quadrature_estimate > 0.0);
    }

    #[test]
    fn csv_and_json() {
        let e = MEvaluation {
            k: c(6.0, 0.0),
            m: c(-6.0, 0.5),
            alpha_max: 2.0,
            quadrature_estimate: 0.0,
            tail_bound: f64::INFINITY,
        };
        let csv = evaluations_to_csv(&[e]);
        assert!(csv.starts_with("re_k,im_k,re_m,im_m,tail_bound,quad_est\n"));
        assert!(csv.contains(",inf,"));
        let j = evaluations_to_json(&[e], json!({"k": "6"}));
        assert_eq!(j["evaluations"][0]["tail_bound"], "inf");
        assert_eq!(j["config"]["k"], "6");
    }
}
