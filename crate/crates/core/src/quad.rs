//! Small quadrature helpers shared by the solvers.

/// Composite trapezoid sum of uniformly spaced samples.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => {
            let interior: f64 = samples[1..n - 1].iter().sum();
            h * (interior + 0.5 * (samples[0] + samples[n - 1]))
        }
    }
}

/// Adaptive trapezoid rule with an absolute tolerance.
///
/// Panels are bisected until the trapezoid value and its refinement agree to
/// within `3 * tol` scaled by the panel share of the interval.
pub fn adaptive_trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // A fixed initial subdivision keeps oscillatory integrands from
    // converging spuriously on the first comparison.
    let panels = (((b - a) * 16.0).ceil() as usize).max(4);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    let mut left = a;
    let mut f_left = f(a);
    for p in 0..panels {
        let right = if p + 1 == panels {
            b
        } else {
            a + (p + 1) as f64 * width
        };
        let f_right = f(right);
        let coarse = 0.5 * (right - left) * (f_left + f_right);
        total += refine(
            &f,
            left,
            right,
            f_left,
            f_right,
            coarse,
            tol / panels as f64,
            0,
        );
        left = right;
        f_left = f_right;
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    coarse: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let fm = f(m);
    let left = 0.5 * (m - a) * (fa + fm);
    let right = 0.5 * (b - m) * (fm + fb);
    let fine = left + right;
    if depth >= 48 || (fine - coarse).abs() <= 3.0 * tol {
        return fine;
    }
    refine(f, a, m, fa, fm, left, 0.5 * tol, depth + 1)
        + refine(f, m, b, fm, fb, right, 0.5 * tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_linear_data() {
        let h = 0.1;
        let s: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64 * h + 1.0).collect();
        assert!((trapezoid(&s, h) - 2.0).abs() < 1e-14);
        assert_eq!(trapezoid(&[3.0], h), 0.0);
    }

    #[test]
    fn adaptive_meets_tolerance() {
        let v = adaptive_trapezoid(f64::sin, 0.0, std::f64::consts::PI, 1e-10);
        assert!((v - 2.0).abs() < 1e-9, "{v}");
        let v = adaptive_trapezoid(|x| x.sqrt(), 0.0, 1.0, 1e-10);
        assert!((v - 2.0 / 3.0).abs() < 1e-8, "{v}");
    }
}
