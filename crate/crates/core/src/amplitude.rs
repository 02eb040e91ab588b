//! The kernel `A(x, y)` of
//!
//! ```text
//! A(x,y) = q(x) - ∫₀^y ( ∫ᵥˣ A(u,v) du ) q(x-v) dv,   0 <= y <= x,
//! ```
//!
//! and the A-amplitude `A(α) = A(α, α)`.
//!
//! The unknown is split as `A = q + U` with `U` continuous, so the inner
//! integral is `∫ᵥˣ q` (exact) plus a trapezoid sum of `U`. The outer
//! integral is a trapezoid rule in which `q(x - v)` enters through its exact
//! cell masses, which keeps the scheme second order when `q` jumps.
//! Both the implicit marching solver and the Neumann series use the same
//! discrete operator.

use crate::bounds;
use crate::error::{Error, Result};
use crate::output;
use crate::potential::Potential;

/// Maximum number of Neumann terms before giving up.
pub const NEUMANN_MAX_TERMS: usize = 64;

/// Smallest admissible implicit-step coefficient.
pub const DEGENERATE_COEFFICIENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    March,
    Neumann { terms: usize },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::March => "march",
            Method::Neumann { .. } => "neumann",
        }
    }
}

/// Number of grid intervals `n = extent / step`, which must be an integer.
pub fn grid_intervals(extent: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "extent must be positive, got {extent}"
        )));
    }
    let ratio = extent / step;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::StepMismatch { extent, step });
    }
    Ok(n as usize)
}

/// Sampled potentials must have breakpoints on the solver grid.
pub fn check_alignment(q: &Potential, h: f64) -> Result<()> {
    if let Some(h_q) = q.sampled_step() {
        let ratio = h_q / h;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-9 * m.max(1.0) {
            return Err(Error::Alignment { h_q, h });
        }
    }
    Ok(())
}

/// Potential data on a uniform grid `x_i = i·h`, `i = 0..=n`.
#[derive(Debug, Clone)]
pub(crate) struct Discretization {
    pub h: f64,
    pub n: usize,
    /// `q(x_i)`, right-continuous.
    pub nodes: Vec<f64>,
    /// `∫₀^{x_i} q`.
    pub cumulative: Vec<f64>,
    /// Cell masses `∫_{x_k}^{x_{k+1}} q`, `k = 0..n`.
    pub masses: Vec<f64>,
}

impl Discretization {
    pub fn new(q: &Potential, h: f64, n: usize) -> Self {
        let nodes = (0..=n).map(|i| q.eval(i as f64 * h)).collect();
        let masses: Vec<f64> = (0..n)
            .map(|k| q.integral(k as f64 * h, (k + 1) as f64 * h))
            .collect();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for m in &masses {
            cumulative.push(cumulative.last().unwrap() + m);
        }
        Self {
            h,
            n,
            nodes,
            cumulative,
            masses,
        }
    }
}

/// Offset of level `j` in level-major triangular storage of `0 <= j <= i <= n`.
fn level_offset(n: usize, j: usize) -> usize {
    j * (n + 1) - j * j.saturating_sub(1) / 2
}

fn triangle_len(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// Triangular grid of `A(i·h, j·h)` for `0 <= j <= i <= n`.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    h: f64,
    n: usize,
    values: Vec<f64>,
}

impl KernelGrid {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `A(i·h, j·h)`; panics unless `j <= i <= n`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(j <= i && i <= self.n, "({i}, {j}) outside the triangle");
        self.values[level_offset(self.n, j) + (i - j)]
    }

    /// The values on level `y = j·h`, for `x = j·h ..= n·h`.
    pub fn level(&self, j: usize) -> &[f64] {
        let start = level_offset(self.n, j);
        &self.values[start..start + self.n + 1 - j]
    }
}

/// Sampled A-amplitude with its a-priori bounds.
#[derive(Debug, Clone)]
pub struct AmplitudeProfile {
    pub h: f64,
    pub samples: Vec<f64>,
    pub method: Method,
    /// Exponential bound on `|A - q|` at each node.
    pub bound: Vec<f64>,
}

impl AmplitudeProfile {
    pub(crate) fn new(q: &Potential, h: f64, samples: Vec<f64>, method: Method) -> Self {
        let bound = a_priori_bounds(q, h, samples.len() - 1);
        Self {
            h,
            samples,
            method,
            bound,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn alpha(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    /// Grid extent `α_max = n·h`.
    pub fn extent(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.h
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// CSV with header `alpha,A,bound`.
    pub fn to_csv(&self) -> String {
        output::table(
            "alpha,A,bound",
            self.samples
                .iter()
                .zip(&self.bound)
                .enumerate()
                .map(|(j, (a, b))| [output::num(self.alpha(j)), output::num(*a), output::num(*b)]),
        )
    }
}

fn a_priori_bounds(q: &Potential, h: f64, n: usize) -> Vec<f64> {
    let norm = q.local_l1_norm();
    let mut q_abs = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    q_abs.push(0.0);
    for k in 0..n {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        acc += if matches!(q.shape(), crate::potential::Shape::OscillatoryDecay { .. }) {
            crate::quad::adaptive_trapezoid(
                |s| q.eval(s).abs(),
                a,
                b,
                crate::potential::OSC_TOL * h,
            )
        } else {
            q.cumulative_abs(b) - q.cumulative_abs(a)
        };
        q_abs.push(acc);
    }
    q_abs
        .iter()
        .enumerate()
        .map(|(j, &qa)| bounds::corrected_exponential_bound(qa, norm, j as f64 * h))
        .collect()
}

fn prepare(q: &Potential, x: f64, h: f64) -> Result<Discretization> {
    let n = grid_intervals(x, h)?;
    check_alignment(q, h)?;
    Ok(Discretization::new(q, h, n))
}

/// Implicit level-by-level march; `sink(i, j, u)` receives `U = A - q(x_i)`.
fn march(disc: &Discretization, mut sink: impl FnMut(usize, usize, f64)) -> Result<()> {
    let Discretization {
        h,
        n,
        ref cumulative,
        ref masses,
        ..
    } = *disc;
    // Per row i: running outer sum and the inner integral B on the previous level.
    let mut outer = vec![0.0; n + 1];
    let mut b_prev: Vec<f64> = cumulative.clone();
    for i in 0..=n {
        sink(i, 0, 0.0);
    }
    for j in 1..=n {
        let diag = -(outer[j] + 0.5 * b_prev[j] * masses[0]);
        sink(j, j, diag);
        let mut u_prev = diag;
        let mut trap = 0.0;
        for i in j + 1..=n {
            let mass = masses[i - j];
            let coefficient = 1.0 + 0.25 * h * mass;
            if coefficient.abs() < DEGENERATE_COEFFICIENT {
                return Err(Error::DegenerateStep {
                    x: i as f64 * h,
                    coefficient,
                });
            }
            let q_part = cumulative[i] - cumulative[j];
            let known = q_part + trap + 0.5 * h * u_prev;
            let u = -(outer[i] + 0.5 * (b_prev[i] + known) * mass) / coefficient;
            trap += 0.5 * h * (u_prev + u);
            let b = q_part + trap;
            outer[i] += 0.5 * (b_prev[i] + b) * mass;
            b_prev[i] = b;
            u_prev = u;
            sink(i, j, u);
        }
    }
    Ok(())
}

/// Solves for the full kernel grid on `0 <= y <= x <= X` by implicit marching.
pub fn solve_kernel_march(q: &Potential, x: f64, h: f64) -> Result<KernelGrid> {
    let disc = prepare(q, x, h)?;
    let n = disc.n;
    let mut values = vec![0.0; triangle_len(n)];
    march(&disc, |i, j, u| {
        values[level_offset(n, j) + (i - j)] = disc.nodes[i] + u;
    })?;
    Ok(KernelGrid { h, n, values })
}

/// Reads `A(α) = A(α, α)` off the kernel diagonal.
pub fn diagonal_amplitude(grid: &KernelGrid, q: &Potential) -> AmplitudeProfile {
    let samples = (0..=grid.n).map(|j| grid.get(j, j)).collect();
    AmplitudeProfile::new(q, grid.h, samples, Method::March)
}

/// Marching solver that keeps only the diagonal (O(n) memory).
pub fn solve_amplitude_march(q: &Potential, x: f64, h: f64) -> Result<AmplitudeProfile> {
    let disc = prepare(q, x, h)?;
    let mut samples = disc.nodes.clone();
    march(&disc, |i, j, u| {
        if i == j {
            samples[i] += u;
        }
    })?;
    Ok(AmplitudeProfile::new(q, h, samples, Method::March))
}

/// Successive iterates `Kⁿq` of the kernel operator
/// `(Kf)(x,y) = ∫₀^y q(x-v) ∫ᵥˣ f(u,v) du dv` on the triangular grid.
struct NeumannIterates<'a> {
    disc: &'a Discretization,
    current: Option<Vec<f64>>,
}

impl<'a> NeumannIterates<'a> {
    fn new(disc: &'a Discretization) -> Self {
        Self {
            disc,
            current: None,
        }
    }

    /// Applies `K` to the previous iterate (to `q` on the first call) and
    /// returns the new diagonal.
    fn advance(&mut self) -> Vec<f64> {
        let Discretization {
            h,
            n,
            ref cumulative,
            ref masses,
            ..
        } = *self.disc;
        let mut next = vec![0.0; triangle_len(n)];
        let mut outer = vec![0.0; n + 1];
        let mut b_prev = vec![0.0; n + 1];
        for j in 0..=n {
            let off = level_offset(n, j);
            let mut b = 0.0;
            for i in j..=n {
                if i > j {
                    b = match &self.current {
                        None => cumulative[i] - cumulative[j],
                        Some(f) => b + 0.5 * h * (f[off + i - j - 1] + f[off + i - j]),
                    };
                }
                if j > 0 {
                    outer[i] += 0.5 * (b_prev[i] + b) * masses[i - j];
                }
                b_prev[i] = b;
                next[off + i - j] = outer[i];
            }
        }
        let diag = (0..=n).map(|j| next[level_offset(n, j)]).collect();
        self.current = Some(next);
        diag
    }
}

/// Diagonals `Aₙ(α) = (Kⁿq)(α, α)` for `n = 1..=count`.
pub fn neumann_terms(q: &Potential, x: f64, h: f64, count: usize) -> Result<Vec<AmplitudeProfile>> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "number of Neumann terms must be >= 1".into(),
        ));
    }
    let disc = prepare(q, x, h)?;
    let mut iterates = NeumannIterates::new(&disc);
    Ok((1..=count)
        .map(|n| AmplitudeProfile::new(q, h, iterates.advance(), Method::Neumann { terms: n }))
        .collect())
}

/// Majorant of `Σ_{m >= terms+1} |Aₘ(α)|` at `α = extent`, from
/// `Iₘ₊₁(α) <= Q(α)² αᵐ (α+m)ᵐ ||q||ᵐ / (m!)²`.
pub fn neumann_remainder_majorant(q_abs: f64, norm: f64, alpha: f64, terms: usize) -> f64 {
    if q_abs == 0.0 {
        return 0.0;
    }
    let ln_base = |m: usize| -> f64 {
        let m_f = m as f64;
        let mut ln_fact = 0.0;
        for k in 2..=m {
            ln_fact += (k as f64).ln();
        }
        m_f * (alpha.ln() + (alpha + m_f).ln() + norm.ln()) - 2.0 * ln_fact
    };
    if alpha == 0.0 || norm == 0.0 {
        // only the m = 0 term survives
        return if terms == 0 { q_abs * q_abs } else { 0.0 };
    }
    let mut sum = 0.0;
    let mut m = terms;
    loop {
        let t = ln_base(m).exp();
        sum += t;
        // Terms are eventually super-exponentially decreasing.
        if (m as f64) > 2.0 * std::f64::consts::E * alpha * norm + 2.0 && t <= 1e-17 * sum {
            break;
        }
        if m > terms + 10_000 {
            return f64::INFINITY;
        }
        m += 1;
    }
    q_abs * q_abs * sum
}

/// Alternating Neumann sum `A = q + Σ (-1)ⁿ Aₙ`, stopped once the latest
/// diagonal term or the remainder majorant drops to `tol`.
pub fn neumann_sum(q: &Potential, x: f64, h: f64, tol: f64) -> Result<AmplitudeProfile> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let norm = q.local_l1_norm();
    if !norm.is_finite() {
        return Err(Error::InfiniteNorm);
    }
    let disc = prepare(q, x, h)?;
    let q_abs = q.cumulative_abs(disc.n as f64 * h);
    let mut samples = disc.nodes.clone();
    let mut iterates = NeumannIterates::new(&disc);
    let mut last = f64::INFINITY;
    for n in 1..=NEUMANN_MAX_TERMS {
        let term = iterates.advance();
        let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
        for (s, t) in samples.iter_mut().zip(&term) {
            *s += sign * t;
        }
        last = term.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let majorant = neumann_remainder_majorant(q_abs, norm, disc.n as f64 * h, n);
        if last <= tol || majorant <= tol {
            return Ok(AmplitudeProfile::new(
                q,
                h,
                samples,
                Method::Neumann { terms: n },
            ));
        }
    }
    Err(Error::NeumannNotConverged {
        terms: NEUMANN_MAX_TERMS,
        last,
    })
}

/// Runs the requested solver and returns the amplitude profile.
pub fn solve_amplitude(
    q: &Potential,
    x: f64,
    h: f64,
    method: Method,
    tol: f64,
) -> Result<AmplitudeProfile> {
    match method {
        Method::March => solve_amplitude_march(q, x, h),
        Method::Neumann { .. } => neumann_sum(q, x, h, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_offsets_cover_triangle() {
        let n = 5;
        let mut seen = vec![false; triangle_len(n)];
        for j in 0..=n {
            for i in j..=n {
                let k = level_offset(n, j) + i - j;
                assert!(!seen[k]);
                seen[k] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn zero_potential_is_exactly_zero() {
        let q = Potential::zero();
        let grid = solve_kernel_march(&q, 2.0, 0.01).unwrap();
        for j in 0..=grid.n() {
            assert!(grid.level(j).iter().all(|v| *v == 0.0));
        }
        let p = neumann_sum(&q, 2.0, 0.01, 1e-8).unwrap();
        assert!(p.samples.iter().all(|v| *v == 0.0));
        assert_eq!(diagonal_amplitude(&grid, &q).sup_norm(), 0.0);
    }

    #[test]
    fn bottom_row_is_the_potential() {
        let q = Potential::exp_decay(1.5, 0.7);
        let grid = solve_kernel_march(&q, 1.0, 0.05).unwrap();
        for i in 0..=grid.n() {
            assert_eq!(grid.get(i, 0), q.eval(i as f64 * 0.05));
        }
        let p = diagonal_amplitude(&grid, &q);
        assert_eq!(p.samples[0], q.eval(0.0));
        assert_eq!(p.bound[0], 0.0);
    }

    #[test]
    fn first_correction_for_unit_potential() {
        // (Kq)(α,α) = α²/2 for q ≡ 1
        let q = Potential::constant(1.0);
        let terms = neumann_terms(&q, 1.0, 1.0 / 200.0, 2).unwrap();
        let a1 = terms[0].samples[200];
        assert!((a1 - 0.5).abs() < 1e-5, "{a1}");
        // (K²q)(x,y) = x²y²/4 - xy³/6, so 1/12 on the diagonal at 1
        let a2 = terms[1].samples[200];
        assert!((a2 - 1.0 / 12.0).abs() < 1e-4, "{a2}");
        // small-α expansion of the full solution
        let p = solve_amplitude_march(&q, 0.2, 1.0 / 400.0).unwrap();
        for (j, a) in p.samples.iter().enumerate() {
            let alpha = p.alpha(j);
            let err = (a - (1.0 - alpha * alpha / 2.0)).abs();
            assert!(
                err <= alpha.powi(4) / 12.0 + 1e-6,
                "alpha={alpha} err={err}"
            );
        }
    }

    #[test]
    fn march_and_grid_agree() {
        let q = Potential::box_(0.8, 0.5);
        let grid = solve_kernel_march(&q, 1.0, 0.01).unwrap();
        let full = diagonal_amplitude(&grid, &q);
        let diag = solve_amplitude_march(&q, 1.0, 0.01).unwrap();
        assert_eq!(full.samples, diag.samples);
    }

    #[test]
    fn step_and_alignment_errors() {
        let q = Potential::constant(1.0);
        assert!(matches!(
            solve_kernel_march(&q, 1.0, 0.3),
            Err(Error::StepMismatch { .. })
        ));
        let s = Potential::sampled(0.015, vec![1.0; 10]).unwrap();
        assert!(matches!(
            solve_amplitude_march(&s, 0.15, 0.01),
            Err(Error::Alignment { .. })
        ));
        assert!(solve_amplitude_march(&s, 0.15, 0.005).is_ok());
    }

    #[test]
    fn degenerate_step_is_reported() {
        // 1 + h·m/4 = 0 with m = h·c needs c = -4/h²
        let h = 0.5;
        let q = Potential::constant(-4.0 / (h * h));
        assert!(matches!(
            solve_kernel_march(&q, 2.0, h),
            Err(Error::DegenerateStep { .. })
        ));
    }

    #[test]
    fn neumann_needs_small_norm() {
        let q = Potential::constant(25.0);
        assert!(matches!(
            neumann_sum(&q, 4.0, 0.05, 1e-12),
            Err(Error::NeumannNotConverged { .. })
        ));
    }

    #[test]
    fn remainder_majorant_is_decreasing() {
        let mut prev = f64::INFINITY;
        for terms in 0..20 {
            let m = neumann_remainder_majorant(2.0, 0.5, 2.0, terms);
            assert!(m <= prev);
            prev = m;
        }
        assert!(prev < 1e-6);
    }
}
