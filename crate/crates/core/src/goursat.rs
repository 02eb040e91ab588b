//! The Goursat problem for the wave kernel `w(x, s)` in characteristic
//! variables, `V(u, v) = w((u-v)/2, (u+v)/2)`, solved through its Volterra
//! form in doubled variables
//!
//! ```text
//! V(2u,2v) = -½ ∫ᵥᵘ q - ∫₀ᵛ dv₁ ∫ᵥᵘ du₁ q(u₁-v₁) V(2u₁,2v₁),
//! ```
//!
//! and the response function `r(t) = w_x(0, t)` read off the rows of `V`.

use crate::amplitude::{check_alignment, grid_intervals, Discretization, DEGENERATE_COEFFICIENT};
use crate::error::{Error, Result};
use crate::output;
use crate::potential::Potential;
use crate::response::ResponseKernel;

fn level_offset(n: usize, j: usize) -> usize {
    j * (n + 1) - j * j.saturating_sub(1) / 2
}

/// `V(i·h, j·h)` on `0 <= v <= u <= 2X`.
#[derive(Debug, Clone)]
pub struct GoursatGrid {
    h: f64,
    n: usize,
    values: Vec<f64>,
}

impl GoursatGrid {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `V(i·h, j·h)`; panics unless `j <= i <= n`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(j <= i && i <= self.n, "({i}, {j}) outside the triangle");
        self.values[level_offset(self.n, j) + (i - j)]
    }

    /// Piecewise-linear interpolation of `V` at `(u, v)`, `0 <= v <= u <= n·h`.
    pub fn interpolate(&self, u: f64, v: f64) -> f64 {
        let n = self.n;
        let fi = (u / self.h).clamp(0.0, n as f64);
        let fj = (v / self.h).clamp(0.0, fi);
        let i0 = (fi.floor() as usize).min(n - 1);
        let ti = fi - i0 as f64;
        let j0 = (fj.floor() as usize).min(i0);
        let tj = fj - j0 as f64;
        if j0 < i0 {
            let v00 = self.get(i0, j0);
            let v10 = self.get(i0 + 1, j0);
            let v01 = self.get(i0, j0 + 1);
            let v11 = self.get(i0 + 1, j0 + 1);
            v00 * (1.0 - ti) * (1.0 - tj)
                + v10 * ti * (1.0 - tj)
                + v01 * (1.0 - ti) * tj
                + v11 * ti * tj
        } else {
            // lower triangle of the diagonal cell: tj <= ti
            let v00 = self.get(i0, i0);
            let v10 = self.get(i0 + 1, i0);
            let v11 = self.get(i0 + 1, i0 + 1);
            v00 + ti * (v10 - v00) + tj.min(ti) * (v11 - v10)
        }
    }
}

/// Solves for `V` on `0 <= v <= u <= 2X` with grid step `h` (`2X/h` integral).
pub fn solve_v(q: &Potential, x: f64, h: f64) -> Result<GoursatGrid> {
    let n = grid_intervals(2.0 * x, h)?;
    let half = 0.5 * h;
    check_alignment(q, half)?;
    let disc = Discretization::new(q, half, n);
    let Discretization {
        ref cumulative,
        ref masses,
        ..
    } = disc;

    let mut values = vec![0.0; (n + 1) * (n + 2) / 2];
    // Per row i: Σ_{l<j} C(u_i, v_l) and C(u_i, 0), where
    // C(u, v₁) = ∫_{v₁}^{u} q(u₁ - v₁) V(2u₁, 2v₁) du₁ in doubled variables.
    let mut c_sum = vec![0.0; n + 1];
    let mut c_first = vec![0.0; n + 1];

    // level v = 0: boundary data -½∫₀^{u/2} q
    let mut c_run = 0.0;
    for i in 0..=n {
        let g = -0.5 * cumulative[i];
        values[i] = g;
        if i > 0 {
            c_run += 0.5 * (values[i - 1] + g) * masses[i - 1];
        }
        c_first[i] = c_run;
    }
    c_sum.copy_from_slice(&c_first);

    for j in 1..=n {
        let off = level_offset(n, j);
        // V(u,u) = 0
        values[off] = 0.0;
        let d_diag = half * (c_sum[j] - 0.5 * c_first[j]);
        let mut g_prev = 0.0;
        let mut c_prev = 0.0;
        for i in j + 1..=n {
            let mass = masses[i - 1 - j];
            let coefficient = 1.0 + 0.25 * half * mass;
            if coefficient.abs() < DEGENERATE_COEFFICIENT {
                return Err(Error::DegenerateStep {
                    x: i as f64 * half,
                    coefficient,
                });
            }
            let rhs = -0.5 * (cumulative[i] - cumulative[j])
                - half * (c_sum[i] - 0.5 * c_first[i] + 0.5 * c_prev + 0.25 * g_prev * mass)
                + d_diag;
            let g = rhs / coefficient;
            let c = c_prev + 0.5 * (g_prev + g) * mass;
            c_sum[i] += c;
            values[off + i - j] = g;
            g_prev = g;
            c_prev = c;
        }
    }
    Ok(GoursatGrid { h, n, values })
}

/// Row integrals `∫₀ᵗ q((t - v₁)/2) V(t, v₁) dv₁` at `t = i·h`, using exact
/// cell masses of `q`.
fn row_integrals(v: &GoursatGrid, q: &Potential) -> Vec<f64> {
    let half = 0.5 * v.h;
    let masses: Vec<f64> = (0..v.n)
        .map(|k| q.integral(k as f64 * half, (k + 1) as f64 * half))
        .collect();
    (0..=v.n)
        .map(|i| {
            (0..i)
                .map(|l| (v.get(i, l) + v.get(i, l + 1)) * masses[i - l - 1])
                .sum()
        })
        .collect()
}

/// Response function `r(t) = w_x(0, t) = -½q(t/2) - ½∫₀ᵗ q((t-v₁)/2) V(t, v₁) dv₁`.
pub fn response_from_goursat(v: &GoursatGrid, q: &Potential) -> ResponseKernel {
    let half = 0.5 * v.h;
    let samples = row_integrals(v, q)
        .into_iter()
        .enumerate()
        .map(|(i, integral)| -0.5 * q.eval(i as f64 * half) - 0.5 * integral)
        .collect();
    ResponseKernel::new(v.h, samples)
}

/// `(V_u, V_v)` on the diagonal `u = v = t`, from the differentiated
/// Volterra equation.
pub fn diagonal_derivatives(v: &GoursatGrid, q: &Potential) -> Vec<(f64, f64)> {
    let half = 0.5 * v.h;
    row_integrals(v, q)
        .into_iter()
        .enumerate()
        .map(|(i, integral)| {
            let q_mid = q.eval(i as f64 * half);
            (
                -0.25 * q_mid - 0.25 * integral,
                0.25 * q_mid + 0.25 * integral,
            )
        })
        .collect()
}

/// `w(x, s) = V(s + x, s - x)` on `0 <= x <= s`, `x + s <= n·h`.
#[derive(Debug, Clone)]
pub struct WaveKernel {
    v: GoursatGrid,
}

pub fn wave_kernel_from_v(v: &GoursatGrid) -> WaveKernel {
    WaveKernel { v: v.clone() }
}

impl WaveKernel {
    pub fn h(&self) -> f64 {
        self.v.h
    }

    pub fn n(&self) -> usize {
        self.v.n
    }

    /// Largest `x + s` covered.
    pub fn reach(&self) -> f64 {
        self.v.n as f64 * self.v.h
    }

    /// `w(a·h, b·h)` at a grid point, `a <= b`, `a + b <= n`.
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.v.get(a + b, b - a)
    }

    /// `w(x, s)` by interpolation, `0 <= x <= s`, `x + s <= reach`.
    pub fn eval(&self, x: f64, s: f64) -> Result<f64> {
        if x < 0.0 || s < x || x + s > self.reach() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "w({x}, {s}) is outside 0 <= x <= s, x + s <= {}",
                self.reach()
            )));
        }
        Ok(self.v.interpolate(s + x, s - x))
    }

    /// CSV with header `x,s,w` listing the triangle.
    pub fn to_csv(&self) -> String {
        let n = self.v.n;
        let h = self.v.h;
        let rows = (0..=n / 2).flat_map(move |a| (a..=n - a).map(move |b| (a, b)));
        output::table(
            "x,s,w",
            rows.map(|(a, b)| {
                [
                    output::num(a as f64 * h),
                    output::num(b as f64 * h),
                    output::num(self.at(a, b)),
                ]
            }),
        )
    }
}
