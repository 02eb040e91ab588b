//! Ground truth for `m(z)` that does not go through the A-amplitude:
//! backward Riccati integration of the logarithmic derivative of the Weyl
//! solution, and closed forms for constant and box potentials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{Potential, Shape};

/// `|m|` above which the Riccati flow is declared to have blown up.
pub const BLOW_UP: f64 = 1e8;

/// Exponentially decaying potentials must be below this at `x_far`.
pub const NEGLIGIBLE_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Riccati,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Truncation point where the Weyl solution is known explicitly.
    pub x_far: f64,
    /// Integration step of the fixed-step fourth-order scheme.
    pub step: f64,
    pub method: OracleMethod,
}

impl OracleConfig {
    pub fn riccati(x_far: f64, step: f64) -> Self {
        Self {
            x_far,
            step,
            method: OracleMethod::Riccati,
        }
    }

    /// A configuration suited to `q`: the end of its support when that is
    /// finite, otherwise the point where an exponential tail is negligible.
    pub fn for_potential(q: &Potential, step: f64) -> Result<Self> {
        let x_far = match *q.shape() {
            Shape::ExpDecay { a, lambda } if !q.x_max().is_finite() => {
                (a.abs() / NEGLIGIBLE_TAIL).ln().max(0.0) / lambda + 1.0
            }
            Shape::Constant { .. } if !q.x_max().is_finite() => 1.0,
            _ if q.x_max().is_finite() => q.x_max().max(step),
            Shape::Box { w, .. } => w,
            _ => {
                return Err(Error::Support(format!(
                    "no truncation point for a {} potential without cutoff",
                    q.kind_name()
                )))
            }
        };
        Ok(Self::riccati(x_far, step))
    }
}

/// Weyl value `-√(k² + c)` of a constant tail `c` (principal root).
fn constant_tail_m(k: Complex64, c: f64) -> Result<Complex64> {
    if c == 0.0 {
        return Ok(-k);
    }
    let kappa = (k * k + c).sqrt();
    if kappa.re <= 0.0 {
        return Err(Error::Branch(kappa.re));
    }
    Ok(-kappa)
}

/// Integrates `m' = q(x) + k² - m²` (that is `q - z`, `z = -k²`) from `x_far`
/// back to 0, starting at the Weyl value of the tail, and returns `m(0)`.
pub fn m_riccati(q: &Potential, k: Complex64, cfg: &OracleConfig) -> Result<Complex64> {
    if k.re.is_nan() || k.re <= 0.0 {
        return Err(Error::Domain(format!(
            "Re k must be positive, got {}",
            k.re
        )));
    }
    if !(cfg.step > 0.0 && cfg.x_far.is_finite() && cfg.x_far >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "oracle needs step > 0 and finite x_far >= 0, got step={}, x_far={}",
            cfg.step, cfg.x_far
        )));
    }
    let x_far = cfg.x_far;
    let start = match q.tail_constant(x_far) {
        Some(c) => constant_tail_m(k, c)?,
        None => match *q.shape() {
            Shape::ExpDecay { .. } if q.eval(x_far).abs() <= NEGLIGIBLE_TAIL => -k,
            _ => {
                return Err(Error::Support(format!(
                    "q is not negligible past x_far = {x_far} (q(x_far) = {:e})",
                    q.eval(x_far)
                )))
            }
        },
    };

    let k2 = k * k;
    let mut edges = vec![0.0];
    edges.extend(q.breakpoints(x_far));
    edges.push(x_far);

    let mut m = start;
    for seg in edges.windows(2).rev() {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        // q restricted to [a, b], using the left limit at the upper edge.
        let q_seg = |x: f64| {
            if x >= b {
                q.eval_left(b)
            } else {
                q.eval(x.max(a))
            }
        };
        let f = |x: f64, m: Complex64| -> Complex64 { k2 - m * m + q_seg(x) };
        let steps = ((b - a) / cfg.step).ceil().max(1.0) as usize;
        let hs = (b - a) / steps as f64;
        for s in (0..steps).rev() {
            let x = a + (s + 1) as f64 * hs;
            // backward step: dx = -hs
            let k1 = f(x, m);
            let k2_ = f(x - 0.5 * hs, m - k1 * (0.5 * hs));
            let k3 = f(x - 0.5 * hs, m - k2_ * (0.5 * hs));
            let k4 = f(x - hs, m - k3 * hs);
            m -= (k1 + k2_ * 2.0 + k3 * 2.0 + k4) * (hs / 6.0);
            if m.norm().is_nan() || m.norm() > BLOW_UP {
                return Err(Error::RiccatiBlowUp {
                    x: x - hs,
                    magnitude: m.norm(),
                });
            }
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormFamily {
    Constant { c: f64 },
    Box { c: f64, w: f64 },
}

impl ClosedFormFamily {
    /// The family matching `q`, if it has a closed form.
    pub fn of(q: &Potential) -> Option<Self> {
        match *q.shape() {
            Shape::Constant { c } if !q.x_max().is_finite() => Some(Self::Constant { c }),
            Shape::Constant { c } => Some(Self::Box { c, w: q.x_max() }),
            Shape::Box { c, w } => Some(Self::Box {
                c,
                w: w.min(q.x_max()),
            }),
            _ => None,
        }
    }
}

/// `m(-k²)` for constant and box potentials.
///
/// Constant: `-κ`. Box of height `c` and width `w`, matched to `e^{-kx}` at
/// `x = w`: `-κ (κ sinh κw + k cosh κw) / (κ cosh κw + k sinh κw)`, with
/// `κ = √(k² + c)` on the principal branch.
pub fn closed_form_m(family: ClosedFormFamily, k: Complex64) -> Result<Complex64> {
    match family {
        ClosedFormFamily::Constant { c } => constant_tail_m(k, c),
        ClosedFormFamily::Box { c, w } => {
            let kappa = (k * k + c).sqrt();
            if kappa.re <= 0.0 {
                return Err(Error::Branch(kappa.re));
            }
            // tanh(κw) through e^{-2κw}, |e^{-2κw}| < 1
            let decay = (-2.0 * kappa * w).exp();
            let tanh = (1.0 - decay) / (1.0 + decay);
            Ok(-kappa * (kappa * tanh + k) / (kappa + k * tanh))
        }
    }
}

/// Dispatches on `cfg.method`.
pub fn m_oracle(q: &Potential, k: Complex64, cfg: &OracleConfig) -> Result<Complex64> {
    match cfg.method {
        OracleMethod::Riccati => m_riccati(q, k, cfg),
        OracleMethod::ClosedForm => {
            let family = ClosedFormFamily::of(q).ok_or_else(|| {
                Error::InvalidArgument(format!("no closed form for a {} potential", q.kind_name()))
            })?;
            closed_form_m(family, k)
        }
    }
}

/// Bessel function `J₁(x)`: power series up to 12, Hankel asymptotics beyond.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax <= 12.0 {
        let y = -0.25 * ax * ax;
        let mut term = 0.5 * ax;
        let mut sum = term;
        let mut n = 0.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) {
            term *= y / ((n + 1.0) * (n + 2.0));
            sum += term;
            n += 1.0;
        }
        sum
    } else {
        // P, Q of the Hankel expansion with mu = 4
        let mu = 4.0;
        let z = 8.0 * ax;
        let mut p = 1.0;
        let mut q = 0.0;
        let mut term = 1.0;
        let mut smallest = f64::INFINITY;
        for j in 1..60 {
            let j = j as f64;
            let odd = 2.0 * j - 1.0;
            term *= (mu - odd * odd) / (j * z);
            if term.abs() > smallest {
                break;
            }
            smallest = term.abs();
            // terms alternate between Q (odd j) and P (even j) with signs
            match (j as u32) % 4 {
                1 => q += term,
                2 => p -= term,
                3 => q -= term,
                _ => p += term,
            }
            if term.abs() < 1e-17 {
                break;
            }
        }
        let chi = ax - 0.75 * std::f64::consts::PI;
        (2.0 / (std::f64::consts::PI * ax)).sqrt() * (p * chi.cos() - q * chi.sin())
    };
    if x < 0.0 {
        -value
    } else {
        value
    }
}

/// A-amplitude of the constant potential `c`: `√c J₁(2√c α)/α`, equal to `c`
/// at `α = 0`. Negative `c` gives the modified-Bessel continuation.
pub fn closed_form_amplitude(c: f64, alpha: f64) -> f64 {
    let x = 2.0 * c.abs().sqrt() * alpha;
    if c > 0.0 && x > 12.0 {
        return c.sqrt() * bessel_j1(x) / alpha;
    }
    // c Σ (-cα²)ⁿ / (n!(n+1)!)
    let y = -c * alpha * alpha;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut n = 0.0;
    while term.abs() > 1e-17 * sum.abs().max(1e-300) {
        term *= y / ((n + 1.0) * (n + 2.0));
        sum += term;
        n += 1.0;
    }
    c * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn j1_matches_reference() {
        // tabulated J₁(2) = 0.5767248077568734
        assert!((bessel_j1(2.0) - 0.576_724_807_756_873_4).abs() < 1e-15);
        for i in 0..400 {
            let x = i as f64 * 0.1;
            assert!((bessel_j1(x) - libm::j1(x)).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn amplitude_closed_form_examples() {
        assert_eq!(closed_form_amplitude(1.0, 0.0), 1.0);
        assert_eq!(closed_form_amplitude(2.5, 0.0), 2.5);
        assert!((closed_form_amplitude(1.0, 1.0) - 0.576_725).abs() < 1e-6);
        // decay envelope ~ α^{-3/2}
        for i in 1..50 {
            let alpha = 10.0 + i as f64 * 3.7;
            let a = closed_form_amplitude(1.0, alpha).abs();
            assert!(a <= 1.0 / alpha.powf(1.5), "alpha={alpha} a={a}");
        }
        // continuity across the series/asymptotic switch
        let lo = closed_form_amplitude(1.0, 6.0 - 1e-9);
        let hi = closed_form_amplitude(1.0, 6.0 + 1e-9);
        assert!((lo - hi).abs() < 1e-9);
    }

    #[test]
    fn zero_potential_is_stationary() {
        let q = Potential::zero().with_x_max(3.0).unwrap();
        for k in [1.0, 6.0, 11.0] {
            let m = m_riccati(&q, c(k), &OracleConfig::riccati(3.0, 1e-2)).unwrap();
            assert_eq!(m, c(-k));
        }
    }

    #[test]
    fn riccati_matches_constant_closed_form() {
        let q = Potential::constant(1.0);
        let cfg = OracleConfig::riccati(2.0, 1e-4);
        for k in [6.0, 8.0, 10.0, 12.0] {
            let m = m_riccati(&q, c(k), &cfg).unwrap();
            let exact = -(k * k + 1.0f64).sqrt();
            assert!(
                (m.re - exact).abs() < 1e-8 && m.im.abs() < 1e-12,
                "k={k}: {m}"
            );
        }
    }

    #[test]
    fn riccati_matches_box_closed_form() {
        for (height, w) in [(1.0, 1.0), (-2.0, 0.7), (3.0, 0.25)] {
            let q = Potential::box_(height, w);
            let cfg = OracleConfig::for_potential(&q, 1e-4).unwrap();
            for k in [c(6.0), c(8.0), c(10.0), c(12.0), Complex64::new(8.0, -0.5)] {
                let m = m_riccati(&q, k, &cfg).unwrap();
                let exact = closed_form_m(ClosedFormFamily::Box { c: height, w }, k).unwrap();
                assert!(
                    (m - exact).norm() < 1e-7,
                    "c={height} w={w} k={k}: {m} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn halving_step_changes_little() {
        // short support so the transient from -k towards -κ survives to x = 0
        let q = Potential::constant(4.0).with_x_max(0.32).unwrap();
        let k = c(6.0);
        let run = |step: f64| m_riccati(&q, k, &OracleConfig::riccati(0.32, step)).unwrap();
        assert!((run(1e-4) - run(5e-5)).norm() < 1e-9);
        let (coarse, fine, finer) = (run(0.04), run(0.02), run(0.01));
        let order = ((coarse - fine).norm() / (fine - finer).norm()).log2();
        assert!(order > 3.5, "observed order {order}");
    }

    #[test]
    fn exp_decay_needs_negligible_tail() {
        let q = Potential::exp_decay(1.0, 1.0);
        assert!(matches!(
            m_riccati(&q, c(6.0), &OracleConfig::riccati(5.0, 1e-3)),
            Err(Error::Support(_))
        ));
        let cfg = OracleConfig::for_potential(&q, 1e-3).unwrap();
        assert!(q.eval(cfg.x_far) <= NEGLIGIBLE_TAIL);
        let m = m_riccati(&q, c(6.0), &cfg).unwrap();
        // between the free value and the constant-1 value
        assert!(m.re < -6.0 && m.re > -(37.0f64).sqrt());
    }

    #[test]
    fn blow_up_and_branch_errors() {
        // k close to a bound state of a deep well: large step makes the flow explode
        let q = Potential::box_(-400.0, 3.0);
        let r = m_riccati(&q, c(0.5), &OracleConfig::riccati(3.0, 0.5));
        assert!(matches!(r, Err(Error::RiccatiBlowUp { .. })), "{r:?}");
        assert!(matches!(
            closed_form_m(ClosedFormFamily::Constant { c: -4.0 }, c(1.0)),
            Err(Error::Branch(_))
        ));
    }
}
