//! Potentials `q` on the half-line, their norms and the input formats.
//!
//! Every potential is extended by zero beyond `x_max`. Sampled potentials are
//! piecewise constant and right-continuous: the value on `[i·h, (i+1)·h)` is
//! `values[i]`.

use std::f64::consts::E;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_trapezoid;

/// Absolute tolerance for quadrature of the oscillatory family.
pub const OSC_TOL: f64 = 1e-10;

/// Relative snap used when comparing grid abscissae against breakpoints.
const SNAP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Constant {
        c: f64,
    },
    Box {
        c: f64,
        w: f64,
    },
    ExpDecay {
        a: f64,
        lambda: f64,
    },
    /// `x^{-alpha} sin(x^beta)` with `0 <= alpha <= beta`.
    OscillatoryDecay {
        alpha: f64,
        beta: f64,
    },
    Sampled {
        step: f64,
        values: Vec<f64>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct Document {
    #[serde(flatten)]
    shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    shape: Shape,
    x_max: f64,
    // Sampled kind only: prefix sums of values·step and |values|·step.
    prefix: Vec<f64>,
    prefix_abs: Vec<f64>,
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidPotential(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

fn before(x: f64, edge: f64) -> bool {
    edge == f64::INFINITY || x < edge - SNAP * edge.abs().max(1.0)
}

impl Potential {
    pub fn new(shape: Shape, x_max: Option<f64>) -> Result<Self> {
        let mut x_max = x_max.unwrap_or(f64::INFINITY);
        if x_max.is_nan() || x_max < 0.0 {
            return Err(Error::InvalidPotential(format!(
                "x_max must be >= 0, got {x_max}"
            )));
        }
        let (mut prefix, mut prefix_abs) = (Vec::new(), Vec::new());
        match &shape {
            Shape::Constant { c } => {
                finite("c", *c)?;
            }
            Shape::Box { c, w } => {
                finite("c", *c)?;
                if finite("w", *w)? <= 0.0 {
                    return Err(Error::InvalidPotential(format!(
                        "box width must be > 0, got {w}"
                    )));
                }
            }
            Shape::ExpDecay { a, lambda } => {
                finite("a", *a)?;
                if finite("lambda", *lambda)? <= 0.0 {
                    return Err(Error::InvalidPotential(format!(
                        "lambda must be > 0, got {lambda}"
                    )));
                }
            }
            Shape::OscillatoryDecay { alpha, beta } => {
                finite("alpha", *alpha)?;
                finite("beta", *beta)?;
                if !(*alpha >= 0.0 && *beta > 0.0 && alpha <= beta) {
                    return Err(Error::InvalidPotential(format!(
                        "oscillatory_decay needs 0 <= alpha <= beta and beta > 0, got alpha={alpha}, beta={beta}"
                    )));
                }
            }
            Shape::Sampled { step, values } => {
                if finite("step", *step)? <= 0.0 {
                    return Err(Error::InvalidPotential(format!(
                        "step must be > 0, got {step}"
                    )));
                }
                if values.is_empty() {
                    return Err(Error::InvalidPotential(
                        "sampled potential has no values".into(),
                    ));
                }
                prefix.reserve(values.len() + 1);
                prefix_abs.reserve(values.len() + 1);
                prefix.push(0.0);
                prefix_abs.push(0.0);
                for (i, v) in values.iter().enumerate() {
                    finite(&format!("values[{i}]"), *v)?;
                    prefix.push(prefix[i] + v * step);
                    prefix_abs.push(prefix_abs[i] + v.abs() * step);
                }
                x_max = x_max.min(values.len() as f64 * step);
            }
        }
        Ok(Self {
            shape,
            x_max,
            prefix,
            prefix_abs,
        })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Shape::Constant { c }, None).expect("finite constant")
    }

    pub fn box_(c: f64, w: f64) -> Self {
        Self::new(Shape::Box { c, w }, None).expect("valid box")
    }

    pub fn exp_decay(a: f64, lambda: f64) -> Self {
        Self::new(Shape::ExpDecay { a, lambda }, None).expect("valid exp_decay")
    }

    pub fn oscillatory(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Shape::OscillatoryDecay { alpha, beta }, None)
    }

    pub fn sampled(step: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Sampled { step, values }, None)
    }

    /// Returns the same potential cut off (extended by zero) past `x_max`.
    pub fn with_x_max(self, x_max: f64) -> Result<Self> {
        let cut = x_max.min(self.x_max);
        Self::new(self.shape, Some(cut))
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn kind_name(&self) -> &'static str {
        match self.shape {
            Shape::Constant { .. } => "constant",
            Shape::Box { .. } => "box",
            Shape::ExpDecay { .. } => "exp_decay",
            Shape::OscillatoryDecay { .. } => "oscillatory_decay",
            Shape::Sampled { .. } => "sampled",
        }
    }

    /// Grid step of a sampled potential.
    pub fn sampled_step(&self) -> Option<f64> {
        match self.shape {
            Shape::Sampled { step, .. } => Some(step),
            _ => None,
        }
    }

    fn support_end(&self) -> f64 {
        match self.shape {
            Shape::Box { w, .. } => w.min(self.x_max),
            _ => self.x_max,
        }
    }

    fn sample_index(&self, x: f64, step: f64) -> usize {
        ((x / step) * (1.0 + SNAP) + SNAP).floor() as usize
    }

    /// `q(x)`, right-continuous at breakpoints; zero past the support.
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        if !before(x, self.support_end()) {
            return 0.0;
        }
        self.raw(x)
    }

    /// Left limit `q(x-)`. Equals [`eval`](Self::eval) away from breakpoints.
    pub fn eval_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.eval(0.0);
        }
        let end = self.support_end();
        if end.is_finite() && x > end + SNAP * end.max(1.0) {
            return 0.0;
        }
        match &self.shape {
            Shape::Sampled { step, values } => {
                let i = self.sample_index(x, *step);
                let on_edge = (x - i as f64 * step).abs() <= SNAP * step.max(x);
                let i = if on_edge { i.saturating_sub(1) } else { i };
                values.get(i).copied().unwrap_or(0.0)
            }
            _ => self.raw(x.min(self.support_end())),
        }
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Constant { c } | Shape::Box { c, .. } => *c,
            Shape::ExpDecay { a, lambda } => a * (-lambda * x).exp(),
            Shape::OscillatoryDecay { alpha, beta } => {
                if x == 0.0 {
                    if alpha == beta {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    x.powf(-alpha) * x.powf(*beta).sin()
                }
            }
            Shape::Sampled { step, values } => values
                .get(self.sample_index(x, *step))
                .copied()
                .unwrap_or(0.0),
        }
    }

    /// Signed integral `∫₀ˣ q`.
    pub fn cumulative(&self, x: f64) -> f64 {
        let x = x.max(0.0).min(self.support_end());
        match &self.shape {
            Shape::Constant { c } | Shape::Box { c, .. } => c * x,
            Shape::ExpDecay { a, lambda } => a * (-(-lambda * x).exp_m1()) / lambda,
            Shape::OscillatoryDecay { .. } => adaptive_trapezoid(|s| self.raw(s), 0.0, x, OSC_TOL),
            Shape::Sampled { step, values } => piecewise(&self.prefix, values, *step, x, |v| v),
        }
    }

    /// Signed integral `∫ₐᵇ q`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self.shape {
            Shape::OscillatoryDecay { .. } => {
                let end = self.support_end();
                let (a, b) = (a.max(0.0).min(end), b.max(0.0).min(end));
                adaptive_trapezoid(|s| self.raw(s), a, b, OSC_TOL * (b - a).max(1e-3))
            }
            _ => self.cumulative(b) - self.cumulative(a),
        }
    }

    /// `Q(α) = ∫₀^α |q|`.
    pub fn cumulative_abs(&self, alpha: f64) -> f64 {
        let x = alpha.max(0.0).min(self.support_end());
        match &self.shape {
            Shape::Constant { .. } | Shape::Box { .. } | Shape::ExpDecay { .. } => {
                self.cumulative(x).abs()
            }
            Shape::OscillatoryDecay { .. } => {
                adaptive_trapezoid(|s| self.raw(s).abs(), 0.0, x, OSC_TOL)
            }
            Shape::Sampled { step, values } => {
                piecewise(&self.prefix_abs, values, *step, x, f64::abs)
            }
        }
    }

    /// `||q|| = sup_x ∫ₓ^{x+1} |q|`.
    pub fn local_l1_norm(&self) -> f64 {
        let end = self.support_end();
        match &self.shape {
            Shape::Constant { c } | Shape::Box { c, .. } => c.abs() * end.min(1.0),
            Shape::ExpDecay { .. } => self.cumulative_abs(1.0),
            Shape::Sampled { step, .. } => {
                let n = self.prefix.len() - 1;
                let mut best = 0.0_f64;
                for i in 0..=n {
                    let x = i as f64 * step;
                    for start in [x, x - 1.0] {
                        if start >= 0.0 {
                            let window =
                                self.cumulative_abs(start + 1.0) - self.cumulative_abs(start);
                            best = best.max(window);
                        }
                    }
                }
                best
            }
            Shape::OscillatoryDecay { alpha, .. } => self.oscillatory_norm(*alpha),
        }
    }

    // Window integrals sampled on a grid of spacing `delta`, plus the shift
    // slack `2·delta·sup|q|` (sup|q| <= 1 for this family), capped at 1.
    fn oscillatory_norm(&self, alpha: f64) -> f64 {
        const CELLS: usize = 64;
        let delta = 1.0 / CELLS as f64;
        let end = self.support_end();
        let horizon = end.min(1000.0);
        let mut cells: Vec<f64> = Vec::new();
        let mut best = 0.0_f64;
        let mut i = 0usize;
        loop {
            let x = i as f64 * delta;
            if x >= horizon {
                break;
            }
            cells.push(adaptive_trapezoid(
                |s| self.raw(s).abs(),
                x,
                (x + delta).min(end),
                OSC_TOL * delta,
            ));
            i += 1;
            if cells.len() >= CELLS {
                let window: f64 = cells[cells.len() - CELLS..].iter().sum();
                best = best.max(window);
                let start = (cells.len() - CELLS) as f64 * delta;
                // ∫ₓ^{x+1}|q| <= x^{-alpha} bounds every later window.
                if alpha > 0.0 && start > 1.0 && start.powf(-alpha) < best {
                    return (best + 2.0 * delta).min(1.0);
                }
            }
        }
        if cells.len() < CELLS {
            best = cells.iter().sum();
        }
        if end > horizon {
            return 1.0;
        }
        (best + 2.0 * delta).min(1.0)
    }

    /// `sup |q|` (an upper bound for the oscillatory family).
    pub fn sup_abs(&self) -> f64 {
        match &self.shape {
            Shape::Constant { c } | Shape::Box { c, .. } => {
                if self.support_end() > 0.0 {
                    c.abs()
                } else {
                    0.0
                }
            }
            Shape::ExpDecay { a, .. } => a.abs(),
            Shape::OscillatoryDecay { .. } => 1.0,
            Shape::Sampled { step, values } => {
                let n = (self.x_max / step).ceil() as usize;
                values.iter().take(n).fold(0.0_f64, |m, v| m.max(v.abs()))
            }
        }
    }

    /// `∫₀^∞ |q|` when the potential is integrable on the half-line.
    pub fn total_abs(&self) -> Option<f64> {
        let end = self.support_end();
        if end.is_finite() {
            return Some(self.cumulative_abs(end));
        }
        match self.shape {
            Shape::ExpDecay { a, lambda } => Some(a.abs() / lambda),
            Shape::Constant { c: 0.0 } => Some(0.0),
            _ => None,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match &self.shape {
            Shape::Constant { c } | Shape::Box { c, .. } => *c >= 0.0,
            Shape::ExpDecay { a, .. } => *a >= 0.0,
            Shape::OscillatoryDecay { .. } => false,
            Shape::Sampled { values, .. } => values.iter().all(|v| *v >= 0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        let vanishing = match &self.shape {
            Shape::Constant { c } | Shape::Box { c, .. } => *c == 0.0,
            Shape::ExpDecay { a, .. } => *a == 0.0,
            Shape::OscillatoryDecay { .. } => false,
            Shape::Sampled { values, .. } => values.iter().all(|v| *v == 0.0),
        };
        vanishing || self.support_end() == 0.0
    }

    /// Jump locations of `q` inside `(0, upto)`, sorted.
    pub fn breakpoints(&self, upto: f64) -> Vec<f64> {
        let mut pts = match &self.shape {
            Shape::Sampled { step, values } => {
                (1..=values.len()).map(|i| i as f64 * step).collect()
            }
            _ => vec![self.support_end()],
        };
        pts.retain(|&p| p > 0.0 && p < upto);
        pts
    }

    /// The constant value `q` takes on `[x, ∞)`, when there is one.
    pub fn tail_constant(&self, x: f64) -> Option<f64> {
        if !before(x, self.support_end()) {
            return Some(0.0);
        }
        match self.shape {
            Shape::Constant { c } => Some(c),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let x_max = match self.shape {
            Shape::Sampled { .. } => None,
            _ if self.x_max.is_finite() => Some(self.x_max),
            _ => None,
        };
        serde_json::to_value(Document {
            shape: self.shape.clone(),
            x_max,
        })
        .expect("potential serializes")
    }

    /// Parses the structured JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::new(doc.shape, doc.x_max).map_err(|e| Error::Parse {
            context: "document".into(),
            message: e.to_string(),
        })
    }

    /// Parses a two-column `x,q` table with a uniform grid starting at 0.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::Parse {
            context: "line 1".into(),
            message: e.to_string(),
        })?;
        if header.len() != 2 || &header[0] != "x" || &header[1] != "q" {
            return Err(Error::Parse {
                context: "line 1".into(),
                message: format!(
                    "expected header \"x,q\", got {:?}",
                    header.iter().collect::<Vec<_>>()
                ),
            });
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| Error::Parse {
                context: format!("line {line}"),
                message: e.to_string(),
            })?;
            let field = |i: usize, name: &str| -> Result<f64> {
                let raw = record.get(i).ok_or_else(|| Error::Parse {
                    context: format!("line {line}"),
                    message: format!("missing field {name}"),
                })?;
                let v: f64 = raw.parse().map_err(|_| Error::Parse {
                    context: format!("line {line}, field {name}"),
                    message: format!("not a number: {raw:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        context: format!("line {line}, field {name}"),
                        message: format!("non-finite value {raw}"),
                    });
                }
                Ok(v)
            };
            xs.push(field(0, "x")?);
            values.push(field(1, "q")?);
        }
        if xs.len() < 2 {
            return Err(Error::Parse {
                context: "table".into(),
                message: "need at least two rows to infer the grid step".into(),
            });
        }
        if xs[0] != 0.0 {
            return Err(Error::Parse {
                context: "line 2, field x".into(),
                message: format!("grid must start at 0, got {}", xs[0]),
            });
        }
        let step = xs[1] - xs[0];
        if step <= 0.0 {
            return Err(Error::Parse {
                context: "line 3, field x".into(),
                message: "grid must be increasing".into(),
            });
        }
        for (i, x) in xs.iter().enumerate() {
            let expected = i as f64 * step;
            if (x - expected).abs() > 1e-9 * expected.max(1.0) {
                return Err(Error::Parse {
                    context: format!("line {}, field x", i + 2),
                    message: format!("non-uniform grid: expected {expected}, got {x}"),
                });
            }
        }
        Self::sampled(step, values)
    }

    /// Reads a potential from inline JSON (text starting with `{`), a JSON
    /// file, or a `.csv` sample table.
    pub fn load(source: &str) -> Result<Self> {
        let trimmed = source.trim_start();
        if trimmed.starts_with('{') {
            return Self::from_json(trimmed);
        }
        let path = Path::new(source);
        let text = std::fs::read_to_string(path)?;
        let is_csv = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv || text.trim_start().starts_with("x,") {
            Self::from_csv(&text)
        } else {
            Self::from_json(&text)
        }
    }
}

fn piecewise(prefix: &[f64], values: &[f64], step: f64, x: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = values.len();
    let i = ((x / step).floor() as usize).min(n);
    let base = prefix[i];
    if i == n {
        base
    } else {
        base + (x - i as f64 * step) * f(values[i])
    }
}

/// Convergence threshold on `Re k` for the Laplace representation:
/// `2·max{√(2||q||), e·||q||}`.
pub fn convergence_threshold(norm_q: f64) -> f64 {
    2.0 * (2.0 * norm_q).sqrt().max(E * norm_q)
}
