//! The response operator (dynamic Dirichlet-to-Neumann map)
//! `(Rf)(t) = -f'(t) + ∫₀ᵗ r(t-s) f(s) ds` and the wave field
//! `u(x,t) = f(t-x) + ∫ₓᵗ w(x,s) f(t-s) ds`.

use crate::amplitude::AmplitudeProfile;
use crate::error::{Error, Result};
use crate::goursat::WaveKernel;
use crate::output;

/// Samples `r(j·h_t)`, `j = 0..=n_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseKernel {
    pub h_t: f64,
    pub samples: Vec<f64>,
}

impl ResponseKernel {
    pub fn new(h_t: f64, samples: Vec<f64>) -> Self {
        Self { h_t, samples }
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.h_t
    }

    pub fn extent(&self) -> f64 {
        self.samples.len().saturating_sub(1) as f64 * self.h_t
    }

    /// CSV with header `t,r`.
    pub fn to_csv(&self) -> String {
        output::table(
            "t,r",
            self.samples
                .iter()
                .enumerate()
                .map(|(j, r)| [output::num(self.t(j)), output::num(*r)]),
        )
    }
}

/// `r(t) = -A(t/2)/2` on `t = 2α`, so `h_t = 2h`.
pub fn response_kernel_from_amplitude(a: &AmplitudeProfile) -> ResponseKernel {
    ResponseKernel::new(2.0 * a.h, a.samples.iter().map(|v| -0.5 * v).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlSource {
    Sampled,
    /// `sin(ω t)`
    Sine {
        omega: f64,
    },
    /// `Σ cᵢ tⁱ` with `c₀ = 0`
    Polynomial {
        coeffs: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    Numeric,
}

impl DerivativeMode {
    pub fn name(&self) -> &'static str {
        match self {
            DerivativeMode::Analytic => "analytic",
            DerivativeMode::Numeric => "numeric",
        }
    }
}

/// Dirichlet boundary data `f(t)` acting on the system at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryControl {
    pub h_t: f64,
    pub samples: Vec<f64>,
    pub source: ControlSource,
}

impl BoundaryControl {
    pub fn sampled(h_t: f64, samples: Vec<f64>) -> Result<Self> {
        if !(h_t > 0.0 && h_t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "control step must be positive, got {h_t}"
            )));
        }
        if samples.len() < 3 {
            return Err(Error::InvalidArgument(
                "control needs at least three samples".into(),
            ));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "control sample {i} is not finite"
            )));
        }
        let scale = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if samples[0].abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "control must start from rest, f(0) = {}",
                samples[0]
            )));
        }
        Ok(Self {
            h_t,
            samples,
            source: ControlSource::Sampled,
        })
    }

    fn builtin(h_t: f64, n: usize, source: ControlSource) -> Result<Self> {
        let mut c = Self::sampled(h_t, vec![0.0; n.max(2) + 1])?;
        c.source = source;
        c.samples = (0..=n.max(2)).map(|j| c.value(j as f64 * h_t)).collect();
        Ok(c)
    }

    /// `sin(ω t)` on `t = j·h_t`, `j = 0..=n`.
    pub fn sine(h_t: f64, n: usize, omega: f64) -> Result<Self> {
        Self::builtin(h_t, n, ControlSource::Sine { omega })
    }

    /// `Σ cᵢ tⁱ` on `t = j·h_t`; the constant term must vanish.
    pub fn polynomial(h_t: f64, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.first().copied().unwrap_or(0.0) != 0.0 {
            return Err(Error::InvalidArgument(
                "polynomial control must vanish at t = 0".into(),
            ));
        }
        Self::builtin(h_t, n, ControlSource::Polynomial { coeffs })
    }

    /// Parses a `t,f` table on a uniform grid starting at 0.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::Parse {
            context: "line 1".into(),
            message: e.to_string(),
        })?;
        if header.len() != 2 || &header[0] != "t" || &header[1] != "f" {
            return Err(Error::Parse {
                context: "line 1".into(),
                message: "expected header \"t,f\"".into(),
            });
        }
        let mut ts = Vec::new();
        let mut fs = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| Error::Parse {
                context: format!("line {line}"),
                message: e.to_string(),
            })?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        context: format!("line {line}, field {}", i + 1),
                        message: "expected a finite number".into(),
                    })
            };
            ts.push(parse(0)?);
            fs.push(parse(1)?);
        }
        if ts.len() < 3 || ts[0] != 0.0 {
            return Err(Error::Parse {
                context: "table".into(),
                message: "need at least three rows starting at t = 0".into(),
            });
        }
        let h_t = ts[1];
        for (i, t) in ts.iter().enumerate() {
            let expected = i as f64 * h_t;
            if (t - expected).abs() > 1e-9 * expected.max(1.0) {
                return Err(Error::Parse {
                    context: format!("line {}, field 1", i + 2),
                    message: format!("non-uniform grid: expected {expected}, got {t}"),
                });
            }
        }
        Self::sampled(h_t, fs)
    }

    pub fn extent(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.h_t
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        match self.source {
            ControlSource::Sampled => DerivativeMode::Numeric,
            _ => DerivativeMode::Analytic,
        }
    }

    /// `f(t)`: analytic for built-ins, linear interpolation otherwise
    /// (zero for `t <= 0`).
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.source {
            ControlSource::Sine { omega } => (omega * t).sin(),
            ControlSource::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
            ControlSource::Sampled => {
                let pos = t / self.h_t;
                let last = self.samples.len() - 1;
                let i = (pos.floor() as usize).min(last - 1);
                let frac = (pos - i as f64).min(1.0);
                self.samples[i] + frac * (self.samples[i + 1] - self.samples[i])
            }
        }
    }

    /// `f'(j·h_t)`: analytic for built-ins; second-order differences otherwise.
    pub fn derivative(&self, j: usize) -> f64 {
        let t = j as f64 * self.h_t;
        match &self.source {
            ControlSource::Sine { omega } => omega * (omega * t).cos(),
            ControlSource::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * t + i as f64 * c),
            ControlSource::Sampled => {
                let f = &self.samples;
                let h = self.h_t;
                let last = f.len() - 1;
                if j == 0 {
                    (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
                } else if j == last {
                    (3.0 * f[last] - 4.0 * f[last - 1] + f[last - 2]) / (2.0 * h)
                } else {
                    (f[j + 1] - f[j - 1]) / (2.0 * h)
                }
            }
        }
    }
}

/// `(Rf)(t)` on the common grid, tagged with how `f'` was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseOutput {
    pub h_t: f64,
    pub values: Vec<f64>,
    pub derivative: DerivativeMode,
}

impl ResponseOutput {
    /// CSV with header `t,Rf`.
    pub fn to_csv(&self) -> String {
        output::table(
            "t,Rf",
            self.values
                .iter()
                .enumerate()
                .map(|(j, v)| [output::num(j as f64 * self.h_t), output::num(*v)]),
        )
    }
}

fn same_step(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// `(Rf)(t) = -f'(t) + ∫₀ᵗ r(t-s) f(s) ds` with a trapezoid convolution.
pub fn apply_response_operator(r: &ResponseKernel, f: &BoundaryControl) -> Result<ResponseOutput> {
    if !same_step(r.h_t, f.h_t) {
        return Err(Error::GridMismatch(format!(
            "response kernel step {} differs from control step {}",
            r.h_t, f.h_t
        )));
    }
    let h = r.h_t;
    let len = r.samples.len().min(f.samples.len());
    let values = (0..len)
        .map(|j| {
            let conv = if j == 0 {
                0.0
            } else {
                let inner: f64 = (1..j).map(|l| r.samples[j - l] * f.samples[l]).sum();
                h * (inner + 0.5 * (r.samples[j] * f.samples[0] + r.samples[0] * f.samples[j]))
            };
            -f.derivative(j) + conv
        })
        .collect();
    Ok(ResponseOutput {
        h_t: h,
        values,
        derivative: f.derivative_mode(),
    })
}

/// Wave field `u(x, t)` driven by `f` through the kernel `w`; exactly zero
/// ahead of the wave front (`x > t`).
pub fn wave_solution(w: &WaveKernel, f: &BoundaryControl, x: f64, t: f64) -> Result<f64> {
    if x < 0.0 || t < 0.0 {
        return Err(Error::Domain(format!(
            "need x >= 0 and t >= 0, got x={x}, t={t}"
        )));
    }
    if x > t {
        return Ok(0.0);
    }
    if x + t > w.reach() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "x + t = {} exceeds the wave kernel reach {}",
            x + t,
            w.reach()
        )));
    }
    if f.source == ControlSource::Sampled && t > f.extent() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "t = {t} exceeds the control extent {}",
            f.extent()
        )));
    }
    let lead = f.value(t - x);
    if t == x {
        return Ok(lead);
    }
    let intervals = ((t - x) / w.h()).ceil().max(1.0) as usize;
    let ds = (t - x) / intervals as f64;
    let mut sum = 0.0;
    for i in 0..=intervals {
        let s = if i == intervals { t } else { x + i as f64 * ds };
        let weight = if i == 0 || i == intervals { 0.5 } else { 1.0 };
        sum += weight * w.eval(x, s)? * f.value(t - s);
    }
    Ok(lead + ds * sum)
}
