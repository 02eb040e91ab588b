//! Command-line front end: `amplitude`, `mfunction`, `response`, `validate`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::amplitude::{solve_amplitude, AmplitudeProfile, Method};
use crate::bounds::check_amplitude_bounds;
use crate::error::{Error, Result};
use crate::goursat::{response_from_goursat, solve_v};
use crate::oracle::{m_riccati, OracleConfig};
use crate::output;
use crate::potential::{convergence_threshold, Potential};
use crate::response::{apply_response_operator, response_kernel_from_amplitude, BoundaryControl};
use crate::spectral::{
    asymptotic_residual, evaluations_to_csv, evaluations_to_json, herglotz_check,
    m_from_amplitude_with, m_from_response_with, m_sweep, SpectralOptions,
};

/// Exit status when a validation check fails.
pub const EXIT_VALIDATION: i32 = 5;

/// Environment variable capping the number of sweep threads.
pub const THREADS_ENV: &str = "WEYLBC_THREADS";

const ASYMPTOTIC_STEP: f64 = 2.5e-4;

#[derive(Debug, Parser)]
#[command(
    name = "weylbc",
    version,
    about = "m-function of the half-line Schrödinger operator via the A-amplitude"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the A-amplitude and its a-priori bound.
    Amplitude(RunArgs),
    /// Evaluate m(-k²) on a list or range of k.
    Mfunction(RunArgs),
    /// Response kernel r(t) and, with --control, the response (Rf)(t).
    Response(RunArgs),
    /// Run the cross-check suite and report pass/fail.
    Validate(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    March,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Potential as inline JSON, a JSON file, or an `x,q` CSV file.
    #[arg(long)]
    pub potential: Option<String>,
    /// Extent X of the amplitude grid.
    #[arg(long, default_value_t = 8.0)]
    pub xmax: f64,
    /// Grid step h.
    #[arg(long, default_value_t = 0.005)]
    pub step: f64,
    /// Comma-separated k values; complex values as `7-0.5i`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "k_range")]
    pub k: Option<String>,
    /// Geometric range `start:stop:count`.
    #[arg(long)]
    pub k_range: Option<String>,
    /// Tolerance for the Neumann series and the Laplace tail.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::March)]
    pub method: MethodArg,
    /// Output directory; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Evaluate below the convergence threshold without a tail bound.
    #[arg(long)]
    pub allow_unverified: bool,
    /// Boundary control: a `t,f` CSV file, `sine:<omega>` or `poly:<c1>,<c2>,...`.
    #[arg(long)]
    pub control: Option<String>,
}

impl RunArgs {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "--step must be positive, got {}",
                self.step
            )));
        }
        if !(self.xmax > 0.0 && self.xmax.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "--xmax must be positive, got {}",
                self.xmax
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "--tol must be positive, got {}",
                self.tol
            )));
        }
        crate::amplitude::grid_intervals(self.xmax, self.step)?;
        Ok(())
    }

    fn method(&self) -> Method {
        match self.method {
            MethodArg::March => Method::March,
            MethodArg::Neumann => Method::Neumann { terms: 0 },
        }
    }

    fn potential(&self) -> Result<Potential> {
        let source = self
            .potential
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("--potential is required".into()))?;
        Potential::load(source)
    }

    fn ks(&self) -> Result<Option<Vec<Complex64>>> {
        match (&self.k, &self.k_range) {
            (Some(list), _) => parse_k_list(list).map(Some),
            (None, Some(range)) => parse_k_range(range).map(Some),
            (None, None) => Ok(None),
        }
    }

    fn config(&self, q: &Potential) -> Value {
        let norm = q.local_l1_norm();
        json!({
            "potential": q.to_json(),
            "x_max": self.xmax,
            "step": self.step,
            "tol": self.tol,
            "method": self.method().name(),
            "norm_q": json_num(norm),
            "threshold": json_num(convergence_threshold(norm)),
            "allow_unverified": self.allow_unverified,
        })
    }
}

fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(output::num(x))
    }
}

/// Parses `a,b,...`; each entry is real or complex (`7-0.5i`).
pub fn parse_k_list(text: &str) -> Result<Vec<Complex64>> {
    let ks = text
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .map(|re| Complex64::new(re, 0.0))
                .or_else(|_| s.parse::<Complex64>())
                .map_err(|_| Error::InvalidArgument(format!("cannot parse k value {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if ks.iter().any(|k| !(k.re.is_finite() && k.im.is_finite())) {
        return Err(Error::InvalidArgument("k values must be finite".into()));
    }
    Ok(ks)
}

/// Parses `start:stop:count` into geometrically spaced real k.
pub fn parse_k_range(text: &str) -> Result<Vec<Complex64>> {
    let bad =
        || Error::InvalidArgument(format!("--k-range expects start:stop:count, got {text:?}"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.parse().map_err(|_| bad())?;
    let stop: f64 = stop.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) || count == 0 {
        return Err(Error::InvalidArgument(
            "--k-range needs positive finite ends and count >= 1".into(),
        ));
    }
    if count == 1 {
        return Ok(vec![Complex64::new(start, 0.0)]);
    }
    let ratio = stop / start;
    Ok((0..count)
        .map(|i| {
            let k = if i == count - 1 {
                stop
            } else {
                start * ratio.powf(i as f64 / (count - 1) as f64)
            };
            Complex64::new(k, 0.0)
        })
        .collect())
}

fn sweep_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|n| *n > 0)
}

/// Writes `name` into the output directory, or to standard output.
fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents)?;
        }
        None => print!("{contents}"),
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn echo(args: &RunArgs, q: &Potential) {
    let norm = q.local_l1_norm();
    eprintln!(
        "norm_q={} threshold={} method={} h={}",
        output::num(norm),
        output::num(convergence_threshold(norm)),
        args.method().name(),
        output::num(args.step)
    );
}

fn amplitude_of(args: &RunArgs, q: &Potential) -> Result<AmplitudeProfile> {
    solve_amplitude(q, args.xmax, args.step, args.method(), args.tol)
}

fn cmd_amplitude(args: &RunArgs) -> Result<i32> {
    let q = args.potential()?;
    echo(args, &q);
    let a = amplitude_of(args, &q)?;
    let out = args.out.as_deref();
    match args.format {
        Format::Csv => emit(out, "amplitude.csv", &a.to_csv())?,
        Format::Json => {
            let rows: Vec<Value> = a
                .samples
                .iter()
                .zip(&a.bound)
                .enumerate()
                .map(|(j, (v, b))| json!({"alpha": a.alpha(j), "A": v, "bound": json_num(*b)}))
                .collect();
            emit(
                out,
                "amplitude.json",
                &pretty(&json!({"config": args.config(&q), "rows": rows})),
            )?;
        }
    }
    Ok(0)
}

fn cmd_mfunction(args: &RunArgs) -> Result<i32> {
    let q = args.potential()?;
    echo(args, &q);
    let ks = args
        .ks()?
        .ok_or_else(|| Error::InvalidArgument("--k or --k-range is required".into()))?;
    let norm = q.local_l1_norm();
    if !norm.is_finite() {
        return Err(Error::InfiniteNorm);
    }
    let threshold = convergence_threshold(norm);
    for k in &ks {
        if !(k.re > threshold && k.re > 0.0) && !(args.allow_unverified && k.re > 0.0) {
            return Err(Error::Threshold {
                re_k: k.re,
                threshold,
            });
        }
    }
    let a = amplitude_of(args, &q)?;
    let opts = SpectralOptions {
        tail_tol: Some(args.tol),
        allow_unverified: args.allow_unverified,
    };
    let results = match sweep_threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("{THREADS_ENV}: {e}")))?
            .install(|| m_sweep(&a, &q, &ks, &opts)),
        None => m_sweep(&a, &q, &ks, &opts),
    };
    let evals = results.into_iter().collect::<Result<Vec<_>>>()?;
    for e in evals.iter().filter(|e| e.tail_bound > args.tol) {
        eprintln!(
            "warning: tail bound {} at k={} exceeds --tol",
            output::num(e.tail_bound),
            e.k
        );
    }
    let out = args.out.as_deref();
    match args.format {
        Format::Csv => emit(out, "mfunction.csv", &evaluations_to_csv(&evals))?,
        Format::Json => emit(
            out,
            "mfunction.json",
            &pretty(&evaluations_to_json(&evals, args.config(&q))),
        )?,
    }
    Ok(0)
}

fn parse_control(spec: &str, h_t: f64, n: usize) -> Result<BoundaryControl> {
    let numbers = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad number {v:?} in --control")))
            })
            .collect()
    };
    if let Some(omega) = spec.strip_prefix("sine:") {
        let omega = numbers(omega)?;
        let [omega] = omega.as_slice() else {
            return Err(Error::InvalidArgument(
                "sine control takes one frequency".into(),
            ));
        };
        return BoundaryControl::sine(h_t, n, *omega);
    }
    if let Some(coeffs) = spec.strip_prefix("poly:") {
        let mut c = vec![0.0];
        c.extend(numbers(coeffs)?);
        return BoundaryControl::polynomial(h_t, n, c);
    }
    BoundaryControl::from_csv(&fs::read_to_string(spec)?)
}

fn cmd_response(args: &RunArgs) -> Result<i32> {
    let q = args.potential()?;
    echo(args, &q);
    let a = amplitude_of(args, &q)?;
    let r = response_kernel_from_amplitude(&a);
    let rf = match &args.control {
        Some(spec) => {
            let f = parse_control(spec, r.h_t, r.samples.len() - 1)?;
            Some(apply_response_operator(&r, &f)?)
        }
        None => None,
    };
    let out = args.out.as_deref();
    match args.format {
        Format::Csv => {
            emit(out, "response_kernel.csv", &r.to_csv())?;
            if let Some(rf) = &rf {
                emit(out, "response.csv", &rf.to_csv())?;
            }
        }
        Format::Json => {
            let kernel: Vec<Value> = r
                .samples
                .iter()
                .enumerate()
                .map(|(j, v)| json!({"t": r.t(j), "r": v}))
                .collect();
            let mut doc = json!({"config": args.config(&q), "kernel": kernel});
            if let Some(rf) = &rf {
                let rows: Vec<Value> = rf
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| json!({"t": j as f64 * rf.h_t, "Rf": v}))
                    .collect();
                doc["response"] = json!(rows);
                doc["derivative"] = json!(rf.derivative.name());
            }
            emit(out, "response.json", &pretty(&doc))?;
        }
    }
    Ok(0)
}

/// One cross-check with its measured value and limit.
#[derive(Debug, Clone)]
pub struct Check {
    pub potential: String,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(potential: &str, name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            potential: potential.into(),
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "potential": self.potential,
            "check": self.name,
            "value": json_num(self.value),
            "limit": json_num(self.limit),
            "margin": json_num(self.limit - self.value),
            "pass": self.pass,
        })
    }
}

fn default_suite() -> Vec<(String, Potential)> {
    vec![
        ("constant(1)".into(), Potential::constant(1.0)),
        ("box(1,1)".into(), Potential::box_(1.0, 1.0)),
        ("exp_decay(1,1)".into(), Potential::exp_decay(1.0, 1.0)),
    ]
}

/// Runs every applicable cross-check for one potential.
pub fn validate_potential(
    label: &str,
    q: &Potential,
    args: &RunArgs,
    ks: &[f64],
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let a = amplitude_of(args, q)?;
    let norm = q.local_l1_norm();
    let threshold = convergence_threshold(norm);
    let opts = SpectralOptions {
        tail_tol: Some(args.tol),
        allow_unverified: false,
    };

    let bounds = check_amplitude_bounds(&a, q);
    let worst = bounds
        .iter()
        .map(|b| {
            if b.rhs > 0.0 {
                b.lhs / b.rhs
            } else if b.lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0_f64, f64::max);
    checks.push(Check::at_most(
        label,
        "amplitude_bound_ratio",
        worst,
        1.0 + crate::bounds::BOUND_SLACK,
    ));

    let h_cross = args.step;
    let x_cross = args.xmax.min(3.0);
    let x_cross = (x_cross / h_cross).floor() * h_cross;
    let short = solve_amplitude(q, x_cross, h_cross, Method::March, args.tol)?;
    let via_amplitude = response_kernel_from_amplitude(&short);
    let via_goursat = response_from_goursat(&solve_v(q, x_cross, h_cross)?, q);
    let discrepancy = via_amplitude
        .samples
        .iter()
        .enumerate()
        .map(|(j, r)| (r - via_goursat.samples[2 * j]).abs())
        .fold(0.0_f64, f64::max);
    checks.push(Check::at_most(
        label,
        "response_cross_path",
        discrepancy,
        100.0 * h_cross * h_cross,
    ));

    if norm <= 0.5 {
        let series = solve_amplitude(
            q,
            args.xmax.min(2.0),
            args.step,
            Method::Neumann { terms: 0 },
            1e-8,
        );
        let march = solve_amplitude(q, args.xmax.min(2.0), args.step, Method::March, args.tol)?;
        let gap = match series {
            Ok(s) => s
                .samples
                .iter()
                .zip(&march.samples)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        };
        checks.push(Check::at_most(label, "neumann_vs_march", gap, 1e-6));
    }

    let oracle = OracleConfig::for_potential(q, 1e-3).ok();
    let r = response_kernel_from_amplitude(&a);
    for &k in ks.iter().filter(|k| **k > threshold) {
        let kc = Complex64::new(k, 0.0);
        let e = m_from_amplitude_with(&a, q, kc, &opts)?;
        let via_r = m_from_response_with(&r, q, kc, &opts)?;
        checks.push(Check::at_most(
            label,
            format!("path_identity k={k}"),
            (e.m - via_r.m).norm(),
            1e-10,
        ));
        if let Some(cfg) = &oracle {
            let m = m_riccati(q, kc, cfg)?;
            checks.push(Check::at_most(
                label,
                format!("oracle_rel k={k}"),
                (e.m - m).norm() / m.norm(),
                1e-3,
            ));
        }
        let kz = Complex64::new(k, -0.5);
        let ez = m_from_amplitude_with(&a, q, kz, &opts)?;
        let report = herglotz_check(ez.m, kz);
        let mut herglotz = Check::at_most(label, format!("herglotz k={kz}"), 0.0, 0.0);
        herglotz.value = report.im_m;
        herglotz.limit = report.im_z;
        herglotz.pass = report.agrees;
        checks.push(herglotz);
    }

    // large k resolve only small α, so the asymptotic check runs on a short refined grid
    let refine = (args.step / ASYMPTOTIC_STEP).ceil().max(1.0);
    let x_short = (args.xmax.min(1.0) / args.step).floor().max(1.0) * args.step;
    let fine = solve_amplitude(q, x_short, args.step / refine, Method::March, args.tol)?;
    let k1 = 20.0_f64.max(2.0 * threshold);
    let k2 = 2.0 * k1;
    let q0 = q.eval(0.0);
    let r1 = asymptotic_residual(
        q0,
        k1,
        m_from_amplitude_with(&fine, q, Complex64::new(k1, 0.0), &opts)?.m,
    );
    let r2 = asymptotic_residual(
        q0,
        k2,
        m_from_amplitude_with(&fine, q, Complex64::new(k2, 0.0), &opts)?.m,
    );
    checks.push(Check::at_most(
        label,
        format!("asymptotic_decrease k={k1}->{k2}"),
        r2,
        r1,
    ));
    Ok(checks)
}

fn cmd_validate(args: &RunArgs) -> Result<i32> {
    let suite = match &args.potential {
        Some(_) => {
            let q = args.potential()?;
            vec![(q.kind_name().to_string(), q)]
        }
        None => default_suite(),
    };
    let ks: Vec<f64> = match args.ks()? {
        Some(ks) => ks.iter().map(|k| k.re).collect(),
        None => vec![8.0, 10.0, 12.0],
    };
    let mut checks = Vec::new();
    let mut configs = Vec::new();
    for (label, q) in &suite {
        checks.extend(validate_potential(label, q, args, &ks)?);
        configs.push(args.config(q));
    }
    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        eprintln!(
            "{} {} {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.potential,
            c.name,
            output::num(c.value)
        );
    }
    let report = json!({
        "pass": pass,
        "configs": configs,
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
    });
    emit(args.out.as_deref(), "validate.json", &pretty(&report))?;
    Ok(if pass { 0 } else { EXIT_VALIDATION })
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (args, f): (&RunArgs, fn(&RunArgs) -> Result<i32>) = match &cli.command {
        Command::Amplitude(a) => (a, cmd_amplitude),
        Command::Mfunction(a) => (a, cmd_mfunction),
        Command::Response(a) => (a, cmd_response),
        Command::Validate(a) => (a, cmd_validate),
    };
    match args.validate().and_then(|_| f(args)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
