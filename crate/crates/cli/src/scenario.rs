//! Scenario files: an input, a pipeline of operations and checked expectations.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use distcomb::autocorr::{autocorr_converge, exact_autocorr_lattices, finite_autocorr, ApproximantTrace, RadiusSchedule};
use distcomb::pairing::{apply, PairingBattery};
use distcomb::schwartz::{CutoffProfile, SmoothCutoff};
use distcomb::spectrum::{
    apply_spectral, candidates, diffract_derivative, diffraction_pp, eberlein_decompose, fb_coeff, fourier_exact,
    mean_dist, MeanResult, SpectralMeasure, DEFAULT_MEAN_TOL, DEFAULT_WINDOWS,
};
use distcomb::stochastic::{ensemble, power_law_residual, EnsembleStats, PowerLawReport};
use distcomb::{DistExpr, MultiIndex, Point};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::output;

pub const SCHEMA: &str = "distcomb.scenario/1";
pub const REPORT_SCHEMA: &str = "distcomb.report/1";

/// A scenario as stored on disk. Steps stay raw until validation so errors can
/// name the offending index.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<DistExpr>,
    pub pipeline: Vec<Value>,
    #[serde(default)]
    pub expected: Vec<Expectation>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub input: Option<DistExpr>,
    pub pipeline: Vec<Step>,
    pub expected: Vec<Expectation>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryChoice {
    #[default]
    Default,
    Gaussian,
}

impl BatteryChoice {
    pub fn battery(self, dim: usize) -> PairingBattery {
        match self {
            BatteryChoice::Default => PairingBattery::default_battery(dim),
            BatteryChoice::Gaussian => PairingBattery::gaussian_battery(dim),
        }
    }
}

fn default_windows() -> Vec<u32> {
    DEFAULT_WINDOWS.to_vec()
}

fn default_tol() -> f64 {
    DEFAULT_MEAN_TOL
}

fn default_threshold() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    /// Closed-form autocorrelation of the lattice terms.
    ExactAutocorr,
    FiniteAutocorr {
        radius: f64,
        #[serde(default = "default_profile")]
        profile: CutoffProfile,
    },
    AutocorrConverge {
        #[serde(default)]
        schedule: Option<RadiusSchedule>,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_profile")]
        profile: CutoffProfile,
        #[serde(default)]
        battery: BatteryChoice,
    },
    FourierExact,
    DiffractDerivative {
        alpha: MultiIndex,
    },
    DiffractionPp {
        #[serde(default)]
        candidates: Option<Vec<Point>>,
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default = "default_windows")]
        windows: Vec<u32>,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    FbCoeff {
        x: Point,
        #[serde(default = "default_windows")]
        windows: Vec<u32>,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Mean {
        #[serde(default = "default_windows")]
        windows: Vec<u32>,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Decompose,
    /// `psi_s` or `psi_0` of a decomposition.
    SelectPart {
        part: Part,
    },
    /// Largest relative mismatch of `psi(F f)` against `F psi (f)` over a battery.
    FourierPairing {
        #[serde(default)]
        battery: BatteryChoice,
    },
    RandomEnsemble {
        p: f64,
        m: u32,
        seeds: Vec<u64>,
        n_max: u32,
    },
    PowerLaw {
        sizes: Vec<u32>,
    },
}

fn default_profile() -> CutoffProfile {
    CutoffProfile::BumpIntegral
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    StronglyAlmostPeriodic,
    NullWeaklyAlmostPeriodic,
}

/// Where a step reads its input: `"input"` or an earlier step index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Input,
    Step(usize),
}

/// One pipeline entry: the op's fields plus an optional `from`.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub op: Op,
    /// The previous step (or the input, for the first step) when absent.
    pub from: Option<Source>,
}

impl Step {
    pub fn new(op: Op) -> Self {
        Step { op, from: None }
    }

    pub fn from(op: Op, index: usize) -> Self {
        Step {
            op,
            from: Some(Source::Step(index)),
        }
    }

    pub fn from_input(op: Op) -> Self {
        Step {
            op,
            from: Some(Source::Input),
        }
    }

    fn from_value(mut raw: Value) -> Result<Step, String> {
        let from = match raw.as_object_mut().map(|o| o.remove("from")) {
            None => return Err("a step must be a JSON object".into()),
            Some(None) => None,
            Some(Some(Value::String(s))) if s == "input" => Some(Source::Input),
            Some(Some(v)) => Some(Source::Step(
                v.as_u64()
                    .and_then(|j| usize::try_from(j).ok())
                    .ok_or_else(|| format!("'from' must be \"input\" or a step index, got {v}"))?,
            )),
        };
        let op = serde_json::from_value(raw).map_err(|e| e.to_string())?;
        Ok(Step { op, from })
    }

    fn to_value(&self) -> Value {
        let mut v = serde_json::to_value(&self.op).expect("ops serialize");
        if let (Some(src), Some(o)) = (self.from, v.as_object_mut()) {
            let from = match src {
                Source::Input => Value::from("input"),
                Source::Step(j) => Value::from(j),
            };
            o.insert("from".into(), from);
        }
        v
    }

    fn is_generator(&self) -> bool {
        matches!(self.op, Op::RandomEnsemble { .. } | Op::PowerLaw { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A value stated by the reference derivation.
    Reference,
    /// Immediate from definitions.
    Trivial,
    /// Computed here from an independent closed form.
    Derived,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffFamily {
    C,
    D,
    E,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Quantity {
    /// Point mass of a spectrum at a frequency.
    Atom { at: Point },
    /// Value of a mean, Fourier-Bohr coefficient or scalar step.
    Value,
    /// Whether an approximant trace converged.
    Converged,
    /// Ensemble average of a correlation coefficient.
    Coefficient { family: CoeffFamily, n: i64 },
    /// Power-law residual at one size, over all lags or off zero.
    Residual {
        m: u32,
        #[serde(default)]
        off_zero: bool,
    },
    /// Off-zero residual divided by its `3 (log2 m)^2 / 2m` envelope.
    EnvelopeRatio { m: u32 },
    /// 1 when power-law residuals strictly decrease along the sizes.
    Decreasing,
    /// The step's distribution output.
    Distribution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expected {
    Real(f64),
    Complex([f64; 2]),
    Dist(Box<DistExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Abs(f64),
    /// Relative to the expected value; absolute when it is zero.
    Rel(f64),
    /// At most this bound, whatever the expected value (one-sided, never scaled).
    AtMost(f64),
    /// Multiples of the ensemble standard error.
    StdErr(f64),
    Exact,
}

impl Tolerance {
    fn scaled(self, s: f64) -> Tolerance {
        match self {
            Tolerance::Abs(v) => Tolerance::Abs(v * s),
            Tolerance::Rel(v) => Tolerance::Rel(v * s),
            Tolerance::StdErr(v) => Tolerance::StdErr(v * s),
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    /// Step whose output is checked; the last step by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub quantity: Quantity,
    pub value: Expected,
    pub tolerance: Tolerance,
    pub provenance: Provenance,
    pub source: String,
}

#[derive(Debug)]
pub enum ScenarioError {
    Parse(String),
    Invalid { step: Option<usize>, message: String },
    Execution { step: usize, message: String },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Parse(m) => write!(f, "parse error: {m}"),
            ScenarioError::Invalid { step: Some(i), message } => write!(f, "step {i}: {message}"),
            ScenarioError::Invalid { step: None, message } => write!(f, "invalid scenario: {message}"),
            ScenarioError::Execution { step, message } => write!(f, "step {step} failed: {message}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Scenario::validate(file)
    }

    pub fn validate(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
        if file.schema != SCHEMA {
            return Err(ScenarioError::Invalid {
                step: None,
                message: format!("unsupported schema '{}', expected '{SCHEMA}'", file.schema),
            });
        }
        if file.pipeline.is_empty() {
            return Err(ScenarioError::Invalid {
                step: None,
                message: "pipeline is empty".into(),
            });
        }
        let mut pipeline = Vec::with_capacity(file.pipeline.len());
        for (i, raw) in file.pipeline.into_iter().enumerate() {
            let step = Step::from_value(raw).map_err(|message| ScenarioError::Invalid { step: Some(i), message })?;
            if let Some(Source::Step(j)) = step.from {
                if j >= i {
                    return Err(ScenarioError::Invalid {
                        step: Some(i),
                        message: format!("input step {j} does not precede it"),
                    });
                }
            }
            let reads_input = step.from == Some(Source::Input) || (i == 0 && step.from.is_none());
            if reads_input && file.input.is_none() && !step.is_generator() {
                return Err(ScenarioError::Invalid {
                    step: Some(i),
                    message: "scenario has no input for this step".into(),
                });
            }
            pipeline.push(step);
        }
        for e in &file.expected {
            if let Some(s) = e.step {
                if s >= pipeline.len() {
                    return Err(ScenarioError::Invalid {
                        step: None,
                        message: format!("expectation refers to missing step {s}"),
                    });
                }
            }
        }
        Ok(Scenario {
            name: file.name,
            description: file.description,
            input: file.input,
            pipeline,
            expected: file.expected,
        })
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            schema: SCHEMA.into(),
            name: self.name.clone(),
            description: self.description.clone(),
            input: self.input.clone(),
            pipeline: self.pipeline.iter().map(Step::to_value).collect(),
            expected: self.expected.clone(),
        }
    }
}

/// What a step produced.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Output {
    Distribution(DistExpr),
    Spectrum(SpectralMeasure),
    Trace(ApproximantTrace),
    Mean(MeanResult),
    Decomposition {
        strongly_almost_periodic: DistExpr,
        null_weakly_almost_periodic: DistExpr,
    },
    Scalar(f64),
    Ensemble(EnsembleStats),
    PowerLaw(Vec<PowerLawReport>),
}

impl Output {
    fn kind(&self) -> &'static str {
        match self {
            Output::Distribution(_) => "distribution",
            Output::Spectrum(_) => "spectrum",
            Output::Trace(_) => "trace",
            Output::Mean(_) => "mean",
            Output::Decomposition { .. } => "decomposition",
            Output::Scalar(_) => "scalar",
            Output::Ensemble(_) => "ensemble",
            Output::PowerLaw(_) => "power_law",
        }
    }
}

fn need_dist(out: Option<&Output>) -> Result<&DistExpr, String> {
    match out {
        Some(Output::Distribution(d)) => Ok(d),
        Some(Output::Trace(t)) => t
            .limit
            .as_ref()
            .ok_or_else(|| "approximant trace has no closed-form limit".to_string()),
        Some(other) => Err(format!("expected a distribution, got {}", other.kind())),
        None => Err("no input distribution".into()),
    }
}

fn run_op(op: &Op, input: Option<&Output>, tol_scale: f64) -> Result<Output, String> {
    let e = |x: distcomb::Error| x.to_string();
    Ok(match op {
        Op::ExactAutocorr => Output::Distribution(exact_autocorr_lattices(need_dist(input)?).map_err(e)?),
        Op::FiniteAutocorr { radius, profile } => {
            Output::Distribution(finite_autocorr(need_dist(input)?, &SmoothCutoff::new(*profile), *radius).map_err(e)?)
        }
        Op::AutocorrConverge {
            schedule,
            tol,
            profile,
            battery,
        } => {
            let psi = need_dist(input)?;
            let schedule = schedule.clone().unwrap_or_default();
            Output::Trace(
                autocorr_converge(
                    psi,
                    &SmoothCutoff::new(*profile),
                    &schedule,
                    &battery.battery(psi.dim()),
                    tol * tol_scale,
                )
                .map_err(e)?,
            )
        }
        Op::FourierExact => Output::Spectrum(fourier_exact(need_dist(input)?).map_err(e)?),
        Op::DiffractDerivative { alpha } => {
            Output::Spectrum(diffract_derivative(need_dist(input)?, alpha).map_err(e)?)
        }
        Op::DiffractionPp {
            candidates: given,
            radius,
            windows,
            tol,
            threshold,
        } => {
            let psi = need_dist(input)?;
            let cands = match (given, radius) {
                (Some(c), _) => c.clone(),
                (None, Some(r)) => candidates(psi, *r, windows, *threshold).map_err(e)?,
                (None, None) => return Err("diffraction_pp needs candidates or a radius".into()),
            };
            Output::Spectrum(diffraction_pp(psi, &cands, windows, tol * tol_scale).map_err(e)?)
        }
        Op::FbCoeff { x, windows, tol } => {
            Output::Mean(fb_coeff(need_dist(input)?, x, windows, tol * tol_scale).map_err(e)?)
        }
        Op::Mean { windows, tol } => {
            let psi = need_dist(input)?;
            let f0 = distcomb::schwartz::TestFunction::unit_gaussian(psi.dim());
            Output::Mean(mean_dist(psi, &f0, windows, tol * tol_scale).map_err(e)?)
        }
        Op::Decompose => {
            let (s, o) = eberlein_decompose(need_dist(input)?).map_err(e)?;
            Output::Decomposition {
                strongly_almost_periodic: s,
                null_weakly_almost_periodic: o,
            }
        }
        Op::SelectPart { part } => match input {
            Some(Output::Decomposition {
                strongly_almost_periodic,
                null_weakly_almost_periodic,
            }) => Output::Distribution(match part {
                Part::StronglyAlmostPeriodic => strongly_almost_periodic.clone(),
                Part::NullWeaklyAlmostPeriodic => null_weakly_almost_periodic.clone(),
            }),
            Some(other) => return Err(format!("expected a decomposition, got {}", other.kind())),
            None => return Err("no decomposition to select from".into()),
        },
        Op::FourierPairing { battery } => {
            let psi = need_dist(input)?;
            let spectrum = fourier_exact(psi).map_err(e)?;
            let mut worst = 0.0f64;
            for f in &battery.battery(psi.dim()).functions {
                let lhs = apply(psi, &f.fourier_fn().map_err(e)?).map_err(e)?;
                let rhs = apply_spectral(&spectrum, f).map_err(e)?;
                let scale = lhs.norm().max(rhs.norm());
                if scale > 0.0 {
                    worst = worst.max((lhs - rhs).norm() / scale);
                }
            }
            Output::Scalar(worst)
        }
        Op::RandomEnsemble { p, m, seeds, n_max } => Output::Ensemble(ensemble(*p, *m, seeds, *n_max).map_err(e)?),
        Op::PowerLaw { sizes } => Output::PowerLaw(
            sizes
                .iter()
                .map(|&m| power_law_residual(m))
                .collect::<Result<_, _>>()
                .map_err(e)?,
        ),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub index: usize,
    pub op: Op,
    pub output: Output,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectationReport {
    pub step: usize,
    pub quantity: Quantity,
    pub expected: Expected,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual: Option<Value>,
    /// Deviation in the units of the tolerance mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    pub tolerance: Tolerance,
    pub passed: bool,
    pub provenance: Provenance,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub scenario: String,
    pub passed: bool,
    pub tolerance_scale: f64,
    pub steps: Vec<StepReport>,
    pub expectations: Vec<ExpectationReport>,
}

/// Wall-clock seconds per step, kept apart from the deterministic report.
#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub scenario: String,
    pub steps: Vec<f64>,
    pub total: f64,
}

enum Actual {
    Complex(Complex64),
    Real(f64),
    Dist(DistExpr),
    Stat { mean: f64, se: f64 },
}

fn lookup(q: &Quantity, out: &Output) -> Result<Actual, String> {
    let mismatch = || format!("quantity {q:?} does not apply to a {} output", out.kind());
    Ok(match (q, out) {
        (Quantity::Atom { at }, Output::Spectrum(s)) => Actual::Complex(s.atom_at(at)),
        (Quantity::Value, Output::Mean(m)) => Actual::Complex(m.value),
        (Quantity::Value, Output::Scalar(v)) => Actual::Real(*v),
        (Quantity::Converged, Output::Trace(t)) => Actual::Real(f64::from(u8::from(t.converged))),
        (Quantity::Coefficient { family, n }, Output::Ensemble(e)) => {
            let list = match family {
                CoeffFamily::C => &e.c,
                CoeffFamily::D => &e.d,
                CoeffFamily::E => &e.e,
            };
            let s = list
                .iter()
                .find(|s| s.n == *n)
                .ok_or_else(|| format!("lag {n} is outside the ensemble range"))?;
            Actual::Stat { mean: s.mean, se: s.se }
        }
        (Quantity::Residual { m, off_zero }, Output::PowerLaw(rs)) => {
            let r = rs.iter().find(|r| r.m == *m).ok_or_else(|| format!("size {m} was not computed"))?;
            Actual::Real(if *off_zero { r.residual_off_zero } else { r.residual })
        }
        (Quantity::EnvelopeRatio { m }, Output::PowerLaw(rs)) => {
            let r = rs.iter().find(|r| r.m == *m).ok_or_else(|| format!("size {m} was not computed"))?;
            Actual::Real(r.residual_off_zero / r.envelope)
        }
        (Quantity::Decreasing, Output::PowerLaw(rs)) => {
            Actual::Real(f64::from(u8::from(rs.windows(2).all(|w| w[1].residual < w[0].residual))))
        }
        (Quantity::Distribution, Output::Distribution(d)) => Actual::Dist(d.clone()),
        _ => return Err(mismatch()),
    })
}

fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn judge(actual: &Actual, expected: &Expected, tol: Tolerance) -> Result<(Value, Option<f64>, bool), String> {
    let target = match expected {
        Expected::Real(v) => Some(Complex64::new(*v, 0.0)),
        Expected::Complex([re, im]) => Some(Complex64::new(*re, *im)),
        Expected::Dist(_) => None,
    };
    Ok(match (actual, target, tol) {
        (Actual::Dist(d), None, Tolerance::Exact) => {
            let Expected::Dist(want) = expected else { unreachable!() };
            (json(d), None, d == want.as_ref())
        }
        (Actual::Dist(_), _, _) | (_, None, _) => return Err("distribution values need an exact tolerance".into()),
        (Actual::Stat { mean, se }, Some(t), Tolerance::StdErr(k)) => {
            let z = if *se > 0.0 {
                (mean - t.re).abs() / se
            } else if *mean == t.re {
                0.0
            } else {
                f64::INFINITY
            };
            (json(&[mean, se]), Some(z), z <= k)
        }
        (Actual::Stat { mean, .. }, Some(t), tol) => {
            let (dev, ok) = compare(Complex64::new(*mean, 0.0), t, tol)?;
            (json(mean), dev, ok)
        }
        (Actual::Complex(v), Some(t), tol) => {
            let (dev, ok) = compare(*v, t, tol)?;
            (json(&[v.re, v.im]), dev, ok)
        }
        (Actual::Real(v), Some(t), tol) => {
            let (dev, ok) = compare(Complex64::new(*v, 0.0), t, tol)?;
            (json(v), dev, ok)
        }
    })
}

fn compare(v: Complex64, t: Complex64, tol: Tolerance) -> Result<(Option<f64>, bool), String> {
    Ok(match tol {
        Tolerance::Abs(a) => {
            let d = (v - t).norm();
            (Some(d), d <= a)
        }
        Tolerance::Rel(r) => {
            let d = if t.norm() == 0.0 { v.norm() } else { (v - t).norm() / t.norm() };
            (Some(d), d <= r)
        }
        Tolerance::AtMost(b) => (Some(v.re), v.im == 0.0 && v.re <= b),
        Tolerance::Exact => (None, v == t),
        Tolerance::StdErr(_) => return Err("standard-error tolerance needs an ensemble coefficient".into()),
    })
}

pub struct Execution {
    pub report: Report,
    pub timings: Timings,
}

/// Runs every step and checks every expectation.
pub fn execute(s: &Scenario, tol_scale: f64) -> Result<Execution, ScenarioError> {
    let started = Instant::now();
    let mut outputs: Vec<Output> = Vec::with_capacity(s.pipeline.len());
    let mut times = Vec::with_capacity(s.pipeline.len());
    let input = s.input.clone().map(Output::Distribution);
    for (i, step) in s.pipeline.iter().enumerate() {
        let t = Instant::now();
        let source = match step.from {
            Some(Source::Step(j)) => Some(&outputs[j]),
            Some(Source::Input) => input.as_ref(),
            None if i == 0 => input.as_ref(),
            None => outputs.last(),
        };
        let out = run_op(&step.op, source, tol_scale).map_err(|message| ScenarioError::Execution { step: i, message })?;
        times.push(t.elapsed().as_secs_f64());
        outputs.push(out);
    }
    let last = outputs.len() - 1;
    let mut checks = Vec::with_capacity(s.expected.len());
    for e in &s.expected {
        let step = e.step.unwrap_or(last);
        let tolerance = e.tolerance.scaled(tol_scale);
        let result = lookup(&e.quantity, &outputs[step]).and_then(|a| judge(&a, &e.value, tolerance));
        let (actual, deviation, passed, note) = match result {
            Ok((a, d, p)) => (Some(a), d, p, None),
            Err(msg) => (None, None, false, Some(msg)),
        };
        checks.push(ExpectationReport {
            step,
            quantity: e.quantity.clone(),
            expected: e.value.clone(),
            actual,
            deviation,
            tolerance,
            passed,
            provenance: e.provenance,
            source: e.source.clone(),
            note,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    let steps = s
        .pipeline
        .iter()
        .zip(outputs)
        .enumerate()
        .map(|(index, (step, output))| StepReport {
            index,
            op: step.op.clone(),
            output,
        })
        .collect();
    Ok(Execution {
        report: Report {
            schema: REPORT_SCHEMA,
            scenario: s.name.clone(),
            passed,
            tolerance_scale: tol_scale,
            steps,
            expectations: checks,
        },
        timings: Timings {
            scenario: s.name.clone(),
            steps: times,
            total: started.elapsed().as_secs_f64(),
        },
    })
}

/// Writes `report.json`, `timings.json` and per-step CSV artifacts under `dir/<name>`.
pub fn write_outputs(dir: &Path, exec: &Execution) -> std::io::Result<()> {
    let root = dir.join(&exec.report.scenario);
    std::fs::create_dir_all(&root)?;
    std::fs::write(root.join("report.json"), output::pretty_json(&exec.report))?;
    std::fs::write(root.join("timings.json"), output::pretty_json(&exec.timings))?;
    for step in &exec.report.steps {
        let name = |what: &str| root.join(format!("step{}_{what}.csv", step.index));
        match &step.output {
            Output::Spectrum(s) => {
                let csv = s
                    .to_csv(output::SPECTRUM_CSV_RADIUS, output::SPECTRUM_CSV_STEP)
                    .map_err(std::io::Error::other)?;
                std::fs::write(name("spectrum"), csv)?;
            }
            Output::Trace(t) => {
                std::fs::write(name("residuals"), t.residuals_csv().map_err(std::io::Error::other)?)?;
            }
            Output::Ensemble(e) => std::fs::write(name("random_model"), output::ensemble_csv(e))?,
            Output::PowerLaw(r) => std::fs::write(name("power_law"), output::power_law_csv(r))?,
            _ => {}
        }
    }
    Ok(())
}
