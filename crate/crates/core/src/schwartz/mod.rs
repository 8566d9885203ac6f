//! Parametric Schwartz test functions and smooth van Hove cutoffs.

mod bump;
mod cutoff;
mod gauss;
mod sampled;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use bump::{profile_derivatives, BumpFn, K_MAX};
pub use cutoff::{CutoffProfile, SmoothCutoff, VanHove, CUTOFF_K_MAX};
pub use gauss::{GaussPolyFn, GaussTerm};
pub use sampled::{bump_transform_at, unit_profile, SampledFn};

use crate::error::{check_dim, Error, Result};
use crate::multi_index::{MultiIndex, Point};
use crate::quadrature;

/// Weight order whose reach fixes the seminorm search box for all smaller `M + N`.
const SEMINORM_BOX_ORDER: u32 = 8;

/// `(f * g)(x) = int f(y) g(x - y) dy` with a compactly supported outer factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvFn {
    pub outer: BumpFn,
    pub inner: Box<TestFunction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Gauss(GaussPolyFn),
    Bump(BumpFn),
    Sampled(SampledFn),
    Conv(ConvFn),
}

impl From<GaussPolyFn> for TestFunction {
    fn from(g: GaussPolyFn) -> Self {
        TestFunction::Gauss(g)
    }
}

impl From<BumpFn> for TestFunction {
    fn from(b: BumpFn) -> Self {
        TestFunction::Bump(b)
    }
}

/// A derivative `D^alpha f`, prepared for repeated evaluation.
pub enum DerivFn<'a> {
    Gauss(GaussPolyFn),
    Lazy(&'a TestFunction, MultiIndex),
}

impl DerivFn<'_> {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            DerivFn::Gauss(g) => g.eval(x),
            DerivFn::Lazy(f, a) => f.deriv_eval(a, x).expect("order validated on construction"),
        }
    }
}

impl TestFunction {
    /// `e^{-pi |x|^2}` in `R^dim`.
    pub fn unit_gaussian(dim: usize) -> Self {
        TestFunction::Gauss(GaussPolyFn::gaussian(&vec![0.0; dim], 1.0))
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Gauss(g) => g.dim(),
            TestFunction::Bump(b) => b.dim(),
            TestFunction::Sampled(s) => s.dim(),
            TestFunction::Conv(c) => c.outer.dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            TestFunction::Gauss(g) => g.eval(x),
            TestFunction::Bump(b) => b.eval(x),
            TestFunction::Sampled(s) => s.eval(x),
            TestFunction::Conv(c) => c.eval_with(x, |y| c.inner.eval(y)),
        }
    }

    /// Fails if `D^alpha` is not available for this function.
    pub fn check_order(&self, alpha: &MultiIndex) -> Result<()> {
        check_dim(self.dim(), alpha.dim())?;
        match self {
            TestFunction::Gauss(_) => Ok(()),
            TestFunction::Bump(_) => {
                if alpha.total() > K_MAX {
                    Err(Error::OrderTooHigh {
                        order: alpha.total(),
                        limit: K_MAX,
                    })
                } else {
                    Ok(())
                }
            }
            TestFunction::Sampled(s) => {
                if s.dim() > 1 && !alpha.is_zero() {
                    Err(Error::Unsupported(
                        "derivatives of sampled transforms are implemented in one dimension".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            TestFunction::Conv(c) => c.inner.check_order(alpha),
        }
    }

    pub fn deriv_eval(&self, alpha: &MultiIndex, x: &[f64]) -> Result<Complex64> {
        self.check_order(alpha)?;
        match self {
            TestFunction::Gauss(g) => Ok(g.derivative(alpha).eval(x)),
            TestFunction::Bump(b) => b.deriv_eval(alpha, x),
            TestFunction::Sampled(s) => s.deriv_eval(alpha, x),
            TestFunction::Conv(c) => {
                // D^alpha (f * g) = f * D^alpha g
                Ok(c.eval_with(x, |y| c.inner.deriv_eval(alpha, y).expect("checked")))
            }
        }
    }

    pub fn deriv_fn(&self, alpha: &MultiIndex) -> Result<DerivFn<'_>> {
        self.check_order(alpha)?;
        Ok(match self {
            TestFunction::Gauss(g) => DerivFn::Gauss(g.derivative(alpha)),
            other => DerivFn::Lazy(other, alpha.clone()),
        })
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        match self {
            TestFunction::Gauss(g) => TestFunction::Gauss(g.scale(s)),
            TestFunction::Bump(b) => TestFunction::Bump(b.scaled(s)),
            TestFunction::Sampled(f) => TestFunction::Sampled(f.scaled(s)),
            TestFunction::Conv(c) => TestFunction::Conv(ConvFn {
                outer: c.outer.scaled(s),
                inner: c.inner.clone(),
            }),
        }
    }

    /// `x -> f(x - t)`.
    pub fn translate(&self, t: &[f64]) -> Self {
        match self {
            TestFunction::Gauss(g) => TestFunction::Gauss(g.translate(t)),
            TestFunction::Bump(b) => TestFunction::Bump(b.translate(t)),
            TestFunction::Sampled(f) => TestFunction::Sampled(f.translate(t)),
            TestFunction::Conv(c) => TestFunction::Conv(ConvFn {
                outer: c.outer.translate(t),
                inner: c.inner.clone(),
            }),
        }
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> Self {
        match self {
            TestFunction::Gauss(g) => TestFunction::Gauss(g.reflect()),
            TestFunction::Bump(b) => TestFunction::Bump(b.reflect()),
            TestFunction::Sampled(f) => TestFunction::Sampled(f.reflect()),
            TestFunction::Conv(c) => TestFunction::Conv(ConvFn {
                outer: c.outer.reflect(),
                inner: Box::new(c.inner.reflect()),
            }),
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            TestFunction::Gauss(g) => TestFunction::Gauss(g.conj()),
            TestFunction::Bump(b) => TestFunction::Bump(b.conj()),
            TestFunction::Sampled(f) => TestFunction::Sampled(f.conj()),
            TestFunction::Conv(c) => TestFunction::Conv(ConvFn {
                outer: c.outer.conj(),
                inner: Box::new(c.inner.conj()),
            }),
        }
    }

    /// `conj(f(-x))`.
    pub fn tilde(&self) -> Self {
        self.reflect().conj()
    }

    /// `x -> e^{2 pi i k.x} f(x)`.
    pub fn char_multiply(&self, k: &[f64]) -> Self {
        match self {
            TestFunction::Gauss(g) => TestFunction::Gauss(g.char_multiply(k)),
            TestFunction::Bump(b) => TestFunction::Bump(b.char_multiply(k)),
            TestFunction::Sampled(f) => TestFunction::Sampled(f.char_multiply(k)),
            TestFunction::Conv(c) => TestFunction::Conv(ConvFn {
                outer: c.outer.char_multiply(k),
                inner: Box::new(c.inner.char_multiply(k)),
            }),
        }
    }

    /// `int f dx`.
    pub fn integral(&self) -> Complex64 {
        match self {
            TestFunction::Gauss(g) => g.integral(),
            TestFunction::Bump(b) => b.integral(),
            // int hat b = b(0)
            TestFunction::Sampled(s) => s.source.eval(&vec![0.0; s.dim()]),
            TestFunction::Conv(c) => c.outer.integral() * c.inner.integral(),
        }
    }

    /// Ball outside which every derivative up to `order` is negligible
    /// (exactly zero for compactly supported functions).
    pub fn reach(&self, order: u32) -> (Point, f64) {
        match self {
            TestFunction::Gauss(g) => {
                let c0 = g.terms[0].center.clone();
                let r = g
                    .terms
                    .iter()
                    .map(|t| {
                        let off: f64 = t
                            .center
                            .iter()
                            .zip(&c0)
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt();
                        off + t.decay_radius(order).expect("damped")
                    })
                    .fold(0.0, f64::max);
                (c0, r)
            }
            TestFunction::Bump(b) => (b.center.clone(), b.radius),
            TestFunction::Sampled(s) => (s.source.freq_or_zero(), s.reach()),
            TestFunction::Conv(c) => {
                let (ci, ri) = c.inner.reach(order);
                let center = c.outer.center.iter().zip(&ci).map(|(a, b)| a + b).collect();
                (center, c.outer.radius + ri)
            }
        }
    }

    /// Length scale on which the function varies; drives quadrature resolution.
    pub fn feature_scale(&self) -> f64 {
        match self {
            TestFunction::Gauss(g) => g
                .terms
                .iter()
                .map(|t| t.width.expect("damped") / (1.0 + f64::from(t.poly.degree())).sqrt())
                .fold(f64::MAX, f64::min),
            TestFunction::Bump(b) => b.radius,
            TestFunction::Sampled(s) => 1.0 / s.source.radius,
            TestFunction::Conv(c) => c.outer.radius.min(c.inner.feature_scale()),
        }
    }

    /// Splits into pieces with separate reach balls (one per Gaussian term).
    pub fn split(&self) -> Vec<TestFunction> {
        match self {
            TestFunction::Gauss(g) if g.terms.len() > 1 => g
                .terms
                .iter()
                .map(|t| TestFunction::Gauss(GaussPolyFn { terms: vec![t.clone()] }))
                .collect(),
            other => vec![other.clone()],
        }
    }

    /// `sup_{|alpha| <= M, |beta| <= N} sup_x |x^alpha D^beta f(x)|`.
    ///
    /// Each `(alpha, beta)` supremum is located on a fixed grid and polished by
    /// golden-section search; the result is the maximum over the index set, so
    /// it is monotone in `(M, N)` by construction.
    pub fn seminorm(&self, m: u32, n: u32) -> Result<f64> {
        let table = self.seminorm_table(m, n)?;
        Ok(table
            .iter()
            .filter(|((a, b), _)| a.total() <= m && b.total() <= n)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max))
    }

    /// Per-index suprema `(alpha, beta) -> sup |x^alpha D^beta f|`.
    pub fn seminorm_table(&self, m: u32, n: u32) -> Result<BTreeMap<(MultiIndex, MultiIndex), f64>> {
        let d = self.dim();
        let mut out = BTreeMap::new();
        for beta in MultiIndex::all_up_to(d, n) {
            let df = self.deriv_fn(&beta)?;
            // one box for every (M, N) up to the cap keeps the grid shared
            let (center, radius) = self.reach((m + n).max(SEMINORM_BOX_ORDER));
            for alpha in MultiIndex::all_up_to(d, m) {
                let g = |x: &[f64]| alpha.monomial(x).abs() * df.eval(x).norm();
                let v = sup_in_box(&g, &center, radius);
                out.insert((alpha, beta.clone()), v);
            }
        }
        Ok(out)
    }

    /// Fourier transform with kernel `e^{-2 pi i k.y}`.
    pub fn fourier_fn(&self) -> Result<TestFunction> {
        match self {
            TestFunction::Gauss(g) => Ok(TestFunction::Gauss(g.fourier())),
            TestFunction::Bump(b) => Ok(TestFunction::Sampled(SampledFn::new(b.clone())?)),
            // F F b = b(-.)
            TestFunction::Sampled(s) => Ok(TestFunction::Bump(s.source.reflect())),
            TestFunction::Conv(_) => Err(Error::Unsupported(
                "fourier transform of a quadrature convolution".into(),
            )),
        }
    }

    pub fn convolve_fn(&self, other: &TestFunction) -> Result<TestFunction> {
        check_dim(self.dim(), other.dim())?;
        match (self, other) {
            (TestFunction::Gauss(a), TestFunction::Gauss(b)) => Ok(TestFunction::Gauss(a.convolve(b))),
            (TestFunction::Bump(b), g) | (g, TestFunction::Bump(b)) => Ok(TestFunction::Conv(ConvFn {
                outer: b.clone(),
                inner: Box::new(g.clone()),
            })),
            _ => Err(Error::Unsupported(
                "convolution needs two Gaussian sums or a bump factor".into(),
            )),
        }
    }
}

impl ConvFn {
    /// `int outer(y) h(x - y) dy` by composite Gauss-Legendre over the outer support.
    fn eval_with<H: Fn(&[f64]) -> Complex64>(&self, x: &[f64], h: H) -> Complex64 {
        let d = self.outer.dim();
        let r = self.outer.radius;
        let c = &self.outer.center;
        let scale = self.inner.feature_scale().min(r);
        if d == 1 {
            let panels = ((4.0 * r / scale).ceil() as usize).clamp(8, 256);
            quadrature::composite(c[0] - r, c[0] + r, panels, 20, |y| {
                self.outer.eval(&[y]) * h(&[x[0] - y])
            })
        } else {
            let panels = if d == 2 { 12 } else { 5 };
            let lo: Vec<f64> = c.iter().map(|v| v - r).collect();
            let hi: Vec<f64> = c.iter().map(|v| v + r).collect();
            quadrature::tensor_box(&lo, &hi, panels, 12, |y| {
                let v = self.outer.eval(y);
                if v == Complex64::default() {
                    return v;
                }
                let arg: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                v * h(&arg)
            })
        }
    }
}

/// Grid-then-golden-section maximum of `f` on `[a, b]`; returns `(argmax, max)`.
pub(crate) fn grid_sup_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> (f64, f64) {
    let h = (b - a) / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| f(a + h * i as f64)).collect();
    // polish the three largest local maxima
    let mut peaks: Vec<usize> = (0..=n)
        .filter(|&i| {
            let l = if i > 0 { vals[i - 1] } else { f64::MIN };
            let r = if i < n { vals[i + 1] } else { f64::MIN };
            vals[i] >= l && vals[i] >= r
        })
        .collect();
    peaks.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    peaks.truncate(3);
    let mut best = (a, f64::MIN);
    for (i, v) in vals.iter().enumerate() {
        if *v > best.1 {
            best = (a + h * i as f64, *v);
        }
    }
    for &i in &peaks {
        let x0 = a + h * i as f64;
        let (x, v) = golden_max(f, (x0 - h).max(a), (x0 + h).min(b));
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() < 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, f64::MIN), |acc, p| if p.1 > acc.1 { p } else { acc })
}

/// Supremum of `g` over the box `center +- radius` (grid + coordinatewise polish).
pub(crate) fn sup_in_box<G: Fn(&[f64]) -> f64>(g: &G, center: &[f64], radius: f64) -> f64 {
    let d = center.len();
    if d == 1 {
        let n = ((2.0 * radius * 4096.0).ceil() as usize).clamp(1024, 1 << 15);
        let f = |x: f64| g(&[x]);
        return grid_sup_1d(&f, center[0] - radius, center[0] + radius, n).1;
    }
    let per_axis = match d {
        2 => 256usize,
        3 => 40,
        _ => 12,
    };
    let h = 2.0 * radius / per_axis as f64;
    let side = per_axis + 1;
    let mut pts: Vec<(f64, Vec<f64>)> = (0..side.pow(d as u32))
        .map(|mut flat| {
            let mut x = vec![0.0; d];
            for xi in x.iter_mut().rev() {
                *xi = (flat % side) as f64;
                flat /= side;
            }
            for (xi, c) in x.iter_mut().zip(center) {
                *xi = c - radius + h * *xi;
            }
            (g(&x), x)
        })
        .collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = pts[0].0;
    for (_, x0) in pts.iter().take(4) {
        let mut x = x0.clone();
        let mut step = h;
        for _ in 0..4 {
            for axis in 0..d {
                let f = |t: f64| {
                    let mut y = x.clone();
                    y[axis] = t;
                    g(&y)
                };
                let (t, _) = golden_max(&f, x[axis] - step, x[axis] + step);
                x[axis] = t;
            }
            step *= 0.5;
        }
        best = best.max(g(&x));
    }
    best
}
