use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::multi_index::{MultiIndex, Point};
use crate::poly::Poly;

/// `P(y) e^{2 pi i xi.y} e^{-pi |y|^2 / w^2}` with `y = x - center`.
///
/// Without a width the term is a polynomial-times-character density: tempered,
/// but not integrable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussTerm {
    pub poly: Poly,
    pub center: Point,
    #[serde(default, skip_serializing_if = "is_zero_vec")]
    pub freq: Point,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

fn is_zero_vec(v: &Point) -> bool {
    v.iter().all(|&x| x == 0.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Univariate `H_n` with `d^n/deta^n e^{-pi w^2 eta^2} = H_n(eta) e^{-pi w^2 eta^2}`,
/// as coefficient vectors in ascending powers.
fn gauss_derivative_polys(n: u32, w: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0]];
    for _ in 0..n {
        let h = out.last().unwrap();
        let mut next = vec![0.0; h.len() + 1];
        for (k, c) in h.iter().enumerate().skip(1) {
            next[k - 1] += k as f64 * c;
        }
        for (k, c) in h.iter().enumerate() {
            next[k + 1] -= 2.0 * PI * w * w * c;
        }
        out.push(next);
    }
    out
}

impl GaussTerm {
    pub fn gaussian(center: &[f64], width: f64) -> Self {
        let d = center.len();
        GaussTerm {
            poly: Poly::one(d),
            center: Point::from_slice(center),
            freq: Point::from_elem(0.0, d),
            width: Some(width),
        }
    }

    pub fn undamped(poly: Poly, center: &[f64], freq: &[f64]) -> Self {
        GaussTerm {
            poly,
            center: Point::from_slice(center),
            freq: Point::from_slice(freq),
            width: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim(), self.poly.dim())?;
        check_dim(self.dim(), self.freq.len())?;
        if let Some(w) = self.width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("width must be positive, got {w}")));
            }
        }
        if self.center.iter().chain(self.freq.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite center or frequency".into()));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let y: Point = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let mut v = self.poly.eval(&y);
        if v == Complex64::default() {
            return v;
        }
        let phase = dot(&self.freq, &y);
        if phase != 0.0 {
            v *= cis(2.0 * PI * phase);
        }
        if let Some(w) = self.width {
            v *= (-PI * dot(&y, &y) / (w * w)).exp();
        }
        v
    }

    pub fn scale(&self, s: Complex64) -> Self {
        GaussTerm {
            poly: self.poly.scale(s),
            ..self.clone()
        }
    }

    /// `x -> f(x - t)`.
    pub fn translate(&self, t: &[f64]) -> Self {
        GaussTerm {
            center: self.center.iter().zip(t).map(|(c, s)| c + s).collect(),
            ..self.clone()
        }
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> Self {
        GaussTerm {
            poly: self.poly.reflect(),
            center: self.center.iter().map(|c| -c).collect(),
            freq: self.freq.iter().map(|c| -c).collect(),
            width: self.width,
        }
    }

    pub fn conj(&self) -> Self {
        GaussTerm {
            poly: self.poly.conj(),
            center: self.center.clone(),
            freq: self.freq.iter().map(|c| -c).collect(),
            width: self.width,
        }
    }

    /// `x -> e^{2 pi i k.x} f(x)`.
    pub fn char_multiply(&self, k: &[f64]) -> Self {
        GaussTerm {
            poly: self.poly.scale(cis(2.0 * PI * dot(k, &self.center))),
            center: self.center.clone(),
            freq: self.freq.iter().zip(k).map(|(a, b)| a + b).collect(),
            width: self.width,
        }
    }

    /// Partial derivative along `axis`.
    pub fn derivative_axis(&self, axis: usize) -> Self {
        let mut p = self.poly.derivative(axis);
        let xi = self.freq[axis];
        if xi != 0.0 {
            p = p.add(&self.poly.scale(Complex64::new(0.0, 2.0 * PI * xi)));
        }
        if let Some(w) = self.width {
            p = p.add(&self.poly.mul_var(axis).scale(Complex64::from(-2.0 * PI / (w * w))));
        }
        GaussTerm {
            poly: p,
            ..self.clone()
        }
    }

    pub fn derivative(&self, alpha: &MultiIndex) -> Self {
        let mut t = self.clone();
        for (axis, &k) in alpha.orders().iter().enumerate() {
            for _ in 0..k {
                t = t.derivative_axis(axis);
            }
        }
        t
    }

    /// Fourier transform `int f(y) e^{-2 pi i k.y} dy`; requires a Gaussian factor.
    pub fn fourier(&self) -> Result<Self> {
        let w = self
            .width
            .ok_or_else(|| Error::Unsupported("fourier transform of an undamped density".into()))?;
        let d = self.dim();
        let max_order = self
            .poly
            .terms()
            .flat_map(|(a, _)| a.orders().iter().copied())
            .max()
            .unwrap_or(0);
        let hs = gauss_derivative_polys(max_order, w);
        let unit = Complex64::new(0.0, 1.0 / (2.0 * PI));
        let mut q = Poly::zero(d);
        for (beta, &a) in self.poly.terms() {
            // prod_j (i / 2 pi)^{beta_j} H_{beta_j}(eta_j)
            let mut factor = Poly::constant(d, a * unit.powu(beta.total()));
            for (axis, &b) in beta.orders().iter().enumerate() {
                let mut h = Poly::zero(d);
                for (k, &c) in hs[b as usize].iter().enumerate() {
                    if c != 0.0 {
                        let mut m = MultiIndex::zeros(d);
                        for _ in 0..k {
                            m = m.with_incremented(axis);
                        }
                        h.add_term(m, Complex64::from(c));
                    }
                }
                factor = factor.mul(&h);
            }
            q = q.add(&factor);
        }
        let q = q.scale(Complex64::from(w.powi(d as i32)) * cis(-2.0 * PI * dot(&self.freq, &self.center)));
        Ok(GaussTerm {
            poly: q,
            center: self.freq.clone(),
            freq: self.center.iter().map(|c| -c).collect(),
            width: Some(1.0 / w),
        })
    }

    /// Pointwise product; closed in this family.
    pub fn mul(&self, other: &GaussTerm) -> GaussTerm {
        let (center, width, gauss_const) = match (self.width, other.width) {
            (Some(w1), Some(w2)) => {
                let (a1, a2) = (1.0 / (w1 * w1), 1.0 / (w2 * w2));
                let a = a1 + a2;
                let c: Point = self
                    .center
                    .iter()
                    .zip(&other.center)
                    .map(|(c1, c2)| (a1 * c1 + a2 * c2) / a)
                    .collect();
                let diff2: f64 = self
                    .center
                    .iter()
                    .zip(&other.center)
                    .map(|(c1, c2)| (c1 - c2).powi(2))
                    .sum();
                (c, Some(1.0 / a.sqrt()), (-PI * diff2 / (w1 * w1 + w2 * w2)).exp())
            }
            (Some(w), None) => (self.center.clone(), Some(w), 1.0),
            (None, Some(w)) => (other.center.clone(), Some(w), 1.0),
            (None, None) => (self.center.clone(), None, 1.0),
        };
        // re-express each factor about the common center: y_i = y + (c - c_i)
        let rebase = |t: &GaussTerm| -> (Poly, Complex64) {
            let s: Point = center.iter().zip(&t.center).map(|(c, ci)| c - ci).collect();
            (t.poly.shift(&s), cis(2.0 * PI * dot(&t.freq, &s)))
        };
        let (p1, ph1) = rebase(self);
        let (p2, ph2) = rebase(other);
        GaussTerm {
            poly: p1.mul(&p2).scale(ph1 * ph2 * gauss_const),
            center,
            freq: self.freq.iter().zip(&other.freq).map(|(a, b)| a + b).collect(),
            width,
        }
    }

    /// `int f dx` (exact).
    pub fn integral(&self) -> Result<Complex64> {
        let ft = self.fourier()?;
        Ok(ft.eval(&vec![0.0; self.dim()]))
    }

    /// Radius around the center beyond which every derivative up to `order`
    /// is below ~1e-18 of the coefficient scale.
    pub fn decay_radius(&self, order: u32) -> Option<f64> {
        let w = self.width?;
        let k = f64::from(self.poly.degree() + order);
        let xi = self.freq.iter().map(|v| v.abs()).fold(0.0, f64::max);
        // exp(-pi r^2/w^2) * (r/w)^k * (2 pi (xi w + r/w))^order stays tiny
        let r = w * ((45.0 / PI).sqrt() + (k + 1.0).sqrt() + (f64::from(order) * (2.0 * PI * (1.0 + xi * w)).ln().max(0.0) / PI).sqrt());
        Some(r)
    }
}

/// A finite sum of [`GaussTerm`]s, each with a Gaussian factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussPolyFn {
    pub terms: Vec<GaussTerm>,
}

impl GaussPolyFn {
    pub fn new(terms: Vec<GaussTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("empty Gaussian sum".into()));
        }
        let d = terms[0].dim();
        for t in &terms {
            t.validate()?;
            check_dim(d, t.dim())?;
            if t.width.is_none() {
                return Err(Error::InvalidArgument("test function terms need a width".into()));
            }
        }
        Ok(GaussPolyFn { terms })
    }

    /// `e^{-pi |x - c|^2 / w^2}`.
    pub fn gaussian(center: &[f64], width: f64) -> Self {
        GaussPolyFn {
            terms: vec![GaussTerm::gaussian(center, width)],
        }
    }

    /// `x^alpha e^{-pi |x|^2 / w^2}` scaled by `c`.
    pub fn monomial_gaussian(alpha: MultiIndex, width: f64, c: Complex64) -> Self {
        let d = alpha.dim();
        GaussPolyFn {
            terms: vec![GaussTerm {
                poly: Poly::monomial(alpha, c),
                center: Point::from_elem(0.0, d),
                freq: Point::from_elem(0.0, d),
                width: Some(width),
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.terms[0].dim()
    }

    fn map(&self, f: impl Fn(&GaussTerm) -> GaussTerm) -> Self {
        GaussPolyFn {
            terms: self.terms.iter().map(f).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn derivative(&self, alpha: &MultiIndex) -> Self {
        self.map(|t| t.derivative(alpha))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|t| t.scale(s))
    }

    pub fn translate(&self, t: &[f64]) -> Self {
        self.map(|g| g.translate(t))
    }

    pub fn reflect(&self) -> Self {
        self.map(GaussTerm::reflect)
    }

    pub fn conj(&self) -> Self {
        self.map(GaussTerm::conj)
    }

    /// `conj(f(-x))`.
    pub fn tilde(&self) -> Self {
        self.map(|t| t.reflect().conj())
    }

    pub fn char_multiply(&self, k: &[f64]) -> Self {
        self.map(|t| t.char_multiply(k))
    }

    pub fn add(&self, other: &GaussPolyFn) -> Self {
        GaussPolyFn {
            terms: self.terms.iter().chain(&other.terms).cloned().collect(),
        }
    }

    pub fn mul(&self, other: &GaussPolyFn) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        GaussPolyFn { terms }
    }

    pub fn fourier(&self) -> Self {
        self.map(|t| t.fourier().expect("test function terms are damped"))
    }

    /// `f * g` via `F^{-1}(F f . F g)` with `F^{-1} = reflect . F`.
    pub fn convolve(&self, other: &GaussPolyFn) -> Self {
        self.fourier().mul(&other.fourier()).fourier().reflect()
    }

    pub fn integral(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.integral().expect("test function terms are damped"))
            .sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.poly.degree()).max().unwrap_or(0)
    }
}
