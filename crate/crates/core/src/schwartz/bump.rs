use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::jet::Jet;
use crate::multi_index::{MultiIndex, Point};
use crate::quadrature;

/// Highest derivative order available for bump functions.
pub const K_MAX: u32 = 6;

/// Polynomials `M_k(u)` (ascending coefficients) with
/// `d^k/du^k exp(-1/(1-u)) = M_k(u) (1-u)^{-2k} exp(-1/(1-u))`.
///
/// `M_{k+1} = M_k' q^2 + 2k q M_k - M_k` with `q = 1 - u`.
fn recurrence() -> &'static [Vec<f64>] {
    static POLYS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let mul = |a: &[f64], b: &[f64]| {
            let mut out = vec![0.0; a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        };
        let add = |a: &[f64], b: &[f64]| {
            let mut out = vec![0.0; a.len().max(b.len())];
            for (i, x) in a.iter().enumerate() {
                out[i] += x;
            }
            for (i, x) in b.iter().enumerate() {
                out[i] += x;
            }
            out
        };
        let q = [1.0, -1.0];
        let q2 = mul(&q, &q);
        let mut polys = vec![vec![1.0]];
        for k in 0..K_MAX {
            let m = polys.last().unwrap();
            let dm: Vec<f64> = if m.len() > 1 {
                m.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
            } else {
                vec![0.0]
            };
            let a = mul(&dm, &q2);
            let b: Vec<f64> = mul(&q, m).iter().map(|c| 2.0 * k as f64 * c).collect();
            let c: Vec<f64> = m.iter().map(|c| -c).collect();
            polys.push(add(&add(&a, &b), &c));
        }
        polys
    })
}

/// `E^{(k)}(u)` for `k = 0..=order`, where `E(u) = exp(-1/(1-u))` on `u < 1`, zero otherwise.
pub fn profile_derivatives(u: f64, order: u32) -> Result<Vec<f64>> {
    if order > K_MAX {
        return Err(Error::OrderTooHigh { order, limit: K_MAX });
    }
    let q = 1.0 - u;
    if q <= 0.0 {
        return Ok(vec![0.0; order as usize + 1]);
    }
    let lq = q.ln();
    Ok(recurrence()[..=order as usize]
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let mk = m.iter().rev().fold(0.0, |acc, c| acc * u + c);
            // combine the huge (1-u)^{-2k} with the tiny exponential in log space
            mk * (-1.0 / q - 2.0 * k as f64 * lq).exp()
        })
        .collect())
}

/// `scale e^{2 pi i xi.(x-c)} exp(-1/(1 - |x-c|^2/r^2))` inside the ball, zero outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpFn {
    pub center: Point,
    pub radius: f64,
    #[serde(default = "one", with = "crate::serde_util::cplx")]
    pub scale: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq: Option<Point>,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl BumpFn {
    pub fn new(center: &[f64], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid bump radius {radius}")));
        }
        Ok(BumpFn {
            center: Point::from_slice(center),
            radius,
            scale: one(),
            freq: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn rel(&self, x: &[f64]) -> Point {
        x.iter().zip(&self.center).map(|(a, c)| a - c).collect()
    }

    fn phase(&self, y: &[f64]) -> Complex64 {
        match &self.freq {
            Some(xi) => {
                let t: f64 = xi.iter().zip(y).map(|(a, b)| a * b).sum();
                Complex64::from_polar(1.0, 2.0 * PI * t)
            }
            None => one(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let y = self.rel(x);
        let u: f64 = y.iter().map(|v| v * v).sum::<f64>() / (self.radius * self.radius);
        if u >= 1.0 {
            return Complex64::default();
        }
        self.scale * self.phase(&y) * (-1.0 / (1.0 - u)).exp()
    }

    /// Derivatives of the real envelope `exp(-1/(1-u(x)))`.
    fn envelope_jet(&self, shape: &MultiIndex, y: &[f64]) -> Result<Jet> {
        let r2 = self.radius * self.radius;
        let mut u = Jet::constant(shape, 0.0);
        for (axis, &v) in y.iter().enumerate() {
            let t = Jet::variable(shape, axis, v);
            u = u.add(&t.mul(&t));
        }
        let u = u.scale(1.0 / r2);
        let derivs = profile_derivatives(u.value(), shape.total())?;
        Ok(u.compose(&derivs))
    }

    pub fn deriv_eval(&self, alpha: &MultiIndex, x: &[f64]) -> Result<Complex64> {
        check_dim(self.dim(), alpha.dim())?;
        if alpha.total() > K_MAX {
            return Err(Error::OrderTooHigh {
                order: alpha.total(),
                limit: K_MAX,
            });
        }
        let y = self.rel(x);
        let u: f64 = y.iter().map(|v| v * v).sum::<f64>() / (self.radius * self.radius);
        if u >= 1.0 {
            return Ok(Complex64::default());
        }
        let jet = self.envelope_jet(alpha, &y)?;
        let Some(xi) = &self.freq else {
            return Ok(self.scale * jet.derivative(alpha));
        };
        // Leibniz against the character
        let mut acc = Complex64::default();
        for beta in alpha.lower_box() {
            let rest = alpha.checked_sub(&beta).expect("beta <= alpha");
            let mut c = Complex64::new(alpha.binomial(&beta) * jet.derivative(&beta), 0.0);
            for (k, &x) in rest.orders().iter().zip(xi.iter()) {
                c *= Complex64::new(0.0, 2.0 * PI * x).powu(*k);
            }
            acc += c;
        }
        Ok(self.scale * self.phase(&y) * acc)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        BumpFn {
            scale: self.scale * s,
            ..self.clone()
        }
    }

    pub fn translate(&self, t: &[f64]) -> Self {
        BumpFn {
            center: self.center.iter().zip(t).map(|(c, s)| c + s).collect(),
            ..self.clone()
        }
    }

    pub fn reflect(&self) -> Self {
        BumpFn {
            center: self.center.iter().map(|c| -c).collect(),
            freq: self.freq.as_ref().map(|f| f.iter().map(|v| -v).collect()),
            ..self.clone()
        }
    }

    pub fn conj(&self) -> Self {
        BumpFn {
            scale: self.scale.conj(),
            freq: self.freq.as_ref().map(|f| f.iter().map(|v| -v).collect()),
            ..self.clone()
        }
    }

    pub fn char_multiply(&self, k: &[f64]) -> Self {
        let phase: f64 = k.iter().zip(&self.center).map(|(a, b)| a * b).sum();
        let freq: Point = match &self.freq {
            Some(f) => f.iter().zip(k).map(|(a, b)| a + b).collect(),
            None => Point::from_slice(k),
        };
        BumpFn {
            scale: self.scale * Complex64::from_polar(1.0, 2.0 * PI * phase),
            freq: freq.iter().any(|v| *v != 0.0).then_some(freq),
            ..self.clone()
        }
    }

    pub fn freq_or_zero(&self) -> Point {
        self.freq.clone().unwrap_or_else(|| Point::from_elem(0.0, self.dim()))
    }

    /// `int exp(-1/(1-|y|^2))` over the unit ball of `R^d`.
    pub fn unit_mass(dim: usize) -> f64 {
        static MASS: OnceLock<[f64; 4]> = OnceLock::new();
        let table = MASS.get_or_init(|| {
            let mut t = [0.0; 4];
            for (d, slot) in t.iter_mut().enumerate().skip(1) {
                // surface area of S^{d-1} times the radial integral
                let surface = d as f64 * crate::lattice::ball_volume(d, 1.0);
                let radial = quadrature::composite(0.0, 1.0, 64, 20, |r| {
                    Complex64::new((-1.0 / (1.0 - r * r)).exp() * r.powi(d as i32 - 1), 0.0)
                });
                *slot = surface * radial.re;
            }
            t
        });
        if dim <= 3 {
            table[dim]
        } else {
            let surface = dim as f64 * crate::lattice::ball_volume(dim, 1.0);
            surface
                * quadrature::composite(0.0, 1.0, 64, 20, |r| {
                    Complex64::new((-1.0 / (1.0 - r * r)).exp() * r.powi(dim as i32 - 1), 0.0)
                })
                .re
        }
    }

    /// `int f`; only closed-form for unmodulated bumps, otherwise via the transform.
    pub fn integral(&self) -> Complex64 {
        match &self.freq {
            None => self.scale * Self::unit_mass(self.dim()) * self.radius.powi(self.dim() as i32),
            Some(_) => super::sampled::bump_transform_at(self, &vec![0.0; self.dim()]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_center_and_boundary() {
        let b = BumpFn::new(&[0.0], 1.0).unwrap();
        assert!((b.eval(&[0.0]).re - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(b.eval(&[1.0]).re, 0.0);
        let d1 = b.deriv_eval(&MultiIndex::order1(1), &[1.0]).unwrap();
        assert_eq!(d1.norm(), 0.0);
        let d1 = b.deriv_eval(&MultiIndex::order1(1), &[0.999]).unwrap();
        assert!(d1.norm() < 1e-100);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = BumpFn::new(&[0.2, -0.1], 1.5).unwrap().char_multiply(&[0.3, 0.0]);
        let x = [0.6, 0.4];
        let h = 1e-5;
        for axis in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[axis] += h;
            xm[axis] -= h;
            let fd = (b.eval(&xp) - b.eval(&xm)) / (2.0 * h);
            let exact = b.deriv_eval(&MultiIndex::unit(2, axis), &x).unwrap();
            assert!((fd - exact).norm() < 1e-8, "axis {axis}");
        }
        // second mixed derivative via differences of first derivatives
        let a = MultiIndex::from_slice(&[1, 0]);
        let mut xp = x;
        let mut xm = x;
        xp[1] += h;
        xm[1] -= h;
        let fd = (b.deriv_eval(&a, &xp).unwrap() - b.deriv_eval(&a, &xm).unwrap()) / (2.0 * h);
        let exact = b.deriv_eval(&MultiIndex::from_slice(&[1, 1]), &x).unwrap();
        assert!((fd - exact).norm() < 1e-7);
    }

    #[test]
    fn high_order_is_rejected() {
        let b = BumpFn::new(&[0.0], 1.0).unwrap();
        assert!(matches!(
            b.deriv_eval(&MultiIndex::order1(K_MAX + 1), &[0.1]),
            Err(Error::OrderTooHigh { .. })
        ));
    }

    #[test]
    fn unit_mass_one_dimensional() {
        // int_{-1}^{1} exp(-1/(1-x^2)) dx = 0.4439938161680794...
        assert!((BumpFn::unit_mass(1) - 0.443_993_816_168_079_4).abs() < 1e-13);
        let q = quadrature::adaptive_simpson(-1.0, 1.0, 1e-13, |x| {
            Complex64::new((-1.0 / (1.0 - x * x)).exp(), 0.0)
        });
        assert!((BumpFn::unit_mass(1) - q.re).abs() < 1e-11);
    }
}
