//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients `c_beta` of a smooth function at a
//! point for every `beta <= shape` (componentwise). The box is closed under
//! products after truncation, so derivatives `D^beta F = beta! c_beta` of
//! compositions can be read off exactly (up to rounding) for all `beta` in the
//! box.

use crate::multi_index::{factorial, MultiIndex};

#[derive(Clone, Debug)]
pub struct Jet {
    shape: Vec<u32>,
    strides: Vec<usize>,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(shape: &MultiIndex, value: f64) -> Jet {
        let shape: Vec<u32> = shape.orders().to_vec();
        let mut strides = vec![1usize; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * (shape[i + 1] as usize + 1);
        }
        let len = shape.iter().map(|&s| s as usize + 1).product();
        let mut coeffs = vec![0.0; len];
        coeffs[0] = value;
        Jet {
            shape,
            strides,
            coeffs,
        }
    }

    /// The coordinate function `x_axis` expanded at `value`.
    pub fn variable(shape: &MultiIndex, axis: usize, value: f64) -> Jet {
        let mut j = Jet::constant(shape, value);
        if j.shape[axis] > 0 {
            let idx = j.strides[axis];
            j.coeffs[idx] = 1.0;
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn total_order(&self) -> u32 {
        self.shape.iter().sum()
    }

    fn unravel(&self, mut idx: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.shape.len()];
        for (o, s) in out.iter_mut().zip(self.strides.iter()) {
            *o = (idx / s) as u32;
            idx %= s;
        }
        out
    }

    /// Taylor coefficient for multi-index `beta` (zero outside the box).
    pub fn coeff(&self, beta: &MultiIndex) -> f64 {
        let mut idx = 0;
        for ((b, s), m) in beta.orders().iter().zip(&self.strides).zip(&self.shape) {
            if b > m {
                return 0.0;
            }
            idx += *b as usize * s;
        }
        self.coeffs[idx]
    }

    /// `D^beta F` at the expansion point.
    pub fn derivative(&self, beta: &MultiIndex) -> f64 {
        self.coeff(beta) * beta.factorial()
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        let idx: Vec<Vec<u32>> = (0..n).map(|i| self.unravel(i)).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            'inner: for (j, b) in other.coeffs.iter().enumerate() {
                if *b == 0.0 {
                    continue;
                }
                let mut k = 0;
                for axis in 0..self.shape.len() {
                    let s = idx[i][axis] + idx[j][axis];
                    if s > self.shape[axis] {
                        continue 'inner;
                    }
                    k += s as usize * self.strides[axis];
                }
                out[k] += a * b;
            }
        }
        Jet {
            shape: self.shape.clone(),
            strides: self.strides.clone(),
            coeffs: out,
        }
    }

    /// `F(self)` for a univariate `F` given its derivatives
    /// `derivs[k] = F^{(k)}(self.value())`. Missing high orders count as zero.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let k_max = self.total_order() as usize;
        let h = self.add_const(-self.value());
        let term = |k: usize| derivs.get(k).copied().unwrap_or(0.0) / factorial(k as u32);
        let mut acc = Jet::constant(&MultiIndex::from_slice(&self.shape), term(k_max));
        for k in (0..k_max).rev() {
            acc = acc.mul(&h).add_const(term(k));
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.total_order() as usize + 1])
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let derivs: Vec<f64> = (0..=self.total_order())
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * factorial(k) / a.powi(k as i32 + 1)
            })
            .collect();
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Jet {
        let a = self.value();
        // d^k/da^k a^{1/2} = (1/2)(1/2 - 1)...(1/2 - k + 1) a^{1/2 - k}
        let mut derivs = Vec::new();
        let mut falling = 1.0;
        for k in 0..=self.total_order() {
            derivs.push(falling * a.powf(0.5 - f64::from(k)));
            falling *= 0.5 - f64::from(k);
        }
        self.compose(&derivs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_in_two_variables() {
        // f = x^2 y at (1.5, -2): D^(1,1) f = 2x = 3, D^(2,1) f = 2
        let shape = MultiIndex::from_slice(&[2, 1]);
        let x = Jet::variable(&shape, 0, 1.5);
        let y = Jet::variable(&shape, 1, -2.0);
        let f = x.mul(&x).mul(&y);
        assert!((f.value() - (-4.5)).abs() < 1e-14);
        assert!((f.derivative(&MultiIndex::from_slice(&[1, 1])) - 3.0).abs() < 1e-14);
        assert!((f.derivative(&MultiIndex::from_slice(&[2, 1])) - 2.0).abs() < 1e-14);
        assert!((f.derivative(&MultiIndex::from_slice(&[2, 0])) - (-4.0)).abs() < 1e-14);
    }

    #[test]
    fn exp_of_square_matches_closed_form() {
        // g(x) = exp(-x^2), g'' = (4x^2 - 2) exp(-x^2)
        let shape = MultiIndex::order1(4);
        let x0 = 0.7;
        let x = Jet::variable(&shape, 0, x0);
        let g = x.mul(&x).scale(-1.0).exp();
        let want = (4.0 * x0 * x0 - 2.0) * (-x0 * x0).exp();
        assert!((g.derivative(&MultiIndex::order1(2)) - want).abs() < 1e-13);
        // g'''' = (16x^4 - 48x^2 + 12) exp(-x^2)
        let want4 = (16.0 * x0.powi(4) - 48.0 * x0 * x0 + 12.0) * (-x0 * x0).exp();
        assert!((g.derivative(&MultiIndex::order1(4)) - want4).abs() < 1e-12);
    }

    #[test]
    fn radial_norm_derivatives() {
        // r = |x| at (3, 4): dr/dx = 3/5, d2r/dxdy = -xy/r^3
        let shape = MultiIndex::from_slice(&[1, 1]);
        let x = Jet::variable(&shape, 0, 3.0);
        let y = Jet::variable(&shape, 1, 4.0);
        let r = x.mul(&x).add(&y.mul(&y)).sqrt();
        assert!((r.value() - 5.0).abs() < 1e-14);
        assert!((r.derivative(&MultiIndex::from_slice(&[1, 0])) - 0.6).abs() < 1e-14);
        assert!((r.derivative(&MultiIndex::from_slice(&[1, 1])) + 12.0 / 125.0).abs() < 1e-14);
    }

    #[test]
    fn recip_derivatives() {
        let shape = MultiIndex::order1(3);
        let x = Jet::variable(&shape, 0, 2.0);
        let r = x.recip();
        // d3/dx3 (1/x) = -6 / x^4
        assert!((r.derivative(&MultiIndex::order1(3)) + 6.0 / 16.0).abs() < 1e-14);
    }
}
