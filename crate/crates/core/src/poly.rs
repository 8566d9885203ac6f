use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::multi_index::MultiIndex;

/// Polynomial in `d` real variables with complex coefficients, stored sparsely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<PolyTerm>", into = "Vec<PolyTerm>")]
pub struct Poly {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PolyTerm {
    order: MultiIndex,
    #[serde(with = "crate::serde_util::cplx")]
    c: Complex64,
}

impl From<Vec<PolyTerm>> for Poly {
    fn from(terms: Vec<PolyTerm>) -> Self {
        let dim = terms.first().map_or(0, |t| t.order.dim());
        let mut p = Poly::zero(dim);
        for t in terms {
            p.add_term(t.order, t.c);
        }
        p
    }
}

impl From<Poly> for Vec<PolyTerm> {
    fn from(p: Poly) -> Self {
        p.coeffs
            .into_iter()
            .map(|(order, c)| PolyTerm { order, c })
            .collect()
    }
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::monomial(MultiIndex::zeros(dim), c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(alpha: MultiIndex, c: Complex64) -> Self {
        let mut p = Poly::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::total).max().unwrap_or(0)
    }

    /// Sum of coefficient moduli, an envelope constant for `|P(y)| <= S max(1,|y|)^deg`.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// True if the polynomial is a constant (possibly zero).
    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(MultiIndex::is_zero)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: Complex64) {
        if self.dim == 0 {
            self.dim = alpha.dim();
        }
        match self.coeffs.entry(alpha) {
            Entry::Vacant(v) => {
                if c != Complex64::default() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == Complex64::default() {
                    o.remove();
                }
            }
        }
    }

    pub fn eval(&self, y: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(a, c)| c * a.monomial(y))
            .sum()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (a, c) in &other.coeffs {
            out.add_term(a.clone(), *c);
        }
        out
    }

    /// `sum |a_beta - b_beta|` over the union of supports.
    pub fn sub_norm(&self, other: &Poly) -> f64 {
        self.add(&other.scale(Complex64::new(-1.0, 0.0))).abs_sum()
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        let mut out = Poly::zero(self.dim);
        if s == Complex64::default() {
            return out;
        }
        for (a, c) in &self.coeffs {
            out.add_term(a.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.dim.max(other.dim));
        for (a, c) in &self.coeffs {
            for (b, e) in &other.coeffs {
                out.add_term(a + b, c * e);
            }
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&MultiIndex, Complex64) -> Complex64) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (a, c) in &self.coeffs {
            out.add_term(a.clone(), f(a, *c));
        }
        out
    }

    pub fn conj(&self) -> Poly {
        self.map_coeffs(|_, c| c.conj())
    }

    /// `y -> P(-y)`.
    pub fn reflect(&self) -> Poly {
        self.map_coeffs(|a, c| c * a.sign())
    }

    /// Partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (a, c) in &self.coeffs {
            let k = a.orders()[axis];
            if k > 0 {
                let mut b = a.clone();
                b = b.checked_sub(&MultiIndex::unit(self.dim, axis)).unwrap();
                out.add_term(b, c * f64::from(k));
            }
        }
        out
    }

    /// `y_axis * P(y)`.
    pub fn mul_var(&self, axis: usize) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (a, c) in &self.coeffs {
            out.add_term(a.with_incremented(axis), *c);
        }
        out
    }

    /// `y -> P(y + s)`.
    pub fn shift(&self, s: &[f64]) -> Poly {
        if s.iter().all(|&v| v == 0.0) {
            return self.clone();
        }
        let mut out = Poly::zero(self.dim);
        for (beta, c) in &self.coeffs {
            for gamma in beta.lower_box() {
                let rest = beta.checked_sub(&gamma).unwrap();
                let w = beta.binomial(&gamma) * rest.monomial(s);
                if w != 0.0 {
                    out.add_term(gamma, c * w);
                }
            }
        }
        out
    }
}
