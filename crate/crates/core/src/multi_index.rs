use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// A point of `R^d`. Inline storage covers the dimensions used in practice.
pub type Point = SmallVec<[f64; 3]>;

/// Multi-index `alpha = (alpha_1, ..., alpha_d)` of non-negative derivative or
/// monomial orders. Ordered lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(SmallVec<[u32; 3]>);

impl MultiIndex {
    pub fn zeros(dim: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, dim))
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[axis] = 1;
        m
    }

    pub fn from_slice(orders: &[u32]) -> Self {
        MultiIndex(SmallVec::from_slice(orders))
    }

    /// One-dimensional index of order `k`.
    pub fn order1(k: u32) -> Self {
        Self::from_slice(&[k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn orders(&self) -> &[u32] {
        &self.0
    }

    /// Total order `|alpha|`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// `(-1)^{|alpha|}`.
    pub fn sign(&self) -> f64 {
        if self.total().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut out = self.clone();
        for (o, b) in out.0.iter_mut().zip(other.0.iter()) {
            *o = o.checked_sub(*b)?;
        }
        Some(out)
    }

    pub fn with_incremented(&self, axis: usize) -> MultiIndex {
        let mut out = self.clone();
        out.0[axis] += 1;
        out
    }

    pub fn scaled(&self, k: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| a * k).collect())
    }

    /// `alpha! = prod alpha_j!`.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    /// `binom(alpha, beta) = prod binom(alpha_j, beta_j)`; zero unless `beta <= alpha`.
    pub fn binomial(&self, beta: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(beta.0.iter())
            .map(|(&a, &b)| binomial(a, b))
            .product()
    }

    /// `x^alpha`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x.iter())
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }

    /// All `beta` with `beta <= self` componentwise, in lexicographic order.
    pub fn lower_box(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(SmallVec::new())];
        for &a in self.0.iter() {
            let mut next = Vec::with_capacity(out.len() * (a as usize + 1));
            for prefix in &out {
                for k in 0..=a {
                    let mut m = prefix.clone();
                    m.0.push(k);
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }

    /// All multi-indices of dimension `dim` with `|alpha| <= max_total`.
    pub fn all_up_to(dim: usize, max_total: u32) -> Vec<MultiIndex> {
        MultiIndex(SmallVec::from_elem(max_total, dim))
            .lower_box()
            .into_iter()
            .filter(|m| m.total() <= max_total)
            .collect()
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}
