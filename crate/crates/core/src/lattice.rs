use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::Point;

/// Snapping threshold for reduced lattice coordinates.
const COORD_SNAP: f64 = 1e-9;

/// A full-rank lattice `Lambda = B Z^d`, with its density and dual lattice.
///
/// The basis vectors are the columns of `B`; the dual basis is `(B^{-1})^T`,
/// so `dual^T B = I` and `Lambda* = {k : k.x in Z for all x in Lambda}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeWire", into = "LatticeWire")]
pub struct Lattice {
    basis: DMatrix<f64>,
    inverse: DMatrix<f64>,
    density: f64,
}

#[derive(Serialize, Deserialize)]
struct LatticeWire {
    /// Basis vectors.
    basis: Vec<Vec<f64>>,
}

impl TryFrom<LatticeWire> for Lattice {
    type Error = Error;

    fn try_from(w: LatticeWire) -> Result<Self> {
        Lattice::new(&w.basis)
    }
}

impl From<Lattice> for LatticeWire {
    fn from(l: Lattice) -> Self {
        LatticeWire {
            basis: l.basis_vectors(),
        }
    }
}

impl Lattice {
    /// Builds a lattice from its basis vectors.
    pub fn new(basis_vectors: &[Vec<f64>]) -> Result<Self> {
        let d = basis_vectors.len();
        if d == 0 || basis_vectors.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidArgument(
                "lattice basis must be d vectors of length d".into(),
            ));
        }
        let basis = DMatrix::from_fn(d, d, |i, j| basis_vectors[j][i]);
        let det = basis.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::SingularLattice);
        }
        let inverse = basis.clone().try_inverse().ok_or(Error::SingularLattice)?;
        Ok(Lattice {
            basis,
            inverse,
            density: 1.0 / det.abs(),
        })
    }

    /// `a Z^d`.
    pub fn scaled_integer(dim: usize, a: f64) -> Result<Self> {
        let vecs: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { a } else { 0.0 }).collect())
            .collect();
        Lattice::new(&vecs)
    }

    /// `Z^d`.
    pub fn integer(dim: usize) -> Self {
        Self::scaled_integer(dim, 1.0).expect("identity basis is regular")
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `dens(Lambda) = 1 / |det B|`.
    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn basis_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|j| self.basis.column(j).iter().copied().collect())
            .collect()
    }

    /// Dual basis vectors (rows of `B^{-1}`).
    pub fn dual_basis_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.inverse.row(i).iter().copied().collect())
            .collect()
    }

    /// The dual lattice `Lambda*`.
    pub fn dual(&self) -> Lattice {
        let d = self.dim();
        let basis = self.inverse.transpose();
        let inverse = self.basis.transpose();
        debug_assert_eq!(basis.nrows(), d);
        Lattice {
            basis,
            inverse,
            density: 1.0 / self.density,
        }
    }

    /// Lattice coordinates `B^{-1} x`.
    pub fn coords(&self, x: &[f64]) -> Point {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.inverse[(i, j)] * x[j]).sum())
            .collect()
    }

    /// `B n` for real coordinates `n`.
    pub fn point(&self, n: &[f64]) -> Point {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.basis[(i, j)] * n[j]).sum())
            .collect()
    }

    /// Integer coordinates of `x` if `x` lies on the lattice (tolerance on coordinates).
    pub fn integer_coords(&self, x: &[f64]) -> Option<Vec<i64>> {
        self.coords(x)
            .iter()
            .map(|&c| {
                let r = c.round();
                ((c - r).abs() <= COORD_SNAP).then_some(r as i64)
            })
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.integer_coords(x).is_some()
    }

    /// Representative of `x + Lambda` with lattice coordinates in `[-1/2, 1/2)`.
    pub fn reduce(&self, x: &[f64]) -> Point {
        let c: Point = self
            .coords(x)
            .iter()
            .map(|&c| {
                let mut r = c - (c + 0.5).floor();
                if r.abs() <= COORD_SNAP {
                    r = 0.0;
                } else if (r + 0.5).abs() <= COORD_SNAP || (r - 0.5).abs() <= COORD_SNAP {
                    r = -0.5;
                }
                r
            })
            .collect();
        let mut p = self.point(&c);
        for v in p.iter_mut() {
            if *v == 0.0 {
                *v = 0.0; // normalise -0.0
            }
        }
        p
    }

    /// Same point set as `other` (the change of basis is unimodular).
    pub fn same_as(&self, other: &Lattice) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        if self.basis == other.basis {
            return true;
        }
        let m = &self.inverse * &other.basis;
        let integral = m.iter().all(|v| (v - v.round()).abs() <= COORD_SNAP);
        integral && (m.determinant().abs() - 1.0).abs() <= COORD_SNAP
    }

    /// Points of `Lambda + offset` in the closed ball `|p - center| <= radius`,
    /// ordered by lattice coordinates.
    pub fn points_in_ball(&self, offset: &[f64], center: &[f64], radius: f64) -> Vec<Point> {
        let d = self.dim();
        let rel: Point = center.iter().zip(offset).map(|(c, o)| c - o).collect();
        let c = self.coords(&rel);
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|i| {
                let row_norm = (0..d)
                    .map(|j| self.inverse[(i, j)].powi(2))
                    .sum::<f64>()
                    .sqrt();
                let span = row_norm * radius;
                ((c[i] - span).floor() as i64, (c[i] + span).ceil() as i64)
            })
            .collect();
        let mut out = Vec::new();
        let mut n: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let nf = |n: &[i64]| -> Point { n.iter().map(|&k| k as f64).collect() };
        loop {
            let base = self.point(&nf(&n));
            let p: Point = base.iter().zip(offset).map(|(b, o)| b + o).collect();
            let dist2: f64 = p.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
            if dist2 <= radius * radius {
                out.push(p);
            }
            // odometer increment, last axis fastest
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if n[axis] < ranges[axis].1 {
                    n[axis] += 1;
                    for (k, r) in n.iter_mut().zip(ranges.iter()).skip(axis + 1) {
                        *k = r.0;
                    }
                    break;
                }
            }
        }
    }
}

/// Volume of the Euclidean ball of radius `r` in `R^d`, `pi^{d/2} r^d / Gamma(d/2 + 1)`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = V_{d-2} * 2 pi / d
    let mut v = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if dim.is_multiple_of(2) { 2 } else { 3 };
    while k <= dim {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v * r.powi(dim as i32)
}
