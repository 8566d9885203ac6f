//! Symbolic distributions: finite atoms, lattice combs and densities.

mod canonical;
mod terms;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use canonical::merge_tolerance;
pub use terms::{ContinuousTerm, LatticeTerm, PointAtom, Window};

pub(crate) use terms::{cis, dot};

use crate::error::{check_dim, Error, Result};
use crate::lattice::Lattice;
use crate::multi_index::{MultiIndex, Point};
use crate::schwartz::{GaussTerm, SmoothCutoff};

/// A tempered distribution in the supported class, kept in canonical form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Wire", into = "Wire")]
pub struct DistExpr {
    dim: usize,
    atoms: Vec<PointAtom>,
    lattices: Vec<LatticeTerm>,
    continuous: Vec<ContinuousTerm>,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    dim: usize,
    #[serde(default)]
    atoms: Vec<PointAtom>,
    #[serde(default)]
    lattices: Vec<LatticeTerm>,
    #[serde(default)]
    continuous: Vec<ContinuousTerm>,
}

impl TryFrom<Wire> for DistExpr {
    type Error = Error;

    fn try_from(w: Wire) -> Result<Self> {
        DistExpr::new(w.dim, w.atoms, w.lattices, w.continuous)
    }
}

impl From<DistExpr> for Wire {
    fn from(e: DistExpr) -> Self {
        Wire {
            dim: e.dim,
            atoms: e.atoms,
            lattices: e.lattices,
            continuous: e.continuous,
        }
    }
}

impl DistExpr {
    pub fn new(
        dim: usize,
        atoms: Vec<PointAtom>,
        mut lattices: Vec<LatticeTerm>,
        mut continuous: Vec<ContinuousTerm>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        // omitted optional vectors default to zero
        for l in &mut lattices {
            if l.modulation.is_empty() {
                l.modulation = Point::from_elem(0.0, dim);
            }
        }
        for c in &mut continuous {
            if c.density.freq.is_empty() {
                c.density.freq = Point::from_elem(0.0, dim);
            }
        }
        for a in &atoms {
            a.validate(dim)?;
        }
        for l in &lattices {
            l.validate(dim)?;
        }
        for c in &continuous {
            c.validate(dim)?;
        }
        Ok(Self::assemble(dim, atoms, lattices, continuous))
    }

    fn assemble(
        dim: usize,
        atoms: Vec<PointAtom>,
        lattices: Vec<LatticeTerm>,
        continuous: Vec<ContinuousTerm>,
    ) -> Self {
        DistExpr {
            dim,
            atoms: canonical::atoms(atoms),
            lattices: canonical::lattices(lattices),
            continuous: canonical::continuous(continuous),
        }
    }

    pub fn zero(dim: usize) -> Self {
        DistExpr {
            dim,
            atoms: Vec::new(),
            lattices: Vec::new(),
            continuous: Vec::new(),
        }
    }

    /// `w D^order delta_x`.
    pub fn atom(x: &[f64], order: MultiIndex, w: Complex64) -> Self {
        Self::assemble(x.len(), vec![PointAtom::new(x, order, w)], Vec::new(), Vec::new())
    }

    pub fn delta(x: &[f64]) -> Self {
        Self::atom(x, MultiIndex::zeros(x.len()), Complex64::new(1.0, 0.0))
    }

    pub fn from_atoms(dim: usize, atoms: Vec<PointAtom>) -> Result<Self> {
        Self::new(dim, atoms, Vec::new(), Vec::new())
    }

    /// `w D^order delta_Lambda`.
    pub fn lattice_comb(lattice: Lattice, order: MultiIndex, w: Complex64) -> Self {
        let d = lattice.dim();
        Self::assemble(d, Vec::new(), vec![LatticeTerm::new(lattice, order, w)], Vec::new())
    }

    pub fn from_lattice_term(term: LatticeTerm) -> Result<Self> {
        Self::new(term.dim(), Vec::new(), vec![term], Vec::new())
    }

    pub fn density(term: GaussTerm) -> Result<Self> {
        Self::new(term.dim(), Vec::new(), Vec::new(), vec![ContinuousTerm::new(term)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[PointAtom] {
        &self.atoms
    }

    pub fn lattices(&self) -> &[LatticeTerm] {
        &self.lattices
    }

    pub fn continuous(&self) -> &[ContinuousTerm] {
        &self.continuous
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.lattices.is_empty() && self.continuous.is_empty()
    }

    /// Only finitely many atoms, no lattice or density part.
    pub fn is_finite(&self) -> bool {
        self.lattices.is_empty() && self.continuous.is_empty()
    }

    pub fn max_order(&self) -> u32 {
        self.atoms
            .iter()
            .map(|a| a.order.total())
            .chain(self.lattices.iter().map(|l| l.order.total()))
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn add(&self, other: &DistExpr) -> Result<DistExpr> {
        check_dim(self.dim, other.dim)?;
        Ok(Self::assemble(
            self.dim,
            self.atoms.iter().chain(&other.atoms).cloned().collect(),
            self.lattices.iter().chain(&other.lattices).cloned().collect(),
            self.continuous.iter().chain(&other.continuous).cloned().collect(),
        ))
    }

    pub fn scale(&self, c: Complex64) -> DistExpr {
        Self::assemble(
            self.dim,
            self.atoms
                .iter()
                .map(|a| PointAtom { w: a.w * c, ..a.clone() })
                .collect(),
            self.lattices
                .iter()
                .map(|l| LatticeTerm { w: l.w * c, ..l.clone() })
                .collect(),
            self.continuous
                .iter()
                .map(|t| ContinuousTerm {
                    density: t.density.scale(c),
                    window: t.window.clone(),
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &DistExpr) -> Result<DistExpr> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `T_t psi`, i.e. `f -> psi(f(. + t))`: every atom moves by `t`.
    pub fn translate(&self, t: &[f64]) -> Result<DistExpr> {
        check_dim(self.dim, t.len())?;
        let shift = |x: &Point| -> Point { x.iter().zip(t).map(|(a, b)| a + b).collect() };
        Ok(Self::assemble(
            self.dim,
            self.atoms
                .iter()
                .map(|a| PointAtom { x: shift(&a.x), ..a.clone() })
                .collect(),
            self.lattices
                .iter()
                .map(|l| LatticeTerm {
                    offset: shift(&l.offset),
                    // chi_m(p) = chi_m(p + t) e^{-2 pi i m.t}
                    w: l.w * cis(-2.0 * PI * dot(&l.modulation, t)),
                    ..l.clone()
                })
                .collect(),
            self.continuous
                .iter()
                .map(|c| ContinuousTerm {
                    density: c.density.translate(t),
                    window: c.window.as_ref().map(|w| Window {
                        center: shift(&w.center),
                        ..w.clone()
                    }),
                })
                .collect(),
        ))
    }

    /// `psi_-`, defined by `psi_-(f) = psi(f_-)`.
    pub fn reflect(&self) -> DistExpr {
        let neg = |x: &Point| -> Point { x.iter().map(|v| -v).collect() };
        Self::assemble(
            self.dim,
            self.atoms
                .iter()
                .map(|a| PointAtom {
                    x: neg(&a.x),
                    order: a.order.clone(),
                    w: a.w * a.order.sign(),
                })
                .collect(),
            self.lattices
                .iter()
                .map(|l| LatticeTerm {
                    offset: neg(&l.offset),
                    modulation: neg(&l.modulation),
                    w: l.w * l.order.sign(),
                    ..l.clone()
                })
                .collect(),
            self.continuous
                .iter()
                .map(|c| ContinuousTerm {
                    density: c.density.reflect(),
                    window: c.window.as_ref().map(|w| Window {
                        center: neg(&w.center),
                        ..w.clone()
                    }),
                })
                .collect(),
        )
    }

    /// Complex conjugate, `conj(psi)(f) = conj(psi(conj f))`.
    pub fn conj(&self) -> DistExpr {
        Self::assemble(
            self.dim,
            self.atoms
                .iter()
                .map(|a| PointAtom { w: a.w.conj(), ..a.clone() })
                .collect(),
            self.lattices
                .iter()
                .map(|l| LatticeTerm {
                    w: l.w.conj(),
                    modulation: l.modulation.iter().map(|v| -v).collect(),
                    ..l.clone()
                })
                .collect(),
            self.continuous
                .iter()
                .map(|c| ContinuousTerm {
                    density: c.density.conj(),
                    window: c.window.clone(),
                })
                .collect(),
        )
    }

    /// `conj(psi_-)`.
    pub fn tilde(&self) -> DistExpr {
        self.reflect().conj()
    }

    /// `D^alpha psi`, with `D^alpha psi(f) = (-1)^{|alpha|} psi(D^alpha f)`.
    pub fn derivative(&self, alpha: &MultiIndex) -> Result<DistExpr> {
        check_dim(self.dim, alpha.dim())?;
        let mut continuous = Vec::with_capacity(self.continuous.len());
        for c in &self.continuous {
            c.require_unwindowed("derivative")?;
            continuous.push(ContinuousTerm::new(c.density.derivative(alpha)));
        }
        Ok(Self::assemble(
            self.dim,
            self.atoms
                .iter()
                .map(|a| PointAtom {
                    order: &a.order + alpha,
                    ..a.clone()
                })
                .collect(),
            self.lattices
                .iter()
                .map(|l| LatticeTerm {
                    order: &l.order + alpha,
                    ..l.clone()
                })
                .collect(),
            continuous,
        ))
    }

    /// `chi_x psi` with `chi_x(y) = e^{2 pi i x.y}`.
    pub fn char_multiply(&self, x: &[f64]) -> Result<DistExpr> {
        check_dim(self.dim, x.len())?;
        // D^alpha delta_y -> sum_beta C(alpha, beta) (-2 pi i x)^{alpha - beta} chi_x(y) D^beta delta_y
        let leibniz = |order: &MultiIndex| -> Vec<(MultiIndex, Complex64)> {
            order
                .lower_box()
                .into_iter()
                .filter_map(|beta| {
                    let rest = order.checked_sub(&beta)?;
                    let mut c = Complex64::new(order.binomial(&beta), 0.0);
                    for (k, xi) in rest.orders().iter().zip(x) {
                        c *= Complex64::new(0.0, -2.0 * PI * xi).powu(*k);
                    }
                    (c != Complex64::default()).then_some((beta, c))
                })
                .collect()
        };
        let mut atoms = Vec::new();
        for a in &self.atoms {
            let chi = cis(2.0 * PI * dot(x, &a.x));
            for (beta, c) in leibniz(&a.order) {
                atoms.push(PointAtom {
                    x: a.x.clone(),
                    order: beta,
                    w: a.w * chi * c,
                });
            }
        }
        let mut lattices = Vec::new();
        for l in &self.lattices {
            let modulation: Point = l.modulation.iter().zip(x).map(|(a, b)| a + b).collect();
            for (beta, c) in leibniz(&l.order) {
                lattices.push(LatticeTerm {
                    order: beta,
                    w: l.w * c,
                    modulation: modulation.clone(),
                    ..l.clone()
                });
            }
        }
        let continuous = self
            .continuous
            .iter()
            .map(|c| ContinuousTerm {
                density: c.density.char_multiply(x),
                window: c.window.clone(),
            })
            .collect();
        Ok(Self::assemble(self.dim, atoms, lattices, continuous))
    }

    /// Exact convolution when at least one factor is a finite atom sum.
    pub fn convolve_finite(&self, other: &DistExpr) -> Result<DistExpr> {
        check_dim(self.dim, other.dim)?;
        let (big, small) = if other.is_finite() {
            (self, other)
        } else if self.is_finite() {
            (other, self)
        } else {
            return Err(Error::Unsupported(
                "convolution of two distributions without compact support".into(),
            ));
        };
        let mut atoms = Vec::with_capacity(big.atoms.len() * small.atoms.len());
        for a in &big.atoms {
            for b in &small.atoms {
                atoms.push(PointAtom {
                    x: a.x.iter().zip(&b.x).map(|(p, q)| p + q).collect(),
                    order: &a.order + &b.order,
                    w: a.w * b.w,
                });
            }
        }
        let mut lattices = Vec::new();
        for l in &big.lattices {
            for b in &small.atoms {
                lattices.push(LatticeTerm {
                    offset: l.offset.iter().zip(&b.x).map(|(p, q)| p + q).collect(),
                    order: &l.order + &b.order,
                    w: l.w * b.w * cis(-2.0 * PI * dot(&l.modulation, &b.x)),
                    ..l.clone()
                });
            }
        }
        let mut continuous = Vec::new();
        for c in &big.continuous {
            c.require_unwindowed("convolution")?;
            for b in &small.atoms {
                // rho * D^beta delta_y = D^beta rho(. - y)
                let t = c.density.translate(&b.x).derivative(&b.order).scale(b.w);
                continuous.push(ContinuousTerm::new(t));
            }
        }
        Ok(Self::assemble(self.dim, atoms, lattices, continuous))
    }

    /// `h_R psi`, `(h_R psi)(f) = psi(h_R f)`.
    pub fn cutoff(&self, cutoff: &SmoothCutoff, radius: f64) -> Result<DistExpr> {
        let h = cutoff.make_vanhove(radius)?;
        let mut source: Vec<PointAtom> = self.atoms.clone();
        for l in &self.lattices {
            source.extend(l.expand(&vec![0.0; self.dim], radius + 1.0));
        }
        let mut atoms = Vec::with_capacity(source.len());
        for a in source {
            let r = a.x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r <= radius {
                atoms.push(a);
            } else if r < radius + 1.0 {
                // w C(alpha, beta) (-1)^{|alpha - beta|} D^{alpha - beta} h_R(x) D^beta delta_x
                for beta in a.order.lower_box() {
                    let rest = a.order.checked_sub(&beta).expect("beta <= alpha");
                    let dh = h.deriv_eval(&rest, &a.x)?;
                    if dh != 0.0 {
                        atoms.push(PointAtom {
                            x: a.x.clone(),
                            order: beta.clone(),
                            w: a.w * (a.order.binomial(&beta) * rest.sign() * dh),
                        });
                    }
                }
            }
        }
        let mut continuous = Vec::with_capacity(self.continuous.len());
        for c in &self.continuous {
            c.require_unwindowed("cutoff")?;
            continuous.push(ContinuousTerm {
                density: c.density.clone(),
                window: Some(Window {
                    cutoff: *cutoff,
                    radius,
                    center: Point::from_elem(0.0, self.dim),
                }),
            });
        }
        Ok(Self::assemble(self.dim, atoms, Vec::new(), continuous))
    }

    /// Structural equality up to the merge tolerance on locations and a
    /// relative tolerance `tol` on weights.
    pub fn approx_eq(&self, other: &DistExpr, tol: f64) -> bool {
        canonical::approx_eq(self, other, tol)
    }
}

#[cfg(test)]
mod tests;
