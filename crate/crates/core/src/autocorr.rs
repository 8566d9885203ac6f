//! Finite-volume autocorrelation approximants and their limits.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comb::{DistExpr, LatticeTerm, PointAtom};
use crate::error::{Error, Result};
use crate::lattice::{ball_volume, Lattice};
use crate::multi_index::{MultiIndex, Point};
use crate::pairing::{apply, PairingBattery};
use crate::schwartz::{SmoothCutoff, TestFunction};

/// Pair lists above this size are refused on the generic path.
const MAX_GENERIC_PAIRS: usize = 1 << 23;
/// Cell budget for the dense lattice path.
const MAX_DENSE_CELLS: usize = 1 << 26;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RadiusSchedule {
    radii: Vec<f64>,
}

impl RadiusSchedule {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 4 {
            return Err(Error::InvalidArgument("schedule needs at least 4 radii".into()));
        }
        if radii.iter().any(|r| !(*r >= 1.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument("radii must be finite and >= 1".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
        }
        if radii[radii.len() - 1] / radii[0] < 8.0 {
            return Err(Error::InvalidArgument("schedule must span a ratio of at least 8".into()));
        }
        Ok(RadiusSchedule { radii })
    }

    /// `r0 * 2^k`, `k = 0..n`.
    pub fn geometric(r0: f64, n: usize) -> Result<Self> {
        Self::new((0..n).map(|k| r0 * 2f64.powi(k as i32)).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        Self::geometric(8.0, 6).expect("valid")
    }
}

impl TryFrom<Vec<f64>> for RadiusSchedule {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RadiusSchedule> for Vec<f64> {
    fn from(s: RadiusSchedule) -> Self {
        s.radii
    }
}

impl std::str::FromStr for RadiusSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let radii = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("radius '{t}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(radii)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximantTrace {
    pub schedule: RadiusSchedule,
    /// Row `n`, column `j`: `phi_{R_n}(f_j * tilde f_j)`.
    pub evaluations: Vec<Vec<Complex64>>,
    pub limit: Option<DistExpr>,
    /// Battery mismatch between the closed-form limit and the last row.
    pub limit_residual: Option<f64>,
    pub converged: bool,
    /// Entry `n` compares rows `n` and `n + 1`.
    pub cauchy_residuals: Vec<f64>,
    /// Pair weight involving corona atoms, per radius.
    pub corona: Vec<f64>,
    pub tol: f64,
}

impl ApproximantTrace {
    /// `radius,residual` rows, one per residual, keyed by the larger radius.
    pub fn residuals_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["radius", "residual"]).map_err(csv_err)?;
        for (r, res) in self.schedule.radii[1..].iter().zip(&self.cauchy_residuals) {
            w.write_record([format!("{r:.16e}"), format!("{res:.16e}")]).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

fn pair_weight(a: &PointAtom, b: &PointAtom) -> Complex64 {
    a.w * b.w.conj() * b.order.sign()
}

fn generic_pairs(atoms: &[PointAtom]) -> Result<Vec<PointAtom>> {
    let n = atoms.len();
    if n.saturating_mul(n) > MAX_GENERIC_PAIRS {
        return Err(Error::InvalidArgument(format!(
            "{n} atoms off a common lattice exceed the pair budget"
        )));
    }
    let rows: Vec<Vec<PointAtom>> = atoms
        .par_iter()
        .map(|a| {
            atoms
                .iter()
                .map(|b| PointAtom {
                    x: a.x.iter().zip(&b.x).map(|(p, q)| p - q).collect(),
                    order: &a.order + &b.order,
                    w: pair_weight(a, b),
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Pair sums indexed by lattice-coordinate differences. Accumulates in the
/// same pair order as the generic path and keeps the smallest difference
/// vector per cell as its location, so the canonical output is identical.
fn dense_pairs(atoms: &[PointAtom], lattice: &Lattice) -> Option<Vec<PointAtom>> {
    let d = lattice.dim();
    let origin = &atoms[0].x;
    let coords: Vec<Vec<i64>> = atoms
        .iter()
        .map(|a| {
            let rel: Vec<f64> = a.x.iter().zip(origin).map(|(p, o)| p - o).collect();
            lattice.integer_coords(&rel)
        })
        .collect::<Option<_>>()?;
    let span: Vec<i64> = (0..d)
        .map(|k| {
            let lo = coords.iter().map(|c| c[k]).min().unwrap_or(0);
            let hi = coords.iter().map(|c| c[k]).max().unwrap_or(0);
            hi - lo
        })
        .collect();
    let extent: Vec<usize> = span.iter().map(|s| (2 * s + 1) as usize).collect();
    let cells = extent.iter().try_fold(1usize, |acc, e| acc.checked_mul(*e))?;
    let mut orders: Vec<MultiIndex> = Vec::new();
    let atom_order: Vec<usize> = atoms
        .iter()
        .map(|a| match orders.iter().position(|o| *o == a.order) {
            Some(i) => i,
            None => {
                orders.push(a.order.clone());
                orders.len() - 1
            }
        })
        .collect();
    let mut sums: Vec<MultiIndex> = Vec::new();
    let mut sum_id = vec![0usize; orders.len() * orders.len()];
    for (i, a) in orders.iter().enumerate() {
        for (j, b) in orders.iter().enumerate() {
            let s = a + b;
            sum_id[i * orders.len() + j] = match sums.iter().position(|o| *o == s) {
                Some(k) => k,
                None => {
                    sums.push(s);
                    sums.len() - 1
                }
            };
        }
    }
    if cells.checked_mul(sums.len())? > MAX_DENSE_CELLS {
        return None;
    }
    let flat = |ci: &[i64], cj: &[i64]| -> usize {
        let mut idx = 0usize;
        for k in 0..d {
            idx = idx * extent[k] + (ci[k] - cj[k] + span[k]) as usize;
        }
        idx
    };
    let mut acc = vec![Complex64::default(); cells * sums.len()];
    let mut seen = vec![false; cells * sums.len()];
    let mut loc = vec![0.0f64; cells * sums.len() * d];
    for (i, a) in atoms.iter().enumerate() {
        for (j, b) in atoms.iter().enumerate() {
            let w = pair_weight(a, b);
            if w == Complex64::default() {
                continue;
            }
            let s = sum_id[atom_order[i] * orders.len() + atom_order[j]];
            let slot = s * cells + flat(&coords[i], &coords[j]);
            let l = &mut loc[slot * d..(slot + 1) * d];
            if seen[slot] {
                acc[slot] += w;
                for k in 0..d {
                    l[k] = l[k].min(a.x[k] - b.x[k]);
                }
            } else {
                seen[slot] = true;
                acc[slot] = w;
                for k in 0..d {
                    l[k] = a.x[k] - b.x[k];
                }
            }
        }
    }
    let mut out = Vec::new();
    for slot in 0..acc.len() {
        if seen[slot] {
            out.push(PointAtom {
                x: Point::from_slice(&loc[slot * d..(slot + 1) * d]),
                order: sums[slot / cells].clone(),
                w: acc[slot],
            });
        }
    }
    Some(out)
}

enum Side {
    Positive,
    Zero,
    Negative,
}

fn side(x: &[f64], tol: f64) -> Side {
    for &v in x {
        if v > tol {
            return Side::Positive;
        }
        if v < -tol {
            return Side::Negative;
        }
    }
    Side::Zero
}

/// Rebuilds the negative half from the positive half so that `tilde(phi) == phi` bitwise.
fn hermitize(phi: &DistExpr) -> Result<DistExpr> {
    let d = phi.dim();
    let scale = phi
        .atoms()
        .iter()
        .flat_map(|a| a.x.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut atoms = Vec::with_capacity(phi.atoms().len());
    for a in phi.atoms() {
        let s = a.order.sign();
        match side(&a.x, tol) {
            Side::Positive => {
                atoms.push(a.clone());
                atoms.push(PointAtom {
                    x: a.x.iter().map(|v| -v).collect(),
                    order: a.order.clone(),
                    w: a.w.conj() * s,
                });
            }
            Side::Zero => atoms.push(PointAtom {
                x: Point::from_elem(0.0, d),
                order: a.order.clone(),
                w: (a.w + a.w.conj() * s) * 0.5,
            }),
            Side::Negative => {}
        }
    }
    DistExpr::from_atoms(d, atoms)
}

/// `(1/norm) sum_{i,j} a_i * tilde(a_j)` over a finite atom list.
///
/// With a lattice hint, atoms on a single coset of that lattice take the
/// dense path; anything else takes the generic pair loop. Both produce the
/// same canonical output.
pub fn autocorr_atoms(
    dim: usize,
    atoms: &[PointAtom],
    lattice: Option<&Lattice>,
    norm: f64,
) -> Result<DistExpr> {
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("normalisation must be positive".into()));
    }
    if atoms.is_empty() {
        return Ok(DistExpr::zero(dim));
    }
    let pairs = match lattice.and_then(|l| dense_pairs(atoms, l)) {
        Some(p) => p,
        None => generic_pairs(atoms)?,
    };
    let merged = DistExpr::from_atoms(dim, pairs)?;
    hermitize(&merged.scale(Complex64::new(1.0 / norm, 0.0)))
}

fn common_lattice(psi: &DistExpr) -> Option<&Lattice> {
    let first = &psi.lattices().first()?.lattice;
    psi.lattices()
        .iter()
        .all(|l| l.lattice.same_as(first))
        .then_some(first)
}

fn require_comb(psi: &DistExpr) -> Result<()> {
    if !psi.continuous().is_empty() {
        return Err(Error::Unsupported(
            "autocorrelation approximants of distributions with continuous parts".into(),
        ));
    }
    Ok(())
}

/// `phi_R = (1/vol B_R) (h_R psi) * tilde(h_R psi)`.
pub fn finite_autocorr(psi: &DistExpr, h: &SmoothCutoff, radius: f64) -> Result<DistExpr> {
    require_comb(psi)?;
    let cut = psi.cutoff(h, radius)?;
    autocorr_atoms(
        psi.dim(),
        cut.atoms(),
        common_lattice(psi),
        ball_volume(psi.dim(), radius),
    )
}

/// `(1/vol B_R) sum |w_i||w_j|` over pairs with at least one atom in the corona.
pub fn corona_contribution(psi: &DistExpr, h: &SmoothCutoff, radius: f64) -> Result<f64> {
    require_comb(psi)?;
    let cut = psi.cutoff(h, radius)?;
    let (mut total, mut inner) = (0.0, 0.0);
    for a in cut.atoms() {
        let r = a.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        total += a.w.norm();
        if r <= radius {
            inner += a.w.norm();
        }
    }
    Ok((total * total - inner * inner) / ball_volume(psi.dim(), radius))
}

/// Closed-form autocorrelation of `w chi_m D^alpha delta_{Lambda + o}`:
/// `(-1)^{|alpha|} dens |w|^2 chi_m D^{2 alpha} delta_Lambda`.
pub fn exact_autocorr_lattice(term: &LatticeTerm) -> DistExpr {
    let d = term.dim();
    let w = term.order.sign() * term.lattice.density() * term.w.norm_sqr();
    DistExpr::from_lattice_term(LatticeTerm {
        lattice: term.lattice.clone(),
        order: term.order.scaled(2),
        w: Complex64::new(w, 0.0),
        offset: Point::from_elem(0.0, d),
        modulation: term.modulation.clone(),
    })
    .expect("valid lattice term")
}

/// Closed-form autocorrelation of a finite sum of lattice terms on one lattice.
/// Cross terms between different modulations average to zero.
pub fn exact_autocorr_lattices(psi: &DistExpr) -> Result<DistExpr> {
    if !psi.atoms().is_empty() || !psi.continuous().is_empty() {
        return Err(Error::Unsupported("closed form needs a pure lattice comb".into()));
    }
    if psi.lattices().is_empty() {
        return Ok(DistExpr::zero(psi.dim()));
    }
    let lattice = common_lattice(psi)
        .ok_or_else(|| Error::Unsupported("terms on different lattices".into()))?
        .clone();
    let dens = lattice.density();
    let mut terms = Vec::new();
    for a in psi.lattices() {
        for b in psi.lattices() {
            let tol = 1e-12 * a.modulation.iter().chain(&b.modulation).fold(1.0f64, |m, v| m.max(v.abs()));
            if a.modulation.iter().zip(&b.modulation).any(|(x, y)| (x - y).abs() > tol) {
                continue;
            }
            terms.push(LatticeTerm {
                lattice: lattice.clone(),
                order: &a.order + &b.order,
                w: a.w * b.w.conj() * (dens * b.order.sign()),
                offset: a.offset.iter().zip(&b.offset).map(|(p, q)| p - q).collect(),
                modulation: a.modulation.clone(),
            });
        }
    }
    DistExpr::new(psi.dim(), Vec::new(), terms, Vec::new())
}

/// Autocorrelation of `psi * theta` from that of `psi`: `phi * theta * tilde(theta)`.
pub fn autocorr_transfer(phi: &DistExpr, theta: &DistExpr) -> Result<DistExpr> {
    if !theta.lattices().is_empty() || !theta.continuous().is_empty() {
        return Err(Error::Unsupported("transfer needs a finite atom sum".into()));
    }
    phi.convolve_finite(theta)?.convolve_finite(&theta.tilde())
}

/// `f * tilde(f)` for each battery member.
pub fn positive_definite_probes(battery: &PairingBattery) -> Result<Vec<TestFunction>> {
    battery.functions.iter().map(|f| f.convolve_fn(&f.tilde())).collect()
}

/// Evaluates the approximants along `schedule` against `f * tilde(f)` and
/// tests the relative Cauchy residual over the last three steps.
pub fn autocorr_converge(
    psi: &DistExpr,
    h: &SmoothCutoff,
    schedule: &RadiusSchedule,
    battery: &PairingBattery,
    tol: f64,
) -> Result<ApproximantTrace> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    require_comb(psi)?;
    let probes = positive_definite_probes(battery)?;
    let rows: Vec<(Vec<Complex64>, f64)> = schedule
        .radii
        .par_iter()
        .map(|&r| -> Result<_> {
            let phi = finite_autocorr(psi, h, r)?;
            let row = probes.iter().map(|g| apply(&phi, g)).collect::<Result<Vec<_>>>()?;
            Ok((row, corona_contribution(psi, h, r)?))
        })
        .collect::<Result<_>>()?;
    let (evaluations, corona): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let cauchy_residuals: Vec<f64> = evaluations
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (b - a).norm() / (1.0 + a.norm()))
                .fold(0.0, f64::max)
        })
        .collect();
    let converged = cauchy_residuals.len() >= 3 && cauchy_residuals.iter().rev().take(3).all(|r| *r < tol);
    let (mut limit, mut limit_residual) = (None, None);
    if converged && psi.atoms().is_empty() && !psi.lattices().is_empty() {
        if let Ok(exact) = exact_autocorr_lattices(psi) {
            let last = evaluations.last().expect("non-empty schedule");
            let mut res = 0.0f64;
            for (g, v) in probes.iter().zip(last) {
                let e = apply(&exact, g)?;
                res = res.max((e - v).norm() / (1.0 + e.norm()));
            }
            limit_residual = Some(res);
            // the O(1/R) tail of a doubling schedule is of the order of the last residuals
            if res < 10.0 * tol {
                limit = Some(exact);
            }
        }
    }
    Ok(ApproximantTrace {
        schedule: schedule.clone(),
        evaluations,
        limit,
        limit_residual,
        converged,
        cauchy_residuals,
        corona,
        tol,
    })
}
