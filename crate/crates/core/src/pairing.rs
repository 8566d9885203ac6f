//! Evaluation of `psi(f)`, `psi * f`, sup norms and translation-boundedness estimates.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comb::{ContinuousTerm, DistExpr, LatticeTerm};
use crate::error::{check_dim, Error, Result};
use crate::multi_index::{MultiIndex, Point};
use crate::quadrature;
use crate::schwartz::{BumpFn, GaussPolyFn, GaussTerm, TestFunction};

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: Complex64) {
        let step = |s: &mut f64, c: &mut f64, x: f64| {
            let t = *s + x;
            if s.abs() >= x.abs() {
                *c += (*s - t) + x;
            } else {
                *c += (x - t) + *s;
            }
            *s = t;
        };
        step(&mut self.sum.re, &mut self.comp.re, v.re);
        step(&mut self.sum.im, &mut self.comp.im, v.im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

/// `psi(f)`.
pub fn apply(psi: &DistExpr, f: &TestFunction) -> Result<Complex64> {
    check_dim(psi.dim(), f.dim())?;
    let mut acc = CompensatedSum::default();
    // atoms grouped by order so each derivative is prepared once
    let mut by_order: BTreeMap<&MultiIndex, Vec<usize>> = BTreeMap::new();
    for (i, a) in psi.atoms().iter().enumerate() {
        by_order.entry(&a.order).or_default().push(i);
    }
    for (order, idx) in by_order {
        let df = f.deriv_fn(order)?;
        let sign = order.sign();
        let (center, radius) = f.reach(order.total());
        for i in idx {
            let a = &psi.atoms()[i];
            let r2: f64 = a.x.iter().zip(&center).map(|(p, c)| (p - c).powi(2)).sum();
            if r2 > radius * radius {
                continue;
            }
            acc.add(a.w * sign * df.eval(&a.x));
        }
    }
    for l in psi.lattices() {
        acc.add(apply_lattice(l, f)?);
    }
    for c in psi.continuous() {
        acc.add(apply_continuous(c, f)?);
    }
    Ok(acc.value())
}

/// Lattice sum truncated to the reach ball of each piece of `f`.
fn apply_lattice(l: &LatticeTerm, f: &TestFunction) -> Result<Complex64> {
    let sign = l.order.sign();
    let mut acc = CompensatedSum::default();
    for piece in f.split() {
        let df = piece.deriv_fn(&l.order)?;
        let (center, radius) = piece.reach(l.order.total());
        for p in l.lattice.points_in_ball(&l.offset, &center, radius) {
            acc.add(l.weight_at(&p) * sign * df.eval(&p));
        }
    }
    Ok(acc.value())
}

fn apply_continuous(c: &ContinuousTerm, f: &TestFunction) -> Result<Complex64> {
    if let (None, TestFunction::Gauss(g)) = (&c.window, f) {
        // closed form: products of Gaussian terms integrate exactly
        let mut acc = CompensatedSum::default();
        for t in &g.terms {
            acc.add(c.density.mul(t).integral()?);
        }
        return Ok(acc.value());
    }
    let d = c.dim();
    let (fc, fr) = f.reach(0);
    let mut lo: Vec<f64> = fc.iter().map(|v| v - fr).collect();
    let mut hi: Vec<f64> = fc.iter().map(|v| v + fr).collect();
    if let Some(w) = &c.window {
        for i in 0..d {
            lo[i] = lo[i].max(w.center[i] - w.radius - 1.0);
            hi[i] = hi[i].min(w.center[i] + w.radius + 1.0);
        }
    }
    if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
        return Ok(Complex64::default());
    }
    let density_scale = match c.density.width {
        Some(w) => w / (1.0 + f64::from(c.density.poly.degree())).sqrt(),
        None => 1.0,
    };
    let freq = c.density.freq.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut scale = f.feature_scale().min(density_scale).min(0.25);
    if freq > 0.0 {
        scale = scale.min(0.25 / freq);
    }
    let integrand = |x: &[f64]| c.eval(x) * f.eval(x);
    Ok(if d == 1 {
        let panels = (((hi[0] - lo[0]) / scale).ceil() as usize).clamp(8, 4096);
        quadrature::composite(lo[0], hi[0], panels, 16, |x| integrand(&[x]))
    } else {
        let span = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        let cap = if d == 2 { 64 } else { 16 };
        let panels = ((span / scale).ceil() as usize).clamp(4, cap);
        quadrature::tensor_box(&lo, &hi, panels, 16, integrand)
    })
}

/// `(psi * f)(t) = psi(T_t f_-)`.
pub fn conv_eval(psi: &DistExpr, f: &TestFunction, t: &[f64]) -> Result<Complex64> {
    check_dim(psi.dim(), t.len())?;
    apply(psi, &f.reflect().translate(t))
}

/// Single lattice shared by every term, when `psi` is a pure unmodulated lattice comb.
fn common_period(psi: &DistExpr) -> Option<&crate::lattice::Lattice> {
    if !psi.atoms().is_empty() || !psi.continuous().is_empty() || psi.lattices().is_empty() {
        return None;
    }
    let first = &psi.lattices()[0].lattice;
    psi.lattices()
        .iter()
        .all(|l| !l.is_modulated() && l.lattice.same_as(first))
        .then_some(first)
}

/// `sup |psi * f|` over `[-window, window]^d`, or over one period cell for
/// pure lattice combs.
pub fn sup_norm(psi: &DistExpr, f: &TestFunction, window: f64) -> Result<f64> {
    if !(window > 0.0) {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    check_dim(psi.dim(), f.dim())?;
    if psi.is_zero() {
        return Ok(0.0);
    }
    let d = psi.dim();
    let fr = f.reflect();
    // surface evaluation failures (e.g. derivative order limits) before the scan
    apply(psi, &fr)?;
    let eval = |t: &[f64]| apply(psi, &fr.translate(t)).map(|v| v.norm()).unwrap_or(f64::NAN);
    Ok(match common_period(psi) {
        Some(lat) => {
            let g = |u: &[f64]| eval(&lat.point(u));
            crate::schwartz::sup_in_box(&g, &vec![0.5; d], 0.5)
        }
        None => crate::schwartz::sup_in_box(&eval, &vec![0.0; d], window),
    })
}

/// Empirical lower bound for `||psi||_{M,N}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub m: u32,
    pub n: u32,
    pub value: f64,
    pub battery_size: usize,
    /// Grid points per unit length used by the sup search.
    pub grid_resolution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingBattery {
    pub functions: Vec<TestFunction>,
    pub description: String,
}

impl PairingBattery {
    pub fn new(functions: Vec<TestFunction>, description: impl Into<String>) -> Result<Self> {
        let Some(first) = functions.first() else {
            return Err(Error::InvalidArgument("battery must be non-empty".into()));
        };
        let d = first.dim();
        for f in &functions {
            check_dim(d, f.dim())?;
        }
        Ok(PairingBattery {
            functions,
            description: description.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.functions[0].dim()
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn truncated(&self, n: usize) -> PairingBattery {
        PairingBattery {
            functions: self.functions[..n.min(self.len())].to_vec(),
            description: format!("{} (first {n})", self.description),
        }
    }

    /// Four Gaussians (widths 0.5, 1, 2, 4), two bumps (radii 1, 3) and two
    /// polynomial-Gaussian products.
    pub fn default_battery(dim: usize) -> PairingBattery {
        let origin = vec![0.0; dim];
        let mut fs: Vec<TestFunction> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&w| GaussPolyFn::gaussian(&origin, w).into())
            .collect();
        for r in [1.0, 3.0] {
            fs.push(BumpFn::new(&origin, r).expect("valid").into());
        }
        fs.push(GaussPolyFn::monomial_gaussian(MultiIndex::unit(dim, 0), 1.0, Complex64::new(1.0, 0.0)).into());
        fs.push(
            GaussPolyFn::monomial_gaussian(MultiIndex::unit(dim, 0).scaled(2), 1.5, Complex64::new(0.5, 0.5))
                .translate(&shifted(dim, 0.3))
                .into(),
        );
        PairingBattery {
            functions: fs,
            description: "gaussians w=0.5,1,2,4; bumps r=1,3; x e^{-pi x^2}; (0.5+0.5i) x^2 e^{-pi x^2/2.25} at 0.3".into(),
        }
    }

    /// Eight Gaussian-polynomial functions with assorted centres, widths and modulations.
    pub fn gaussian_battery(dim: usize) -> PairingBattery {
        let e0 = MultiIndex::unit(dim, 0);
        let specs: [(f64, f64, f64, u32, Complex64); 8] = [
            (0.0, 1.0, 0.0, 0, Complex64::new(1.0, 0.0)),
            (0.0, 0.5, 0.0, 0, Complex64::new(1.0, 0.0)),
            (0.2, 0.8, 0.0, 0, Complex64::new(1.0, 0.0)),
            (-0.35, 1.3, 0.15, 0, Complex64::new(0.7, -0.2)),
            (0.0, 1.0, 0.0, 1, Complex64::new(1.0, 0.0)),
            (0.1, 1.7, -0.3, 1, Complex64::new(0.0, 1.0)),
            (0.45, 0.9, 0.0, 2, Complex64::new(1.0, 0.5)),
            (-0.6, 2.2, 0.4, 3, Complex64::new(-0.4, 0.3)),
        ];
        let functions = specs
            .iter()
            .map(|&(c, w, xi, k, coeff)| {
                let mut t = GaussTerm::gaussian(&shifted(dim, c), w);
                t.poly = crate::poly::Poly::monomial(e0.scaled(k), coeff);
                let t = t.char_multiply(&shifted(dim, xi));
                TestFunction::Gauss(GaussPolyFn { terms: vec![t] })
            })
            .collect();
        PairingBattery {
            functions,
            description: "eight Gaussian-polynomial functions".into(),
        }
    }
}

fn shifted(dim: usize, c: f64) -> Point {
    (0..dim).map(|i| if i == 0 { c } else { 0.5 * c }).collect()
}

/// `max_f sup|psi * f| / ||f||_{M,N}` over the battery; a lower bound for `||psi||_{M,N}`.
pub fn tb_norm_estimate(
    psi: &DistExpr,
    m: u32,
    n: u32,
    battery: &PairingBattery,
    window: f64,
) -> Result<NormEstimate> {
    let table = tb_norm_table(psi, m, n, battery, window)?;
    Ok(table.into_iter().find(|e| e.m == m && e.n == n).expect("table covers (m, n)"))
}

/// Estimates for every `(M, N) <= (m_max, n_max)`, row-major in `M`.
///
/// Sup norms are computed once per battery function and seminorms come from a
/// single table, so the entries are monotone in `(M, N)` exactly.
pub fn tb_norm_table(
    psi: &DistExpr,
    m_max: u32,
    n_max: u32,
    battery: &PairingBattery,
    window: f64,
) -> Result<Vec<NormEstimate>> {
    if battery.is_empty() {
        return Err(Error::InvalidArgument("battery must be non-empty".into()));
    }
    let per_fn: Vec<(f64, BTreeMap<(MultiIndex, MultiIndex), f64>)> = battery
        .functions
        .par_iter()
        .map(|f| -> Result<_> {
            let s = if psi.is_zero() { 0.0 } else { sup_norm(psi, f, window)? };
            Ok((s, f.seminorm_table(m_max, n_max)?))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for m in 0..=m_max {
        for n in 0..=n_max {
            let value = per_fn
                .iter()
                .map(|(s, table)| {
                    let norm = table
                        .iter()
                        .filter(|((a, b), _)| a.total() <= m && b.total() <= n)
                        .map(|(_, v)| *v)
                        .fold(0.0, f64::max);
                    s / norm
                })
                .fold(0.0, f64::max);
            out.push(NormEstimate {
                m,
                n,
                value,
                battery_size: battery.len(),
                grid_resolution: 4096.0,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn z_comb(order: u32, w: f64) -> DistExpr {
        DistExpr::lattice_comb(Lattice::integer(1), MultiIndex::order1(order), c(w))
    }

    #[test]
    fn delta_pairing() {
        let f = TestFunction::Gauss(GaussPolyFn::gaussian(&[0.3], 1.2));
        let v = apply(&DistExpr::delta(&[0.0]), &f).unwrap();
        assert!((v - f.eval(&[0.0])).norm() < 1e-15);
    }

    #[test]
    fn odd_derivative_comb_vanishes_on_even_gaussian() {
        let v = apply(&z_comb(1, -1.0), &TestFunction::unit_gaussian(1)).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn second_derivative_atom() {
        let psi = DistExpr::atom(&[1.0], MultiIndex::order1(2), c(1.0));
        let v = apply(&psi, &TestFunction::unit_gaussian(1)).unwrap();
        let want = (4.0 * PI * PI - 2.0 * PI) * (-PI).exp();
        assert!((v.re - want).abs() < 1e-13);
        // finite-difference oracle
        let g = |x: f64| (-PI * x * x).exp();
        let h = 1e-4;
        let fd = (g(1.0 + h) - 2.0 * g(1.0) + g(1.0 - h)) / (h * h);
        assert!((v.re - fd).abs() < 1e-6);
    }

    #[test]
    fn convolution_examples() {
        let f = TestFunction::Gauss(GaussPolyFn::gaussian(&[0.2], 0.9));
        let t = [0.7];
        let v = conv_eval(&DistExpr::delta(&[0.0]), &f, &t).unwrap();
        assert!((v - f.eval(&t)).norm() < 1e-15);
        let v = conv_eval(&DistExpr::atom(&[0.0], MultiIndex::order1(1), c(1.0)), &f, &t).unwrap();
        let want = f.deriv_eval(&MultiIndex::order1(1), &t).unwrap();
        assert!((v - want).norm() < 1e-14);
        let theta3: f64 = (-60..=60).map(|k: i32| (-PI * f64::from(k * k)).exp()).sum();
        let v = conv_eval(&z_comb(0, 1.0), &TestFunction::unit_gaussian(1), &[0.0]).unwrap();
        assert!((v.re - theta3).abs() < 1e-12);
        assert!((theta3 - 1.086_434_811_213_308).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_examples() {
        let g = TestFunction::unit_gaussian(1);
        assert!((sup_norm(&DistExpr::delta(&[0.0]), &g, 10.0).unwrap() - 1.0).abs() < 1e-12);
        let theta3: f64 = (-60..=60).map(|k: i32| (-PI * f64::from(k * k)).exp()).sum();
        assert!((sup_norm(&z_comb(0, 1.0), &g, 2.0).unwrap() - theta3).abs() < 1e-12);
    }

    #[test]
    fn derivative_comb_sup_two_resolutions() {
        let psi = z_comb(1, -1.0);
        let g = TestFunction::unit_gaussian(1);
        let periodic = sup_norm(&psi, &g, 2.0).unwrap();
        // brute-force grid over a window, two resolutions
        let scan = |n: usize| {
            (0..=n)
                .map(|i| {
                    let t = -2.0 + 4.0 * i as f64 / n as f64;
                    conv_eval(&psi, &g, &[t]).unwrap().norm()
                })
                .fold(0.0, f64::max)
        };
        let (a, b) = (scan(40_000), scan(80_000));
        assert!((a - b).abs() < 1e-6);
        assert!((periodic - b).abs() < 1e-6);
    }

    #[test]
    fn density_pairing_exact_and_quadrature_agree() {
        let rho = DistExpr::density(GaussTerm::gaussian(&[0.4], 1.3)).unwrap();
        let f = TestFunction::Gauss(GaussPolyFn::gaussian(&[-0.2], 0.8));
        let exact = apply(&rho, &f).unwrap();
        let q = quadrature::composite(-12.0, 12.0, 200, 16, |x| rho.continuous()[0].eval(&[x]) * f.eval(&[x]));
        assert!((exact - q).norm() < 1e-13);
        let b = TestFunction::Bump(BumpFn::new(&[0.1], 1.5).unwrap());
        let vb = apply(&rho, &b).unwrap();
        let qb = quadrature::adaptive_simpson(-1.4, 1.6, 1e-13, |x| rho.continuous()[0].eval(&[x]) * b.eval(&[x]));
        assert!((vb - qb).norm() < 1e-10);
    }

    #[test]
    fn zero_distribution_norm() {
        let est = tb_norm_estimate(&DistExpr::zero(1), 1, 1, &PairingBattery::default_battery(1), 2.0).unwrap();
        assert_eq!(est.value, 0.0);
    }
}
