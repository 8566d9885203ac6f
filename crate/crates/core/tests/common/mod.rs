//! Random inputs and invariant checks shared by the property suite and the
//! acceptance binary. Every check draws its case from a seed, so a failing
//! seed reproduces.

#![allow(dead_code)]

use distcomb::autocorr::{autocorr_converge, finite_autocorr, RadiusSchedule};
use distcomb::pairing::{apply, tb_norm_table, PairingBattery};
use distcomb::schwartz::{BumpFn, CutoffProfile, GaussPolyFn, GaussTerm, SmoothCutoff, TestFunction};
use distcomb::spectrum::mean_dist;
use distcomb::{ContinuousTerm, DistExpr, Lattice, LatticeTerm, MultiIndex, PointAtom, Poly};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DUALITY_TOL: f64 = 1e-9;
pub const PD_TOL: f64 = 1e-8;
pub const VANHOVE_TOL: f64 = 1e-3;
pub const MEAN_TOL: f64 = 1e-3;
pub const MEAN_WINDOWS: [u32; 4] = [25, 50, 100, 200];

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uni(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo..hi)
}

fn weight(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(uni(r, -2.0, 2.0), uni(r, -2.0, 2.0))
}

fn point(r: &mut ChaCha8Rng, dim: usize, half: f64) -> Vec<f64> {
    (0..dim).map(|_| uni(r, -half, half)).collect()
}

fn order(r: &mut ChaCha8Rng, dim: usize, max_total: u32) -> MultiIndex {
    let all = MultiIndex::all_up_to(dim, max_total);
    all[r.random_range(0..all.len())].clone()
}

fn lattice(r: &mut ChaCha8Rng, dim: usize) -> Lattice {
    match (dim, r.random_range(0..3)) {
        (1, 0) => Lattice::integer(1),
        (1, 1) => Lattice::scaled_integer(1, 2.0).unwrap(),
        (1, _) => Lattice::scaled_integer(1, 0.5).unwrap(),
        (_, 0) => Lattice::integer(dim),
        (2, _) => Lattice::new(&[vec![1.0, 0.0], vec![0.5, 1.0]]).unwrap(),
        _ => Lattice::scaled_integer(dim, 1.5).unwrap(),
    }
}

pub fn test_fn(r: &mut ChaCha8Rng, dim: usize) -> TestFunction {
    if r.random_bool(0.3) {
        let c = point(r, dim, 1.0);
        let b = BumpFn::new(&c, uni(r, 0.5, 3.0)).unwrap();
        return TestFunction::Bump(b.scaled(weight(r)));
    }
    let deg = r.random_range(0..3u32);
    let alpha = order(r, dim, deg);
    let g = GaussPolyFn::monomial_gaussian(alpha, uni(r, 0.5, 2.0), weight(r))
        .add(&GaussPolyFn::gaussian(&vec![0.0; dim], uni(r, 0.5, 2.0)).scale(weight(r)))
        .char_multiply(&point(r, dim, 1.0))
        .translate(&point(r, dim, 1.0));
    TestFunction::Gauss(g)
}

#[derive(Clone, Copy, PartialEq)]
pub enum Modulation {
    None,
    Any,
    /// Half a dual basis vector: the modulated comb stays periodic with a
    /// period that divides every integer window.
    Half,
}

pub struct CombShape {
    pub max_atoms: usize,
    pub max_lattices: usize,
    pub max_order: u32,
    pub modulation: Modulation,
    pub density: bool,
    /// Put atoms on the lattice of the first lattice term.
    pub atoms_on_lattice: bool,
}

pub fn comb(r: &mut ChaCha8Rng, dim: usize, shape: &CombShape) -> DistExpr {
    let lattices: Vec<LatticeTerm> = (0..r.random_range(1..=shape.max_lattices.max(1)))
        .take(shape.max_lattices)
        .map(|_| {
            let l = lattice(r, dim);
            let mut t = LatticeTerm::new(l.clone(), order(r, dim, shape.max_order.min(1)), weight(r))
                .with_offset(&point(r, dim, 1.0));
            match shape.modulation {
                Modulation::Any if r.random_bool(0.5) => {
                    t.modulation = point(r, dim, 1.0).into_iter().collect();
                }
                Modulation::Half if r.random_bool(0.5) => {
                    let b = &l.dual_basis_vectors()[r.random_range(0..dim)];
                    t.modulation = b.iter().map(|v| 0.5 * v).collect();
                }
                _ => {}
            }
            t
        })
        .collect();
    let atoms = (0..r.random_range(0..=shape.max_atoms))
        .map(|_| {
            let x = match lattices.first() {
                Some(t) if shape.atoms_on_lattice => {
                    let n: Vec<f64> = (0..dim).map(|_| r.random_range(-4..=4) as f64).collect();
                    let p = t.lattice.point(&n);
                    p.iter().zip(&t.offset).map(|(a, b)| a + b).collect()
                }
                _ => point(r, dim, 3.0),
            };
            PointAtom::new(&x, order(r, dim, shape.max_order), weight(r))
        })
        .collect();
    let continuous = if shape.density && r.random_bool(0.5) {
        let g = GaussTerm::gaussian(&point(r, dim, 1.0), uni(r, 0.5, 2.0)).scale(weight(r));
        vec![ContinuousTerm::new(g)]
    } else {
        Vec::new()
    };
    DistExpr::new(dim, atoms, lattices, continuous).unwrap()
}

fn close(a: Complex64, b: Complex64, rel: f64, floor: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(floor)
}

fn expect(ok: bool, what: &str, a: Complex64, b: Complex64) -> Check {
    if ok {
        Ok(())
    } else {
        Err(format!("{what}: {a} vs {b}"))
    }
}

fn pair(psi: &DistExpr, f: &TestFunction) -> Result<Complex64, String> {
    apply(psi, f).map_err(|e| e.to_string())
}

/// Scale for relative comparisons: pairing of `|psi|` with a unit Gaussian, so
/// exact cancellations are judged against the size of the pieces.
fn pairing_floor(psi: &DistExpr) -> f64 {
    let total: f64 = psi.atoms().iter().map(|a| a.w.norm()).sum::<f64>()
        + psi.lattices().iter().map(|l| l.w.norm()).sum::<f64>()
        + psi.continuous().len() as f64;
    1e-3 * total.max(1.0)
}

/// Involutions on canonical forms and the four pairing dualities.
pub fn check_duality(seed: u64) -> Check {
    let mut r = rng(seed);
    let dim = if r.random_bool(0.75) { 1 } else { 2 };
    let shape = CombShape {
        max_atoms: 3,
        max_lattices: 1,
        max_order: 2,
        modulation: Modulation::Any,
        atoms_on_lattice: false,
        density: true,
    };
    let psi = comb(&mut r, dim, &shape);
    let f = test_fn(&mut r, dim);
    let t = point(&mut r, dim, 2.0);
    let x = point(&mut r, dim, 1.5);
    let alpha = order(&mut r, dim, 2);
    let floor = pairing_floor(&psi);

    if psi.reflect().reflect() != psi {
        return Err("reflect is not an involution".into());
    }
    if psi.tilde().tilde() != psi {
        return Err("tilde is not an involution".into());
    }

    let e = |x: distcomb::Error| x.to_string();
    let lhs = pair(&psi.translate(&t).map_err(e)?, &f)?;
    let neg: Vec<f64> = t.iter().map(|v| -v).collect();
    let rhs = pair(&psi, &f.translate(&neg))?;
    expect(close(lhs, rhs, DUALITY_TOL, floor), "translate", lhs, rhs)?;

    // D^alpha of a bump is not in the parametric family, so this identity uses a Gaussian one
    let g = loop {
        if let TestFunction::Gauss(g) = test_fn(&mut r, dim) {
            break g;
        }
    };
    let lhs = pair(&psi.derivative(&alpha).map_err(e)?, &TestFunction::Gauss(g.clone()))?;
    let rhs = pair(&psi, &TestFunction::Gauss(g.derivative(&alpha)))? * alpha.sign();
    expect(close(lhs, rhs, DUALITY_TOL, floor), "derivative", lhs, rhs)?;

    let lhs = pair(&psi.tilde(), &f)?;
    let rhs = pair(&psi, &f.tilde())?.conj();
    expect(close(lhs, rhs, DUALITY_TOL, floor), "tilde", lhs, rhs)?;
    let lhs = pair(&psi.char_multiply(&x).map_err(e)?, &f)?;
    let rhs = pair(&psi, &f.char_multiply(&x))?;
    expect(close(lhs, rhs, DUALITY_TOL, floor), "character", lhs, rhs)
}

/// Seminorms grow and norm estimates shrink as `(M, N)` grows.
pub fn check_monotonicity(seed: u64) -> Check {
    let mut r = rng(seed);
    let f = test_fn(&mut r, 1);
    let mut prev = Vec::new();
    for m in 0..=2u32 {
        let mut row = Vec::new();
        for n in 0..=2u32 {
            let s = f.seminorm(m, n).map_err(|e| e.to_string())?;
            if n > 0 && s < row[n as usize - 1] {
                return Err(format!("seminorm decreased in N at ({m},{n})"));
            }
            if m > 0 && s < prev[n as usize] {
                return Err(format!("seminorm decreased in M at ({m},{n})"));
            }
            row.push(s);
        }
        prev = row;
    }

    let shape = CombShape {
        max_atoms: 2,
        max_lattices: 1,
        max_order: 1,
        modulation: Modulation::None,
        atoms_on_lattice: false,
        density: false,
    };
    let psi = comb(&mut r, 1, &shape);
    let battery = PairingBattery::default_battery(1);
    let table = tb_norm_table(&psi, 2, 2, &battery, 3.0).map_err(|e| e.to_string())?;
    let at = |m: u32, n: u32| table.iter().find(|e| e.m == m && e.n == n).unwrap().value;
    for m in 0..=2u32 {
        for n in 0..=2u32 {
            if n > 0 && at(m, n) > at(m, n - 1) {
                return Err(format!("norm estimate increased in N at ({m},{n})"));
            }
            if m > 0 && at(m, n) > at(m - 1, n) {
                return Err(format!("norm estimate increased in M at ({m},{n})"));
            }
        }
    }
    Ok(())
}

/// Finite autocorrelations are hermitian and nonnegative on `f * tilde f`.
pub fn check_autocorr_positive(seed: u64) -> Check {
    let mut r = rng(seed);
    let shape = CombShape {
        max_atoms: 3,
        max_lattices: 2,
        max_order: 2,
        modulation: Modulation::Any,
        atoms_on_lattice: false,
        density: false,
    };
    let psi = comb(&mut r, 1, &shape);
    let profile = if r.random_bool(0.5) {
        CutoffProfile::BumpIntegral
    } else {
        CutoffProfile::Logistic
    };
    let radius = uni(&mut r, 3.0, 12.0);
    let phi = finite_autocorr(&psi, &SmoothCutoff::new(profile), radius).map_err(|e| e.to_string())?;
    if phi.tilde() != phi {
        return Err("finite autocorrelation is not hermitian".into());
    }
    for _ in 0..4 {
        let f = test_fn(&mut r, 1);
        let g = f.convolve_fn(&f.tilde()).map_err(|e| e.to_string())?;
        let v = pair(&phi, &g)?;
        let mut scale = 0.0;
        for a in phi.atoms() {
            scale += (a.w * g.deriv_eval(&a.order, &a.x).map_err(|e| e.to_string())?).norm();
        }
        if v.re < -PD_TOL * scale || v.im.abs() > PD_TOL * scale.max(1e-300) {
            return Err(format!("positive-definiteness proxy failed: {v} at scale {scale}"));
        }
    }
    Ok(())
}

/// Two cutoff profiles give agreeing approximants at the largest radius, where
/// the traces are within tolerance of their limits.
pub fn check_vanhove_independence(seed: u64) -> Check {
    let mut r = rng(seed);
    let shape = CombShape {
        max_atoms: 2,
        max_lattices: 1,
        max_order: 0,
        modulation: Modulation::Any,
        atoms_on_lattice: true,
        density: false,
    };
    let psi = comb(&mut r, 1, &shape);
    // radii off the corona midpoint, where both profiles equal 1/2
    let schedule = RadiusSchedule::new(vec![128.3, 256.3, 512.3, 1024.3, 2048.3, 4096.3]).unwrap();
    let battery = PairingBattery::default_battery(1);
    let run = |p| autocorr_converge(&psi, &SmoothCutoff::new(p), &schedule, &battery, VANHOVE_TOL);
    let a = run(CutoffProfile::BumpIntegral).map_err(|e| e.to_string())?;
    let b = run(CutoffProfile::Logistic).map_err(|e| e.to_string())?;
    let (la, lb) = (a.evaluations.last().unwrap(), b.evaluations.last().unwrap());
    for (x, y) in la.iter().zip(lb) {
        if (x - y).norm() / (1.0 + x.norm()) > 2.0 * VANHOVE_TOL {
            return Err(format!(
                "profiles disagree: {x} vs {y}; residuals {:?} / {:?}",
                a.cauchy_residuals, b.cauchy_residuals
            ));
        }
    }
    Ok(())
}

fn mean(psi: &DistExpr) -> Result<Complex64, String> {
    let f0 = TestFunction::unit_gaussian(psi.dim());
    Ok(mean_dist(psi, &f0, &MEAN_WINDOWS, MEAN_TOL).map_err(|e| e.to_string())?.value)
}

/// Linearity, translation, tilde and reflection behaviour of the mean.
pub fn check_mean_invariances(seed: u64) -> Check {
    let mut r = rng(seed);
    let shape = CombShape {
        max_atoms: 2,
        max_lattices: 2,
        max_order: 1,
        modulation: Modulation::Half,
        atoms_on_lattice: false,
        density: false,
    };
    let mut psi = comb(&mut r, 1, &shape);
    if r.random_bool(0.5) {
        let c = GaussTerm::undamped(Poly::constant(1, weight(&mut r)), &[uni(&mut r, -1.0, 1.0)], &[0.0]);
        psi = psi.add(&DistExpr::density(c).unwrap()).unwrap();
    }
    let phi = comb(&mut r, 1, &shape);
    let (a, b) = (weight(&mut r), weight(&mut r));
    let t = [uni(&mut r, -3.0, 3.0)];

    let m_psi = mean(&psi)?;
    let m_phi = mean(&phi)?;
    let tol = |v: Complex64| MEAN_TOL * v.norm().max(1.0);

    let lin = mean(&psi.scale(a).add(&phi.scale(b)).unwrap())?;
    let want = a * m_psi + b * m_phi;
    expect((lin - want).norm() <= tol(want), "mean linearity", lin, want)?;
    let tr = mean(&psi.translate(&t).unwrap())?;
    expect((tr - m_psi).norm() <= tol(m_psi), "mean translation", tr, m_psi)?;
    let ti = mean(&psi.tilde())?;
    expect((ti - m_psi.conj()).norm() <= tol(m_psi), "mean tilde", ti, m_psi.conj())?;
    let re = mean(&psi.reflect())?;
    expect((re - m_psi).norm() <= tol(m_psi), "mean reflection", re, m_psi)
}
