//! The random `delta / delta'` comb and the power-law weighted comb on `Z`.
//!
//! Samples are drawn with `ChaCha8Rng::seed_from_u64(seed)`; site `n` (in
//! increasing order from `-m`) takes `a_n = 1` when the next uniform `f64` in
//! `[0, 1)` is below `p`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autocorr::autocorr_atoms;
use crate::comb::{ContinuousTerm, DistExpr, LatticeTerm, PointAtom};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::multi_index::{MultiIndex, Point};
use crate::poly::Poly;
use crate::schwartz::GaussTerm;
use crate::spectrum::{fourier_exact, SpectralLattice, SpectralMeasure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomCombSample {
    pub p: f64,
    pub m: u32,
    pub seed: u64,
    /// `a[n + m]` for `n` in `[-m, m]`; `b_n = 1 - a_n`.
    pub a: Vec<u8>,
}

impl RandomCombSample {
    pub fn a(&self, n: i64) -> u8 {
        self.a[(n + i64::from(self.m)) as usize]
    }

    pub fn b(&self, n: i64) -> u8 {
        1 - self.a(n)
    }

    /// `sum_n a_n delta_n + b_n D delta_n` over `[-m, m]`.
    pub fn to_dist(&self) -> DistExpr {
        let m = i64::from(self.m);
        let atoms = (-m..=m)
            .map(|n| {
                let order = if self.a(n) == 1 { 0 } else { 1 };
                PointAtom::new(&[n as f64], MultiIndex::order1(order), Complex64::new(1.0, 0.0))
            })
            .collect();
        DistExpr::from_atoms(1, atoms).expect("valid atoms")
    }
}

pub fn sample(p: f64, m: u32, seed: u64) -> Result<(RandomCombSample, DistExpr)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument("p must lie in [0, 1]".into()));
    }
    if m < 1 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (0..2 * m + 1).map(|_| u8::from(rng.random::<f64>() < p)).collect();
    let s = RandomCombSample {
        p,
        m,
        seed,
        a,
    };
    let dist = s.to_dist();
    Ok((s, dist))
}

/// Correlation averages over `n` in `[-n_max, n_max]`, normalised by `2m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCoeffs {
    pub m: u32,
    pub c: BTreeMap<i64, f64>,
    /// `(1/2m) sum_k a_k b_{n+k} + b_k a_{n+k}`.
    pub d: BTreeMap<i64, f64>,
    /// `(1/2m) sum_k a_k b_{n+k} - b_k a_{n+k}`, the coefficient of `D delta_n`.
    pub d_skew: BTreeMap<i64, f64>,
    pub e: BTreeMap<i64, f64>,
}

pub fn empirical_coeffs(s: &RandomCombSample, n_max: u32) -> Result<EmpiricalCoeffs> {
    if 2 * n_max > s.m {
        return Err(Error::InvalidArgument("n_max must not exceed m/2".into()));
    }
    let m = i64::from(s.m);
    let inv = 1.0 / (2.0 * m as f64);
    let mut out = EmpiricalCoeffs {
        m: s.m,
        c: BTreeMap::new(),
        d: BTreeMap::new(),
        d_skew: BTreeMap::new(),
        e: BTreeMap::new(),
    };
    let n_max = i64::from(n_max);
    for n in -n_max..=n_max {
        let (mut aa, mut ab, mut ba, mut bb) = (0u64, 0u64, 0u64, 0u64);
        for k in (-m).max(-m - n)..=m.min(m - n) {
            let (ak, an) = (u64::from(s.a(k)), u64::from(s.a(n + k)));
            let (bk, bn) = (1 - ak, 1 - an);
            aa += ak * an;
            ab += ak * bn;
            ba += bk * an;
            bb += bk * bn;
        }
        out.c.insert(n, aa as f64 * inv);
        out.d.insert(n, (ab + ba) as f64 * inv);
        out.d_skew.insert(n, (ab as f64 - ba as f64) * inv);
        out.e.insert(n, bb as f64 * inv);
    }
    Ok(out)
}

/// `(1/2m) psi_m * tilde(psi_m)` for a sample.
pub fn sample_autocorr(s: &RandomCombSample) -> Result<DistExpr> {
    let d = s.to_dist();
    autocorr_atoms(1, d.atoms(), Some(&Lattice::integer(1)), 2.0 * f64::from(s.m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffStats {
    pub n: i64,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub p: f64,
    pub m: u32,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<EmpiricalCoeffs>,
    pub c: Vec<CoeffStats>,
    pub d: Vec<CoeffStats>,
    pub e: Vec<CoeffStats>,
}

fn stats(n: i64, xs: &[f64]) -> CoeffStats {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    CoeffStats {
        n,
        mean,
        sd,
        se: sd / k.sqrt(),
    }
}

/// Coefficients over many seeds; samples run in parallel, aggregation is in seed order.
pub fn ensemble(p: f64, m: u32, seeds: &[u64], n_max: u32) -> Result<EnsembleStats> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let per_seed: Vec<EmpiricalCoeffs> = seeds
        .par_iter()
        .map(|&seed| sample(p, m, seed).and_then(|(s, _)| empirical_coeffs(&s, n_max)))
        .collect::<Result<_>>()?;
    let collect = |pick: fn(&EmpiricalCoeffs) -> &BTreeMap<i64, f64>| -> Vec<CoeffStats> {
        let n_max = i64::from(n_max);
        (-n_max..=n_max)
            .map(|n| {
                let xs: Vec<f64> = per_seed.iter().map(|c| pick(c)[&n]).collect();
                stats(n, &xs)
            })
            .collect()
    };
    Ok(EnsembleStats {
        p,
        m,
        seeds: seeds.to_vec(),
        c: collect(|c| &c.c),
        d: collect(|c| &c.d),
        e: collect(|c| &c.e),
        per_seed,
    })
}

/// Limits of the coefficient averages: `(c_n, d_n, e_n)`.
pub fn analytic_coeffs(p: f64, n: i64) -> (f64, f64, f64) {
    if n == 0 {
        (p, 0.0, 1.0 - p)
    } else {
        (p * p, 2.0 * p * (1.0 - p), (1.0 - p) * (1.0 - p))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticModel {
    pub p: f64,
    pub autocorrelation: DistExpr,
    pub diffraction: SpectralMeasure,
    /// `sum (p^2 + 2np(1-p) + n^2(1-p)^2) delta_n + ((p - p^2) + (1-p-(1-p)^2) x^2) lambda`,
    /// which drops the `2 pi` factors of the transform used here.
    pub printed_alternate: SpectralMeasure,
}

/// Closed-form autocorrelation
/// `p^2 delta_Z - (1-p)^2 D^2 delta_Z + (p-p^2) delta_0 - (1-p-(1-p)^2) D^2 delta_0`
/// and its transform, with pure-point intensities `p^2 + 4 pi^2 n^2 (1-p)^2`.
pub fn analytic_model(p: f64) -> Result<AnalyticModel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument("p must lie in [0, 1]".into()));
    }
    let z = Lattice::integer(1);
    let q = 1.0 - p;
    let c = |v: f64| Complex64::new(v, 0.0);
    let lattices = vec![
        LatticeTerm::new(z.clone(), MultiIndex::order1(0), c(p * p)),
        LatticeTerm::new(z.clone(), MultiIndex::order1(2), c(-q * q)),
    ];
    let atoms = vec![
        PointAtom::new(&[0.0], MultiIndex::order1(0), c(p - p * p)),
        PointAtom::new(&[0.0], MultiIndex::order1(2), c(-(q - q * q))),
    ];
    let autocorrelation = DistExpr::new(1, atoms, lattices, Vec::new())?;
    let diffraction = fourier_exact(&autocorrelation)?;
    let mut pp = Poly::constant(1, c(p * p));
    pp.add_term(MultiIndex::order1(1), c(2.0 * p * q));
    pp.add_term(MultiIndex::order1(2), c(q * q));
    let mut dens = Poly::constant(1, c(p - p * p));
    dens.add_term(MultiIndex::order1(2), c(q - q * q));
    let printed_alternate = SpectralMeasure::new(
        1,
        Vec::new(),
        vec![SpectralLattice {
            lattice: z,
            shift: Point::from_slice(&[0.0]),
            phase_offset: Point::from_slice(&[0.0]),
            poly: pp,
        }],
        vec![ContinuousTerm::new(GaussTerm::undamped(dens, &[0.0], &[0.0]))],
    )?;
    Ok(AnalyticModel {
        p,
        autocorrelation,
        diffraction,
        printed_alternate,
    })
}

/// `|p + (1 - p) 2 pi i n|^2`.
pub fn pp_intensity(p: f64, n: f64) -> f64 {
    p * p + 4.0 * PI * PI * n * n * (1.0 - p) * (1.0 - p)
}

/// `delta_{Z cap [-m, m]} + sum_{1 <= n, 2^n <= m} n delta_{2^n}`.
pub fn power_law_comb(m: u32) -> Result<DistExpr> {
    if m < 4 {
        return Err(Error::InvalidArgument("m must be >= 4".into()));
    }
    let m64 = i64::from(m);
    let one = Complex64::new(1.0, 0.0);
    let mut atoms: Vec<PointAtom> = (-m64..=m64)
        .map(|k| PointAtom::new(&[k as f64], MultiIndex::order1(0), one))
        .collect();
    let mut n = 1u32;
    while (1u64 << n) <= u64::from(m) {
        atoms.push(PointAtom::new(
            &[(1u64 << n) as f64],
            MultiIndex::order1(0),
            Complex64::new(f64::from(n), 0.0),
        ));
        n += 1;
    }
    DistExpr::from_atoms(1, atoms)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawReport {
    pub m: u32,
    /// `sup_l |phi_mu(l) - phi_Z(l)|` over all integers.
    pub residual: f64,
    /// The same supremum over `l != 0`.
    pub residual_off_zero: f64,
    pub argmax: i64,
    /// Coefficient of `delta_0` in `(1/2m) h_m mu * tilde(h_m mu)`.
    pub coeff_zero: f64,
    /// `3 (log2 m)^2 / 2m`.
    pub envelope: f64,
}

fn coeff_map(phi: &DistExpr) -> BTreeMap<i64, f64> {
    phi.atoms()
        .iter()
        .filter(|a| a.order.is_zero())
        .map(|a| (a.x[0].round() as i64, a.w.re))
        .collect()
}

/// Compares `(1/2m)(h_m mu) * tilde(h_m mu)` with `(1/2m)(h_m delta_Z) * tilde(h_m delta_Z)`.
pub fn power_law_residual(m: u32) -> Result<PowerLawReport> {
    let z = Lattice::integer(1);
    let norm = 2.0 * f64::from(m);
    let mu = power_law_comb(m)?;
    let m64 = i64::from(m);
    let base = DistExpr::from_atoms(
        1,
        (-m64..=m64)
            .map(|k| PointAtom::new(&[k as f64], MultiIndex::order1(0), Complex64::new(1.0, 0.0)))
            .collect(),
    )?;
    let a = coeff_map(&autocorr_atoms(1, mu.atoms(), Some(&z), norm)?);
    let b = coeff_map(&autocorr_atoms(1, base.atoms(), Some(&z), norm)?);
    let (mut residual, mut residual_off_zero, mut argmax) = (0.0f64, 0.0f64, 0i64);
    for (l, v) in &a {
        let diff = (v - b.get(l).copied().unwrap_or(0.0)).abs();
        if diff > residual {
            residual = diff;
            argmax = *l;
        }
        if *l != 0 {
            residual_off_zero = residual_off_zero.max(diff);
        }
    }
    let log2m = f64::from(m).log2();
    Ok(PowerLawReport {
        m,
        residual,
        residual_off_zero,
        argmax,
        coeff_zero: a.get(&0).copied().unwrap_or(0.0),
        envelope: 3.0 * log2m * log2m / norm,
    })
}

/// Number of pairs `(n, k)`, `1 <= n, k`, `2^n, 2^k <= m`, with `2^n - 2^k = l`, for every `l` hit.
pub fn power_difference_counts(m: u64) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    let powers: Vec<i64> = (1..64).map(|n| 1i64 << n).take_while(|&v| v as u64 <= m).collect();
    for &a in &powers {
        for &b in &powers {
            *out.entry(a - b).or_insert(0) += 1;
        }
    }
    out
}
