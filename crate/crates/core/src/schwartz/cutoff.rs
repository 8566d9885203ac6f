use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::bump::{profile_derivatives, BumpFn};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::multi_index::MultiIndex;
use crate::quadrature;

/// Highest derivative order of the transition profiles.
pub const CUTOFF_K_MAX: u32 = 6;

/// Shape of the one-dimensional transition `sigma`: 1 on `u <= 0`, 0 on `u >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// `1 - (1/Z) int_0^u beta`, `beta` the bump on `[0, 1]`.
    BumpIntegral,
    /// `g(1-u) / (g(1-u) + g(u))` with `g(t) = exp(-1/t)`.
    Logistic,
}

impl std::str::FromStr for CutoffProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bump" | "bump_integral" | "a" => Ok(CutoffProfile::BumpIntegral),
            "logistic" | "b" => Ok(CutoffProfile::Logistic),
            other => Err(Error::Parse(format!("unknown cutoff profile '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothCutoff {
    pub profile: CutoffProfile,
}

impl Default for SmoothCutoff {
    fn default() -> Self {
        SmoothCutoff {
            profile: CutoffProfile::BumpIntegral,
        }
    }
}

fn beta_bump() -> &'static BumpFn {
    static B: OnceLock<BumpFn> = OnceLock::new();
    B.get_or_init(|| BumpFn::new(&[0.5], 0.5).expect("valid bump"))
}

fn beta_mass() -> f64 {
    0.5 * BumpFn::unit_mass(1)
}

/// `exp(-1/t)` as a jet in the variable of `t`; identically zero once it underflows.
fn g_jet(t: &Jet) -> Jet {
    if t.value() <= 1.0 / 700.0 {
        return t.scale(0.0);
    }
    t.recip().scale(-1.0).exp()
}

impl SmoothCutoff {
    pub fn new(profile: CutoffProfile) -> Self {
        SmoothCutoff { profile }
    }

    /// `sigma^{(k)}(u)` for `k = 0..=order`.
    pub fn sigma_derivatives(&self, u: f64, order: u32) -> Result<Vec<f64>> {
        if order > CUTOFF_K_MAX {
            return Err(Error::OrderTooHigh {
                order,
                limit: CUTOFF_K_MAX,
            });
        }
        let n = order as usize + 1;
        if u <= 0.0 || u >= 1.0 {
            let mut out = vec![0.0; n];
            out[0] = if u <= 0.0 { 1.0 } else { 0.0 };
            return Ok(out);
        }
        match self.profile {
            CutoffProfile::BumpIntegral => {
                let z = beta_mass();
                let b = beta_bump();
                let mut out = Vec::with_capacity(n);
                // integrate from the nearer end so tiny tails stay accurate
                let sigma = if u <= 0.5 {
                    1.0 - quadrature::composite(0.0, u, 8, 20, |t| b.eval(&[t])).re / z
                } else {
                    quadrature::composite(u, 1.0, 8, 20, |t| b.eval(&[t])).re / z
                };
                out.push(sigma);
                if order > 0 {
                    let shape = MultiIndex::order1(order - 1);
                    let v = Jet::variable(&shape, 0, u).scale(2.0).add_const(-1.0);
                    let w = v.mul(&v);
                    let jet = w.compose(&profile_derivatives(w.value(), order - 1)?);
                    for k in 0..order {
                        out.push(-jet.derivative(&MultiIndex::order1(k)) / z);
                    }
                }
                Ok(out)
            }
            CutoffProfile::Logistic => {
                let shape = MultiIndex::order1(order);
                let x = Jet::variable(&shape, 0, u);
                let a = g_jet(&x.scale(-1.0).add_const(1.0));
                let b = g_jet(&x);
                let s = a.mul(&a.add(&b).recip());
                Ok((0..=order).map(|k| s.derivative(&MultiIndex::order1(k))).collect())
            }
        }
    }

    pub fn sigma(&self, u: f64) -> f64 {
        self.sigma_derivatives(u, 0).expect("order 0")[0]
    }

    /// `C_k = sup |sigma^{(k)}|` for `k = 0..=CUTOFF_K_MAX`.
    pub fn derivative_bounds(&self) -> &'static [f64] {
        static A: OnceLock<Vec<f64>> = OnceLock::new();
        static B: OnceLock<Vec<f64>> = OnceLock::new();
        let cell = match self.profile {
            CutoffProfile::BumpIntegral => &A,
            CutoffProfile::Logistic => &B,
        };
        cell.get_or_init(|| {
            (0..=CUTOFF_K_MAX)
                .map(|k| {
                    let f = |u: f64| {
                        self.sigma_derivatives(u, k).map(|d| d[k as usize].abs()).unwrap_or(0.0)
                    };
                    super::grid_sup_1d(&f, 0.0, 1.0, 4096).1
                })
                .collect()
        })
    }

    pub fn make_vanhove(&self, radius: f64) -> Result<VanHove> {
        if !(radius >= 1.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "van Hove radius must be >= 1, got {radius}"
            )));
        }
        Ok(VanHove {
            cutoff: *self,
            radius,
        })
    }
}

/// `h_R(x) = sigma(|x| - R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VanHove {
    pub cutoff: SmoothCutoff,
    pub radius: f64,
}

impl VanHove {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.cutoff.sigma(r - self.radius)
    }

    /// `D^beta h_R(x)`.
    pub fn deriv_eval(&self, beta: &MultiIndex, x: &[f64]) -> Result<f64> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u = r - self.radius;
        if u <= 0.0 || u >= 1.0 {
            if beta.total() > CUTOFF_K_MAX {
                return Err(Error::OrderTooHigh {
                    order: beta.total(),
                    limit: CUTOFF_K_MAX,
                });
            }
            let plateau = beta.is_zero() && u <= 0.0;
            return Ok(if plateau { 1.0 } else { 0.0 });
        }
        let derivs = self.cutoff.sigma_derivatives(u, beta.total())?;
        if beta.is_zero() {
            return Ok(derivs[0]);
        }
        let mut r2 = Jet::constant(beta, 0.0);
        for (axis, &v) in x.iter().enumerate() {
            let t = Jet::variable(beta, axis, v);
            r2 = r2.add(&t.mul(&t));
        }
        let u_jet = r2.sqrt().add_const(-self.radius);
        Ok(u_jet.compose(&derivs).derivative(beta))
    }

    /// Whether `x` lies in the transition shell `R < |x| < R + 1`.
    pub fn in_corona(&self, x: &[f64]) -> bool {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        r > self.radius && r < self.radius + 1.0
    }

    /// Estimate of `sup |D^beta h_R|`, scanning the shell along coordinate
    /// axes and diagonals.
    pub fn derivative_sup(&self, beta: &MultiIndex) -> Result<f64> {
        let d = beta.dim();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for axis in 0..d {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; d];
                v[axis] = s;
                dirs.push(v);
            }
        }
        if d > 1 {
            let n = 1.0 / (d as f64).sqrt();
            dirs.push(vec![n; d]);
            dirs.push(vec![-n; d]);
        }
        let mut best = 0.0f64;
        for dir in &dirs {
            let f = |u: f64| {
                let x: Vec<f64> = dir.iter().map(|c| c * (self.radius + u)).collect();
                self.deriv_eval(beta, &x).map(f64::abs).unwrap_or(f64::NAN)
            };
            best = best.max(super::grid_sup_1d(&f, 0.0, 1.0, 4096).1);
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        for profile in [CutoffProfile::BumpIntegral, CutoffProfile::Logistic] {
            let h = SmoothCutoff::new(profile).make_vanhove(3.0).unwrap();
            assert_eq!(h.eval(&[2.9]), 1.0);
            assert_eq!(h.eval(&[-3.0]), 1.0);
            assert_eq!(h.eval(&[4.0]), 0.0);
            let mid = h.eval(&[3.5]);
            assert!((mid - 0.5).abs() < 1e-14, "{profile:?}: {mid}");
            let v = h.eval(&[3.2]);
            assert!(v > 0.5 && v < 1.0);
        }
    }

    #[test]
    fn radius_below_one_rejected() {
        assert!(SmoothCutoff::default().make_vanhove(0.5).is_err());
    }

    #[test]
    fn sigma_derivatives_match_differences() {
        for profile in [CutoffProfile::BumpIntegral, CutoffProfile::Logistic] {
            let c = SmoothCutoff::new(profile);
            let u = 0.31;
            let h = 1e-5;
            let d = c.sigma_derivatives(u, 3).unwrap();
            let dp = c.sigma_derivatives(u + h, 2).unwrap();
            let dm = c.sigma_derivatives(u - h, 2).unwrap();
            for k in 0..3 {
                let fd = (dp[k] - dm[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-6 * (1.0 + d[k + 1].abs()), "{profile:?} k={k}");
            }
        }
    }

    #[test]
    fn radial_derivative_in_two_dimensions() {
        let h = SmoothCutoff::default().make_vanhove(2.0).unwrap();
        let x = [1.8, 1.1];
        let e = 1e-5;
        let beta = MultiIndex::from_slice(&[0, 1]);
        let fd = (h.eval(&[1.8, 1.1 + e]) - h.eval(&[1.8, 1.1 - e])) / (2.0 * e);
        assert!((h.deriv_eval(&beta, &x).unwrap() - fd).abs() < 1e-7);
    }

    #[test]
    fn derivative_bounds_uniform_in_radius() {
        let c = SmoothCutoff::default();
        for k in 1..=4u32 {
            let beta = MultiIndex::order1(k);
            let sups: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 50.0]
                .iter()
                .map(|&r| c.make_vanhove(r).unwrap().derivative_sup(&beta).unwrap())
                .collect();
            let (lo, hi) = sups
                .iter()
                .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            assert!(hi - lo < 1e-9, "k={k}: {sups:?}");
            assert!((hi - c.derivative_bounds()[k as usize]).abs() < 1e-9 * hi);
        }
    }
}
