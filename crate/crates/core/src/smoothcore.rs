//! Smooth norms on `k` coordinates and the convex bumps `ρ_n`.
//!
//! The smooth norm on `k` coordinates is a multiple of the Minkowski
//! functional of `{v : Σ φ_μ(v_i) ≤ 1}` for the smoothed power
//! `φ_μ(t) = (t²+μ²)^{p/2} − μ^p`. The bounds
//! `|t|^p − μ^p ≤ φ_μ(t) ≤ |t|^p` (p ≤ 2) and `|t|^p ≤ φ_μ(t) ≤ (|t|+μ)^p`
//! (p ≥ 2) pin the gauge between explicit multiples of `‖v‖_p`, which is
//! what [`calibrate_mu`] certifies.

use crate::error::{Error, Result};

/// `φ_μ(t) = (t²+μ²)^{p/2} − μ^p`; even, convex, `C^∞`, zero at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedPower {
    p: f64,
    mu: f64,
    mu_p: f64,
}

impl SmoothedPower {
    pub fn new(p: f64, mu: f64) -> Self {
        SmoothedPower {
            p,
            mu,
            mu_p: mu.powf(p),
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.p == 2.0 {
            return t * t;
        }
        let r = t.abs() / self.mu;
        if r <= 1.0 {
            // μ^p·((1+r²)^{p/2} − 1) without cancellation near 0
            self.mu_p * (0.5 * self.p * (r * r).ln_1p()).exp_m1()
        } else {
            (t * t + self.mu * self.mu).powf(0.5 * self.p) - self.mu_p
        }
    }

    /// `φ_μ'(t) = p·t·(t²+μ²)^{p/2−1}`.
    pub fn deriv(&self, t: f64) -> f64 {
        if self.p == 2.0 {
            return 2.0 * t;
        }
        self.p * t * (t * t + self.mu * self.mu).powf(0.5 * self.p - 1.0)
    }

    /// `φ_μ''(t) = p(t²+μ²)^{p/2−2}((p−1)t²+μ²)`.
    pub fn second_deriv(&self, t: f64) -> f64 {
        let s = t * t + self.mu * self.mu;
        self.p * s.powf(0.5 * self.p - 2.0) * ((self.p - 1.0) * t * t + self.mu * self.mu)
    }
}

const CALIBRATION_STEPS: i32 = 80;

/// Largest `μ = 2^{−j}`, `j ≤ 80`, for which the closed-form sandwich
/// certificate holds in dimension `k`:
///
/// * `p ≤ 2`: `(1+kμ^p)^{1/p} ≤ 1+θ_k`;
/// * `p > 2`: `(1+kμ^p)^{1/p}/(1−μk^{1/p}) ≤ 1+θ_k` and `μk^{1/p} < 1/2`.
pub fn calibrate_mu(k: usize, theta_k: f64, p: f64) -> Result<f64> {
    let fail = Error::CalibrationFailed { k, theta: theta_k };
    if k == 0 || !(theta_k > 0.0) {
        return Err(fail);
    }
    let kf = k as f64;
    for j in 0..=CALIBRATION_STEPS {
        let mu = 2f64.powi(-j);
        let lower = (1.0 + kf * mu.powf(p)).powf(1.0 / p);
        let ok = if p <= 2.0 {
            lower <= 1.0 + theta_k
        } else {
            let spread = mu * kf.powf(1.0 / p);
            spread < 0.5 && lower / (1.0 - spread) <= 1.0 + theta_k
        };
        if ok {
            return Ok(mu);
        }
    }
    Err(fail)
}

/// Smooth norm on `dim` coordinates with
/// `‖v‖_p/(1+θ_k) ≤ value(v) ≤ ‖v‖_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothFiniteNorm {
    dim: usize,
    phi: SmoothedPower,
    correction: f64,
    tol: f64,
}

/// Gauge value together with the number of bisection steps spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeEval {
    pub value: f64,
    pub iters: usize,
}

const MAX_BISECT: usize = 400;

impl SmoothFiniteNorm {
    /// Calibrates `μ` for dimension `dim` against `θ_dim`. `tol` is the
    /// relative bracket width at which gauge bisection stops; anything at
    /// or below `f64::EPSILON` runs to adjacent floats.
    pub fn new(dim: usize, theta: f64, p: f64, tol: f64) -> Result<Self> {
        let mu = calibrate_mu(dim, theta, p)?;
        let correction = if p <= 2.0 {
            1.0
        } else {
            1.0 - mu * (dim as f64).powf(1.0 / p)
        };
        Ok(SmoothFiniteNorm {
            dim,
            phi: SmoothedPower::new(p, mu),
            correction,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self) -> &SmoothedPower {
        &self.phi
    }

    pub fn correction(&self) -> f64 {
        self.correction
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    fn level(&self, v: &[f64], lambda: f64) -> f64 {
        v.iter().map(|&x| self.phi.eval(x / lambda)).sum()
    }

    /// The `λ ≥ 0` with `Σφ_μ(v_i/λ) = 1`.
    pub fn gauge(&self, v: &[f64]) -> Result<f64> {
        self.check(v)?;
        Ok(self.gauge_detailed(v).value)
    }

    /// Bisection on the bracket implied by the smoothed-power bounds. The
    /// returned value is the lower endpoint, so it never exceeds the exact
    /// gauge by more than rounding in the level sum.
    pub fn gauge_detailed(&self, v: &[f64]) -> GaugeEval {
        let p = self.phi.p;
        let norm = v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        if norm == 0.0 {
            return GaugeEval {
                value: 0.0,
                iters: 0,
            };
        }
        if p == 2.0 {
            // φ_μ(t) = t², so the level set is the Euclidean ball
            return GaugeEval {
                value: norm,
                iters: 0,
            };
        }
        let k = v.len() as f64;
        let mut lo = norm / (1.0 + k * self.phi.mu_p).powf(1.0 / p);
        let mut hi = if p <= 2.0 {
            norm
        } else {
            norm / (1.0 - self.phi.mu * k.powf(1.0 / p))
        };
        let mut widen = 1e-12;
        while self.level(v, lo) < 1.0 {
            lo *= 1.0 - widen;
            widen = (2.0 * widen).min(0.5);
        }
        widen = 1e-12;
        while self.level(v, hi) > 1.0 {
            hi *= 1.0 + widen;
            widen *= 2.0;
        }
        let mut iters = 0;
        while hi - lo > self.tol * hi && iters < MAX_BISECT {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.level(v, mid) >= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iters += 1;
        }
        GaugeEval { value: lo, iters }
    }

    /// `c_k · gauge(v)`.
    pub fn value(&self, v: &[f64]) -> Result<f64> {
        self.check(v)?;
        Ok(self.value_unchecked(v))
    }

    pub(crate) fn value_unchecked(&self, v: &[f64]) -> f64 {
        self.correction * self.gauge_detailed(v).value
    }

    /// Gradient of the gauge from implicit differentiation of
    /// `Σφ(v_i/λ) = 1`: `∂λ/∂v_i = λ·φ'(v_i/λ) / Σ_j φ'(v_j/λ)·v_j`.
    pub fn gauge_gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check(v)?;
        let lambda = self.gauge_detailed(v).value;
        if lambda == 0.0 {
            return Err(Error::InvalidArgument(
                "gauge gradient at the origin".into(),
            ));
        }
        let d: Vec<f64> = v.iter().map(|&x| self.phi.deriv(x / lambda)).collect();
        let denom: f64 = d.iter().zip(v).map(|(di, vi)| di * vi).sum();
        Ok(d.iter().map(|di| lambda * di / denom).collect())
    }
}

/// `ρ_n(t) = ((t² − a²)₊ / (1 − a²))^m` with `a = 1 − θ_n²`.
///
/// Even, convex, zero on `[−a, a]`, `ρ_n(1) = 1`, and `C^{m−1}` at `|t| = a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpRho {
    n: usize,
    a: f64,
    denom: f64,
    order: u32,
}

impl BumpRho {
    pub fn new(n: usize, theta_n: f64, order: u32) -> Self {
        let a = 1.0 - theta_n * theta_n;
        BumpRho {
            n,
            a,
            denom: (1.0 - a) * (1.0 + a),
            order,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edge of the zero set, `1 − θ_n²`.
    pub fn threshold(&self) -> f64 {
        self.a
    }

    fn base(&self, t: f64) -> f64 {
        let t = t.abs();
        (t - self.a) * (t + self.a) / self.denom
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t.abs() <= self.a {
            return 0.0;
        }
        self.base(t).powi(self.order as i32)
    }

    /// Derivative of order 0, 1 or 2.
    pub fn deriv(&self, t: f64, order: u32) -> Result<f64> {
        if t.abs() <= self.a {
            return match order {
                0..=2 => Ok(0.0),
                _ => Err(Error::InvalidArgument(format!("derivative order {order}"))),
            };
        }
        let m = self.order as i32;
        let mf = self.order as f64;
        let u = self.base(t);
        let du = 2.0 * t / self.denom;
        match order {
            0 => Ok(u.powi(m)),
            1 => Ok(mf * u.powi(m - 1) * du),
            2 => {
                Ok(mf * (mf - 1.0) * u.powi(m - 2) * du * du
                    + mf * u.powi(m - 1) * 2.0 / self.denom)
            }
            _ => Err(Error::InvalidArgument(format!("derivative order {order}"))),
        }
    }
}
