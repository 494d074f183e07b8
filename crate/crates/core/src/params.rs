//! Accuracy budget and the parameter sequences `δ_k`, `θ_k`.
//!
//! The construction needs two strictly decreasing sequences. `δ_k` decays
//! like `1/ln k` and controls how much the auxiliary norm favours small
//! coordinate sets; `θ_k` is squeezed under the step ratio of `δ` so that
//! `(1+δ_{k+1})/(1+δ_k) < 1 − 2θ_{k+1}` for every `k`, and both are small
//! enough that `(1+θ_1)/(1−θ_1)·(1+δ_1)² ≤ 1+ε`.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Run configuration shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
    pub smoothness_order: u32,
    pub k_max: usize,
    pub bisect_tol: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            p: 2.0,
            q: 1.0,
            epsilon: 0.1,
            smoothness_order: 4,
            k_max: 100,
            bisect_tol: 1e-10,
            seed: 0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.p.is_finite() && self.p >= 1.0) {
            return bad(format!("p must be a finite real >= 1, got {}", self.p));
        }
        if !(self.q > 0.0 && self.q < self.p) {
            return bad(format!("q must lie in (0, p), got q = {}", self.q));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.smoothness_order < 2 {
            return bad(format!(
                "smoothness_order must be >= 2, got {}",
                self.smoothness_order
            ));
        }
        if self.k_max < 2 {
            return bad(format!("k_max must be >= 2, got {}", self.k_max));
        }
        if !(self.bisect_tol > 0.0 && self.bisect_tol <= 1e-6) {
            return bad(format!(
                "bisect_tol must lie in (0, 1e-6], got {}",
                self.bisect_tol
            ));
        }
        Ok(())
    }
}

/// The sequences `(δ_k)`, `(θ_k)` together with the budget `ε`.
///
/// Values are stored for `k ∈ [0, k_max + 1]`. Built schedules extend past
/// that range on demand: `δ` from its closed form, `θ` by continuing the
/// recursion from the last stored value. Schedules assembled with
/// [`ParamSchedule::from_parts`] have no generator and clamp to their last
/// stored entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSchedule {
    delta: Vec<f64>,
    theta: Vec<f64>,
    epsilon: f64,
    delta_star: Option<f64>,
}

/// One failed schedule inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    NonPositive {
        k: usize,
    },
    DeltaNotDecreasing {
        k: usize,
    },
    ThetaNotDecreasing {
        k: usize,
    },
    /// `(1+δ_{k+1})/(1+δ_k) < 1 − 2θ_{k+1}` fails at `k`.
    StepRatio {
        k: usize,
        ratio: f64,
        bound: f64,
    },
    /// `(1+θ_1)/(1−θ_1)·(1+δ_1)² ≤ 1+ε` fails.
    AccuracyBudget {
        value: f64,
        budget: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositive { k } => write!(f, "non-positive entry at k = {k}"),
            Violation::DeltaNotDecreasing { k } => {
                write!(f, "delta not strictly decreasing at k = {k}")
            }
            Violation::ThetaNotDecreasing { k } => {
                write!(f, "theta not strictly decreasing at k = {k}")
            }
            Violation::StepRatio { k, ratio, bound } => write!(
                f,
                "step ratio (1+d[k+1])/(1+d[k]) = {ratio} is not below 1-2t[k+1] = {bound} at k = {k}"
            ),
            Violation::AccuracyBudget { value, budget } => write!(
                f,
                "(1+t1)/(1-t1)*(1+d1)^2 = {value} exceeds 1+epsilon = {budget}"
            ),
        }
    }
}

/// JSON export of a schedule, truncated at `k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleExport {
    pub delta: Vec<f64>,
    pub theta: Vec<f64>,
    pub epsilon: f64,
}

const THETA_FRACTION: f64 = 0.45;
const THETA_DECAY: f64 = 0.9;
const MAX_HALVINGS: usize = 64;

fn closed_form_delta(delta_star: f64, k: usize) -> f64 {
    delta_star * 3f64.ln() / ((k + 2) as f64).ln()
}

/// `δ_k − δ_{k+1}` for the closed form, without cancellation.
fn closed_form_gap(delta_star: f64, k: usize) -> f64 {
    let a = ((k + 2) as f64).ln();
    let b = ((k + 3) as f64).ln();
    delta_star * 3f64.ln() * (1.0 / (k + 2) as f64).ln_1p() / (a * b)
}

impl ParamSchedule {
    /// Builds the default schedule for `config`.
    ///
    /// `δ_k = δ*·ln 3/ln(k+2)` with `δ* = min(ε/8, 0.1)`, and
    /// `θ_{k+1} = min(0.9·θ_k, 0.45·(δ_k−δ_{k+1})/(1+δ_k))`. The starting
    /// value `θ_0` is halved until every inequality holds up to `k_max`.
    pub fn build(config: &Config) -> Result<Self> {
        config.validate()?;
        let eps = config.epsilon;
        let delta_star = (eps / 8.0).min(0.1);
        let len = config.k_max + 2;
        let delta: Vec<f64> = (0..len).map(|k| closed_form_delta(delta_star, k)).collect();
        let gap0 = closed_form_gap(delta_star, 0) / (1.0 + delta[0]);
        let mut theta0 = (eps / 8.0).min(THETA_FRACTION * gap0).min(0.05);

        for _ in 0..=MAX_HALVINGS {
            let mut theta = Vec::with_capacity(len);
            theta.push(theta0);
            for k in 0..len - 1 {
                let allowed = THETA_FRACTION * closed_form_gap(delta_star, k) / (1.0 + delta[k]);
                theta.push((THETA_DECAY * theta[k]).min(allowed));
            }
            let schedule = ParamSchedule {
                delta: delta.clone(),
                theta,
                epsilon: eps,
                delta_star: Some(delta_star),
            };
            if schedule.validate(config.k_max).is_empty() {
                return Ok(schedule);
            }
            theta0 *= 0.5;
        }
        Err(Error::ScheduleInfeasible(format!(
            "no theta_0 satisfies the schedule inequalities after {MAX_HALVINGS} halvings (epsilon = {eps:e})"
        )))
    }

    /// Assembles a schedule from explicit sequences, indexed from `k = 0`.
    ///
    /// No inequality is enforced here; use [`ParamSchedule::validate`].
    pub fn from_parts(delta: Vec<f64>, theta: Vec<f64>, epsilon: f64) -> Result<Self> {
        if delta.len() < 3 || delta.len() != theta.len() {
            return Err(Error::InvalidArgument(format!(
                "delta and theta need equal length >= 3, got {} and {}",
                delta.len(),
                theta.len()
            )));
        }
        if delta.iter().chain(&theta).any(|v| !v.is_finite()) || !epsilon.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(ParamSchedule {
            delta,
            theta,
            epsilon,
            delta_star: None,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Largest `k` with a full export, i.e. stored length minus two.
    pub fn k_max(&self) -> usize {
        self.delta.len() - 2
    }

    /// `δ*`, equal to `δ_1`, for schedules built from the closed form.
    pub fn delta_star(&self) -> Option<f64> {
        self.delta_star
    }

    pub fn delta(&self, k: usize) -> f64 {
        match (self.delta.get(k), self.delta_star) {
            (Some(&d), _) => d,
            (None, Some(ds)) => closed_form_delta(ds, k),
            (None, None) => *self.delta.last().unwrap(),
        }
    }

    pub fn theta(&self, k: usize) -> f64 {
        if let Some(&t) = self.theta.get(k) {
            return t;
        }
        let Some(ds) = self.delta_star else {
            return *self.theta.last().unwrap();
        };
        let mut j = self.theta.len() - 1;
        let mut t = self.theta[j];
        while j < k {
            let allowed =
                THETA_FRACTION * closed_form_gap(ds, j) / (1.0 + closed_form_delta(ds, j));
            t = (THETA_DECAY * t).min(allowed);
            j += 1;
        }
        t
    }

    /// `δ_k − δ_{k+1}`, computed without cancellation for closed-form schedules.
    pub fn delta_gap(&self, k: usize) -> f64 {
        match self.delta_star {
            Some(ds) => closed_form_gap(ds, k),
            None => self.delta(k) - self.delta(k + 1),
        }
    }

    /// `(1+δ_k)^p − (1+δ_{k+1})^p`.
    ///
    /// Asymptotically `p·δ*·ln 3 / (k (ln k)²)`.
    pub fn delta_power_gap(&self, p: f64, k: usize) -> f64 {
        let gap = self.delta_gap(k);
        if gap == 0.0 {
            return 0.0;
        }
        if p == 1.0 {
            return gap;
        }
        let base = 1.0 + self.delta(k + 1);
        base.powf(p) * (p * (gap / base).ln_1p()).exp_m1()
    }

    /// Every failed inequality among monotonicity, the step-ratio condition
    /// for `k ≤ k_hi`, and the accuracy budget.
    pub fn validate(&self, k_hi: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        for k in 0..=k_hi + 1 {
            if !(self.delta(k) > 0.0 && self.theta(k) > 0.0) {
                out.push(Violation::NonPositive { k });
            }
        }
        for k in 0..=k_hi {
            if !(self.delta(k + 1) < self.delta(k)) {
                out.push(Violation::DeltaNotDecreasing { k });
            }
            if !(self.theta(k + 1) < self.theta(k)) {
                out.push(Violation::ThetaNotDecreasing { k });
            }
        }
        for k in 0..=k_hi {
            let ratio = (1.0 + self.delta(k + 1)) / (1.0 + self.delta(k));
            let bound = 1.0 - 2.0 * self.theta(k + 1);
            if !(ratio < bound) {
                out.push(Violation::StepRatio { k, ratio, bound });
            }
        }
        let value = self.accuracy_factor();
        let budget = 1.0 + self.epsilon;
        if !(value <= budget) {
            out.push(Violation::AccuracyBudget { value, budget });
        }
        out
    }

    /// `(1+θ_1)/(1−θ_1)·(1+δ_1)²`, the worst-case ratio of the final norm
    /// to `‖·‖_p`.
    pub fn accuracy_factor(&self) -> f64 {
        let t1 = self.theta(1);
        let d1 = 1.0 + self.delta(1);
        (1.0 + t1) / (1.0 - t1) * d1 * d1
    }

    pub fn export(&self) -> ScheduleExport {
        let n = self.k_max() + 1;
        ScheduleExport {
            delta: self.delta[..n].to_vec(),
            theta: self.theta[..n].to_vec(),
            epsilon: self.epsilon,
        }
    }

    /// Hex SHA-256 over the bit patterns of every stored value.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.delta.len() as u64).to_le_bytes());
        for v in self.delta.iter().chain(&self.theta) {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update(self.epsilon.to_bits().to_le_bytes());
        hex::encode(h.finalize())
    }
}
