//! Executable forms of the locality claims and finite-difference smoothness
//! evidence for the final norm.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{for_each_subset, NormLab, PRUNE_MARGIN};
use crate::error::{Error, Result};
use crate::vectors::SparseVector;

/// Tally of a randomized check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub samples: usize,
    pub checks: usize,
    /// Checks that needed a smooth-norm evaluation rather than a bound.
    pub evaluated: usize,
    pub failures: usize,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Relative agreement demanded of the `h` and `h/2` difference quotients.
pub const GRADIENT_TOLERANCE: f64 = 1e-4;
/// Central-difference step relative to `max_i |x_i|`.
const GRADIENT_STEP: f64 = 1e-7;
/// Coordinates whose partial derivative is tiny relative to the largest one
/// are compared against this fraction of the gradient's sup-norm instead.
const GRADIENT_FLOOR: f64 = 1e-3;

const FRESH_LABELS: usize = 2;

/// Finite-difference gradient of the final norm at `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub labels: Vec<String>,
    pub step: f64,
    /// Central differences with step `h`.
    pub coarse: Vec<f64>,
    /// Central differences with step `h/2`.
    pub fine: Vec<f64>,
    /// Richardson combination `(4·fine − coarse)/3`.
    pub extrapolated: Vec<f64>,
    /// Central differences at `2x` with step `h`.
    pub doubled: Vec<f64>,
    pub step_discrepancy: f64,
    pub homogeneity_discrepancy: f64,
}

impl GradientReport {
    pub fn consistent(&self) -> bool {
        self.step_discrepancy <= GRADIENT_TOLERANCE
    }

    pub fn homogeneous(&self) -> bool {
        self.homogeneity_discrepancy <= GRADIENT_TOLERANCE
    }

    pub fn passed(&self) -> bool {
        self.consistent() && self.homogeneous()
    }
}

fn fresh_label(x: &SparseVector, i: usize) -> String {
    let mut l = format!("~fresh{i}");
    while x.contains(&l) {
        l.insert(0, '~');
    }
    l
}

fn radius_fraction<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // half the draws crowd the boundary of the ball
    if rng.gen_bool(0.5) {
        0.9 + 0.099 * rng.gen::<f64>()
    } else {
        0.999 * rng.gen::<f64>()
    }
}

impl NormLab {
    /// Random `d` on `labels` with `ν(d) < radius`.
    fn perturbation<R: Rng + ?Sized>(
        &self,
        labels: &[String],
        radius: f64,
        rng: &mut R,
    ) -> SparseVector {
        let mut d = SparseVector::zero();
        for l in labels {
            d.set(l.clone(), rng.gen_range(-1.0..1.0));
        }
        let nd = self.nu(&d);
        if nd == 0.0 {
            return d;
        }
        d.scaled(radius_fraction(rng) * radius / nd)
    }

    fn neighbourhood_labels(&self, x: &SparseVector) -> Vec<String> {
        let mut labels: Vec<String> = x.labels().map(String::from).collect();
        labels.extend((0..FRESH_LABELS).map(|i| fresh_label(x, i)));
        labels
    }

    /// Draws `samples` points `y` with `ν(y − x) < θ_{k0+1}` and checks
    /// `(1+δ_|A|)²‖Ay‖_{s,A} ≤ 1 − θ_|A|` for every `A ⊆ supp(y)` outside
    /// the active family.
    ///
    /// Sets whose `ℓ_p` bound already satisfies the inequality are certified
    /// by `‖·‖_{s,A} ≤ ‖·‖_p` and not evaluated; they still count as checks.
    pub fn claim1_verify<R: Rng + ?Sized>(
        &self,
        x: &SparseVector,
        samples: usize,
        rng: &mut R,
    ) -> Result<VerifyOutcome> {
        let witness = self.active_family(x)?;
        let family: HashSet<BTreeSet<String>> = witness.family.iter().cloned().collect();
        let labels = self.neighbourhood_labels(x);
        let inv_p = 1.0 / self.p;
        let mut out = VerifyOutcome::default();
        let mut buf = Vec::new();
        for _ in 0..samples {
            let y = x.add(&self.perturbation(&labels, witness.radius, rng));
            let profile = y.profile(self.p);
            let levels = self.levels(profile.len())?;
            let could = |k: usize, s: f64| {
                let lv = &levels[k - 1];
                lv.nu_factor * s.powf(inv_p) > 1.0 - lv.theta
            };
            let subsets = u32::try_from(profile.len())
                .ok()
                .and_then(|n| 1usize.checked_shl(n))
                .map_or(usize::MAX, |m| m - 1);
            let present = family
                .iter()
                .filter(|a| a.iter().all(|l| y.contains(l)))
                .count();
            out.checks = out.checks.saturating_add(subsets - present);
            for_each_subset(&profile, profile.len(), could, |ranks, s| {
                let lv = &levels[ranks.len() - 1];
                if lv.nu_factor * s.powf(inv_p) * (1.0 + PRUNE_MARGIN) <= 1.0 - lv.theta {
                    return;
                }
                let set: BTreeSet<String> =
                    ranks.iter().map(|&j| profile.labels()[j].clone()).collect();
                if family.contains(&set) {
                    return;
                }
                out.evaluated += 1;
                let value = lv.nu_factor * Self::set_norm(&profile, lv, ranks, &mut buf);
                if value > 1.0 - lv.theta {
                    out.failures += 1;
                }
            });
            out.samples += 1;
        }
        Ok(out)
    }

    /// For `samples` points `y` near `x`, rewrites every coordinate outside
    /// the union of the active family (keeping `y` in the neighbourhood) and
    /// requires `Ψ` to be bitwise unchanged.
    pub fn lfc_verify<R: Rng + ?Sized>(
        &self,
        x: &SparseVector,
        samples: usize,
        rng: &mut R,
    ) -> Result<VerifyOutcome> {
        let witness = self.active_family(x)?;
        let union = witness.union();
        let labels = self.neighbourhood_labels(x);
        let outside: Vec<String> = labels
            .iter()
            .filter(|l| !union.contains(*l))
            .cloned()
            .collect();
        let mut out = VerifyOutcome::default();
        for _ in 0..samples {
            let d = self.perturbation(&labels, witness.radius, rng);
            let y = x.add(&d);
            let kept = d.restrict(|l| union.contains(l));
            let room = witness.radius - self.nu(&kept);
            let fresh = self.perturbation(&outside, room * (1.0 - 1e-9), rng);
            let shift = kept.add(&fresh);
            out.samples += 1;
            out.checks += 1;
            if !(self.nu(&shift) < witness.radius) {
                return Err(Error::InvalidArgument(
                    "rewritten perturbation left the neighbourhood".into(),
                ));
            }
            let y2 = x.add(&shift);
            let a = self.psi_support_sum(&y)?;
            let b = self.psi_support_sum(&y2)?;
            if a.to_bits() != b.to_bits() {
                out.failures += 1;
            }
        }
        Ok(out)
    }

    /// Central differences of the final norm (bisected to adjacent floats)
    /// with steps `h` and `h/2`, plus the same at `2x`.
    pub fn gradient_check(&self, x: &SparseVector) -> Result<GradientReport> {
        if x.is_empty() {
            return Err(Error::InvalidArgument(
                "gradient check needs a nonzero point".into(),
            ));
        }
        let scale = x.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        let h = GRADIENT_STEP * scale;
        let norm = |y: &SparseVector| self.final_norm_detailed(y, 0.0).value;
        let partial = |base: &SparseVector, label: &str, step: f64| {
            let mut up = base.clone();
            let mut down = base.clone();
            let v = base.get(label);
            up.set(label, v + step);
            down.set(label, v - step);
            (norm(&up) - norm(&down)) / (2.0 * step)
        };
        let doubled_x = x.scaled(2.0);
        let labels: Vec<String> = x.labels().map(String::from).collect();
        let coarse: Vec<f64> = labels.iter().map(|l| partial(x, l, h)).collect();
        let fine: Vec<f64> = labels.iter().map(|l| partial(x, l, 0.5 * h)).collect();
        let doubled: Vec<f64> = labels.iter().map(|l| partial(&doubled_x, l, h)).collect();
        let extrapolated = coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| (4.0 * f - c) / 3.0)
            .collect();
        let sup = fine.iter().map(|g| g.abs()).fold(0.0, f64::max);
        let discrepancy = |other: &[f64]| {
            fine.iter()
                .zip(other)
                .map(|(f, o)| {
                    (f - o).abs() / f.abs().max(GRADIENT_FLOOR * sup).max(f64::MIN_POSITIVE)
                })
                .fold(0.0, f64::max)
        };
        Ok(GradientReport {
            step_discrepancy: discrepancy(&coarse),
            homogeneity_discrepancy: discrepancy(&doubled),
            labels,
            step: h,
            coarse,
            fine,
            extrapolated,
            doubled,
        })
    }
}
