//! Diversity measurement for policy populations.
//!
//! The pairwise diversity matrix `U` holds KL divergences between member
//! occupancy measures. Two scalar objectives summarize it: the off-diagonal
//! sum `f_sum(U)` and the mutual information
//! `I(s;z) = E_{p(z)}[KL(rho(s|z) || rho(s))]`,
//! which is also the prior-weighted mean of the per-policy scores
//! `d_i = KL(rho(s|z_i) || rho(s))`. A population is a target population once
//! the chosen objective strictly exceeds the threshold delta.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::StateDistribution;
use crate::population::{average_occupancy, LatentPrior};

/// Floor applied to KL denominators before renormalizing, so that divergences
/// against zero-support distributions stay finite. Shared with the
/// reward-calculation module.
pub const SMOOTHING_FLOOR: f64 = 1e-12;

/// KL divergence `sum_s p(s) ln(p(s)/q(s))` with `0 ln 0 = 0`; `q` is floored
/// at [`SMOOTHING_FLOOR`] and renormalized first.
pub fn kl_divergence(p: &StateDistribution, q: &StateDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let floored: Vec<f64> = q.probs().iter().map(|v| v.max(SMOOTHING_FLOOR)).collect();
    let norm: f64 = floored.iter().sum();
    let mut kl = 0.0;
    for (pi, qi) in p.probs().iter().zip(&floored) {
        if *pi > 0.0 {
            kl += pi * (pi / (qi / norm)).ln();
        }
    }
    Ok(kl)
}

/// N x N matrix of pairwise divergences, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityMatrix {
    values: Vec<f64>, // row-major
    n: usize,
}

impl DiversityMatrix {
    pub fn from_values(values: Vec<f64>, n: usize) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::OutOfRange("diagonal must be zero".into()));
            }
        }
        Ok(Self { values, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert_ne!(i, j, "diagonal is fixed at zero");
        self.values[i * self.n + j] = v;
    }
}

/// Build `U_ij = KL(rho_i || rho_j)` from the member occupancies.
pub fn build_diversity_matrix(occs: &[StateDistribution]) -> Result<DiversityMatrix> {
    let n = occs.len();
    if n < 2 {
        return Err(Error::Config(format!(
            "diversity matrix needs at least 2 policies, got {n}"
        )));
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i * n + j] = kl_divergence(&occs[i], &occs[j])?;
            }
        }
    }
    Ok(DiversityMatrix { values, n })
}

/// Off-diagonal sum of the diversity matrix.
pub fn f_sum(matrix: &DiversityMatrix) -> f64 {
    let n = matrix.n;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += matrix.values[i * n + j];
            }
        }
    }
    sum
}

/// Per-policy diversity score `d_i = KL(rho(s|z_i) || rho(s))` against the
/// prior-averaged occupancy. No smoothing is needed: on the support of
/// `rho_i`, the average dominates `p(z_i) rho_i(s) > 0` whenever `p(z_i) > 0`.
pub fn per_policy_score(
    occs: &[StateDistribution],
    prior: &LatentPrior,
    z: usize,
) -> Result<f64> {
    if z >= occs.len() {
        return Err(Error::IndexOutOfRange {
            what: "latent",
            index: z,
            size: occs.len(),
        });
    }
    let avg = average_occupancy(occs, prior)?;
    Ok(raw_kl(&occs[z], &avg))
}

/// All per-policy scores at once (shares the averaged occupancy).
pub fn per_policy_scores(occs: &[StateDistribution], prior: &LatentPrior) -> Result<Vec<f64>> {
    let avg = average_occupancy(occs, prior)?;
    Ok(occs.iter().map(|occ| raw_kl(occ, &avg)).collect())
}

/// `I(s;z)`: the prior-weighted mean of the per-policy scores.
pub fn mutual_information(occs: &[StateDistribution], prior: &LatentPrior) -> Result<f64> {
    let scores = per_policy_scores(occs, prior)?;
    Ok(scores
        .iter()
        .zip(prior.probs())
        .map(|(d, p)| if *p > 0.0 { p * d } else { 0.0 })
        .sum())
}

fn raw_kl(p: &StateDistribution, q: &StateDistribution) -> f64 {
    let mut kl = 0.0;
    for (pi, qi) in p.probs().iter().zip(q.probs()) {
        if *pi > 0.0 {
            kl += pi * (pi / qi).ln();
        }
    }
    kl
}

/// Which scalar objective drives the population target test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiversityObjective {
    MutualInformation,
    FSum,
}

impl DiversityObjective {
    pub fn evaluate(
        &self,
        occs: &[StateDistribution],
        prior: &LatentPrior,
    ) -> Result<f64> {
        match self {
            DiversityObjective::MutualInformation => mutual_information(occs, prior),
            DiversityObjective::FSum => Ok(f_sum(&build_diversity_matrix(occs)?)),
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            DiversityObjective::MutualInformation => "mutual-information",
            DiversityObjective::FSum => "f-sum",
        }
    }
}

/// Thresholds for the target test: `delta` for the population objective,
/// `per_policy_delta` for individual member scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversityTarget {
    pub delta: f64,
    pub per_policy_delta: f64,
}

impl DiversityTarget {
    /// Thresholds must be nonnegative; zero is the degenerate target that any
    /// strictly positive diversity exceeds.
    pub fn new(delta: f64, per_policy_delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::OutOfRange(format!("delta must be >= 0, got {delta}")));
        }
        if !per_policy_delta.is_finite() || per_policy_delta < 0.0 {
            return Err(Error::OutOfRange(format!(
                "per_policy_delta must be >= 0, got {per_policy_delta}"
            )));
        }
        Ok(Self {
            delta,
            per_policy_delta,
        })
    }
}

/// Population mode: the scalar objective strictly exceeds delta.
pub fn target_reached_population(objective_value: f64, target: &DiversityTarget) -> bool {
    objective_value > target.delta
}

/// Per-policy mode: every member score is at least per_policy_delta.
pub fn target_reached_per_policy(scores: &[f64], target: &DiversityTarget) -> bool {
    scores.iter().all(|d| *d >= target.per_policy_delta)
}

/// Smallest iteration count `M` with `f0 + M * nu * epsilon > delta`
/// (0 when `f0 > delta` already holds).
pub fn bound_iterations(f0: f64, delta: f64, nu: f64, epsilon: f64) -> Result<u64> {
    if nu <= 0.0 || !nu.is_finite() {
        return Err(Error::OutOfRange(format!("nu must be positive, got {nu}")));
    }
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::OutOfRange(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if f0 > delta {
        return Ok(0);
    }
    let per_step = nu * epsilon;
    // Analytic starting point, then settle the strict inequality under the
    // exact f64 predicate.
    let mut m = (((delta - f0) / per_step).floor() as i64 - 2).max(0) as u64;
    while f0 + m as f64 * per_step <= delta {
        m += 1;
    }
    Ok(m)
}
