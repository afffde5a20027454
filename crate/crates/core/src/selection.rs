//! Policy-selection strategies: iteration frontier, uniform sampling, and
//! bandit algorithms (LinUCB, UCB1, epsilon-greedy) with regret accounting.
//!
//! LinUCB keeps per-arm ridge-regression statistics `A_a = I + sum x x^T`,
//! `b_a = sum r x` and scores arms by
//! `x^T theta_a + alpha * sqrt(x^T A_a^{-1} x)` with `theta_a = A_a^{-1} b_a`.
//! Ties everywhere break toward the lowest index so runs replay exactly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// Per-round feature vectors, one per arm, each rescaled to l2 norm <= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionContext {
    features: Vec<Vec<f64>>,
    dim: usize,
}

impl SelectionContext {
    pub fn new(mut features: Vec<Vec<f64>>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Config("context needs at least one arm".into()));
        }
        let dim = features[0].len();
        for x in &mut features {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("context features must be finite".into()));
            }
            let norm = linalg::l2_norm(x);
            if norm > 1.0 {
                for v in x.iter_mut() {
                    *v /= norm;
                }
            }
        }
        Ok(Self { features, dim })
    }

    pub fn n_arms(&self) -> usize {
        self.features.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arm(&self, a: usize) -> &[f64] {
        &self.features[a]
    }
}

/// Ridge-regression state for LinUCB, one (A, b) pair per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct LinUcbState {
    a: Vec<Vec<f64>>, // d x d row-major per arm
    b: Vec<Vec<f64>>,
    alpha: f64,
    dim: usize,
}

impl LinUcbState {
    pub fn new(n_arms: usize, dim: usize, alpha: f64) -> Result<Self> {
        if n_arms == 0 || dim == 0 {
            return Err(Error::Config("n_arms and dim must be positive".into()));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::OutOfRange(format!(
                "alpha must be nonnegative, got {alpha}"
            )));
        }
        let mut identity = vec![0.0; dim * dim];
        for i in 0..dim {
            identity[i * dim + i] = 1.0;
        }
        Ok(Self {
            a: vec![identity; n_arms],
            b: vec![vec![0.0; dim]; n_arms],
            alpha,
            dim,
        })
    }

    pub fn n_arms(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// UCB score of one arm for a given context vector.
    pub fn score(&self, arm: usize, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let theta = linalg::solve(self.a[arm].clone(), self.b[arm].clone())?;
        let a_inv_x = linalg::solve(self.a[arm].clone(), x.to_vec())?;
        let mean = linalg::dot(&theta, x);
        let width = linalg::dot(x, &a_inv_x).max(0.0).sqrt();
        Ok(mean + self.alpha * width)
    }

    /// Argmax of the per-arm UCB scores, lowest index on ties.
    pub fn select(&self, ctx: &SelectionContext) -> Result<usize> {
        if ctx.n_arms() != self.n_arms() {
            return Err(Error::DimensionMismatch {
                expected: self.n_arms(),
                got: ctx.n_arms(),
            });
        }
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for arm in 0..self.n_arms() {
            let s = self.score(arm, ctx.arm(arm))?;
            if s > best_score {
                best_score = s;
                best = arm;
            }
        }
        Ok(best)
    }

    /// Rank-1 update of the chosen arm: `A += x x^T`, `b += r x`.
    pub fn update(&mut self, arm: usize, x: &[f64], reward: f64) -> Result<()> {
        if arm >= self.n_arms() {
            return Err(Error::IndexOutOfRange {
                what: "arm",
                index: arm,
                size: self.n_arms(),
            });
        }
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::OutOfRange(format!(
                "reward must be in [0, 1], got {reward}"
            )));
        }
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                self.a[arm][i * d + j] += x[i] * x[j];
            }
        }
        for (bi, xi) in self.b[arm].iter_mut().zip(x) {
            *bi += reward * xi;
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn design_matrix(&self, arm: usize) -> &[f64] {
        &self.a[arm]
    }
}

/// Uniform draw over arms, reproducible under the caller's seeded stream.
pub fn select_uniform<R: Rng>(n_arms: usize, rng: &mut R) -> Result<usize> {
    if n_arms == 0 {
        return Err(Error::Config("n_arms must be >= 1".into()));
    }
    Ok(rng.random_range(0..n_arms))
}

/// Iteration-fashion cursor: optimize policies one at a time, freezing each
/// once its score clears the per-policy threshold. The frontier only moves
/// forward; a frozen policy is never revisited even if its score later drops.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IterationCursor {
    frontier: usize,
}

impl IterationCursor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frontier(&self) -> usize {
        self.frontier
    }

    /// Lowest unfrozen index whose score is below `per_policy_delta`; the
    /// last index once every policy is satisfied.
    pub fn select(&mut self, scores: &[f64], per_policy_delta: f64) -> usize {
        while self.frontier + 1 < scores.len() && scores[self.frontier] >= per_policy_delta {
            self.frontier += 1;
        }
        self.frontier
    }
}

/// UCB1 over empirical means: unpulled arms first (lowest index), then
/// `argmax mean_a + sqrt(2 ln t / n_a)`.
pub fn ucb1_select(counts: &[u64], means: &[f64], t: u64) -> Result<usize> {
    if counts.len() != means.len() {
        return Err(Error::DimensionMismatch {
            expected: counts.len(),
            got: means.len(),
        });
    }
    if t < 1 {
        return Err(Error::OutOfRange("t must be >= 1".into()));
    }
    if let Some(idx) = counts.iter().position(|n| *n == 0) {
        return Ok(idx);
    }
    let ln_t = (t as f64).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (n, mean)) in counts.iter().zip(means).enumerate() {
        let score = mean + (2.0 * ln_t / *n as f64).sqrt();
        if score > best_score {
            best_score = score;
            best = i;
        }
    }
    Ok(best)
}

/// Epsilon-greedy: explore uniformly with probability epsilon, otherwise take
/// the greedy argmax (lowest index on ties).
pub fn epsilon_greedy_select<R: Rng>(
    means: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> Result<usize> {
    if means.is_empty() {
        return Err(Error::Config("n_arms must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::OutOfRange(format!(
            "epsilon must be in [0, 1], got {epsilon}"
        )));
    }
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return Ok(rng.random_range(0..means.len()));
    }
    let mut best = 0;
    let mut best_mean = f64::NEG_INFINITY;
    for (i, m) in means.iter().enumerate() {
        if *m > best_mean {
            best_mean = *m;
            best = i;
        }
    }
    Ok(best)
}

/// Ledger of realized vs optimal per-step rewards; its running sum difference
/// is the T-regret.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretLedger {
    chosen: Vec<f64>,
    optimal: Vec<f64>,
}

impl RegretLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(chosen: Vec<f64>, optimal: Vec<f64>) -> Result<Self> {
        if chosen.len() != optimal.len() {
            return Err(Error::DimensionMismatch {
                expected: optimal.len(),
                got: chosen.len(),
            });
        }
        if chosen
            .iter()
            .chain(&optimal)
            .any(|r| !(0.0..=1.0).contains(r))
        {
            return Err(Error::OutOfRange("ledger entries must be in [0, 1]".into()));
        }
        Ok(Self { chosen, optimal })
    }

    pub fn push(&mut self, chosen: f64, optimal: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&chosen) || !(0.0..=1.0).contains(&optimal) {
            return Err(Error::OutOfRange("ledger entries must be in [0, 1]".into()));
        }
        self.chosen.push(chosen);
        self.optimal.push(optimal);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn chosen(&self) -> &[f64] {
        &self.chosen
    }

    pub fn optimal(&self) -> &[f64] {
        &self.optimal
    }

    /// T-regret: total optimal reward minus total realized reward.
    pub fn regret(&self) -> f64 {
        let opt: f64 = self.optimal.iter().sum();
        let got: f64 = self.chosen.iter().sum();
        opt - got
    }

    /// Cumulative regret after each step.
    pub fn regret_curve(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = 0.0;
        for (c, o) in self.chosen.iter().zip(&self.optimal) {
            acc += o - c;
            out.push(acc);
        }
        out
    }
}
