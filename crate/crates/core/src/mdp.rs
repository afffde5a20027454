//! Finite MDP representation and exact discounted state-occupancy measures.
//!
//! The occupancy measure of a policy is
//! `rho(s) = (1 - gamma) * sum_t gamma^t P_t(s)`,
//! the discounted visitation distribution over states. It is the fixed point
//! of `rho = (1 - gamma) * mu0 + gamma * P_pi^T rho` and is computed here by
//! a direct linear solve; the instances this crate targets have a handful of
//! states, so Gaussian elimination is exact and cheap.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

const PROB_TOL: f64 = 1e-9;

/// A validated probability vector over states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution(Vec<f64>);

impl StateDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(
                "entries must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self(probs))
    }

    /// Uniform distribution over `n` states.
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Point mass on state `k`.
    pub fn delta(n: usize, k: usize) -> Self {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Self(v)
    }

    /// Normalize arbitrary nonnegative weights into a distribution.
    pub fn normalize(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / sum).collect()))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total variation distance `0.5 * sum |p - q|`.
    pub fn total_variation(&self, other: &StateDistribution) -> f64 {
        0.5 * self
            .0
            .iter()
            .zip(other.probs())
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
    }

    /// Sample a state index.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        sample_index(&self.0, rng)
    }
}

impl std::ops::Index<usize> for StateDistribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn sample_index<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// A tabular policy: one action distribution per state.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    probs: Vec<f64>, // (s, a) row-major
    n_states: usize,
    n_actions: usize,
}

impl PolicyTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_states = rows.len();
        if n_states == 0 {
            return Err(Error::InvalidDistribution("policy has no states".into()));
        }
        let n_actions = rows[0].len();
        let mut probs = Vec::with_capacity(n_states * n_actions);
        for (s, row) in rows.iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::DimensionMismatch {
                    expected: n_actions,
                    got: row.len(),
                });
            }
            let sum: f64 = row.iter().sum();
            if sum.abs() < PROB_TOL {
                // An all-zero row cannot be normalized into an action choice.
                return Err(Error::InvalidDistribution(format!(
                    "policy row for state {s} is all zero"
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "policy row for state {s} is not a distribution (sum {sum})"
                )));
            }
            probs.extend_from_slice(row);
        }
        Ok(Self {
            probs,
            n_states,
            n_actions,
        })
    }

    /// Uniform-random policy.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            probs: vec![1.0 / n_actions as f64; n_states * n_actions],
            n_states,
            n_actions,
        }
    }

    /// Deterministic policy taking `action` in every state.
    pub fn constant(n_states: usize, n_actions: usize, action: usize) -> Self {
        let mut probs = vec![0.0; n_states * n_actions];
        for s in 0..n_states {
            probs[s * n_actions + action] = 1.0;
        }
        Self {
            probs,
            n_states,
            n_actions,
        }
    }

    pub(crate) fn from_raw(probs: Vec<f64>, n_states: usize, n_actions: usize) -> Self {
        debug_assert_eq!(probs.len(), n_states * n_actions);
        Self {
            probs,
            n_states,
            n_actions,
        }
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.probs[state * self.n_actions + action]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.probs[state * self.n_actions..(state + 1) * self.n_actions]
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn sample_action<R: Rng>(&self, state: usize, rng: &mut R) -> usize {
        sample_index(self.row(state), rng)
    }
}

/// One step of a sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub next_state: usize,
}

/// A finite MDP: states, actions, transition tensor, initial distribution
/// and discount. The extrinsic reward table is carried for completeness but
/// training in this crate is reward-free and never reads it.
#[derive(Debug, Clone)]
pub struct FiniteMdp {
    n_states: usize,
    n_actions: usize,
    transition: Vec<f64>, // (s, a, s') row-major
    initial_dist: StateDistribution,
    gamma: f64,
    extrinsic_reward: Option<Vec<f64>>, // (s, a) row-major
}

impl FiniteMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        initial_dist: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::Config("n_states and n_actions must be positive".into()));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidGamma(gamma));
        }
        if transition.len() != n_states * n_actions * n_states {
            return Err(Error::DimensionMismatch {
                expected: n_states * n_actions * n_states,
                got: transition.len(),
            });
        }
        for s in 0..n_states {
            for a in 0..n_actions {
                let row = &transition[(s * n_actions + a) * n_states..][..n_states];
                if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "transition row (s={s}, a={a}) has negative or non-finite entries"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "transition row (s={s}, a={a}) sums to {sum}"
                    )));
                }
            }
        }
        let initial_dist = StateDistribution::new(initial_dist)?;
        if initial_dist.len() != n_states {
            return Err(Error::DimensionMismatch {
                expected: n_states,
                got: initial_dist.len(),
            });
        }
        Ok(Self {
            n_states,
            n_actions,
            transition,
            initial_dist,
            gamma,
            extrinsic_reward: None,
        })
    }

    /// Attach an extrinsic reward table r(s, a). Stored only; the training
    /// loop is reward-free.
    pub fn with_extrinsic_reward(mut self, reward: Vec<f64>) -> Result<Self> {
        if reward.len() != self.n_states * self.n_actions {
            return Err(Error::DimensionMismatch {
                expected: self.n_states * self.n_actions,
                got: reward.len(),
            });
        }
        self.extrinsic_reward = Some(reward);
        Ok(self)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn initial_dist(&self) -> &StateDistribution {
        &self.initial_dist
    }

    pub fn extrinsic_reward(&self) -> Option<&[f64]> {
        self.extrinsic_reward.as_deref()
    }

    pub fn transition_prob(&self, s: usize, a: usize, s_next: usize) -> f64 {
        self.transition[(s * self.n_actions + a) * self.n_states + s_next]
    }

    fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        &self.transition[(s * self.n_actions + a) * self.n_states..][..self.n_states]
    }

    fn check_policy(&self, policy: &PolicyTable) -> Result<()> {
        if policy.n_states() != self.n_states || policy.n_actions() != self.n_actions {
            return Err(Error::DimensionMismatch {
                expected: self.n_states * self.n_actions,
                got: policy.n_states() * policy.n_actions(),
            });
        }
        Ok(())
    }

    /// State-to-state chain induced by a policy:
    /// `P_pi(s, s') = sum_a pi(a|s) P(s, a, s')`.
    pub fn induced_chain(&self, policy: &PolicyTable) -> Result<Vec<f64>> {
        self.check_policy(policy)?;
        let n = self.n_states;
        let mut chain = vec![0.0; n * n];
        for s in 0..n {
            for a in 0..self.n_actions {
                let p = policy.prob(s, a);
                if p == 0.0 {
                    continue;
                }
                let row = self.transition_row(s, a);
                for s_next in 0..n {
                    chain[s * n + s_next] += p * row[s_next];
                }
            }
        }
        Ok(chain)
    }

    /// Discounted state occupancy measure of `policy`, via the linear system
    /// `(I - gamma P_pi^T) rho = (1 - gamma) mu0`.
    pub fn occupancy_measure(&self, policy: &PolicyTable) -> Result<StateDistribution> {
        let chain = self.induced_chain(policy)?;
        let n = self.n_states;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // (I - gamma P^T)_{ij} = delta_ij - gamma P_{ji}
                a[i * n + j] = if i == j { 1.0 } else { 0.0 } - self.gamma * chain[j * n + i];
            }
        }
        let b: Vec<f64> = self
            .initial_dist
            .probs()
            .iter()
            .map(|p| (1.0 - self.gamma) * p)
            .collect();
        let rho = linalg::solve(a, b)?;
        // The solve of a contraction fixed point can leave sub-tolerance
        // negative round-off; clamp before validating.
        let clamped: Vec<f64> = rho.iter().map(|p| p.max(0.0)).collect();
        StateDistribution::new(clamped)
    }

    /// Max-norm residual of the occupancy fixed-point equation.
    pub fn occupancy_residual(&self, policy: &PolicyTable, rho: &StateDistribution) -> Result<f64> {
        let chain = self.induced_chain(policy)?;
        let n = self.n_states;
        let mut worst = 0.0f64;
        for s in 0..n {
            let mut inflow = 0.0;
            for s_prev in 0..n {
                inflow += chain[s_prev * n + s] * rho[s_prev];
            }
            let resid =
                (rho[s] - (1.0 - self.gamma) * self.initial_dist[s] - self.gamma * inflow).abs();
            worst = worst.max(resid);
        }
        Ok(worst)
    }

    /// Sample a seeded trajectory of exactly `horizon` steps.
    pub fn rollout(&self, policy: &PolicyTable, horizon: usize, seed: u64) -> Result<Vec<Step>> {
        if horizon == 0 {
            return Err(Error::OutOfRange("rollout horizon must be >= 1".into()));
        }
        self.check_policy(policy)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(horizon);
        let mut state = self.initial_dist.sample(&mut rng);
        for _ in 0..horizon {
            let action = policy.sample_action(state, &mut rng);
            let next_state = sample_index(self.transition_row(state, action), &mut rng);
            out.push(Step {
                state,
                action,
                next_state,
            });
            state = next_state;
        }
        Ok(out)
    }
}

/// The 3-state playground: three actions, action `a` jumps deterministically
/// to state `a` from anywhere, uniform start, gamma 0.9. Every point of the
/// probability simplex over the three states is reachable as an occupancy
/// measure, which is what makes the triangle picture work.
pub fn make_three_state_mdp() -> FiniteMdp {
    make_jump_mdp(3, 0.9)
}

/// Generalization of the playground: `n` states, `n` actions, action `a`
/// jumps to state `a` deterministically.
pub fn make_jump_mdp(n: usize, gamma: f64) -> FiniteMdp {
    let mut transition = vec![0.0; n * n * n];
    for s in 0..n {
        for a in 0..n {
            transition[(s * n + a) * n + a] = 1.0;
        }
    }
    FiniteMdp::new(n, n, transition, vec![1.0 / n as f64; n], gamma)
        .expect("jump MDP construction is always valid")
}
