//! Latent-conditioned policy populations and their update rules.
//!
//! Two representations are supported:
//! - [`LatentPolicy`]: tabular softmax logits indexed (z, s, a), updated by an
//!   exact policy-gradient step computed through the occupancy linear system.
//! - [`SimplexPopulation`]: each member is a state distribution moved directly
//!   by exponentiated-gradient steps; the geometric picture where a policy is
//!   identified with its occupancy point.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg;
use crate::mdp::{FiniteMdp, PolicyTable, StateDistribution, Step};

/// Prior p(z) over latent indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPrior(Vec<f64>);

impl LatentPrior {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let d = StateDistribution::new(probs)?;
        Ok(Self(d.probs().to_vec()))
    }

    pub fn uniform(n_latents: usize) -> Self {
        Self(vec![1.0 / n_latents as f64; n_latents])
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
}

impl std::ops::Index<usize> for LatentPrior {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Population of latent-conditioned tabular softmax policies pi(a|s,z).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentPolicy {
    logits: Vec<f64>, // (z, s, a) row-major
    n_latents: usize,
    n_states: usize,
    n_actions: usize,
}

impl LatentPolicy {
    /// Initialize with small seeded Gaussian logits (std `noise_std`) so that
    /// the initial policies are near-identical and near-uniform.
    pub fn init(
        n_latents: usize,
        n_states: usize,
        n_actions: usize,
        noise_std: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_std).expect("std must be finite");
        let logits = (0..n_latents * n_states * n_actions)
            .map(|_| normal.sample(&mut rng))
            .collect();
        Self {
            logits,
            n_latents,
            n_states,
            n_actions,
        }
    }

    pub fn from_logits(
        logits: Vec<f64>,
        n_latents: usize,
        n_states: usize,
        n_actions: usize,
    ) -> Result<Self> {
        if logits.len() != n_latents * n_states * n_actions {
            return Err(Error::DimensionMismatch {
                expected: n_latents * n_states * n_actions,
                got: logits.len(),
            });
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("logits must be finite".into()));
        }
        Ok(Self {
            logits,
            n_latents,
            n_states,
            n_actions,
        })
    }

    pub fn n_latents(&self) -> usize {
        self.n_latents
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    fn logit_row(&self, z: usize, s: usize) -> &[f64] {
        let base = (z * self.n_states + s) * self.n_actions;
        &self.logits[base..base + self.n_actions]
    }

    fn check_latent(&self, z: usize) -> Result<()> {
        if z >= self.n_latents {
            return Err(Error::IndexOutOfRange {
                what: "latent",
                index: z,
                size: self.n_latents,
            });
        }
        Ok(())
    }

    /// Softmax policy table for latent `z`.
    pub fn table(&self, z: usize) -> Result<PolicyTable> {
        self.check_latent(z)?;
        let mut probs = Vec::with_capacity(self.n_states * self.n_actions);
        for s in 0..self.n_states {
            probs.extend_from_slice(&softmax(self.logit_row(z, s)));
        }
        Ok(PolicyTable::from_raw(probs, self.n_states, self.n_actions))
    }

    /// Occupancy measure of every member policy, in latent order.
    pub fn occupancies(&self, mdp: &FiniteMdp) -> Result<Vec<StateDistribution>> {
        (0..self.n_latents)
            .map(|z| mdp.occupancy_measure(&self.table(z)?))
            .collect()
    }

    /// One exact-gradient ascent step on `J(theta_z) = sum_s rho_z(s) r(s)`.
    ///
    /// The gradient is obtained by differentiating the occupancy fixed point:
    /// with `w` solving `w = r + gamma P_pi w`,
    /// `dJ/dlogit(s,a) = gamma * rho(s) * pi(a|s) * (Q(s,a) - V(s))`
    /// where `Q(s,a) = sum_s' P(s,a,s') w(s')` and `V(s) = sum_a pi(a|s) Q(s,a)`.
    /// Only the slice for `z` changes.
    pub fn update_exact(
        &self,
        mdp: &FiniteMdp,
        z: usize,
        reward: &[f64],
        step_size: f64,
    ) -> Result<LatentPolicy> {
        if step_size <= 0.0 {
            return Err(Error::OutOfRange(format!(
                "step size must be positive, got {step_size}"
            )));
        }
        let grad = self.exact_gradient(mdp, z, reward)?;
        let mut next = self.clone();
        let base = z * self.n_states * self.n_actions;
        for (i, g) in grad.iter().enumerate() {
            next.logits[base + i] += step_size * g;
        }
        Ok(next)
    }

    /// Analytic gradient of `J(theta_z)` with respect to the logits of slice
    /// `z`, flattened (s, a) row-major.
    pub fn exact_gradient(&self, mdp: &FiniteMdp, z: usize, reward: &[f64]) -> Result<Vec<f64>> {
        self.check_latent(z)?;
        let n = mdp.n_states();
        let n_actions = mdp.n_actions();
        if reward.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: reward.len(),
            });
        }
        let policy = self.table(z)?;
        let rho = mdp.occupancy_measure(&policy)?;
        let chain = mdp.induced_chain(&policy)?;
        let gamma = mdp.gamma();

        // Adjoint pass: solve (I - gamma P_pi) w = r.
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = if i == j { 1.0 } else { 0.0 } - gamma * chain[i * n + j];
            }
        }
        let w = linalg::solve(a, reward.to_vec())?;

        let mut grad = vec![0.0; n * n_actions];
        for s in 0..n {
            let mut q = vec![0.0; n_actions];
            for (act, q_sa) in q.iter_mut().enumerate() {
                for (s_next, w_next) in w.iter().enumerate() {
                    *q_sa += mdp.transition_prob(s, act, s_next) * w_next;
                }
            }
            let v: f64 = (0..n_actions).map(|act| policy.prob(s, act) * q[act]).sum();
            for (act, q_sa) in q.iter().enumerate() {
                grad[s * n_actions + act] = gamma * rho[s] * policy.prob(s, act) * (q_sa - v);
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("policy gradient is not finite".into()));
        }
        Ok(grad)
    }

    /// REINFORCE-style step from a sampled trajectory, using the per-state
    /// intrinsic reward table. Kept for fidelity with the replay-buffer data
    /// path; the exact-gradient update is the default everywhere else.
    pub fn update_sampled(
        &self,
        z: usize,
        trajectory: &[Step],
        reward: &[f64],
        gamma: f64,
        step_size: f64,
    ) -> Result<LatentPolicy> {
        self.check_latent(z)?;
        if step_size <= 0.0 {
            return Err(Error::OutOfRange(format!(
                "step size must be positive, got {step_size}"
            )));
        }
        if trajectory.is_empty() {
            return Err(Error::OutOfRange("trajectory must be non-empty".into()));
        }
        let policy = self.table(z)?;
        let mut returns = vec![0.0; trajectory.len()];
        let mut acc = 0.0;
        for (t, step) in trajectory.iter().enumerate().rev() {
            acc = reward[step.state] + gamma * acc;
            returns[t] = acc;
        }
        let mut grad = vec![0.0; self.n_states * self.n_actions];
        let mut discount = 1.0;
        for (t, step) in trajectory.iter().enumerate() {
            for a in 0..self.n_actions {
                let indicator = if a == step.action { 1.0 } else { 0.0 };
                grad[step.state * self.n_actions + a] +=
                    discount * returns[t] * (indicator - policy.prob(step.state, a));
            }
            discount *= gamma;
        }
        let scale = step_size / trajectory.len() as f64;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("sampled gradient is not finite".into()));
        }
        let mut next = self.clone();
        let base = z * self.n_states * self.n_actions;
        for (i, g) in grad.iter().enumerate() {
            next.logits[base + i] += scale * g;
        }
        Ok(next)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Population of state distributions moved directly on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPopulation {
    points: Vec<StateDistribution>,
}

impl SimplexPopulation {
    pub fn new(points: Vec<StateDistribution>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("population must be non-empty".into()));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: points.iter().map(|p| p.len()).find(|l| *l != n).unwrap_or(n),
            });
        }
        Ok(Self { points })
    }

    /// Near-uniform seeded initialization: softmax of small Gaussian noise.
    pub fn init(n_policies: usize, n_states: usize, noise_std: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_std).expect("std must be finite");
        let points = (0..n_policies)
            .map(|_| {
                let noise: Vec<f64> = (0..n_states).map(|_| normal.sample(&mut rng)).collect();
                StateDistribution::new(softmax(&noise)).expect("softmax output is a distribution")
            })
            .collect();
        Self { points }
    }

    pub fn points(&self) -> &[StateDistribution] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.points[0].len()
    }

    /// Exponentiated-gradient step on point `z`:
    /// `rho <- normalize(rho * exp(step * gradient))`.
    pub fn update(&self, z: usize, gradient: &[f64], step_size: f64) -> Result<SimplexPopulation> {
        if z >= self.points.len() {
            return Err(Error::IndexOutOfRange {
                what: "latent",
                index: z,
                size: self.points.len(),
            });
        }
        if step_size <= 0.0 {
            return Err(Error::OutOfRange(format!(
                "step size must be positive, got {step_size}"
            )));
        }
        let point = &self.points[z];
        if gradient.len() != point.len() {
            return Err(Error::DimensionMismatch {
                expected: point.len(),
                got: gradient.len(),
            });
        }
        // Subtract the max exponent for overflow safety; normalization removes
        // the common factor.
        let max_g = gradient.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = point
            .probs()
            .iter()
            .zip(gradient)
            .map(|(p, g)| p * (step_size * (g - max_g)).exp())
            .collect();
        let updated = StateDistribution::normalize(weights)?;
        let mut points = self.points.clone();
        points[z] = updated;
        Ok(SimplexPopulation { points })
    }
}

/// Average state marginal `rho(s) = sum_i p(z_i) rho(s|z_i)`.
pub fn average_occupancy(
    occs: &[StateDistribution],
    prior: &LatentPrior,
) -> Result<StateDistribution> {
    if occs.len() != prior.len() {
        return Err(Error::DimensionMismatch {
            expected: prior.len(),
            got: occs.len(),
        });
    }
    let n = occs[0].len();
    let mut avg = vec![0.0; n];
    for (occ, weight) in occs.iter().zip(prior.probs()) {
        if occ.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: occ.len(),
            });
        }
        for (s, p) in occ.probs().iter().enumerate() {
            avg[s] += weight * p;
        }
    }
    StateDistribution::new(avg)
}

/// One stored transition tuple (s, a, s', r_in, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub next_state: usize,
    pub intrinsic_reward: f64,
    pub latent: usize,
}

/// Bounded FIFO replay buffer of transition tuples.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    data: VecDeque<Transition>,
    capacity: usize,
    n_latents: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, n_latents: usize) -> Self {
        Self {
            data: VecDeque::with_capacity(capacity.min(1 << 20)),
            capacity,
            n_latents,
        }
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.latent >= self.n_latents {
            return Err(Error::IndexOutOfRange {
                what: "latent",
                index: t.latent,
                size: self.n_latents,
            });
        }
        if self.data.len() == self.capacity {
            self.data.pop_front();
        }
        self.data.push_back(t);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn n_latents(&self) -> usize {
        self.n_latents
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.data.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{make_jump_mdp, make_three_state_mdp};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn identical_logits_give_identical_occupancies() {
        let mdp = make_three_state_mdp();
        let pop = LatentPolicy::from_logits(vec![0.0; 4 * 3 * 3], 4, 3, 3).unwrap();
        let occs = pop.occupancies(&mdp).unwrap();
        for occ in &occs[1..] {
            assert_eq!(occ.probs(), occs[0].probs());
        }
    }

    #[test]
    fn single_latent_matches_direct_occupancy() {
        let mdp = make_three_state_mdp();
        let pop = LatentPolicy::init(1, 3, 3, 0.1, 3);
        let occs = pop.occupancies(&mdp).unwrap();
        let direct = mdp.occupancy_measure(&pop.table(0).unwrap()).unwrap();
        assert_eq!(occs[0].probs(), direct.probs());
    }

    #[test]
    fn vertex_logits_give_near_vertex_occupancies() {
        let mdp = make_three_state_mdp();
        // Strongly peaked logits: policy z always takes action z.
        let mut logits = vec![0.0; 3 * 3 * 3];
        for z in 0..3 {
            for s in 0..3 {
                logits[(z * 3 + s) * 3 + z] = 30.0;
            }
        }
        let pop = LatentPolicy::from_logits(logits, 3, 3, 3).unwrap();
        let occs = pop.occupancies(&mdp).unwrap();
        for (z, occ) in occs.iter().enumerate() {
            let want = 0.1 / 3.0 + 0.9;
            assert!((occ[z] - want).abs() < 1e-9, "latent {z}: {}", occ[z]);
        }
    }

    #[test]
    fn average_occupancy_cases() {
        let single = vec![StateDistribution::new(vec![0.3, 0.7]).unwrap()];
        let avg = average_occupancy(&single, &LatentPrior::uniform(1)).unwrap();
        assert_eq!(avg.probs(), &[0.3, 0.7]);

        let pair = vec![
            StateDistribution::new(vec![1.0, 0.0]).unwrap(),
            StateDistribution::new(vec![0.0, 1.0]).unwrap(),
        ];
        let avg = average_occupancy(&pair, &LatentPrior::uniform(2)).unwrap();
        assert_eq!(avg.probs(), &[0.5, 0.5]);

        let trio = vec![
            StateDistribution::new(vec![1.0, 0.0, 0.0]).unwrap(),
            StateDistribution::new(vec![0.0, 1.0, 0.0]).unwrap(),
        ];
        let prior = LatentPrior::new(vec![0.25, 0.75]).unwrap();
        let avg = average_occupancy(&trio, &prior).unwrap();
        assert_eq!(avg.probs(), &[0.25, 0.75, 0.0]);
    }

    #[test]
    fn zero_reward_leaves_logits_unchanged() {
        let mdp = make_three_state_mdp();
        let pop = LatentPolicy::init(2, 3, 3, 0.1, 11);
        let next = pop.update_exact(&mdp, 0, &[0.0, 0.0, 0.0], 0.1).unwrap();
        assert_eq!(pop.logits(), next.logits());
    }

    #[test]
    fn reward_on_one_state_increases_its_occupancy() {
        let mdp = make_three_state_mdp();
        let pop = LatentPolicy::init(1, 3, 3, 0.1, 5);
        let before = pop.occupancies(&mdp).unwrap()[0][2];
        let next = pop.update_exact(&mdp, 0, &[0.0, 0.0, 1.0], 1e-2).unwrap();
        let after = next.occupancies(&mdp).unwrap()[0][2];
        assert!(after > before, "occupancy {before} -> {after}");
    }

    #[test]
    fn update_exact_changes_only_the_target_slice() {
        let mdp = make_three_state_mdp();
        let pop = LatentPolicy::init(3, 3, 3, 0.1, 9);
        let next = pop.update_exact(&mdp, 1, &[1.0, 0.0, 0.5], 0.1).unwrap();
        let slice = 3 * 3;
        assert_eq!(&pop.logits()[..slice], &next.logits()[..slice]);
        assert_ne!(&pop.logits()[slice..2 * slice], &next.logits()[slice..2 * slice]);
        assert_eq!(&pop.logits()[2 * slice..], &next.logits()[2 * slice..]);
    }

    /// Central-difference oracle for dJ/dlogits, evaluating J by re-solving
    /// the occupancy system on perturbed logits.
    fn fd_gradient(
        mdp: &FiniteMdp,
        pop: &LatentPolicy,
        z: usize,
        reward: &[f64],
        h: f64,
    ) -> Vec<f64> {
        let slice = mdp.n_states() * mdp.n_actions();
        let base = z * slice;
        let mut grad = vec![0.0; slice];
        for i in 0..slice {
            let mut plus = pop.logits().to_vec();
            plus[base + i] += h;
            let mut minus = pop.logits().to_vec();
            minus[base + i] -= h;
            let j_plus = objective(mdp, plus, pop, z, reward);
            let j_minus = objective(mdp, minus, pop, z, reward);
            grad[i] = (j_plus - j_minus) / (2.0 * h);
        }
        grad
    }

    fn objective(
        mdp: &FiniteMdp,
        logits: Vec<f64>,
        like: &LatentPolicy,
        z: usize,
        reward: &[f64],
    ) -> f64 {
        let pop = LatentPolicy::from_logits(
            logits,
            like.n_latents(),
            like.n_states(),
            like.n_actions(),
        )
        .unwrap();
        let rho = mdp.occupancy_measure(&pop.table(z).unwrap()).unwrap();
        rho.probs().iter().zip(reward).map(|(p, r)| p * r).sum()
    }

    #[test]
    fn exact_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let mdp = random_mdp(&mut rng, 4, 3);
            let pop = LatentPolicy::init(2, 4, 3, 0.5, rng.random());
            let reward: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let analytic = pop.exact_gradient(&mdp, 1, &reward).unwrap();
            let numeric = fd_gradient(&mdp, &pop, 1, &reward, 1e-4);
            let scale = numeric
                .iter()
                .map(|g| g.abs())
                .fold(1e-8f64, f64::max);
            for (a, n) in analytic.iter().zip(&numeric) {
                assert!(
                    (a - n).abs() / scale < 1e-4,
                    "analytic {a} vs numeric {n} (scale {scale})"
                );
            }
        }
    }

    pub(crate) fn random_mdp(rng: &mut ChaCha8Rng, n_states: usize, n_actions: usize) -> FiniteMdp {
        let mut transition = Vec::with_capacity(n_states * n_actions * n_states);
        for _ in 0..n_states * n_actions {
            let raw: Vec<f64> = (0..n_states).map(|_| rng.random::<f64>() + 0.05).collect();
            let sum: f64 = raw.iter().sum();
            transition.extend(raw.into_iter().map(|v| v / sum));
        }
        let raw: Vec<f64> = (0..n_states).map(|_| rng.random::<f64>() + 0.05).collect();
        let sum: f64 = raw.iter().sum();
        let initial: Vec<f64> = raw.into_iter().map(|v| v / sum).collect();
        FiniteMdp::new(n_states, n_actions, transition, initial, 0.9).unwrap()
    }

    #[test]
    fn simplex_update_zero_gradient_is_identity() {
        let pop = SimplexPopulation::init(2, 3, 0.1, 1);
        let next = pop.update(0, &[0.0, 0.0, 0.0], 0.5).unwrap();
        for (a, b) in pop.points().iter().zip(next.points()) {
            for (x, y) in a.probs().iter().zip(b.probs()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn simplex_update_large_onehot_step_approaches_vertex() {
        let pop = SimplexPopulation::new(vec![StateDistribution::uniform(3)]).unwrap();
        let next = pop.update(0, &[0.0, 100.0, 0.0], 1.0).unwrap();
        assert!(next.points()[0][1] > 1.0 - 1e-12);
    }

    #[test]
    fn simplex_update_matches_closed_form() {
        let pop = SimplexPopulation::new(vec![StateDistribution::uniform(3)]).unwrap();
        let next = pop.update(0, &[1.0, 0.0, 0.0], 1.0).unwrap();
        let e = std::f64::consts::E;
        let want = [e / (e + 2.0), 1.0 / (e + 2.0), 1.0 / (e + 2.0)];
        for (got, want) in next.points()[0].probs().iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn replay_buffer_evicts_fifo_and_bounds_capacity() {
        let mut buf = ReplayBuffer::new(3, 2);
        for i in 0..5 {
            buf.push(Transition {
                state: i,
                action: 0,
                next_state: 0,
                intrinsic_reward: 0.0,
                latent: i % 2,
            })
            .unwrap();
        }
        assert_eq!(buf.len(), 3);
        let states: Vec<usize> = buf.iter().map(|t| t.state).collect();
        assert_eq!(states, vec![2, 3, 4]);
        assert!(buf
            .push(Transition {
                state: 0,
                action: 0,
                next_state: 0,
                intrinsic_reward: 0.0,
                latent: 7,
            })
            .is_err());
    }

    #[test]
    fn sampled_update_changes_only_target_slice() {
        let mdp = make_jump_mdp(3, 0.9);
        let pop = LatentPolicy::init(2, 3, 3, 0.1, 21);
        let traj = mdp.rollout(&pop.table(1).unwrap(), 32, 4).unwrap();
        let next = pop
            .update_sampled(1, &traj, &[1.0, 0.0, 0.0], 0.9, 0.1)
            .unwrap();
        let slice = 3 * 3;
        assert_eq!(&pop.logits()[..slice], &next.logits()[..slice]);
        assert_ne!(&pop.logits()[slice..], &next.logits()[slice..]);
    }

    proptest! {
        // Policy rows and simplex points stay valid distributions through
        // long random update sequences.
        #[test]
        fn updates_preserve_distributions(seed in 0u64..500) {
            let mdp = make_three_state_mdp();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut latent = LatentPolicy::init(2, 3, 3, 0.1, seed);
            let mut simplex = SimplexPopulation::init(2, 3, 0.1, seed);
            for _ in 0..40 {
                let z = rng.random_range(0..2);
                let reward: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
                latent = latent.update_exact(&mdp, z, &reward, 0.3).unwrap();
                simplex = simplex.update(z, &reward, 0.5).unwrap();
            }
            for z in 0..2 {
                let table = latent.table(z).unwrap();
                for s in 0..3 {
                    let sum: f64 = table.row(s).iter().sum();
                    prop_assert!((sum - 1.0).abs() < 1e-9);
                    prop_assert!(table.row(s).iter().all(|p| *p >= 0.0));
                }
            }
            for point in simplex.points() {
                let sum: f64 = point.probs().iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
            }
        }
    }
}
