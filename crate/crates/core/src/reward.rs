//! Intrinsic reward signals that make population members distinguishable.
//!
//! All calculators return a per-state reward vector for the selected latent.
//! The discriminator-style reward uses the exact Bayes posterior
//! `q(z|s) = p(z) rho(s|z) / rho(s)` instead of a learned classifier, so the
//! identity `E_{p(z)} E_{rho(s|z)}[r] = I(s;z)` holds to machine precision. A
//! count-based estimator over replay tuples covers the sampled data path.

use serde::{Deserialize, Serialize};

use crate::diversity::{kl_divergence, SMOOTHING_FLOOR};
use crate::error::{Error, Result};
use crate::mdp::{PolicyTable, StateDistribution};
use crate::population::{average_occupancy, LatentPrior, ReplayBuffer};

/// Reward calculator selected by configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardMode {
    DiaynExact,
    DiaynEmpirical,
    Dgpo,
    Behavior,
}

impl RewardMode {
    pub fn key(&self) -> &'static str {
        match self {
            RewardMode::DiaynExact => "diayn-exact",
            RewardMode::DiaynEmpirical => "diayn-empirical",
            RewardMode::Dgpo => "dgpo",
            RewardMode::Behavior => "behavior",
        }
    }
}

/// Discriminability reward from the exact posterior:
/// `r(s) = ln q(z|s) - ln p(z)`, zero outside the support of the average
/// occupancy. The posterior is floored at [`SMOOTHING_FLOOR`] so states owned
/// by other policies yield a large-but-finite penalty.
pub fn diayn_reward(
    occs: &[StateDistribution],
    prior: &LatentPrior,
    z: usize,
) -> Result<Vec<f64>> {
    check_latent(occs.len(), z)?;
    let avg = average_occupancy(occs, prior)?;
    let p_z = prior[z];
    let mut reward = vec![0.0; avg.len()];
    for (s, r) in reward.iter_mut().enumerate() {
        if avg[s] <= 0.0 {
            continue;
        }
        let posterior = (p_z * occs[z][s] / avg[s]).max(SMOOTHING_FLOOR);
        *r = posterior.ln() - p_z.ln();
    }
    Ok(reward)
}

/// Same reward with the posterior estimated from replay-buffer visit counts
/// under add-one smoothing: `q(z|s) = (n(s,z) + 1) / (n(s) + N_z)`.
pub fn diayn_reward_empirical(
    buffer: &ReplayBuffer,
    prior: &LatentPrior,
    z: usize,
    n_states: usize,
) -> Result<Vec<f64>> {
    check_latent(buffer.n_latents(), z)?;
    if buffer.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    let n_latents = buffer.n_latents();
    let mut joint = vec![0u64; n_states];
    let mut marginal = vec![0u64; n_states];
    for t in buffer.iter() {
        marginal[t.state] += 1;
        if t.latent == z {
            joint[t.state] += 1;
        }
    }
    let p_z = prior[z];
    let mut reward = vec![0.0; n_states];
    for (s, r) in reward.iter_mut().enumerate() {
        let posterior =
            (joint[s] + 1) as f64 / (marginal[s] as f64 + n_latents as f64);
        *r = posterior.ln() - p_z.ln();
    }
    Ok(reward)
}

/// Gradient of `min_{j != z} KL(rho_z || rho_j)` with respect to `rho_z`:
/// component `s` is `ln(rho_z(s)/rho_j*(s)) + 1` against the argmin `j*`
/// (ties broken by lowest index), smoothed like [`kl_divergence`].
pub fn dgpo_objective_gradient(occs: &[StateDistribution], z: usize) -> Result<Vec<f64>> {
    check_latent(occs.len(), z)?;
    if occs.len() < 2 {
        return Err(Error::Config(
            "dgpo objective needs at least 2 policies".into(),
        ));
    }
    let j_star = dgpo_argmin(occs, z)?;
    let floored: Vec<f64> = occs[j_star]
        .probs()
        .iter()
        .map(|v| v.max(SMOOTHING_FLOOR))
        .collect();
    let norm: f64 = floored.iter().sum();
    let grad = occs[z]
        .probs()
        .iter()
        .zip(&floored)
        .map(|(p, q)| (p.max(SMOOTHING_FLOOR) / (q / norm)).ln() + 1.0)
        .collect();
    Ok(grad)
}

/// Index of the closest other policy under the smoothed KL, lowest index on
/// ties.
pub fn dgpo_argmin(occs: &[StateDistribution], z: usize) -> Result<usize> {
    let mut best = None;
    for (j, occ) in occs.iter().enumerate() {
        if j == z {
            continue;
        }
        let kl = kl_divergence(&occs[z], occ)?;
        best = match best {
            None => Some((j, kl)),
            Some((_, cur)) if kl < cur => Some((j, kl)),
            other => other,
        };
    }
    Ok(best.expect("at least one other policy").0)
}

/// Expected action-distribution divergence under an occupancy weighting:
/// `sum_s occ(s) KL(pi_a(.|s) || pi_b(.|s))`.
pub fn behavior_divergence(
    pi_a: &PolicyTable,
    pi_b: &PolicyTable,
    occ: &StateDistribution,
) -> Result<f64> {
    if pi_a.n_states() != pi_b.n_states()
        || pi_a.n_actions() != pi_b.n_actions()
        || occ.len() != pi_a.n_states()
    {
        return Err(Error::DimensionMismatch {
            expected: pi_a.n_states() * pi_a.n_actions(),
            got: pi_b.n_states() * pi_b.n_actions(),
        });
    }
    let mut total = 0.0;
    for s in 0..pi_a.n_states() {
        if occ[s] == 0.0 {
            continue;
        }
        total += occ[s] * row_kl(pi_a.row(s), pi_b.row(s));
    }
    Ok(total)
}

/// Per-state behavior reward: action-space KL at each state against the
/// behaviorally closest other policy (argmin of [`behavior_divergence`]
/// under the chosen policy's occupancy, ties to lowest index).
pub fn behavior_reward(
    tables: &[PolicyTable],
    occs: &[StateDistribution],
    z: usize,
) -> Result<Vec<f64>> {
    check_latent(tables.len(), z)?;
    if tables.len() < 2 {
        return Err(Error::Config(
            "behavior reward needs at least 2 policies".into(),
        ));
    }
    let mut best: Option<(usize, f64)> = None;
    for j in 0..tables.len() {
        if j == z {
            continue;
        }
        let div = behavior_divergence(&tables[z], &tables[j], &occs[z])?;
        best = match best {
            None => Some((j, div)),
            Some((_, cur)) if div < cur => Some((j, div)),
            other => other,
        };
    }
    let j_star = best.expect("at least one other policy").0;
    Ok((0..tables[z].n_states())
        .map(|s| row_kl(tables[z].row(s), tables[j_star].row(s)))
        .collect())
}

fn row_kl(p: &[f64], q: &[f64]) -> f64 {
    let floored: Vec<f64> = q.iter().map(|v| v.max(SMOOTHING_FLOOR)).collect();
    let norm: f64 = floored.iter().sum();
    p.iter()
        .zip(&floored)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / (qi / norm)).ln())
        .sum()
}

fn check_latent(n: usize, z: usize) -> Result<()> {
    if z >= n {
        return Err(Error::IndexOutOfRange {
            what: "latent",
            index: z,
            size: n,
        });
    }
    Ok(())
}
