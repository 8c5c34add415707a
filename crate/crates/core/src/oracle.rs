//! Brute-force reference computations: exact values and policy
//! gradients via trajectory enumeration, and central finite differences.
//!
//! Everything here is deterministic and rollout-free; used as the
//! independent side of the Monte-Carlo cross-checks.

use crate::error::Result;
use crate::mdp::{TabularMdp, Trajectory};
use crate::policy::PolicyTable;

/// Exact expected reward sum_tau Pr(tau) reward(tau).
pub fn exact_value(
    mdp: &TabularMdp,
    policy: &PolicyTable,
    reward_fn: &dyn Fn(&Trajectory) -> f64,
) -> Result<f64> {
    let probs = policy.probabilities_matrix();
    let trajectories = mdp.enumerate_trajectories(&probs)?;
    Ok(trajectories.iter().map(|(tau, p)| p * reward_fn(tau)).sum())
}

/// Exact value gradient sum_tau reward(tau) Pr(tau) grad log Pr(tau);
/// the transition factors drop out, leaving the policy score.
pub fn exact_policy_gradient(
    mdp: &TabularMdp,
    policy: &PolicyTable,
    reward_fn: &dyn Fn(&Trajectory) -> f64,
) -> Result<Vec<f64>> {
    let probs = policy.probabilities_matrix();
    let trajectories = mdp.enumerate_trajectories(&probs)?;
    let mut grad = vec![0.0; policy.theta().len()];
    for (tau, p) in &trajectories {
        let score = policy.log_policy_gradient(tau);
        let weight = p * reward_fn(tau);
        for (g, s) in grad.iter_mut().zip(&score) {
            *g += weight * s;
        }
    }
    Ok(grad)
}

/// Central finite differences of a scalar function, per coordinate.
pub fn finite_difference(fn_: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    assert!(step > 0.0, "step must be positive");
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let plus = fn_(&probe);
        probe[i] = x[i] - step;
        let minus = fn_(&probe);
        probe[i] = x[i];
        grad.push((plus - minus) / (2.0 * step));
    }
    grad
}
