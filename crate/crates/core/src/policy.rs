//! Tabular softmax policy, REINFORCE gradient estimation and the
//! gradient-ascent planner.

use rand::Rng;

use crate::error::{Error, Result};
use crate::feedback::softmax;
use crate::mdp::{TabularMdp, Trajectory};

/// Softmax policy logits theta, one row per state.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    num_states: usize,
    num_actions: usize,
    theta: Vec<f64>,
}

impl PolicyTable {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        PolicyTable { num_states, num_actions, theta: vec![0.0; num_states * num_actions] }
    }

    pub fn from_theta(num_states: usize, num_actions: usize, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != num_states * num_actions {
            return Err(Error::InvalidArgument("theta size mismatch".into()));
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite policy parameter".into()));
        }
        Ok(PolicyTable { num_states, num_actions, theta })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// pi(.|s), row softmax with max-logit subtraction.
    pub fn action_probabilities(&self, s: usize) -> Vec<f64> {
        softmax(&self.theta[s * self.num_actions..][..self.num_actions])
    }

    /// Flat |S| x |A| row-stochastic matrix for the sampler.
    pub fn probabilities_matrix(&self) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.theta.len());
        for s in 0..self.num_states {
            m.extend(self.action_probabilities(s));
        }
        m
    }

    /// sum_t d log pi(a_t|s_t) / d theta, using the closed-form
    /// per-step derivative 1{s_t=s}(1{a_t=a} - pi(a|s_t)).
    pub fn log_policy_gradient(&self, trajectory: &Trajectory) -> Vec<f64> {
        let probs = self.probabilities_matrix();
        self.log_policy_gradient_with(&probs, trajectory)
    }

    fn log_policy_gradient_with(&self, probs: &[f64], trajectory: &Trajectory) -> Vec<f64> {
        let mut grad = vec![0.0; self.theta.len()];
        for (t, &a_t) in trajectory.actions.iter().enumerate() {
            let s_t = trajectory.states[t];
            let row = &probs[s_t * self.num_actions..][..self.num_actions];
            let grow = &mut grad[s_t * self.num_actions..][..self.num_actions];
            for (a, g) in grow.iter_mut().enumerate() {
                *g += if a == a_t { 1.0 - row[a] } else { -row[a] };
            }
        }
        grad
    }
}

/// Gradient-ascent settings.
#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub step_size: f64,
    pub rollouts_per_gradient: usize,
    pub epsilon: f64,
    pub max_ascent_iters: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            step_size: 0.1,
            rollouts_per_gradient: 50,
            epsilon: 1e-3,
            max_ascent_iters: 300,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step_size <= 0.0 || self.epsilon <= 0.0 || self.rollouts_per_gradient == 0 {
            return Err(Error::InvalidArgument(
                "planner needs positive step size, epsilon and rollout count".into(),
            ));
        }
        Ok(())
    }
}

/// Monte-Carlo REINFORCE estimate of the value gradient:
/// mean over rollouts of reward(tau) * sum_t grad log pi(a_t|s_t).
pub fn reinforce_gradient<R: Rng>(
    mdp: &TabularMdp,
    policy: &PolicyTable,
    reward_fn: &dyn Fn(&Trajectory) -> f64,
    rollouts: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if rollouts == 0 {
        return Err(Error::InvalidArgument("need at least one rollout".into()));
    }
    let probs = policy.probabilities_matrix();
    let mut grad = vec![0.0; policy.theta.len()];
    for _ in 0..rollouts {
        let tau = mdp.sample_trajectory(&probs, rng)?;
        let r = reward_fn(&tau);
        let score = policy.log_policy_gradient_with(&probs, &tau);
        for (g, s) in grad.iter_mut().zip(&score) {
            *g += r * s;
        }
    }
    let m = rollouts as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    Ok(grad)
}

/// Gradient ascent on the Monte-Carlo value gradient; stops when the
/// parameter change drops below epsilon or the iteration cap is hit.
pub fn optimize_policy<R: Rng>(
    mdp: &TabularMdp,
    reward_fn: &dyn Fn(&Trajectory) -> f64,
    config: &PlannerConfig,
    warm_start: Option<&PolicyTable>,
    rng: &mut R,
) -> Result<PolicyTable> {
    config.validate()?;
    let mut policy = match warm_start {
        Some(p) => p.clone(),
        None => PolicyTable::zeros(mdp.num_states(), mdp.num_actions()),
    };
    for _ in 0..config.max_ascent_iters {
        let grad = reinforce_gradient(
            mdp,
            &policy,
            reward_fn,
            config.rollouts_per_gradient,
            rng,
        )?;
        let mut delta_norm_sq = 0.0;
        for (th, g) in policy.theta.iter_mut().zip(&grad) {
            let delta = config.step_size * g;
            *th += delta;
            delta_norm_sq += delta * delta;
        }
        if policy.theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("policy parameters diverged".into()));
        }
        if delta_norm_sq.sqrt() < config.epsilon {
            break;
        }
    }
    Ok(policy)
}

/// Monte-Carlo mean of reward_fn over sampled trajectories.
pub fn policy_value_estimate<R: Rng>(
    mdp: &TabularMdp,
    policy: &PolicyTable,
    reward_fn: &dyn Fn(&Trajectory) -> f64,
    num_rollouts: usize,
    rng: &mut R,
) -> Result<f64> {
    if num_rollouts == 0 {
        return Err(Error::InvalidArgument("need at least one rollout".into()));
    }
    let probs = policy.probabilities_matrix();
    let mut total = 0.0;
    for _ in 0..num_rollouts {
        let tau = mdp.sample_trajectory(&probs, rng)?;
        total += reward_fn(&tau);
    }
    Ok(total / num_rollouts as f64)
}
