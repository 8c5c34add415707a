//! Finite episodic MDP with known transitions: sampling and exact
//! trajectory enumeration for small instances.

use rand::Rng;

use crate::error::{Error, Result};

const PROB_TOL: f64 = 1e-9;
pub const ENUMERATION_GUARD: u128 = 1_000_000;

/// Draw an index from an unnormalized-but-valid probability slice.
pub fn sample_categorical<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidArgument(format!("{what} has negative entries")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidArgument(format!("{what} sums to {s}, expected 1")));
    }
    Ok(())
}

/// Episodic MDP (S, A, P, H, rho) with a dense transition table.
#[derive(Debug, Clone)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    /// P(s'|s,a), laid out as transition[(s * A + a) * S + s'].
    transition: Vec<f64>,
    /// Per-(s,a) cumulative rows for O(log S) sampling.
    transition_cum: Vec<f64>,
    initial_dist: Vec<f64>,
}

impl TabularMdp {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        transition: Vec<f64>,
        initial_dist: Vec<f64>,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(Error::InvalidArgument(
                "num_states, num_actions and horizon must be positive".into(),
            ));
        }
        if transition.len() != num_states * num_actions * num_states {
            return Err(Error::InvalidArgument(format!(
                "transition table has {} entries, expected {}",
                transition.len(),
                num_states * num_actions * num_states
            )));
        }
        if initial_dist.len() != num_states {
            return Err(Error::InvalidArgument("initial distribution length mismatch".into()));
        }
        for s in 0..num_states {
            for a in 0..num_actions {
                let row = &transition[(s * num_actions + a) * num_states..][..num_states];
                check_distribution(row, &format!("transition row (s={s}, a={a})"))?;
            }
        }
        check_distribution(&initial_dist, "initial distribution")?;

        let mut transition_cum = transition.clone();
        for row in transition_cum.chunks_mut(num_states) {
            let mut acc = 0.0;
            for p in row.iter_mut() {
                acc += *p;
                *p = acc;
            }
        }
        Ok(TabularMdp {
            num_states,
            num_actions,
            horizon,
            transition,
            transition_cum,
            initial_dist,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        &self.transition[(s * self.num_actions + a) * self.num_states..][..self.num_states]
    }

    fn check_indices(&self, s: usize, a: usize) -> Result<()> {
        if s >= self.num_states || a >= self.num_actions {
            return Err(Error::InvalidArgument(format!(
                "state {s} / action {a} out of range ({} states, {} actions)",
                self.num_states, self.num_actions
            )));
        }
        Ok(())
    }

    /// Draw s' ~ P(.|s,a).
    pub fn sample_transition<R: Rng>(&self, s: usize, a: usize, rng: &mut R) -> Result<usize> {
        self.check_indices(s, a)?;
        let cum = &self.transition_cum[(s * self.num_actions + a) * self.num_states..]
            [..self.num_states];
        let u: f64 = rng.gen::<f64>();
        let idx = cum.partition_point(|&c| c <= u);
        Ok(idx.min(self.num_states - 1))
    }

    /// Roll out one episode: s0 ~ rho, a_t ~ policy(.|s_t), s_{t+1} ~ P(.|s_t,a_t).
    ///
    /// `policy` is a flat row-stochastic |S| x |A| matrix.
    pub fn sample_trajectory<R: Rng>(&self, policy: &[f64], rng: &mut R) -> Result<Trajectory> {
        if policy.len() != self.num_states * self.num_actions {
            return Err(Error::InvalidArgument("policy matrix size mismatch".into()));
        }
        let mut states = Vec::with_capacity(self.horizon + 1);
        let mut actions = Vec::with_capacity(self.horizon);
        let mut s = sample_categorical(&self.initial_dist, rng);
        states.push(s);
        for _ in 0..self.horizon {
            let row = &policy[s * self.num_actions..][..self.num_actions];
            let a = sample_categorical(row, rng);
            actions.push(a);
            s = self.sample_transition(s, a, rng)?;
            states.push(s);
        }
        Ok(Trajectory { states, actions })
    }

    /// All realizable trajectories with their exact probabilities
    /// rho(s0) pi(a0|s0) P(s1|s0,a0) ... P(sH|s_{H-1},a_{H-1}).
    pub fn enumerate_trajectories(&self, policy: &[f64]) -> Result<Vec<(Trajectory, f64)>> {
        if policy.len() != self.num_states * self.num_actions {
            return Err(Error::InvalidArgument("policy matrix size mismatch".into()));
        }
        let bound = (self.num_states as u128)
            .checked_pow(self.horizon as u32 + 1)
            .and_then(|x| x.checked_mul((self.num_actions as u128).checked_pow(self.horizon as u32)?));
        match bound {
            Some(b) if b <= ENUMERATION_GUARD => {}
            _ => {
                return Err(Error::Capacity(format!(
                    "instance too large to enumerate (guard {} trajectories)",
                    ENUMERATION_GUARD
                )))
            }
        }

        let mut out = Vec::new();
        let mut states = Vec::with_capacity(self.horizon + 1);
        let mut actions = Vec::with_capacity(self.horizon);
        for s0 in 0..self.num_states {
            let p0 = self.initial_dist[s0];
            if p0 == 0.0 {
                continue;
            }
            states.push(s0);
            self.enumerate_rec(policy, &mut states, &mut actions, p0, &mut out);
            states.pop();
        }
        Ok(out)
    }

    fn enumerate_rec(
        &self,
        policy: &[f64],
        states: &mut Vec<usize>,
        actions: &mut Vec<usize>,
        prob: f64,
        out: &mut Vec<(Trajectory, f64)>,
    ) {
        if actions.len() == self.horizon {
            out.push((
                Trajectory { states: states.clone(), actions: actions.clone() },
                prob,
            ));
            return;
        }
        let s = *states.last().unwrap();
        for a in 0..self.num_actions {
            let pa = policy[s * self.num_actions + a];
            if pa == 0.0 {
                continue;
            }
            let row = self.transition_row(s, a);
            for (s_next, &pt) in row.iter().enumerate() {
                if pt == 0.0 {
                    continue;
                }
                actions.push(a);
                states.push(s_next);
                self.enumerate_rec(policy, states, actions, prob * pa * pt, out);
                states.pop();
                actions.pop();
            }
        }
    }
}

/// One episode: s_0..s_H and a_0..a_{H-1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

impl Trajectory {
    pub fn validate(&self, mdp: &TabularMdp) -> Result<()> {
        if self.states.len() != mdp.horizon() + 1 || self.actions.len() != mdp.horizon() {
            return Err(Error::InvalidArgument(format!(
                "trajectory lengths {}/{} do not match horizon {}",
                self.states.len(),
                self.actions.len(),
                mdp.horizon()
            )));
        }
        if self.states.iter().any(|&s| s >= mdp.num_states())
            || self.actions.iter().any(|&a| a >= mdp.num_actions())
        {
            return Err(Error::InvalidArgument("trajectory index out of range".into()));
        }
        Ok(())
    }

    pub fn final_state(&self) -> usize {
        *self.states.last().unwrap()
    }
}

/// Uniform |S| x |A| policy matrix.
pub fn uniform_policy(num_states: usize, num_actions: usize) -> Vec<f64> {
    vec![1.0 / num_actions as f64; num_states * num_actions]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain_mdp() -> TabularMdp {
        // 2 states, 2 actions: action 0 stays, action 1 flips.
        let t = vec![
            1.0, 0.0, // s0 a0
            0.0, 1.0, // s0 a1
            0.0, 1.0, // s1 a0
            1.0, 0.0, // s1 a1
        ];
        TabularMdp::new(2, 2, 3, t, vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn rejects_bad_rows() {
        let t = vec![0.5, 0.4];
        assert!(TabularMdp::new(1, 2, 1, t, vec![1.0]).is_err());
        let t = vec![1.0, 0.0, 0.0, 1.0];
        assert!(TabularMdp::new(2, 1, 1, t, vec![0.9, 0.2]).is_err());
    }

    #[test]
    fn point_mass_transition_is_deterministic() {
        let t = vec![0.0, 0.0, 0.0, 1.0];
        let mdp = TabularMdp::new(4, 1, 1, {
            let mut full = Vec::new();
            for _ in 0..4 {
                full.extend_from_slice(&t);
            }
            full
        }, vec![1.0, 0.0, 0.0, 0.0])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(mdp.sample_transition(0, 0, &mut rng).unwrap(), 3);
        }
    }

    #[test]
    fn transition_frequencies_match_row() {
        let row = [0.91, 0.03, 0.03, 0.03];
        let mut full = Vec::new();
        for _ in 0..4 {
            full.extend_from_slice(&row);
        }
        let mdp = TabularMdp::new(4, 1, 1, full, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[mdp.sample_transition(0, 0, &mut rng).unwrap()] += 1;
        }
        for (c, p) in counts.iter().zip(row.iter()) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.01);
        }
    }

    #[test]
    fn same_seed_same_draws() {
        let mdp = chain_mdp();
        let pol = uniform_policy(2, 2);
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let t1 = mdp.sample_trajectory(&pol, &mut r1).unwrap();
            let t2 = mdp.sample_trajectory(&pol, &mut r2).unwrap();
            assert_eq!(t1, t2);
        }
    }

    #[test]
    fn h1_deterministic_everything() {
        let mdp = TabularMdp::new(2, 1, 1, vec![0.0, 1.0, 0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let pol = vec![1.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tr = mdp.sample_trajectory(&pol, &mut rng).unwrap();
        assert_eq!(tr.states, vec![0, 1]);
        assert_eq!(tr.actions, vec![0]);
        let enumd = mdp.enumerate_trajectories(&pol).unwrap();
        assert_eq!(enumd.len(), 1);
        assert!((enumd[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_action_frequency_on_chain() {
        let mdp = chain_mdp();
        let pol = uniform_policy(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut first_action_ones = 0usize;
        for _ in 0..n {
            let tr = mdp.sample_trajectory(&pol, &mut rng).unwrap();
            tr.validate(&mdp).unwrap();
            first_action_ones += tr.actions[0];
        }
        assert!((first_action_ones as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn enumeration_single_state_two_actions() {
        let mdp = TabularMdp::new(1, 2, 2, vec![1.0, 1.0], vec![1.0]).unwrap();
        let pol = uniform_policy(1, 2);
        let enumd = mdp.enumerate_trajectories(&pol).unwrap();
        assert_eq!(enumd.len(), 4);
        for (_, p) in &enumd {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_mass_sums_to_one() {
        let mdp = chain_mdp();
        let pol = vec![0.3, 0.7, 0.6, 0.4];
        let enumd = mdp.enumerate_trajectories(&pol).unwrap();
        let mass: f64 = enumd.iter().map(|(_, p)| p).sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enumeration_matches_sampling() {
        let mdp = TabularMdp::new(
            2,
            2,
            2,
            vec![0.8, 0.2, 0.4, 0.6, 0.1, 0.9, 0.5, 0.5],
            vec![0.7, 0.3],
        )
        .unwrap();
        let pol = vec![0.5, 0.5, 0.2, 0.8];
        let enumd = mdp.enumerate_trajectories(&pol).unwrap();
        let n = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts: std::collections::HashMap<Trajectory, usize> = Default::default();
        for _ in 0..n {
            *counts.entry(mdp.sample_trajectory(&pol, &mut rng).unwrap()).or_default() += 1;
        }
        for (tr, p) in &enumd {
            let freq = counts.get(tr).copied().unwrap_or(0) as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (freq - p).abs() <= 4.0 * sigma + 1e-12,
                "freq {freq} vs prob {p}"
            );
        }
    }

    #[test]
    fn enumeration_guard() {
        let s = 10usize;
        let t = vec![1.0 / s as f64; s * 2 * s];
        let mdp = TabularMdp::new(s, 2, 8, t, vec![1.0 / s as f64; s]).unwrap();
        match mdp.enumerate_trajectories(&uniform_policy(s, 2)) {
            Err(Error::Capacity(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
