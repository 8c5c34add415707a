//! K-ary categorical feedback model: softmax level distribution over
//! trajectory features, expected reward, sampling and noise mixing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::sample_categorical;

/// Feature vector phi(tau) with ||phi||_2 <= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFeatures {
    phi: Vec<f64>,
}

impl TrajectoryFeatures {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::InvalidArgument("feature vector must be non-empty".into()));
        }
        let norm = l2_norm(&phi);
        if norm > 1.0 + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "feature norm {norm} exceeds 1"
            )));
        }
        Ok(TrajectoryFeatures { phi })
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }
}

/// K class weight vectors w_i in R^d; their concatenation is the
/// stacked parameter w in R^{Kd} with ||w||_2 <= B.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightBlocks {
    pub k: usize,
    pub d: usize,
    #[serde(rename = "B")]
    pub bound: f64,
    pub blocks: Vec<Vec<f64>>,
}

impl WeightBlocks {
    pub fn new(k: usize, d: usize, bound: f64, blocks: Vec<Vec<f64>>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument("K must be at least 2".into()));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("feature dimension must be positive".into()));
        }
        if bound <= 0.0 {
            return Err(Error::InvalidArgument("bound B must be positive".into()));
        }
        if blocks.len() != k || blocks.iter().any(|b| b.len() != d) {
            return Err(Error::InvalidArgument("weight blocks shape mismatch".into()));
        }
        Ok(WeightBlocks { k, d, bound, blocks })
    }

    pub fn zeros(k: usize, d: usize, bound: f64) -> Result<Self> {
        Self::new(k, d, bound, vec![vec![0.0; d]; k])
    }

    /// Concatenate the blocks into w in R^{Kd}.
    pub fn concat(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.k * self.d);
        for b in &self.blocks {
            w.extend_from_slice(b);
        }
        w
    }

    pub fn from_concat(k: usize, d: usize, bound: f64, w: &[f64]) -> Result<Self> {
        if w.len() != k * d {
            return Err(Error::InvalidArgument(format!(
                "concatenated weight length {} != K*d = {}",
                w.len(),
                k * d
            )));
        }
        let blocks = w.chunks(d).map(|c| c.to_vec()).collect();
        Self::new(k, d, bound, blocks)
    }

    /// Assumption-2 check on ground-truth weights: ||w_i||_2 <= B/K per block.
    pub fn satisfies_ground_truth_bound(&self) -> bool {
        let limit = self.bound / self.k as f64 + 1e-9;
        self.blocks.iter().all(|b| l2_norm(b) <= limit)
    }

    pub fn load_json(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let w: WeightBlocks = serde_json::from_str(&text)?;
        WeightBlocks::new(w.k, w.d, w.bound, w.blocks)
    }

    pub fn save_json(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// Block embedding of phi into R^{Kd}: vector i is zero except
/// coordinates i*d..i*d+d-1, which hold phi.
#[derive(Debug, Clone)]
pub struct StackedFeatures {
    pub k: usize,
    pub d: usize,
    pub vectors: Vec<Vec<f64>>,
}

pub fn stack_features(phi: &TrajectoryFeatures, k: usize) -> StackedFeatures {
    let d = phi.dim();
    let mut vectors = Vec::with_capacity(k);
    for i in 0..k {
        let mut v = vec![0.0; k * d];
        v[i * d..(i + 1) * d].copy_from_slice(phi.phi());
        vectors.push(v);
    }
    StackedFeatures { k, d, vectors }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Softmax with max-logit subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Class logits w_i . phi for every level i.
pub fn class_logits(w: &WeightBlocks, phi: &TrajectoryFeatures) -> Result<Vec<f64>> {
    if w.d != phi.dim() {
        return Err(Error::InvalidArgument(format!(
            "feature dim {} != weight dim {}",
            phi.dim(),
            w.d
        )));
    }
    Ok(w.blocks.iter().map(|b| dot(b, phi.phi())).collect())
}

/// Same logits computed from the concatenated parameter; w . phi_i = w_i . phi.
pub fn stacked_class_logits(w_concat: &[f64], k: usize, phi: &[f64]) -> Vec<f64> {
    let d = phi.len();
    (0..k).map(|i| dot(&w_concat[i * d..(i + 1) * d], phi)).collect()
}

/// P(y = i) = exp(w_i . phi) / sum_j exp(w_j . phi).
pub fn feedback_probabilities(w: &WeightBlocks, phi: &TrajectoryFeatures) -> Result<Vec<f64>> {
    Ok(softmax(&class_logits(w, phi)?))
}

pub fn expected_level(probs: &[f64]) -> f64 {
    probs.iter().enumerate().map(|(i, p)| i as f64 * p).sum()
}

/// R(tau) = sum_i i P(y = i), the mean feedback level in [0, K-1].
pub fn true_expected_reward(w: &WeightBlocks, phi: &TrajectoryFeatures) -> Result<f64> {
    Ok(expected_level(&feedback_probabilities(w, phi)?))
}

/// Draw a feedback level from the categorical model.
pub fn sample_feedback<R: Rng>(
    w: &WeightBlocks,
    phi: &TrajectoryFeatures,
    rng: &mut R,
) -> Result<usize> {
    let probs = feedback_probabilities(w, phi)?;
    Ok(sample_categorical(&probs, rng))
}

/// (1 - eps) p + eps uniform.
pub fn mix_with_uniform_noise(p: &[f64], noise_level: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&noise_level) {
        return Err(Error::InvalidArgument(format!(
            "noise level {noise_level} outside [0, 1]"
        )));
    }
    let k = p.len() as f64;
    Ok(p.iter().map(|&pi| (1.0 - noise_level) * pi + noise_level / k).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn feats(v: &[f64]) -> TrajectoryFeatures {
        TrajectoryFeatures::new(v.to_vec()).unwrap()
    }

    #[test]
    fn stacking_definition() {
        let s = stack_features(&feats(&[1.0, 0.0]), 2);
        assert_eq!(s.vectors[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.vectors[1], vec![0.0, 0.0, 1.0, 0.0]);

        let z = stack_features(&feats(&[0.0, 0.0]), 3);
        assert!(z.vectors.iter().all(|v| v.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn stacked_dot_equals_blockwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let k = 3;
            let d = 4;
            let blocks: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| rng.gen::<f64>() - 0.5).collect())
                .collect();
            let w = WeightBlocks::new(k, d, 5.0, blocks).unwrap();
            let raw: Vec<f64> = (0..d).map(|_| (rng.gen::<f64>() - 0.5) / d as f64).collect();
            let phi = feats(&raw);
            let stacked = stack_features(&phi, k);
            let wc = w.concat();
            for i in 0..k {
                let via_stack = dot(&wc, &stacked.vectors[i]);
                let via_block = dot(&w.blocks[i], phi.phi());
                assert_eq!(via_stack, via_block);
            }
        }
    }

    #[test]
    fn uniform_probabilities_for_zero_weights() {
        let w = WeightBlocks::zeros(4, 2, 1.0).unwrap();
        let p = feedback_probabilities(&w, &feats(&[0.3, 0.1])).unwrap();
        for pi in &p {
            assert!((pi - 0.25).abs() < 1e-12);
        }
        assert!((true_expected_reward(&w, &feats(&[0.3, 0.1])).unwrap() - 1.5).abs() < 1e-12);
        let w6 = WeightBlocks::zeros(6, 2, 1.0).unwrap();
        assert!((true_expected_reward(&w6, &feats(&[0.0, 0.0])).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn hand_evaluated_binary_softmax() {
        let w = WeightBlocks::new(2, 1, 2.0, vec![vec![0.0], vec![1.0]]).unwrap();
        let phi = feats(&[1.0]);
        let p = feedback_probabilities(&w, &phi).unwrap();
        assert!((p[0] - 0.26894).abs() < 1e-5);
        assert!((p[1] - 0.73106).abs() < 1e-5);
        assert!((true_expected_reward(&w, &phi).unwrap() - 0.73106).abs() < 1e-5);
    }

    #[test]
    fn shift_invariance() {
        let mut blocks = vec![vec![0.2, -0.1], vec![0.0, 0.4], vec![-0.3, 0.1]];
        let phi = feats(&[0.5, -0.5]);
        let p1 = feedback_probabilities(
            &WeightBlocks::new(3, 2, 10.0, blocks.clone()).unwrap(),
            &phi,
        )
        .unwrap();
        for b in blocks.iter_mut() {
            b[0] += 1.3;
            b[1] -= 0.7;
        }
        let p2 =
            feedback_probabilities(&WeightBlocks::new(3, 2, 10.0, blocks).unwrap(), &phi).unwrap();
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn saturated_logits_reach_top_level() {
        let k = 4;
        let mut blocks = vec![vec![0.0]; k];
        blocks[k - 1] = vec![20.0];
        let w = WeightBlocks::new(k, 1, 100.0, blocks).unwrap();
        let r = true_expected_reward(&w, &feats(&[1.0])).unwrap();
        assert!((r - (k - 1) as f64).abs() < 1e-7);
    }

    #[test]
    fn probabilities_stable_for_large_weights() {
        let w = WeightBlocks::new(3, 2, 2000.0, vec![
            vec![1000.0, -1000.0],
            vec![-500.0, 900.0],
            vec![0.0, 0.0],
        ])
        .unwrap();
        let p = feedback_probabilities(&w, &feats(&[0.7, 0.7])).unwrap();
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|x| x.is_finite() && *x >= 0.0));
    }

    #[test]
    fn feedback_sampling_frequencies() {
        let w = WeightBlocks::zeros(4, 1, 1.0).unwrap();
        let phi = feats(&[0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_feedback(&w, &phi, &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn sampled_mean_matches_expected_reward() {
        let w = WeightBlocks::new(3, 1, 3.0, vec![vec![0.0], vec![0.8], vec![-0.4]]).unwrap();
        let phi = feats(&[0.9]);
        let r = true_expected_reward(&w, &phi).unwrap();
        let probs = feedback_probabilities(&w, &phi).unwrap();
        let var: f64 = probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * (i as f64 - r).powi(2))
            .sum();
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mean: f64 = (0..n)
            .map(|_| sample_feedback(&w, &phi, &mut rng).unwrap() as f64)
            .sum::<f64>()
            / n as f64;
        assert!((mean - r).abs() <= 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn point_mass_sampling() {
        let mut blocks = vec![vec![0.0]; 3];
        blocks[1] = vec![50.0];
        let w = WeightBlocks::new(3, 1, 1000.0, blocks).unwrap();
        let phi = feats(&[1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            assert_eq!(sample_feedback(&w, &phi, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn noise_mixing() {
        let p = [0.7, 0.1, 0.1, 0.1];
        let same = mix_with_uniform_noise(&p, 0.0).unwrap();
        assert_eq!(same, p.to_vec());
        let flat = mix_with_uniform_noise(&p, 1.0).unwrap();
        for x in flat {
            assert!((x - 0.25).abs() < 1e-12);
        }
        let mixed = mix_with_uniform_noise(&p, 0.1).unwrap();
        let want = [0.655, 0.115, 0.115, 0.115];
        for (a, b) in mixed.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(mix_with_uniform_noise(&p, 1.5).is_err());
        assert!(mix_with_uniform_noise(&p, -0.1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = WeightBlocks::new(2, 2, 3.0, vec![vec![0.1, 0.2], vec![-0.3, 0.4]]).unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert!(text.contains("\"B\""));
        let back: WeightBlocks = serde_json::from_str(&text).unwrap();
        assert_eq!(back.blocks, w.blocks);
        assert_eq!(back.bound, w.bound);
    }

    #[test]
    fn rejects_k_below_two() {
        assert!(WeightBlocks::zeros(1, 2, 1.0).is_err());
    }
}
