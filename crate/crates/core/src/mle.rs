//! Constrained maximum-likelihood estimation of the stacked weight
//! vector from (features, level) samples, the pairwise-difference
//! design matrix and the confidence widths driving optimism.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::feedback::{l2_norm, softmax, stack_features, stacked_class_logits, TrajectoryFeatures};

/// Observed (phi(tau), y) pairs consumed by the estimator.
#[derive(Debug, Clone)]
pub struct FeedbackDataset {
    k: usize,
    d: usize,
    samples: Vec<(Vec<f64>, usize)>,
}

impl FeedbackDataset {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if k < 2 || d == 0 {
            return Err(Error::InvalidArgument("need K >= 2 and d >= 1".into()));
        }
        Ok(FeedbackDataset { k, d, samples: Vec::new() })
    }

    pub fn push(&mut self, phi: Vec<f64>, level: usize) -> Result<()> {
        if phi.len() != self.d {
            return Err(Error::InvalidArgument(format!(
                "feature dim {} != dataset dim {}",
                phi.len(),
                self.d
            )));
        }
        if level >= self.k {
            return Err(Error::InvalidArgument(format!(
                "level {level} outside 0..{}",
                self.k
            )));
        }
        self.samples.push((phi, level));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn samples(&self) -> &[(Vec<f64>, usize)] {
        &self.samples
    }
}

fn require_nonempty(data: &FeedbackDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::State("MLE called on an empty dataset".into()));
    }
    Ok(())
}

fn check_dims(w: &[f64], data: &FeedbackDataset) -> Result<()> {
    if w.len() != data.k * data.d {
        return Err(Error::InvalidArgument(format!(
            "weight length {} != K*d = {}",
            w.len(),
            data.k * data.d
        )));
    }
    Ok(())
}

/// Mean negative log likelihood of the dataset under the stacked weights.
pub fn negative_log_likelihood(w: &[f64], data: &FeedbackDataset) -> Result<f64> {
    require_nonempty(data)?;
    check_dims(w, data)?;
    let mut total = 0.0;
    for (phi, y) in data.samples() {
        let logits = stacked_class_logits(w, data.k, phi);
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = logits.iter().map(|&z| (z - m).exp()).sum::<f64>().ln() + m;
        total += lse - logits[*y];
    }
    Ok(total / data.len() as f64)
}

/// Gradient of the mean negative log likelihood; block j receives
/// (softmax_j - indicator(y = j)) phi averaged over samples.
pub fn nll_gradient(w: &[f64], data: &FeedbackDataset) -> Result<Vec<f64>> {
    require_nonempty(data)?;
    check_dims(w, data)?;
    let (k, d) = (data.k, data.d);
    let mut grad = vec![0.0; k * d];
    for (phi, y) in data.samples() {
        let probs = softmax(&stacked_class_logits(w, k, phi));
        for j in 0..k {
            let coeff = probs[j] - if j == *y { 1.0 } else { 0.0 };
            let block = &mut grad[j * d..(j + 1) * d];
            for (g, &x) in block.iter_mut().zip(phi) {
                *g += coeff * x;
            }
        }
    }
    let n = data.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok(grad)
}

/// Closed-form Hessian of the mean negative log likelihood
/// (symmetric pairwise-difference form), row-major Kd x Kd.
pub fn nll_hessian(w: &[f64], data: &FeedbackDataset) -> Result<Vec<f64>> {
    require_nonempty(data)?;
    check_dims(w, data)?;
    let (k, d) = (data.k, data.d);
    let dim = k * d;
    let mut hess = vec![0.0; dim * dim];
    for (phi, _) in data.samples() {
        let probs = softmax(&stacked_class_logits(w, k, phi));
        let feats = TrajectoryFeatures::new(phi.clone())?;
        let stacked = stack_features(&feats, k);
        for j in 0..k {
            for l in 0..k {
                let coeff = probs[j] * probs[l] / 2.0;
                if coeff == 0.0 {
                    continue;
                }
                for a in 0..dim {
                    let da = stacked.vectors[j][a] - stacked.vectors[l][a];
                    if da == 0.0 {
                        continue;
                    }
                    for b in 0..dim {
                        let db = stacked.vectors[j][b] - stacked.vectors[l][b];
                        hess[a * dim + b] += coeff * da * db;
                    }
                }
            }
        }
    }
    let n = data.len() as f64;
    hess.iter_mut().for_each(|h| *h /= n);
    Ok(hess)
}

/// Euclidean projection onto the ball of the given radius.
pub fn project_to_ball(w: &[f64], radius: f64) -> Vec<f64> {
    let norm = l2_norm(w);
    if norm <= radius || norm == 0.0 {
        w.to_vec()
    } else {
        let scale = radius / norm;
        w.iter().map(|x| x * scale).collect()
    }
}

/// Projected gradient descent settings.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub step_size: f64,
    pub max_iters: usize,
    pub grad_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { step_size: 1.0, max_iters: 2000, grad_tolerance: 1e-6 }
    }
}

/// Constrained MLE over the ball of radius `bound` by projected
/// gradient descent with a halving fallback so the loss never increases.
pub fn fit_mle(
    data: &FeedbackDataset,
    bound: f64,
    config: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<Vec<f64>> {
    require_nonempty(data)?;
    if bound <= 0.0 {
        return Err(Error::InvalidArgument("projection radius must be positive".into()));
    }
    let dim = data.k * data.d;
    let mut w = match warm_start {
        Some(ws) => {
            check_dims(ws, data)?;
            project_to_ball(ws, bound)
        }
        None => vec![0.0; dim],
    };
    let mut loss = negative_log_likelihood(&w, data)?;
    for _ in 0..config.max_iters {
        let grad = nll_gradient(&w, data)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric("non-finite gradient in fit_mle".into()));
        }
        let mut step = config.step_size;
        let mut accepted = false;
        // shrink the step until the projected move does not increase the loss
        for _ in 0..40 {
            let candidate: Vec<f64> =
                w.iter().zip(&grad).map(|(wi, gi)| wi - step * gi).collect();
            let candidate = project_to_ball(&candidate, bound);
            let cand_loss = negative_log_likelihood(&candidate, data)?;
            if !cand_loss.is_finite() {
                return Err(Error::Numeric("non-finite loss in fit_mle".into()));
            }
            if cand_loss <= loss + 1e-12 {
                let moved = l2_norm(
                    &w.iter().zip(&candidate).map(|(a, b)| a - b).collect::<Vec<_>>(),
                );
                w = candidate;
                loss = cand_loss;
                accepted = true;
                if moved / step <= config.grad_tolerance {
                    return Ok(w);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // no descent direction at machine precision
        }
    }
    Ok(w)
}

/// Sigma_{D_n} = (1/nK^2) sum_i sum_j sum_l (phi_j - phi_l)(phi_j - phi_l)^T
/// over the stacked feature vectors; row-major Kd x Kd.
pub fn design_matrix_sigma(data: &FeedbackDataset) -> Result<Vec<f64>> {
    require_nonempty(data)?;
    let (k, d) = (data.k, data.d);
    let dim = k * d;
    let mut sigma = vec![0.0; dim * dim];
    // (phi_j - phi_l) is zero outside blocks j and l, so only the four
    // (j, l) block corners of the outer product are touched.
    for (phi, _) in data.samples() {
        for j in 0..k {
            for l in 0..k {
                if j == l {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        let v = phi[a] * phi[b];
                        sigma[(j * d + a) * dim + (j * d + b)] += v;
                        sigma[(l * d + a) * dim + (l * d + b)] += v;
                        sigma[(j * d + a) * dim + (l * d + b)] -= v;
                        sigma[(l * d + a) * dim + (j * d + b)] -= v;
                    }
                }
            }
        }
    }
    let scale = 1.0 / (data.len() as f64 * (k * k) as f64);
    sigma.iter_mut().for_each(|x| *x *= scale);
    Ok(sigma)
}

/// Smallest eigenvalue of (sigma + ridge I) for a symmetric row-major matrix.
pub fn min_eigenvalue(sigma: &[f64], dim: usize, ridge: f64) -> Result<f64> {
    if sigma.len() != dim * dim {
        return Err(Error::InvalidArgument("matrix size mismatch".into()));
    }
    if ridge < 0.0 {
        return Err(Error::InvalidArgument("ridge must be nonnegative".into()));
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            if (sigma[i * dim + j] - sigma[j * dim + i]).abs() > 1e-9 {
                return Err(Error::InvalidArgument("matrix is not symmetric".into()));
            }
        }
    }
    let mut m = DMatrix::from_row_slice(dim, dim, sigma);
    for i in 0..dim {
        m[(i, i)] += ridge;
    }
    // symmetrize roundoff before the eigensolver
    let mt = m.transpose();
    let sym = (&m + &mt) * 0.5;
    let eig = sym.symmetric_eigen();
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Constants of the concentration bounds: eta = exp(-4B)/2 and
/// C = log(K exp(2B)).
#[derive(Debug, Clone)]
pub struct ConfidenceConstants {
    pub eta: f64,
    pub c_const: f64,
    pub delta: f64,
}

impl ConfidenceConstants {
    pub fn new(bound: f64, k: usize, delta: f64) -> Result<Self> {
        if bound <= 0.0 || k < 2 {
            return Err(Error::InvalidArgument("need B > 0 and K >= 2".into()));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidArgument("delta must lie in (0, 1]".into()));
        }
        Ok(ConfidenceConstants {
            eta: (-4.0 * bound).exp() / 2.0,
            c_const: (k as f64).ln() + 2.0 * bound,
            delta,
        })
    }
}

fn check_width_inputs(lambda_min: f64, n: usize) -> Result<()> {
    if lambda_min <= 0.0 {
        return Err(Error::State(
            "lambda_min must be positive; ridge-regularize the design matrix first".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need n >= 1".into()));
    }
    Ok(())
}

/// High-probability bound on ||w_hat - w_star||_2:
/// (2 / (eta lambda_min)) sqrt(C^2/(2n) log(4/delta)).
pub fn theoretical_weight_bound(
    constants: &ConfidenceConstants,
    lambda_min: f64,
    n: usize,
) -> Result<f64> {
    check_width_inputs(lambda_min, n)?;
    let tail = (constants.c_const.powi(2) / (2.0 * n as f64)
        * (4.0 / constants.delta).ln())
    .sqrt();
    Ok(2.0 / (constants.eta * lambda_min) * tail)
}

/// Reward confidence width:
/// (4K exp(4B) / (eta lambda_min)) sqrt(C^2/(2n) log(4/delta)).
pub fn theoretical_confidence_width(
    constants: &ConfidenceConstants,
    k: usize,
    bound: f64,
    lambda_min: f64,
    n: usize,
) -> Result<f64> {
    check_width_inputs(lambda_min, n)?;
    let tail = (constants.c_const.powi(2) / (2.0 * n as f64)
        * (4.0 / constants.delta).ln())
    .sqrt();
    Ok(4.0 * k as f64 * (4.0 * bound).exp() / (constants.eta * lambda_min) * tail)
}

/// The c / sqrt(n) width used in the experiments.
pub fn practical_confidence_width(c_conf: f64, n: usize) -> Result<f64> {
    if c_conf <= 0.0 {
        return Err(Error::InvalidArgument("confidence parameter must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need n >= 1".into()));
    }
    Ok(c_conf / (n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_sample(k: usize, phi: Vec<f64>, y: usize) -> FeedbackDataset {
        let mut data = FeedbackDataset::new(k, phi.len()).unwrap();
        data.push(phi, y).unwrap();
        data
    }

    #[test]
    fn nll_at_zero_is_log_k() {
        let data = single_sample(4, vec![0.3, -0.2], 2);
        let w = vec![0.0; 8];
        assert!((negative_log_likelihood(&w, &data).unwrap() - 4.0f64.ln()).abs() < 1e-12);

        let mut many = FeedbackDataset::new(4, 2).unwrap();
        for i in 0..7 {
            many.push(vec![0.3, -0.2], i % 4).unwrap();
        }
        assert!((negative_log_likelihood(&w, &many).unwrap() - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn nll_hand_evaluated_binary_case() {
        let data = single_sample(2, vec![1.0], 1);
        let w = vec![0.0, 1.0];
        let want = -(0.7310585786300049f64).ln();
        assert!((negative_log_likelihood(&w, &data).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn empty_dataset_is_a_state_error() {
        let data = FeedbackDataset::new(3, 2).unwrap();
        assert!(matches!(
            negative_log_likelihood(&[0.0; 6], &data),
            Err(Error::State(_))
        ));
        assert!(matches!(fit_mle(&data, 1.0, &SolverConfig::default(), None), Err(Error::State(_))));
    }

    #[test]
    fn gradient_zero_under_balanced_labels() {
        let mut data = FeedbackDataset::new(3, 2).unwrap();
        for y in 0..3 {
            data.push(vec![0.4, 0.2], y).unwrap();
        }
        let g = nll_gradient(&vec![0.0; 6], &data).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn gradient_hand_evaluated_binary_case() {
        let data = single_sample(2, vec![1.0], 1);
        let g = nll_gradient(&[0.0, 0.0], &data).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-12);
        assert!((g[1] + 0.5).abs() < 1e-12);
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, FeedbackDataset) {
        let k = rng.gen_range(2..=5usize);
        let d = rng.gen_range(1..=5usize);
        let n = rng.gen_range(1..=50usize);
        let mut data = FeedbackDataset::new(k, d).unwrap();
        for _ in 0..n {
            let phi: Vec<f64> =
                (0..d).map(|_| (rng.gen::<f64>() - 0.5) / (d as f64).sqrt()).collect();
            data.push(phi, rng.gen_range(0..k)).unwrap();
        }
        let w: Vec<f64> = (0..k * d).map(|_| rng.gen::<f64>() - 0.5).collect();
        (w, data)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let (w, data) = random_instance(&mut rng);
            let g = nll_gradient(&w, &data).unwrap();
            let fd = crate::oracle::finite_difference(
                &|x: &[f64]| negative_log_likelihood(x, &data).unwrap(),
                &w,
                1e-6,
            );
            let gnorm = l2_norm(&g).max(1.0);
            let err = l2_norm(&g.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(err / gnorm < 1e-6, "err {err} vs norm {gnorm}");
        }
    }

    #[test]
    fn hessian_matches_finite_differences_and_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let (w, data) = random_instance(&mut rng);
            let dim = data.k() * data.d();
            let h = nll_hessian(&w, &data).unwrap();
            // finite differences of the gradient, column by column
            let step = 1e-6;
            let mut max_rel = 0.0f64;
            for c in 0..dim {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[c] += step;
                wm[c] -= step;
                let gp = nll_gradient(&wp, &data).unwrap();
                let gm = nll_gradient(&wm, &data).unwrap();
                for r in 0..dim {
                    let fd = (gp[r] - gm[r]) / (2.0 * step);
                    let diff = (h[r * dim + c] - fd).abs();
                    max_rel = max_rel.max(diff / h[r * dim + c].abs().max(1.0));
                }
            }
            assert!(max_rel < 1e-5, "hessian mismatch {max_rel}");
            let lam = min_eigenvalue(&h, dim, 0.0).unwrap();
            assert!(lam >= -1e-9, "hessian not PSD: {lam}");
        }
    }

    #[test]
    fn nll_is_convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let (_, data) = random_instance(&mut rng);
            let dim = data.k() * data.d();
            let w1: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
            let w2: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
            let t: f64 = rng.gen();
            let mid: Vec<f64> =
                w1.iter().zip(&w2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            let l1 = negative_log_likelihood(&w1, &data).unwrap();
            let l2 = negative_log_likelihood(&w2, &data).unwrap();
            let lm = negative_log_likelihood(&mid, &data).unwrap();
            assert!(lm <= t * l1 + (1.0 - t) * l2 + 1e-9);
        }
    }

    #[test]
    fn projection() {
        let p = project_to_ball(&[3.0, 4.0], 1.0);
        assert!((p[0] - 0.6).abs() < 1e-12 && (p[1] - 0.8).abs() < 1e-12);
        assert_eq!(project_to_ball(&[0.1, -0.2], 1.0), vec![0.1, -0.2]);
        assert_eq!(project_to_ball(&[0.0, 0.0], 1.0), vec![0.0, 0.0]);
    }

    #[test]
    fn fit_pushes_to_boundary_for_one_sided_labels() {
        let k = 3;
        let b = 1.5;
        let mut data = FeedbackDataset::new(k, 2).unwrap();
        for _ in 0..20 {
            data.push(vec![0.6, 0.3], k - 1).unwrap();
        }
        let w = fit_mle(&data, b, &SolverConfig::default(), None).unwrap();
        assert!((l2_norm(&w) - b).abs() < 1e-6, "norm {}", l2_norm(&w));
    }

    #[test]
    fn fit_stays_small_for_balanced_zero_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let k = 4;
        let d = 2;
        let mut data = FeedbackDataset::new(k, d).unwrap();
        for _ in 0..4000 {
            let phi: Vec<f64> = (0..d).map(|_| (rng.gen::<f64>() - 0.5)).collect();
            data.push(phi, rng.gen_range(0..k)).unwrap();
        }
        let w = fit_mle(&data, 2.0, &SolverConfig::default(), None).unwrap();
        // sampling noise keeps the fit slightly off zero; it must stay far
        // from the projection boundary
        assert!(l2_norm(&w) <= 0.3, "norm {}", l2_norm(&w));
    }

    #[test]
    fn fit_beats_truth_on_empirical_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let (k, d, b) = (3usize, 3usize, 2.0f64);
        let raw: Vec<f64> = (0..k * d).map(|_| rng.gen::<f64>() - 0.5).collect();
        let w_star = project_to_ball(&raw, b * 0.8);
        let mut data = FeedbackDataset::new(k, d).unwrap();
        for _ in 0..5000 {
            let phi: Vec<f64> =
                (0..d).map(|_| (rng.gen::<f64>() - 0.5) / (d as f64).sqrt()).collect();
            let probs = softmax(&stacked_class_logits(&w_star, k, &phi));
            let y = crate::mdp::sample_categorical(&probs, &mut rng);
            data.push(phi, y).unwrap();
        }
        let w_hat = fit_mle(&data, b, &SolverConfig::default(), None).unwrap();
        assert!(l2_norm(&w_hat) <= b + 1e-9);
        let l_hat = negative_log_likelihood(&w_hat, &data).unwrap();
        let l_star = negative_log_likelihood(&w_star, &data).unwrap();
        assert!(l_hat <= l_star + 1e-3, "l_hat {l_hat} vs l_star {l_star}");
    }

    #[test]
    fn design_matrix_hand_case() {
        let data = single_sample(2, vec![1.0], 0);
        let sigma = design_matrix_sigma(&data).unwrap();
        let want = [0.5, -0.5, -0.5, 0.5];
        for (a, b) in sigma.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((min_eigenvalue(&sigma, 2, 0.0).unwrap()).abs() < 1e-12);
        assert!((min_eigenvalue(&sigma, 2, 0.01).unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn design_matrix_zero_features_and_duplication() {
        let mut data = FeedbackDataset::new(3, 2).unwrap();
        data.push(vec![0.0, 0.0], 1).unwrap();
        let sigma = design_matrix_sigma(&data).unwrap();
        assert!(sigma.iter().all(|x| *x == 0.0));

        let mut d1 = FeedbackDataset::new(2, 2).unwrap();
        d1.push(vec![0.4, -0.1], 0).unwrap();
        d1.push(vec![0.2, 0.3], 1).unwrap();
        let mut d2 = d1.clone();
        d2.push(vec![0.4, -0.1], 0).unwrap();
        d2.push(vec![0.2, 0.3], 1).unwrap();
        let s1 = design_matrix_sigma(&d1).unwrap();
        let s2 = design_matrix_sigma(&d2).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn min_eigenvalue_basics() {
        let eye = vec![1.0, 0.0, 0.0, 1.0];
        assert!((min_eigenvalue(&eye, 2, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let asym = vec![1.0, 0.5, 0.0, 1.0];
        assert!(min_eigenvalue(&asym, 2, 0.0).is_err());
    }

    #[test]
    fn confidence_constants_hand_values() {
        let c = ConfidenceConstants::new(1.0, 2, 0.1).unwrap();
        assert!((c.eta - 0.00915781944).abs() < 1e-9);
        assert!((c.c_const - (2.0 + 2.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn width_scalings() {
        let c = ConfidenceConstants::new(1.0, 2, 0.1).unwrap();
        let w_n = theoretical_confidence_width(&c, 2, 1.0, 0.3, 100).unwrap();
        let w_4n = theoretical_confidence_width(&c, 2, 1.0, 0.3, 400).unwrap();
        assert!((w_n / w_4n - 2.0).abs() < 1e-9);
        let w_bigger_lam = theoretical_confidence_width(&c, 2, 1.0, 0.6, 100).unwrap();
        assert!(w_bigger_lam < w_n);
        assert!(theoretical_confidence_width(&c, 2, 1.0, 0.0, 100).is_err());
        assert!(theoretical_weight_bound(&c, 0.3, 100).unwrap() < w_n);
    }

    #[test]
    fn practical_width_values() {
        assert!((practical_confidence_width(10.0, 100).unwrap() - 1.0).abs() < 1e-12);
        assert!((practical_confidence_width(10.0, 4).unwrap() - 5.0).abs() < 1e-12);
        assert!((practical_confidence_width(10.0, 1).unwrap() - 10.0).abs() < 1e-12);
        assert!(practical_confidence_width(0.0, 5).is_err());
    }
}
