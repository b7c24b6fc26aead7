//! Preference arithmetic: Elo scores as logits, the reward-model loss with
//! soft ties, KL-shaped per-token rewards, and best-of-n selection with its
//! unbiased performance estimator.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

/// Clamp applied to probabilities before taking logs.
pub const PROB_EPSILON: f64 = 1e-12;
/// Default per-token KL penalty coefficient.
pub const DEFAULT_KL_COEFFICIENT: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PreferenceError {
    #[error("candidate list is empty")]
    Empty,
    #[error("n = {n} is outside 1..={available}")]
    BadN { n: usize, available: usize },
    #[error("score is not finite")]
    NonFinite,
    #[error("kl coefficient must be non-negative and finite")]
    BadCoefficient,
    #[error("question {question} has {have} samples but n = {need} was requested")]
    TooFewSamples { question: usize, have: usize, need: usize },
    #[error("trials must be at least 1")]
    NoTrials,
}

/// Logistic function, evaluated without overflow for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Probability that the answer scored `score_a` is preferred over `score_b`.
pub fn preference_probability(score_a: f64, score_b: f64) -> f64 {
    sigmoid(score_a - score_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PreferenceLabel {
    FirstPreferred,
    SecondPreferred,
    Tie,
}

impl PreferenceLabel {
    /// Target probability that the first answer is preferred.
    pub fn target(self) -> f64 {
        match self {
            PreferenceLabel::FirstPreferred => 1.0,
            PreferenceLabel::SecondPreferred => 0.0,
            PreferenceLabel::Tie => 0.5,
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            PreferenceLabel::FirstPreferred => PreferenceLabel::SecondPreferred,
            PreferenceLabel::SecondPreferred => PreferenceLabel::FirstPreferred,
            PreferenceLabel::Tie => PreferenceLabel::Tie,
        }
    }
}

/// Cross-entropy of the label against `preference_probability(a, b)`.
pub fn rm_loss(score_a: f64, score_b: f64, label: PreferenceLabel) -> f64 {
    // Both sides are evaluated directly so that swapping the scores and the
    // label gives bit-identical losses.
    let p = preference_probability(score_a, score_b).max(PROB_EPSILON);
    let q = preference_probability(score_b, score_a).max(PROB_EPSILON);
    match label {
        PreferenceLabel::FirstPreferred => -libm::log(p),
        PreferenceLabel::SecondPreferred => -libm::log(q),
        PreferenceLabel::Tie => -0.5 * libm::log(p) - 0.5 * libm::log(q),
    }
}

/// Derivative of [`rm_loss`] with respect to `score_a - score_b`.
pub fn rm_loss_grad(score_a: f64, score_b: f64, label: PreferenceLabel) -> f64 {
    preference_probability(score_a, score_b) - label.target()
}

/// Per-token KL terms of one episode plus its terminal reward-model score.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedRewardTrace {
    /// `log pi_policy - log pi_bc` for each generated token.
    pub kl_terms: Vec<f64>,
    pub terminal_score: f64,
    pub kl_coefficient: f64,
}

/// `-beta * kl_t` at every token, with the terminal score added at the last.
pub fn shaped_rewards(trace: &ShapedRewardTrace) -> Result<Vec<f64>, PreferenceError> {
    if !(trace.kl_coefficient >= 0.0 && trace.kl_coefficient.is_finite()) {
        return Err(PreferenceError::BadCoefficient);
    }
    if trace.kl_terms.is_empty() {
        return Err(PreferenceError::Empty);
    }
    let mut rewards: Vec<f64> = trace.kl_terms.iter().map(|k| -trace.kl_coefficient * k).collect();
    if let Some(last) = rewards.last_mut() {
        *last += trace.terminal_score;
    }
    Ok(rewards)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredAnswer {
    pub answer_id: String,
    /// Score from the reward model used for selection.
    pub train_score: f64,
    /// Score from a held-out reward model used for evaluation.
    pub val_score: f64,
}

impl ScoredAnswer {
    pub fn new(answer_id: impl Into<String>, train_score: f64, val_score: f64) -> Self {
        Self {
            answer_id: answer_id.into(),
            train_score,
            val_score,
        }
    }
}

fn check_finite(samples: &[ScoredAnswer]) -> Result<(), PreferenceError> {
    if samples.iter().all(|s| s.train_score.is_finite() && s.val_score.is_finite()) {
        Ok(())
    } else {
        Err(PreferenceError::NonFinite)
    }
}

fn argmax_index<'a>(train_scores: impl Iterator<Item = &'a f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in train_scores.enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// The candidate with the highest train score; ties go to the earliest.
pub fn best_of_n_select(candidates: &[ScoredAnswer]) -> Result<&ScoredAnswer, PreferenceError> {
    check_finite(candidates)?;
    argmax_index(candidates.iter().map(|c| &c.train_score))
        .map(|i| &candidates[i])
        .ok_or(PreferenceError::Empty)
}

/// Weights `C(i-1, n-1) / C(N, n)` for `i = n..=N`, via a ratio recurrence.
pub fn bon_weights(total: usize, n: usize) -> Result<Vec<f64>, PreferenceError> {
    if n == 0 || n > total {
        return Err(PreferenceError::BadN { n, available: total });
    }
    // 1 / C(N, n) as a running product of k / (N - n + k).
    let mut w = 1.0;
    for k in 1..=n {
        w *= k as f64 / (total - n + k) as f64;
    }
    let mut weights = Vec::with_capacity(total - n + 1);
    weights.push(w);
    for i in n..total {
        w *= i as f64 / (i - n + 1) as f64;
        weights.push(w);
    }
    Ok(weights)
}

/// Sample indices ordered so that a later position always wins
/// [`best_of_n_select`] against an earlier one.
fn selection_order(samples: &[ScoredAnswer]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| match samples[a].train_score.partial_cmp(&samples[b].train_score).unwrap_or(Ordering::Equal) {
        Ordering::Equal => b.cmp(&a),
        other => other,
    });
    order
}

/// Expected val score of the best-of-n pick over all size-n subsets of the
/// samples, computed exactly from the sorted order.
pub fn bon_estimate(samples: &[ScoredAnswer], n: usize) -> Result<f64, PreferenceError> {
    check_finite(samples)?;
    let weights = bon_weights(samples.len(), n)?;
    let order = selection_order(samples);
    Ok(order[n - 1..]
        .iter()
        .zip(&weights)
        .map(|(&i, w)| w * samples[i].val_score)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Uniform size-n subsets; the estimand of [`bon_estimate`].
    WithoutReplacement,
    /// n independent uniform draws from the pool.
    WithReplacement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Standard error of the mean; zero when `trials == 1`.
    pub std_error: f64,
    pub trials: usize,
}

/// Monte Carlo estimate of the best-of-n val score.
pub fn bon_estimate_mc<R: Rng + ?Sized>(
    samples: &[ScoredAnswer],
    n: usize,
    rng: &mut R,
    trials: usize,
    sampling: Sampling,
) -> Result<McEstimate, PreferenceError> {
    check_finite(samples)?;
    if n == 0 || n > samples.len() {
        return Err(PreferenceError::BadN { n, available: samples.len() });
    }
    if trials == 0 {
        return Err(PreferenceError::NoTrials);
    }
    let mut draw: Vec<usize> = Vec::with_capacity(n);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        draw.clear();
        match sampling {
            Sampling::WithoutReplacement => {
                draw.extend(rand::seq::index::sample(rng, samples.len(), n).iter());
                // Subset order must not affect tie-breaking.
                draw.sort_unstable();
            }
            Sampling::WithReplacement => {
                draw.extend((0..n).map(|_| rng.random_range(0..samples.len())));
            }
        }
        let pick = argmax_index(draw.iter().map(|&i| &samples[i].train_score)).unwrap_or(0);
        let v = samples[draw[pick]].val_score;
        sum += v;
        sum_sq += v * v;
    }
    let t = trials as f64;
    let mean = sum / t;
    let std_error = if trials > 1 {
        let var = ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0);
        libm::sqrt(var / t)
    } else {
        0.0
    };
    Ok(McEstimate { mean, std_error, trials })
}

/// Mean of [`bon_estimate`] across questions, for each requested n.
pub fn bon_curve(per_question: &[Vec<ScoredAnswer>], n_values: &[usize]) -> Result<Vec<(usize, f64)>, PreferenceError> {
    if per_question.is_empty() {
        return Err(PreferenceError::Empty);
    }
    let need = n_values.iter().copied().max().unwrap_or(0);
    if n_values.contains(&0) {
        return Err(PreferenceError::BadN { n: 0, available: 0 });
    }
    for (question, samples) in per_question.iter().enumerate() {
        if samples.len() < need {
            return Err(PreferenceError::TooFewSamples {
                question,
                have: samples.len(),
                need,
            });
        }
    }
    n_values
        .iter()
        .map(|&n| {
            let mut total = 0.0;
            for samples in per_question {
                total += bon_estimate(samples, n)?;
            }
            Ok((n, total / per_question.len() as f64))
        })
        .collect()
}
