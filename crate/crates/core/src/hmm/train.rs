//! Flat-start initialization and embedded Baum-Welch re-estimation.
//!
//! A recording with `k` known steps is explained by `k` tied copies of the
//! state chain laid end to end: copy j's last state feeds copy j+1's first
//! state through the wrap edge. The composite chain is strictly left-right,
//! must start in its first state and must end in its last one.

use super::{GaussianHmm, HmmConfig, HmmError, Topology, MIN_VARIANCE};
use crate::features::FeatureSequence;
use crate::logmath::log_add;

/// Splits `total` into `parts` near-equal integer lengths; the leftover
/// units go to the earliest parts.
pub(crate) fn split_lengths(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

fn check_inputs(
    sequences: &[FeatureSequence],
    step_counts: &[usize],
    topology: Topology,
) -> Result<usize, HmmError> {
    if sequences.len() != step_counts.len() {
        return Err(HmmError::LengthMismatch { sequences: sequences.len(), step_counts: step_counts.len() });
    }
    let Some(first) = sequences.first() else {
        return Err(HmmError::NoData);
    };
    let dim = first.dim();
    for seq in sequences {
        if seq.dim() != dim {
            return Err(HmmError::DimensionMismatch { expected: dim, actual: seq.dim() });
        }
    }
    for &k in step_counts {
        if k == 0 {
            return Err(HmmError::InvalidStepCount { count: 0, reason: "every recording has at least one step" });
        }
        if k > 1 && !topology.is_cyclic() {
            return Err(HmmError::InvalidStepCount {
                count: k,
                reason: "a linear model covers a recording in a single pass",
            });
        }
    }
    Ok(dim)
}

/// Per-dimension floor: `factor` times the pooled variance of all frames,
/// never below [`MIN_VARIANCE`].
pub fn variance_floor(sequences: &[FeatureSequence], factor: f64) -> Vec<f64> {
    let dim = sequences.first().map_or(0, FeatureSequence::dim);
    let mut n = 0.0;
    let mut mean = vec![0.0; dim];
    for f in sequences.iter().flat_map(FeatureSequence::frames) {
        n += 1.0;
        mean.iter_mut().zip(f).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for f in sequences.iter().flat_map(FeatureSequence::frames) {
        var.iter_mut().zip(f.iter().zip(&mean)).for_each(|(s, (v, m))| *s += (v - m) * (v - m));
    }
    var.into_iter().map(|s| (factor * s / n).max(MIN_VARIANCE)).collect()
}

/// Uniform segmentation: each recording is cut into `k` equal passes and
/// each pass into `S` equal segments; state s is estimated from every frame
/// in segment s. Transitions start uniform over each state's successors.
pub fn flat_start(
    sequences: &[FeatureSequence],
    step_counts: &[usize],
    config: &HmmConfig,
) -> Result<GaussianHmm, HmmError> {
    config.validate()?;
    let dim = check_inputs(sequences, step_counts, config.topology)?;
    let s = config.num_states;

    let mut members: Vec<Vec<&[f64]>> = vec![Vec::new(); s];
    for (seq, &k) in sequences.iter().zip(step_counts) {
        let mut t = 0;
        for pass in split_lengths(seq.num_frames(), k) {
            if pass < s {
                return Err(HmmError::TooFewFrames { frames: pass, states: s });
            }
            for (state, len) in split_lengths(pass, s).into_iter().enumerate() {
                members[state].extend((t..t + len).map(|u| seq.frame(u)));
                t += len;
            }
        }
    }

    let floor = variance_floor(sequences, config.variance_floor_factor);
    let mut means = Vec::with_capacity(s);
    let mut variances = Vec::with_capacity(s);
    for frames in &members {
        let n = frames.len() as f64;
        let mean: Vec<f64> = (0..dim).map(|d| frames.iter().map(|f| f[d]).sum::<f64>() / n).collect();
        let var: Vec<f64> = (0..dim)
            .map(|d| {
                let v = frames.iter().map(|f| (f[d] - mean[d]).powi(2)).sum::<f64>() / n;
                v.max(floor[d])
            })
            .collect();
        means.push(mean);
        variances.push(var);
    }

    let transitions = (0..s)
        .map(|i| {
            let mut row = vec![0.0; s];
            if i + 1 < s {
                row[i] = 0.5;
                row[i + 1] = 0.5;
            } else if config.topology.is_cyclic() {
                row[i] = 0.5;
                row[0] = 0.5;
            } else {
                row[i] = 1.0;
            }
            row
        })
        .collect();
    GaussianHmm::from_parts(String::new(), config.topology, transitions, means, variances)
}

/// Maximizes Σ c_j ln p_j subject to Σ p_j = 1 and p_j ≥ floor.
fn floored_proportions(counts: &[f64], floor: f64) -> Vec<f64> {
    let n = counts.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut pinned = vec![false; n];
    loop {
        let pinned_count = pinned.iter().filter(|&&p| p).count();
        let mass = 1.0 - floor * pinned_count as f64;
        let free_total: f64 = counts.iter().zip(&pinned).filter(|(_, &p)| !p).map(|(c, _)| c).sum();
        let free_count = n - pinned_count;
        let probs: Vec<f64> = counts
            .iter()
            .zip(&pinned)
            .map(|(&c, &p)| match (p, free_total > 0.0) {
                (true, _) => floor,
                (false, true) => mass * c / free_total,
                (false, false) => mass / free_count as f64,
            })
            .collect();
        let mut changed = false;
        for j in 0..n {
            if !pinned[j] && probs[j] < floor {
                pinned[j] = true;
                changed = true;
            }
        }
        if !changed {
            return probs;
        }
    }
}

/// Expected sufficient statistics pooled over recordings and tied copies.
struct Accumulators {
    occupancy: Vec<f64>,
    first: Vec<Vec<f64>>,
    /// Second moments about the current means.
    second: Vec<Vec<f64>>,
    self_count: Vec<f64>,
    next_count: Vec<f64>,
    wrap_count: f64,
}

impl Accumulators {
    fn new(s: usize, d: usize) -> Self {
        Self {
            occupancy: vec![0.0; s],
            first: vec![vec![0.0; d]; s],
            second: vec![vec![0.0; d]; s],
            self_count: vec![0.0; s],
            next_count: vec![0.0; s],
            wrap_count: 0.0,
        }
    }
}

/// Log-domain forward-backward over the composite chain of one recording.
/// Returns the recording log-likelihood after adding its expected counts.
fn accumulate_recording(
    model: &GaussianHmm,
    seq: &FeatureSequence,
    copies: usize,
    acc: &mut Accumulators,
) -> Result<f64, HmmError> {
    let s = model.num_states();
    let frames = seq.num_frames();
    let n = s * copies;
    let emit = model.emission_table(seq);
    let b = |t: usize, c: usize| emit[t * s + c % s];
    let self_lp = |c: usize| model.log_transitions[c % s][c % s];
    // Edge from composite state c to c + 1.
    let next_lp = |c: usize| {
        let k = c % s;
        if k + 1 < s {
            model.log_transitions[k][k + 1]
        } else {
            model.log_transitions[s - 1][0]
        }
    };

    let mut alpha = vec![f64::NEG_INFINITY; frames * n];
    alpha[0] = b(0, 0);
    for t in 1..frames {
        // A left-right chain without skips reaches at most state t at time t.
        for c in 0..n.min(t + 1) {
            let mut v = alpha[(t - 1) * n + c] + self_lp(c);
            if c > 0 {
                v = log_add(v, alpha[(t - 1) * n + c - 1] + next_lp(c - 1));
            }
            alpha[t * n + c] = v + b(t, c);
        }
    }
    let total = alpha[(frames - 1) * n + n - 1];
    if total == f64::NEG_INFINITY {
        return Err(HmmError::NoValidPath { frames });
    }
    if !total.is_finite() {
        return Err(HmmError::NumericalUnderflow);
    }

    let mut beta = vec![f64::NEG_INFINITY; frames * n];
    beta[(frames - 1) * n + n - 1] = 0.0;
    for t in (0..frames - 1).rev() {
        for c in 0..n {
            let mut v = self_lp(c) + b(t + 1, c) + beta[(t + 1) * n + c];
            if c + 1 < n {
                v = log_add(v, next_lp(c) + b(t + 1, c + 1) + beta[(t + 1) * n + c + 1]);
            }
            beta[t * n + c] = v;
        }
    }

    for t in 0..frames {
        let frame = seq.frame(t);
        for c in 0..n {
            let lg = alpha[t * n + c] + beta[t * n + c] - total;
            if lg == f64::NEG_INFINITY {
                continue;
            }
            let g = lg.exp();
            let k = c % s;
            acc.occupancy[k] += g;
            for (d, &x) in frame.iter().enumerate() {
                let dev = x - model.means[k][d];
                acc.first[k][d] += g * x;
                acc.second[k][d] += g * dev * dev;
            }
            if t + 1 < frames {
                let head = alpha[t * n + c] - total;
                let xi_self = (head + self_lp(c) + b(t + 1, c) + beta[(t + 1) * n + c]).exp();
                acc.self_count[k] += xi_self;
                if c + 1 < n {
                    let xi_next = (head + next_lp(c) + b(t + 1, c + 1) + beta[(t + 1) * n + c + 1]).exp();
                    if k + 1 < s {
                        acc.next_count[k] += xi_next;
                    } else {
                        acc.wrap_count += xi_next;
                    }
                }
            }
        }
    }
    Ok(total)
}

fn check_pass_lengths(sequences: &[FeatureSequence], step_counts: &[usize], s: usize) -> Result<(), HmmError> {
    for (seq, &k) in sequences.iter().zip(step_counts) {
        if seq.num_frames() < k * s {
            return Err(HmmError::TooFewFrames { frames: seq.num_frames() / k, states: s });
        }
    }
    Ok(())
}

/// One Baum-Welch iteration over all recordings. Returns the updated model
/// and the total log-likelihood of the data under the *input* model.
pub fn embedded_reestimate(
    model: &GaussianHmm,
    sequences: &[FeatureSequence],
    step_counts: &[usize],
    config: &HmmConfig,
) -> Result<(GaussianHmm, f64), HmmError> {
    config.validate()?;
    let dim = check_inputs(sequences, step_counts, model.topology())?;
    if dim != model.dim() {
        return Err(HmmError::DimensionMismatch { expected: model.dim(), actual: dim });
    }
    let s = model.num_states();
    check_pass_lengths(sequences, step_counts, s)?;

    let mut acc = Accumulators::new(s, dim);
    let mut total = 0.0;
    for (seq, &k) in sequences.iter().zip(step_counts) {
        total += accumulate_recording(model, seq, k, &mut acc)?;
    }

    let floor = variance_floor(sequences, config.variance_floor_factor);
    let mut means = model.means.clone();
    let mut variances = model.variances.clone();
    for k in 0..s {
        let occ = acc.occupancy[k];
        if occ <= f64::MIN_POSITIVE {
            continue;
        }
        for d in 0..dim {
            let new_mean = acc.first[k][d] / occ;
            let shift = new_mean - model.means[k][d];
            let var = acc.second[k][d] / occ - shift * shift;
            means[k][d] = new_mean;
            variances[k][d] = var.max(floor[d]);
        }
    }

    let mut transitions = vec![vec![0.0; s]; s];
    for i in 0..s {
        if i + 1 < s {
            let p = floored_proportions(&[acc.self_count[i], acc.next_count[i]], config.min_self_loop);
            transitions[i][i] = p[0];
            transitions[i][i + 1] = p[1];
        } else if model.topology().is_cyclic() {
            let p = floored_proportions(&[acc.self_count[i], acc.wrap_count], config.min_self_loop);
            transitions[i][i] = p[0];
            transitions[i][0] = p[1];
        } else {
            transitions[i][i] = 1.0;
        }
    }
    let updated = GaussianHmm::from_parts(model.subject_id(), model.topology(), transitions, means, variances)?;
    Ok((updated, total))
}

/// Total composite-model log-likelihood of the training data.
pub fn training_log_likelihood(
    model: &GaussianHmm,
    sequences: &[FeatureSequence],
    step_counts: &[usize],
) -> Result<f64, HmmError> {
    let dim = check_inputs(sequences, step_counts, model.topology())?;
    if dim != model.dim() {
        return Err(HmmError::DimensionMismatch { expected: model.dim(), actual: dim });
    }
    check_pass_lengths(sequences, step_counts, model.num_states())?;
    let mut acc = Accumulators::new(model.num_states(), dim);
    sequences
        .iter()
        .zip(step_counts)
        .map(|(seq, &k)| accumulate_recording(model, seq, k, &mut acc))
        .sum()
}
