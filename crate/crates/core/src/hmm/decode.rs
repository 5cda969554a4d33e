//! Grammar-constrained Viterbi decoding and its sum-product companion.

use serde::{Deserialize, Serialize};

use super::{GaussianHmm, HmmError};
use crate::features::FeatureSequence;
use crate::logmath::log_add;

/// Admissible state sequences at decode time. Both start in state 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeGrammar {
    /// Exactly one pass: the wrap edge is disabled and the path must end in
    /// the last state.
    SinglePass,
    /// Any number of passes: the wrap edge is enabled and the path may end in
    /// any state, so a trailing partial step is allowed.
    #[default]
    MultiStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// Joint log-probability of the best path and the observations.
    pub log_likelihood: f64,
    /// Zero-based state per frame.
    pub state_path: Vec<usize>,
    pub step_count: usize,
    /// Frames at which a new pass begins (the wrap edge was taken into them).
    pub step_boundaries: Vec<usize>,
}

/// Per-state edge weights induced by a model and grammar.
struct Edges {
    self_lp: Vec<f64>,
    /// `next_lp[i]` weights i -> i + 1.
    next_lp: Vec<f64>,
    /// Last -> first, when the grammar permits repetition.
    wrap_lp: Option<f64>,
}

impl Edges {
    fn new(model: &GaussianHmm, grammar: DecodeGrammar) -> Self {
        let s = model.num_states();
        let lt = model.log_transitions();
        let wrap_lp = match grammar {
            DecodeGrammar::SinglePass => None,
            // A linear model has no trained wrap edge; repetition then comes
            // from the grammar loop alone, at no cost.
            DecodeGrammar::MultiStep if model.topology().is_cyclic() => Some(lt[s - 1][0]),
            DecodeGrammar::MultiStep => Some(0.0),
        };
        Self {
            self_lp: (0..s).map(|i| lt[i][i]).collect(),
            next_lp: (0..s - 1).map(|i| lt[i][i + 1]).collect(),
            wrap_lp,
        }
    }
}

fn step_boundaries(path: &[usize], last: usize) -> Vec<usize> {
    (1..path.len()).filter(|&t| path[t - 1] == last && path[t] == 0).collect()
}

/// Max-product decoding. Ties prefer the lower-numbered predecessor state,
/// and under [`DecodeGrammar::MultiStep`] the lower-numbered final state.
pub fn viterbi(model: &GaussianHmm, seq: &FeatureSequence, grammar: DecodeGrammar) -> Result<DecodeResult, HmmError> {
    model.check_dim(seq)?;
    let s = model.num_states();
    let frames = seq.num_frames();
    let emit = model.emission_table(seq);
    let edges = Edges::new(model, grammar);

    let mut score = vec![f64::NEG_INFINITY; s];
    score[0] = emit[0];
    let mut back = vec![0usize; frames * s];
    let mut next = vec![f64::NEG_INFINITY; s];
    for t in 1..frames {
        for j in 0..s {
            // Candidates in ascending predecessor order; strict > keeps the
            // lowest on ties.
            let (mut best, mut arg) = if j == 0 {
                (score[0] + edges.self_lp[0], 0)
            } else {
                (score[j - 1] + edges.next_lp[j - 1], j - 1)
            };
            let second = if j == 0 {
                edges.wrap_lp.map(|w| (score[s - 1] + w, s - 1))
            } else {
                Some((score[j] + edges.self_lp[j], j))
            };
            if let Some((v, i)) = second {
                if v > best {
                    best = v;
                    arg = i;
                }
            }
            next[j] = best + emit[t * s + j];
            back[t * s + j] = arg;
        }
        std::mem::swap(&mut score, &mut next);
    }

    let end = match grammar {
        DecodeGrammar::SinglePass => s - 1,
        DecodeGrammar::MultiStep => (1..s).fold(0, |b, j| if score[j] > score[b] { j } else { b }),
    };
    let log_likelihood = score[end];
    if log_likelihood == f64::NEG_INFINITY {
        return Err(HmmError::NoValidPath { frames });
    }
    if !log_likelihood.is_finite() {
        return Err(HmmError::NumericalUnderflow);
    }
    let mut state_path = vec![0; frames];
    state_path[frames - 1] = end;
    for t in (1..frames).rev() {
        state_path[t - 1] = back[t * s + state_path[t]];
    }
    let step_boundaries = step_boundaries(&state_path, s - 1);
    Ok(DecodeResult { log_likelihood, step_count: 1 + step_boundaries.len(), state_path, step_boundaries })
}

/// Forward algorithm under the same topology and termination rule as
/// [`viterbi`]; never below the Viterbi score.
pub fn log_likelihood(model: &GaussianHmm, seq: &FeatureSequence, grammar: DecodeGrammar) -> Result<f64, HmmError> {
    model.check_dim(seq)?;
    let s = model.num_states();
    let frames = seq.num_frames();
    let emit = model.emission_table(seq);
    let edges = Edges::new(model, grammar);

    let mut alpha = vec![f64::NEG_INFINITY; s];
    alpha[0] = emit[0];
    let mut next = vec![f64::NEG_INFINITY; s];
    for t in 1..frames {
        for j in 0..s {
            let v = if j == 0 {
                let stay = alpha[0] + edges.self_lp[0];
                match edges.wrap_lp {
                    Some(w) => log_add(stay, alpha[s - 1] + w),
                    None => stay,
                }
            } else {
                log_add(alpha[j - 1] + edges.next_lp[j - 1], alpha[j] + edges.self_lp[j])
            };
            next[j] = v + emit[t * s + j];
        }
        std::mem::swap(&mut alpha, &mut next);
    }
    let total = match grammar {
        DecodeGrammar::SinglePass => alpha[s - 1],
        DecodeGrammar::MultiStep => alpha.iter().fold(f64::NEG_INFINITY, |a, &b| log_add(a, b)),
    };
    if total == f64::NEG_INFINITY {
        return Err(HmmError::NoValidPath { frames });
    }
    if !total.is_finite() {
        return Err(HmmError::NumericalUnderflow);
    }
    Ok(total)
}
