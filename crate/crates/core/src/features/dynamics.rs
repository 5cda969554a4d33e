use super::FeatureSequence;

/// Regression deltas over ±`window` frames with edge frames replicated:
/// d_t = Σθ θ·(c[t+θ] − c[t−θ]) / (2·Σθ θ²).
pub fn deltas(seq: &FeatureSequence, window: usize) -> FeatureSequence {
    let t_len = seq.num_frames();
    let dim = seq.dim();
    let norm = 2.0 * (1..=window).map(|th| (th * th) as f64).sum::<f64>();
    let mut out = vec![0.0; t_len * dim];
    for t in 0..t_len {
        let row = &mut out[t * dim..(t + 1) * dim];
        for th in 1..=window {
            let fwd = seq.frame((t + th).min(t_len - 1));
            let back = seq.frame(t.saturating_sub(th));
            for ((o, f), b) in row.iter_mut().zip(fwd).zip(back) {
                *o += th as f64 * (f - b);
            }
        }
        row.iter_mut().for_each(|v| *v /= norm);
    }
    FeatureSequence::from_flat(out, dim, seq.frame_shift()).expect("deltas of finite input are finite")
}

/// Returns `[static | delta | acceleration]` rows; acceleration is the delta
/// of the delta.
pub fn append_dynamics(seq: &FeatureSequence, window: usize) -> FeatureSequence {
    let d1 = deltas(seq, window);
    let d2 = deltas(&d1, window);
    let dim = seq.dim();
    let mut out = Vec::with_capacity(seq.as_flat().len() * 3);
    for t in 0..seq.num_frames() {
        out.extend_from_slice(seq.frame(t));
        out.extend_from_slice(d1.frame(t));
        out.extend_from_slice(d2.frame(t));
    }
    FeatureSequence::from_flat(out, 3 * dim, seq.frame_shift()).expect("finite")
}
