use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureSequence};

/// Full-rank PCA rotation. Rows of `rotation` are eigenvectors of the
/// enrollment covariance in descending eigenvalue order; each row's
/// largest-magnitude entry is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTransform {
    pub mean: Vec<f64>,
    pub rotation: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl PcaTransform {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            rotation: (0..dim).map(|i| (0..dim).map(|j| f64::from(u8::from(i == j))).collect()).collect(),
            eigenvalues: vec![1.0; dim],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PcaDoc { version: 1, dim: self.dim(), transform: self.clone() })
            .expect("finite transform serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FeatureError> {
        let doc: PcaDoc = serde_json::from_str(text).map_err(|e| FeatureError::Format(e.to_string()))?;
        if doc.version != 1 {
            return Err(FeatureError::Format(format!("unsupported version {}", doc.version)));
        }
        let t = doc.transform;
        let d = doc.dim;
        if t.mean.len() != d || t.eigenvalues.len() != d || t.rotation.len() != d || t.rotation.iter().any(|r| r.len() != d) {
            return Err(FeatureError::Format("PCA arrays disagree with dim".into()));
        }
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct PcaDoc {
    version: u32,
    dim: usize,
    #[serde(flatten)]
    transform: PcaTransform,
}

/// Fits a rotation on the pooled frames of all sequences (sample covariance,
/// denominator T−1). No whitening, no truncation.
pub fn fit_pca(sequences: &[FeatureSequence]) -> Result<PcaTransform, FeatureError> {
    let dim = sequences.first().map_or(0, FeatureSequence::dim);
    if let Some(bad) = sequences.iter().find(|s| s.dim() != dim) {
        return Err(FeatureError::DimensionMismatch { expected: dim, actual: bad.dim() });
    }
    let total: usize = sequences.iter().map(FeatureSequence::num_frames).sum();
    if dim == 0 || total < dim + 1 {
        return Err(FeatureError::DegenerateCovariance { frames: total, dim });
    }

    let mut mean = vec![0.0; dim];
    for f in sequences.iter().flat_map(FeatureSequence::frames) {
        mean.iter_mut().zip(f).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= total as f64);

    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    let mut centered = vec![0.0; dim];
    for f in sequences.iter().flat_map(FeatureSequence::frames) {
        centered.iter_mut().zip(f.iter().zip(&mean)).for_each(|(c, (v, m))| *c = v - m);
        for i in 0..dim {
            for j in i..dim {
                cov[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let v = cov[(i, j)] / (total - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut rotation = Vec::with_capacity(dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    for &k in &order {
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let pivot = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        rotation.push(v);
        // Round-off can leave tiny negative eigenvalues of a PSD matrix.
        eigenvalues.push(eig.eigenvalues[k].max(0.0));
    }
    Ok(PcaTransform { mean, rotation, eigenvalues })
}

/// Maps every frame f to rotation·(f − mean).
pub fn apply_pca(transform: &PcaTransform, seq: &FeatureSequence) -> Result<FeatureSequence, FeatureError> {
    let dim = transform.dim();
    if seq.dim() != dim {
        return Err(FeatureError::DimensionMismatch { expected: dim, actual: seq.dim() });
    }
    let mut out = Vec::with_capacity(seq.as_flat().len());
    let mut centered = vec![0.0; dim];
    for f in seq.frames() {
        centered.iter_mut().zip(f.iter().zip(&transform.mean)).for_each(|(c, (v, m))| *c = v - m);
        out.extend(transform.rotation.iter().map(|row| row.iter().zip(&centered).map(|(a, b)| a * b).sum::<f64>()));
    }
    FeatureSequence::from_flat(out, dim, seq.frame_shift())
}
