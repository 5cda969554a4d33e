//! Serde helpers for log-domain matrices: JSON has no infinities, so a
//! disallowed transition (log 0) is written as `null`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub(crate) mod log_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let out: Vec<Vec<Option<f64>>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| v.is_finite().then_some(v)).collect())
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let rows: Vec<Vec<Option<f64>>> = Vec::deserialize(d)?;
        Ok(rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect())
            .collect())
    }
}
