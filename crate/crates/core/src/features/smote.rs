//! SMOTE oversampling.
//!
//! Each synthetic sample interpolates between a minority base row and one
//! of its k nearest minority neighbors: `base + u * (neighbor - base)`
//! with one `u ~ Uniform[0,1]` per sample (classic SMOTE). The
//! `per_feature` flag draws an independent `u` per coordinate instead.
//! Neighbor search uses Euclidean distance on z-scored features
//! (minority statistics); output is in the raw feature scale.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Desired minority/majority ratio after oversampling.
    pub target_ratio: f64,
    pub seed: u64,
    /// Draw one interpolation scalar per feature instead of per sample.
    pub per_feature: bool,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 5,
            target_ratio: 1.0,
            seed: 0,
            per_feature: false,
        }
    }
}

impl SmoteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors < 1 {
            return Err(Error::InvalidInput("smote k_neighbors must be >= 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "smote target_ratio must be in (0, 1], got {}",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

/// Synthetic rows needed to reach `target_ratio` minority/majority.
pub fn needed_for_ratio(minority: usize, majority: usize, target_ratio: f64) -> usize {
    let target = (target_ratio * majority as f64).round() as usize;
    target.saturating_sub(minority)
}

/// Generate `n_needed` synthetic minority rows. Deterministic given the
/// config seed; never touches majority rows.
pub fn smote_oversample(
    minority: &[Vec<f64>],
    cfg: &SmoteConfig,
    n_needed: usize,
) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let m = minority.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "SMOTE needs at least 2 minority rows, got {m}"
        )));
    }
    let dims = minority[0].len();
    if minority.iter().any(|r| r.len() != dims) {
        return Err(Error::InvalidInput("ragged minority rows".into()));
    }
    if n_needed == 0 {
        return Ok(Vec::new());
    }

    // z-score on minority statistics; constant columns keep scale 1
    let mut mean = vec![0.0; dims];
    for row in minority {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for v in &mut mean {
        *v /= m as f64;
    }
    let mut scale = vec![0.0; dims];
    for row in minority {
        for ((s, mu), v) in scale.iter_mut().zip(&mean).zip(row) {
            *s += (v - mu).powi(2);
        }
    }
    for s in &mut scale {
        *s = (*s / m as f64).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let standardized: Vec<Vec<f64>> = minority
        .iter()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((v, mu), s)| (v - mu) / s)
                .collect()
        })
        .collect();

    // brute-force kNN per minority row; ties break on index
    let k_eff = cfg.k_neighbors.min(m - 1);
    let neighbor_lists: Vec<Vec<usize>> = (0..m)
        .map(|i| {
            let mut dist: Vec<(f64, usize)> = (0..m)
                .filter(|&j| j != i)
                .map(|j| {
                    let d2: f64 = standardized[i]
                        .iter()
                        .zip(&standardized[j])
                        .map(|(a, b)| (a - b).powi(2))
                        .sum();
                    (d2, j)
                })
                .collect();
            dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
            dist.truncate(k_eff);
            dist.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    let mut rng = rng::seeded_rng(cfg.seed);
    let mut out = Vec::with_capacity(n_needed);
    for s in 0..n_needed {
        let base = s % m;
        let neighbor = neighbor_lists[base][rng.gen_range(0..k_eff)];
        let row: Vec<f64> = if cfg.per_feature {
            minority[base]
                .iter()
                .zip(&minority[neighbor])
                .map(|(b, nb)| {
                    let u: f64 = rng.gen();
                    b + u * (nb - b)
                })
                .collect()
        } else {
            let u: f64 = rng.gen();
            minority[base]
                .iter()
                .zip(&minority[neighbor])
                .map(|(b, nb)| b + u * (nb - b))
                .collect()
        };
        out.push(row);
    }
    Ok(out)
}
