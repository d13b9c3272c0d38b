use serde::{Deserialize, Serialize};

use super::ConsistencyReport;
use crate::error::{Error, Result};
use crate::util;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub config_id: usize,
    pub mean_dbcv: Option<f64>,
    pub std_dbcv: Option<f64>,
    pub mean_noise: Option<f64>,
    pub std_noise: Option<f64>,
    pub mean_clusters: Option<f64>,
    pub stable: bool,
    /// `mean_dbcv - mean_noise` for stable candidates.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub config_id: usize,
    pub stability_threshold: f64,
    pub rule: String,
    pub candidates: Vec<Candidate>,
}

/// Among configs whose DBCV and noise-fraction standard deviations are both
/// below `threshold`, picks the largest `mean_dbcv - mean_noise`; ties go to
/// more clusters on average, then the lower config id.
pub fn select_config(reports: &[ConsistencyReport], threshold: f64) -> Result<Selection> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let candidates: Vec<Candidate> = reports
        .iter()
        .map(|r| {
            let stable = match (r.dbcv, r.noise) {
                (Some(d), Some(n)) => d.std < threshold && n.std < threshold,
                _ => false,
            };
            Candidate {
                config_id: r.config.config_id,
                mean_dbcv: r.dbcv.map(|s| s.mean),
                std_dbcv: r.dbcv.map(|s| s.std),
                mean_noise: r.noise.map(|s| s.mean),
                std_noise: r.noise.map(|s| s.std),
                mean_clusters: r.n_clusters.map(|s| s.mean),
                stable,
                score: if stable {
                    Some(r.dbcv.unwrap().mean - r.noise.unwrap().mean)
                } else {
                    None
                },
            }
        })
        .collect();
    let best = candidates
        .iter()
        .filter(|c| c.stable)
        .min_by(|a, b| {
            b.score
                .unwrap()
                .total_cmp(&a.score.unwrap())
                .then(
                    b.mean_clusters
                        .unwrap_or(0.0)
                        .total_cmp(&a.mean_clusters.unwrap_or(0.0)),
                )
                .then(a.config_id.cmp(&b.config_id))
        })
        .ok_or(Error::NoStableConfig(threshold))?;
    Ok(Selection {
        config_id: best.config_id,
        stability_threshold: threshold,
        rule: format!(
            "std(dbcv) < {threshold} and std(noise) < {threshold}; maximise mean_dbcv - mean_noise; \
             ties: higher mean cluster count, then lower config id"
        ),
        candidates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedChoice {
    pub seed: u64,
    pub median_dbcv: f64,
    /// Seeds left out because they hold the maximum DBCV.
    pub excluded: Vec<u64>,
}

/// The seed whose DBCV is closest to the median over all seeds, ties to the
/// lower seed. Seeds attaining the maximum DBCV are never chosen unless
/// every seed ties.
pub fn select_seed(seed_dbcv: &[(u64, f64)]) -> Result<SeedChoice> {
    if seed_dbcv.is_empty() {
        return Err(Error::EmptyInput);
    }
    let values: Vec<f64> = seed_dbcv.iter().map(|p| p.1).collect();
    let median = util::median(&values).expect("non-empty");
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let all_equal = values.iter().all(|&v| v == max);
    let excluded: Vec<u64> = if all_equal {
        Vec::new()
    } else {
        seed_dbcv.iter().filter(|p| p.1 == max).map(|p| p.0).collect()
    };
    let seed = seed_dbcv
        .iter()
        .filter(|p| !excluded.contains(&p.0))
        .min_by(|a, b| {
            (a.1 - median)
                .abs()
                .total_cmp(&(b.1 - median).abs())
                .then(a.0.cmp(&b.0))
        })
        .expect("some seed is below the maximum")
        .0;
    Ok(SeedChoice {
        seed,
        median_dbcv: median,
        excluded,
    })
}
