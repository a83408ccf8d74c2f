//! Member versus distractor dot products against a bundle of unit vectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean_and_stderr, trial_rng};
use crate::error::{Error, Result};
use crate::vsa::{bundle, random_unit, EntryKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumMemoryParams {
    pub dimension: usize,
    pub members: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumMemoryReport {
    pub params: SumMemoryParams,
    /// Fraction of trials where every member outscored the distractor.
    pub separation_fraction: f64,
    /// Per-trial mean member dot, averaged over trials.
    pub member_dot_mean: f64,
    pub member_dot_stderr: f64,
    pub distractor_dot_mean: f64,
    pub distractor_dot_stderr: f64,
}

/// Each trial bundles `members` Gaussian unit vectors and draws one fresh
/// unit distractor.
pub fn sum_memory_run(p: &SumMemoryParams) -> Result<SumMemoryReport> {
    if p.dimension == 0 || p.members == 0 || p.trials < 2 {
        return Err(Error::InvalidParams(
            "need dimension ≥ 1, members ≥ 1 and trials ≥ 2".into(),
        ));
    }
    let n = p.dimension;
    let rows: Vec<(f64, f64, f64)> = (0..p.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(p.seed, t);
            let members: Vec<_> = (0..p.members)
                .map(|_| random_unit(&mut rng, n, EntryKind::GaussianUnit))
                .collect();
            let distractor = random_unit(&mut rng, n, EntryKind::GaussianUnit);
            let sum = bundle(n, &members)?;
            let dots = members.iter().map(|m| m.dot(&sum)).collect::<Result<Vec<_>>>()?;
            let min = dots.iter().copied().fold(f64::INFINITY, f64::min);
            let mean = dots.iter().sum::<f64>() / dots.len() as f64;
            Ok((mean, distractor.dot(&sum)?, min))
        })
        .collect::<Result<_>>()?;

    let member: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let distractor: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let separated = rows.iter().filter(|r| r.2 > r.1).count();
    let (member_dot_mean, member_dot_stderr) = mean_and_stderr(&member);
    let (distractor_dot_mean, distractor_dot_stderr) = mean_and_stderr(&distractor);
    Ok(SumMemoryReport {
        params: *p,
        separation_fraction: separated as f64 / p.trials as f64,
        member_dot_mean,
        member_dot_stderr,
        distractor_dot_mean,
        distractor_dot_stderr,
    })
}
