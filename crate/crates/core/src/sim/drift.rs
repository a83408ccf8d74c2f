//! Norm drift along chains of random binding matrices.
//!
//! Each trial draws a Gaussian vector `v` and `k` fresh matrices, applies
//! them one after another, and records `‖M_j⋯M_1 v‖ / ‖v‖` after every
//! step. Orthogonal matrices hold every ratio at 1; Gaussian ones wander.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial_rng;
use crate::error::{Error, Result};
use crate::vsa::{axpy, orthonormalize, HyperVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// i.i.d. standard normal entries, scaled by `1/√n` unless `unscaled`.
    RandomGaussian,
    /// Gram-Schmidt orthonormalized Gaussian matrices.
    RandomOrthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftParams {
    pub dimension: usize,
    pub depth: usize,
    pub matrix_kind: MatrixKind,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub unscaled: bool,
}

impl DriftParams {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.depth == 0 || self.trials == 0 {
            return Err(Error::InvalidParams(
                "dimension, depth and trials must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthStats {
    pub depth: usize,
    pub geometric_mean_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl DepthStats {
    /// `max_ratio / min_ratio` across trials.
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub params: DriftParams,
    pub depths: Vec<DepthStats>,
}

impl DriftReport {
    pub const CSV_HEADER: &'static str = "depth,geometric_mean_ratio,min_ratio,max_ratio";

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.depths.iter().map(|d| {
            format!(
                "{},{},{},{}",
                d.depth, d.geometric_mean_ratio, d.min_ratio, d.max_ratio
            )
        })
    }
}

pub fn drift_run(p: &DriftParams) -> Result<DriftReport> {
    p.validate()?;
    let per_trial: Vec<Vec<f64>> = (0..p.trials as u64)
        .into_par_iter()
        .map(|t| drift_trial(p, t))
        .collect::<Result<_>>()?;

    let depths = (0..p.depth)
        .map(|j| {
            let ratios = per_trial.iter().map(|r| r[j]);
            let log_mean = ratios.clone().map(f64::ln).sum::<f64>() / p.trials as f64;
            DepthStats {
                depth: j + 1,
                geometric_mean_ratio: log_mean.exp(),
                min_ratio: ratios.clone().fold(f64::INFINITY, f64::min),
                max_ratio: ratios.fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    Ok(DriftReport { params: *p, depths })
}

fn drift_trial(p: &DriftParams, trial: u64) -> Result<Vec<f64>> {
    let n = p.dimension;
    let mut rng = trial_rng(p.seed, trial);
    let start = HyperVector::new((0..n).map(|_| rng.sample(StandardNormal)).collect())?;
    let scale = match (p.matrix_kind, p.unscaled) {
        (MatrixKind::RandomGaussian, false) => 1.0 / (n as f64).sqrt(),
        _ => 1.0,
    };
    chain_ratios(&start, p.depth, || {
        let data: Vec<f64> = (0..n * n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        match p.matrix_kind {
            MatrixKind::RandomGaussian => Ok(data),
            MatrixKind::RandomOrthogonal => {
                let m = orthonormalize(n, data, || (0..n).map(|_| rng.sample(StandardNormal)).collect())?;
                Ok(m.as_slice().to_vec())
            }
        }
    })
}

/// Applies `depth` column-major matrices from `next` to `start` in turn and
/// returns the length ratio after each.
fn chain_ratios<F>(start: &HyperVector, depth: usize, mut next: F) -> Result<Vec<f64>>
where
    F: FnMut() -> Result<Vec<f64>>,
{
    let n = start.dim();
    let start_norm = start.norm();
    let mut x = start.clone();
    let mut ratios = Vec::with_capacity(depth);
    for _ in 0..depth {
        let data = next()?;
        let mut out = vec![0.0; n];
        for (col, &c) in data.chunks_exact(n).zip(x.as_slice()) {
            axpy(c, col, &mut out);
        }
        x = HyperVector::new(out)?;
        ratios.push(x.norm() / start_norm);
    }
    Ok(ratios)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kind: MatrixKind, n: usize, depth: usize, trials: usize) -> DriftParams {
        DriftParams {
            dimension: n,
            depth,
            matrix_kind: kind,
            trials,
            seed: 5,
            unscaled: false,
        }
    }

    #[test]
    fn orthogonal_chains_hold_norm() {
        let r = drift_run(&params(MatrixKind::RandomOrthogonal, 60, 20, 5)).unwrap();
        assert_eq!(r.depths.len(), 20);
        for d in &r.depths {
            assert!((d.min_ratio - 1.0).abs() < 1e-9 && (d.max_ratio - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_chain_is_exact() {
        let v = HyperVector::new(vec![3.0, -4.0, 12.0]).unwrap();
        let id = crate::vsa::BindingMatrix::identity(3);
        let ratios = chain_ratios(&v, 1, || Ok(id.as_slice().to_vec())).unwrap();
        assert_eq!(ratios, [1.0]);
    }

    #[test]
    fn one_by_one_orthogonal_is_exact() {
        // The only 1×1 orthogonal matrices are ±1.
        let r = drift_run(&params(MatrixKind::RandomOrthogonal, 1, 1, 4)).unwrap();
        assert_eq!(r.depths[0].geometric_mean_ratio, 1.0);
    }

    #[test]
    fn gaussian_chains_wander() {
        let r = drift_run(&params(MatrixKind::RandomGaussian, 40, 10, 50)).unwrap();
        assert!(r.depths[9].spread() > 1.5, "{}", r.depths[9].spread());
        let unscaled = DriftParams {
            unscaled: true,
            ..params(MatrixKind::RandomGaussian, 40, 3, 5)
        };
        let r = drift_run(&unscaled).unwrap();
        // Each unscaled step multiplies lengths by about √n.
        assert!(r.depths[2].geometric_mean_ratio > 100.0);
    }

    #[test]
    fn reproducible_and_validated() {
        let p = params(MatrixKind::RandomGaussian, 20, 4, 6);
        assert_eq!(drift_run(&p).unwrap(), drift_run(&p).unwrap());
        assert!(drift_run(&params(MatrixKind::RandomGaussian, 20, 0, 6)).is_err());
        let csv: Vec<_> = drift_run(&p).unwrap().csv_rows().collect();
        assert_eq!(csv.len(), 4);
        assert!(csv[0].starts_with("1,"));
    }
}
