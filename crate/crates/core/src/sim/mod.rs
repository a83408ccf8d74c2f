//! Monte Carlo harnesses.
//!
//! Every trial draws from its own ChaCha8 stream: the generator is seeded
//! with the run seed and switched to stream number `trial`. Trials may run
//! in any order or in parallel; results are reduced in trial order, so a
//! report depends only on its parameters.

mod capacity;
mod drift;
mod sum_memory;

pub use capacity::{capacity_run, CapacityParams, CapacityReport};
pub use drift::{drift_run, DepthStats, DriftParams, DriftReport, MatrixKind};
pub use sum_memory::{sum_memory_run, SumMemoryParams, SumMemoryReport};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn trial_streams_differ_and_repeat() {
        let a = trial_rng(1, 0).next_u64();
        assert_eq!(a, trial_rng(1, 0).next_u64());
        assert_ne!(a, trial_rng(1, 1).next_u64());
        assert_ne!(a, trial_rng(2, 0).next_u64());
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_and_stderr(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, se) = mean_and_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-15);
    }
}
