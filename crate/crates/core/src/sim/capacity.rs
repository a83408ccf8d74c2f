//! Vector Sum Memory capacity: bundle `S` random vectors, then check that
//! every one of `D` fresh distractors scores below every member.
//!
//! Draw order within a trial: the `S` members, then the `D` distractors.
//! A ±1 vector takes `⌈n/64⌉` words from `next_u64`; entry `j` is `-1` when
//! bit `j mod 64` of word `⌊j/64⌋` is set, else `+1`, and unused high bits
//! of the last word are discarded. A Gaussian vector takes `n` standard
//! normals and is normalized. Dots are reported in those units: raw integer
//! dots for ±1 entries, unit-vector dots for Gaussian entries.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial_rng;
use crate::error::{Error, Result};
use crate::vsa::{random_unit, EntryKind, HyperVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityParams {
    pub dimension: usize,
    pub members: usize,
    pub distractors: usize,
    pub trials: usize,
    pub entry_kind: EntryKind,
    pub seed: u64,
}

impl CapacityParams {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.members == 0 || self.trials == 0 {
            return Err(Error::InvalidParams(
                "dimension, members and trials must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    pub params: CapacityParams,
    pub successes: usize,
    pub success_fraction: f64,
    /// 95% normal-approximation binomial halfwidth.
    pub confidence_halfwidth: f64,
    pub mean_min_member_dot: f64,
    /// `None` when there are no distractors.
    pub mean_max_distractor_dot: Option<f64>,
}

impl CapacityReport {
    pub const CSV_HEADER: &'static str = "dimension,members,distractors,trials,entry_kind,seed,successes,success_fraction,confidence_halfwidth,mean_min_member_dot,mean_max_distractor_dot";

    pub fn csv_row(&self) -> String {
        let p = &self.params;
        let kind = match p.entry_kind {
            EntryKind::GaussianUnit => "gaussian_unit",
            EntryKind::SignedBinary => "signed_binary",
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.dimension,
            p.members,
            p.distractors,
            p.trials,
            kind,
            p.seed,
            self.successes,
            self.success_fraction,
            self.confidence_halfwidth,
            self.mean_min_member_dot,
            self.mean_max_distractor_dot.map(|x| x.to_string()).unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    success: bool,
    min_member: f64,
    max_distractor: Option<f64>,
}

pub fn capacity_run(p: &CapacityParams) -> Result<CapacityReport> {
    p.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..p.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(p.seed, t);
            match p.entry_kind {
                EntryKind::SignedBinary => signed_trial(&mut rng, p),
                EntryKind::GaussianUnit => gaussian_trial(&mut rng, p),
            }
        })
        .collect();

    let trials = p.trials as f64;
    let successes = outcomes.iter().filter(|o| o.success).count();
    let fraction = successes as f64 / trials;
    let mean_min_member_dot = outcomes.iter().map(|o| o.min_member).sum::<f64>() / trials;
    let mean_max_distractor_dot = (p.distractors > 0)
        .then(|| outcomes.iter().filter_map(|o| o.max_distractor).sum::<f64>() / trials);
    Ok(CapacityReport {
        params: *p,
        successes,
        success_fraction: fraction,
        confidence_halfwidth: 1.96 * (fraction * (1.0 - fraction) / trials).sqrt(),
        mean_min_member_dot,
        mean_max_distractor_dot,
    })
}

fn outcome(min_member: f64, max_distractor: Option<f64>) -> TrialOutcome {
    TrialOutcome {
        success: max_distractor.is_none_or(|d| d < min_member),
        min_member,
        max_distractor,
    }
}

fn signed_trial<R: RngCore>(rng: &mut R, p: &CapacityParams) -> TrialOutcome {
    let n = p.dimension;
    let words = n.div_ceil(64);
    let padded = words * 64;

    let members: Vec<Vec<u64>> = (0..p.members)
        .map(|_| (0..words).map(|_| rng.next_u64()).collect())
        .collect();

    // Bundle; entries past n stay zero so padding bits contribute nothing.
    let mut sum = vec![0i32; padded];
    for bits in &members {
        for (j, s) in sum.iter_mut().take(n).enumerate() {
            *s += if (bits[j / 64] >> (j % 64)) & 1 == 1 { -1 } else { 1 };
        }
    }

    let table = ByteTable::new(&sum);
    let min_member = members
        .iter()
        .map(|bits| table.dot(bits))
        .min()
        .expect("at least one member");

    let mut max_distractor: Option<i64> = None;
    let mut buf = vec![0u64; words];
    for _ in 0..p.distractors {
        buf.iter_mut().for_each(|w| *w = rng.next_u64());
        let d = table.dot(&buf);
        max_distractor = Some(max_distractor.map_or(d, |m| m.max(d)));
    }
    outcome(min_member as f64, max_distractor.map(|d| d as f64))
}

/// For every 8-entry block of the bundle, the dot of that block with each of
/// the 256 sign patterns. A ±1 vector's dot with the bundle is then one
/// lookup per byte of its bit representation.
struct ByteTable {
    sums: Vec<i32>,
}

impl ByteTable {
    fn new(bundle: &[i32]) -> Self {
        let blocks = bundle.len() / 8;
        let mut sums = vec![0i32; blocks * 256];
        for (b, chunk) in bundle.chunks_exact(8).enumerate() {
            let row = &mut sums[b * 256..(b + 1) * 256];
            row[0] = chunk.iter().sum();
            for pattern in 1..256usize {
                // Flip the lowest set bit of the pattern relative to the one
                // without it.
                let low = pattern.trailing_zeros() as usize;
                row[pattern] = row[pattern & (pattern - 1)] - 2 * chunk[low];
            }
        }
        Self { sums }
    }

    fn dot(&self, bits: &[u64]) -> i64 {
        let mut acc = 0i64;
        for (w, &word) in bits.iter().enumerate() {
            let base = w * 8 * 256;
            let rows = &self.sums[base..base + 8 * 256];
            let mut s = 0i32;
            for byte in 0..8 {
                let pattern = ((word >> (8 * byte)) & 0xFF) as usize;
                s += rows[byte * 256 + pattern];
            }
            acc += s as i64;
        }
        acc
    }
}

fn gaussian_trial<R: RngCore>(rng: &mut R, p: &CapacityParams) -> TrialOutcome {
    let n = p.dimension;
    let members: Vec<HyperVector> = (0..p.members)
        .map(|_| random_unit(rng, n, EntryKind::GaussianUnit))
        .collect();
    let mut sum = HyperVector::zeros(n);
    for m in &members {
        sum.add_assign(m).expect("same dimension");
    }
    let min_member = members
        .iter()
        .map(|m| m.dot(&sum).expect("same dimension"))
        .fold(f64::INFINITY, f64::min);
    let mut max_distractor: Option<f64> = None;
    for _ in 0..p.distractors {
        let d = random_unit(rng, n, EntryKind::GaussianUnit)
            .dot(&sum)
            .expect("same dimension");
        max_distractor = Some(max_distractor.map_or(d, |m| m.max(d)));
    }
    outcome(min_member, max_distractor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, s: usize, d: usize, trials: usize, kind: EntryKind) -> CapacityParams {
        CapacityParams {
            dimension: n,
            members: s,
            distractors: d,
            trials,
            entry_kind: kind,
            seed: 3,
        }
    }

    #[test]
    fn byte_table_matches_direct_dot() {
        let mut rng = trial_rng(9, 0);
        let bundle: Vec<i32> = (0..128).map(|i| (i * 7 % 23) - 11).collect();
        let table = ByteTable::new(&bundle);
        for _ in 0..50 {
            let bits = [rng.next_u64(), rng.next_u64()];
            let direct: i64 = (0..128)
                .map(|j| {
                    let s = if (bits[j / 64] >> (j % 64)) & 1 == 1 { -1 } else { 1 };
                    (s * bundle[j]) as i64
                })
                .sum();
            assert_eq!(table.dot(&bits), direct);
        }
    }

    #[test]
    fn single_member_without_distractors_always_succeeds() {
        for kind in [EntryKind::SignedBinary, EntryKind::GaussianUnit] {
            for n in [1, 7, 100] {
                let r = capacity_run(&params(n, 1, 0, 20, kind)).unwrap();
                assert_eq!(r.success_fraction, 1.0);
                assert_eq!(r.confidence_halfwidth, 0.0);
                assert_eq!(r.mean_max_distractor_dot, None);
            }
        }
        // A lone ±1 member dots to exactly n with itself.
        let r = capacity_run(&params(70, 1, 0, 3, EntryKind::SignedBinary)).unwrap();
        assert_eq!(r.mean_min_member_dot, 70.0);
    }

    #[test]
    fn reports_are_reproducible() {
        let p = params(64, 4, 50, 40, EntryKind::SignedBinary);
        assert_eq!(capacity_run(&p).unwrap(), capacity_run(&p).unwrap());
        let p = params(32, 3, 10, 20, EntryKind::GaussianUnit);
        assert_eq!(capacity_run(&p).unwrap(), capacity_run(&p).unwrap());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(capacity_run(&params(0, 1, 0, 1, EntryKind::SignedBinary)).is_err());
        assert!(capacity_run(&params(8, 0, 0, 1, EntryKind::SignedBinary)).is_err());
        assert!(capacity_run(&params(8, 1, 0, 0, EntryKind::SignedBinary)).is_err());
    }

    #[test]
    fn halfwidth_scales_with_inverse_root_trials() {
        // A configuration with success near one half.
        let base = params(64, 8, 6, 400, EntryKind::SignedBinary);
        let small = capacity_run(&base).unwrap();
        let big = capacity_run(&CapacityParams { trials: 1600, ..base }).unwrap();
        assert!(small.success_fraction > 0.2 && small.success_fraction < 0.8, "{}", small.success_fraction);
        let ratio = small.confidence_halfwidth / big.confidence_halfwidth;
        assert!((ratio / 2.0 - 1.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn csv_row_has_every_column() {
        let r = capacity_run(&params(16, 2, 3, 5, EntryKind::SignedBinary)).unwrap();
        assert_eq!(
            r.csv_row().split(',').count(),
            CapacityReport::CSV_HEADER.split(',').count()
        );
    }
}
