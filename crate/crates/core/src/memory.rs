//! Membership probes, role probes and exact nearest-neighbor search.
//!
//! A bundle of `S` unit vectors in `n` dimensions answers a dot-product probe
//! with roughly `‖probe‖²` for a member and `0` for anything else, both with
//! noise of standard deviation about `√(S/n)`. There is no universal cutoff;
//! [`is_member`] takes the threshold from the caller. For unit probes,
//! `0.5` sits halfway between the two means and is
//! `0.5 / √(S/n)` noise deviations from each; see [`noise_scale`].

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use crate::codebook::Codebook;
use crate::error::{check_dim, Error, Result};
use crate::vsa::{BindingMatrix, HyperVector};
use crate::wire::{self, Reader};

pub const INDEX_MAGIC: &[u8; 6] = b"MBATIX";
pub const INDEX_VERSION: u8 = 1;

/// Raw dot product of a probe against a bundle.
pub fn membership_score(sum: &HyperVector, probe: &HyperVector) -> Result<f64> {
    sum.dot(probe)
}

pub fn is_member(sum: &HyperVector, probe: &HyperVector, threshold: f64) -> Result<bool> {
    Ok(membership_score(sum, probe)? >= threshold)
}

/// Standard deviation of the probe noise for `bundle_size` unit vectors in
/// `dimension` dimensions.
pub fn noise_scale(bundle_size: usize, dimension: usize) -> f64 {
    (bundle_size as f64 / dimension as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scored {
    pub id: String,
    pub score: f64,
}

fn rank_desc(a: &Scored, b: &Scored) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id))
}

/// Ranks candidates by how strongly `M_role · candidate` shows up in `doc`.
///
/// The document is unbound once and each candidate costs a single dot
/// product, instead of binding every candidate.
pub fn probe_role<'c, I>(doc: &HyperVector, role: &str, candidates: I, book: &Codebook) -> Result<Vec<Scored>>
where
    I: IntoIterator<Item = (&'c str, &'c HyperVector)>,
{
    probe_with_matrix(doc, &*book.role_matrix(role)?, candidates)
}

pub fn probe_with_matrix<'c, I>(doc: &HyperVector, matrix: &BindingMatrix, candidates: I) -> Result<Vec<Scored>>
where
    I: IntoIterator<Item = (&'c str, &'c HyperVector)>,
{
    let unbound = matrix.unbind(doc)?;
    let mut out = candidates
        .into_iter()
        .map(|(id, c)| {
            Ok(Scored {
                id: id.to_owned(),
                score: unbound.dot(c)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(rank_desc);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub vector: HyperVector,
    pub norm: f64,
}

/// Id → vector store with exact cosine k-NN.
#[derive(Debug, Clone, Default)]
pub struct VectorIndex {
    dimension: usize,
    records: Vec<Record>,
    positions: HashMap<String, usize>,
}

// Heap entry ordered so that the worst of the current top-k sits on top.
struct Worst<'a> {
    score: f64,
    id: &'a str,
}

impl PartialEq for Worst<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Worst<'_> {}

impl PartialOrd for Worst<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Worst<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Greater = worse: lower score, then larger id.
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| self.id.cmp(other.id))
    }
}

impl VectorIndex {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            ..Self::default()
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&HyperVector> {
        self.positions.get(id).map(|&i| &self.records[i].vector)
    }

    pub fn add(&mut self, id: &str, vector: HyperVector) -> Result<()> {
        check_dim(self.dimension, vector.dim())?;
        if self.positions.contains_key(id) {
            return Err(Error::DuplicateId(id.to_owned()));
        }
        self.positions.insert(id.to_owned(), self.records.len());
        let norm = vector.norm();
        self.records.push(Record {
            id: id.to_owned(),
            vector,
            norm,
        });
        Ok(())
    }

    pub fn remove(&mut self, id: &str) -> Option<HyperVector> {
        let pos = self.positions.remove(id)?;
        let rec = self.records.remove(pos);
        for p in self.positions.values_mut() {
            if *p > pos {
                *p -= 1;
            }
        }
        Some(rec.vector)
    }

    /// The `k` records with the highest cosine to `query`, best first, ties
    /// by ascending id. A single pass holding at most `k` candidates.
    pub fn knn(&self, query: &HyperVector, k: usize) -> Result<Vec<Scored>> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        check_dim(self.dimension, query.dim())?;
        let qn = query.norm();
        let mut heap: BinaryHeap<Worst<'_>> = BinaryHeap::with_capacity(k + 1);
        for rec in &self.records {
            let denom = qn * rec.norm;
            let score = if denom == 0.0 {
                0.0
            } else {
                (query.dot(&rec.vector)? / denom).clamp(-1.0, 1.0)
            };
            let cand = Worst { score, id: &rec.id };
            if heap.len() < k {
                heap.push(cand);
            } else if heap.peek().is_some_and(|top| cand < *top) {
                heap.pop();
                heap.push(cand);
            }
        }
        Ok(heap
            .into_sorted_vec()
            .into_iter()
            .map(|w| Scored {
                id: w.id.to_owned(),
                score: w.score,
            })
            .collect())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let dim = u32::try_from(self.dimension).map_err(|_| Error::InvalidSpace("dimension exceeds u32".into()))?;
        let mut out = Vec::with_capacity(19 + self.records.len() * (self.dimension * 8 + 16));
        out.extend_from_slice(INDEX_MAGIC);
        out.push(INDEX_VERSION);
        wire::put_u32(&mut out, dim);
        wire::put_u64(&mut out, self.records.len() as u64);
        for rec in &self.records {
            wire::put_string(&mut out, &rec.id)?;
            wire::put_f64s(&mut out, rec.vector.as_slice());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(INDEX_MAGIC)?;
        let version = r.u8()?;
        if version != INDEX_VERSION {
            return Err(Error::Version(version));
        }
        let dimension = r.u32()? as usize;
        let count = r.u64()?;
        let mut index = VectorIndex::new(dimension);
        for _ in 0..count {
            let id = r.string()?;
            let v = HyperVector::new(r.f64s(dimension)?)?;
            index.add(&id, v)?;
        }
        r.finish()?;
        Ok(index)
    }

    /// Reads an index and checks it lives in `dimension`.
    pub fn load(bytes: &[u8], dimension: usize) -> Result<Self> {
        let index = Self::from_bytes(bytes)?;
        check_dim(dimension, index.dimension)?;
        Ok(index)
    }
}
