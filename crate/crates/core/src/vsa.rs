//! Hypervectors, orthogonal binding matrices and the MBAT algebra.
//!
//! Binding is multiplication by an orthogonal matrix, so it preserves
//! lengths and is undone by the transpose. Bundling is plain addition.
//! Everything here is 64-bit floating point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub const DEFAULT_DIMENSION: usize = 1000;
pub const DEFAULT_ORTHOGONALITY_TOLERANCE: f64 = 1e-8;

/// Redraws allowed for a column that vanishes after projection.
pub const MAX_COLUMN_RETRIES: usize = 8;

/// A projected column shorter than this fraction of its raw length is
/// treated as zero.
const VANISHING_RATIO: f64 = 1e-10;

/// Below this size the column updates run sequentially.
const PARALLEL_MIN_DIM: usize = 256;

/// Distribution of raw random vector entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// i.i.d. standard normal entries, normalized to unit length.
    #[default]
    GaussianUnit,
    /// i.i.d. ±1 entries, normalized to unit length.
    SignedBinary,
}

impl EntryKind {
    pub fn to_byte(self) -> u8 {
        match self {
            EntryKind::GaussianUnit => 0,
            EntryKind::SignedBinary => 1,
        }
    }

    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(EntryKind::GaussianUnit),
            1 => Ok(EntryKind::SignedBinary),
            other => Err(Error::Malformed(format!("unknown entry kind byte {other}"))),
        }
    }
}

/// The vector space every symbol, role and document lives in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub dimension: usize,
    pub master_seed: u64,
    pub orthogonality_tolerance: f64,
    pub entry_kind: EntryKind,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_DIMENSION,
            master_seed: 0,
            orthogonality_tolerance: DEFAULT_ORTHOGONALITY_TOLERANCE,
            entry_kind: EntryKind::GaussianUnit,
        }
    }
}

impl SpaceConfig {
    pub fn new(dimension: usize, master_seed: u64) -> Result<Self> {
        let cfg = Self {
            dimension,
            master_seed,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_entry_kind(mut self, kind: EntryKind) -> Self {
        self.entry_kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        if !self.orthogonality_tolerance.is_finite() || self.orthogonality_tolerance <= 0.0 {
            return Err(Error::InvalidSpace(format!(
                "orthogonality tolerance must be positive, got {}",
                self.orthogonality_tolerance
            )));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer; the mixing step behind every derived seed.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines an object seed with the space's master seed.
pub fn derive_seed(seed: u64, master_seed: u64) -> u64 {
    mix64(seed ^ mix64(master_seed))
}

/// The RNG stream used for an object derived from `seed` in `space`.
pub fn seeded_rng(seed: u64, space: &SpaceConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, space.master_seed))
}

// Four accumulators so the loop vectorizes; the summation order is fixed,
// which keeps results bit-reproducible.
#[inline]
pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Draws `n` raw (unnormalized) entries of the given kind.
pub fn random_entries<R: Rng + ?Sized>(rng: &mut R, n: usize, kind: EntryKind) -> Vec<f64> {
    match kind {
        EntryKind::GaussianUnit => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
        EntryKind::SignedBinary => {
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let word = rng.next_u64();
                let take = (n - out.len()).min(64);
                out.extend((0..take).map(|b| if (word >> b) & 1 == 1 { -1.0 } else { 1.0 }));
            }
            out
        }
    }
}

/// Draws a random unit vector of the given kind from `rng`.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize, kind: EntryKind) -> HyperVector {
    loop {
        let v = HyperVector(random_entries(rng, n, kind));
        if v.norm() > 0.0 {
            return v.normalized();
        }
    }
}

/// An n-dimensional real vector with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HyperVector(Vec<f64>);

impl TryFrom<Vec<f64>> for HyperVector {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<HyperVector> for Vec<f64> {
    fn from(v: HyperVector) -> Self {
        v.0
    }
}

impl HyperVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn norm(&self) -> f64 {
        dot_slices(&self.0, &self.0).sqrt()
    }

    /// Raw dot product.
    pub fn dot(&self, other: &HyperVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot_slices(&self.0, &other.0))
    }

    /// Cosine similarity; 0 when either side is the zero vector.
    pub fn cosine(&self, other: &HyperVector) -> Result<f64> {
        let d = self.dot(other)?;
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return Ok(0.0);
        }
        Ok((d / denom).clamp(-1.0, 1.0))
    }

    /// `self / ‖self‖`, or the zero vector unchanged.
    pub fn normalized(&self) -> HyperVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        HyperVector(self.0.iter().map(|x| x / n).collect())
    }

    pub fn scaled(&self, factor: f64) -> HyperVector {
        HyperVector(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn add(&self, other: &HyperVector) -> Result<HyperVector> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &HyperVector) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
        Ok(())
    }
}

/// Sum of vectors; the zero vector of `dim` when `vs` is empty.
pub fn bundle<'a, I>(dim: usize, vs: I) -> Result<HyperVector>
where
    I: IntoIterator<Item = &'a HyperVector>,
{
    let mut acc = HyperVector::zeros(dim);
    for v in vs {
        acc.add_assign(v)?;
    }
    Ok(acc)
}

pub fn normalize(v: &HyperVector) -> HyperVector {
    v.normalized()
}

pub fn similarity(a: &HyperVector, b: &HyperVector) -> Result<f64> {
    a.cosine(b)
}

pub fn dot(a: &HyperVector, b: &HyperVector) -> Result<f64> {
    a.dot(b)
}

/// An n×n orthogonal matrix, stored column-major: column i is the image of
/// basis vector i.
#[derive(Debug, Clone, PartialEq)]
pub struct BindingMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl BindingMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    /// Wraps column-major data, checking it is orthogonal within `tolerance`.
    pub fn from_columns(dim: usize, data: Vec<f64>, tolerance: f64) -> Result<Self> {
        check_dim(dim * dim, data.len())?;
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let m = Self { dim, data };
        let deviation = m.max_gram_deviation();
        if deviation > tolerance {
            return Err(Error::NotOrthogonal {
                deviation,
                tolerance,
            });
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `M·v`.
    pub fn bind(&self, v: &HyperVector) -> Result<HyperVector> {
        check_dim(self.dim, v.dim())?;
        let mut out = vec![0.0; self.dim];
        for (col, &coef) in self.data.chunks_exact(self.dim).zip(v.as_slice()) {
            if coef != 0.0 {
                axpy(coef, col, &mut out);
            }
        }
        Ok(HyperVector(out))
    }

    /// `Mᵀ·v`, the inverse of [`bind`](Self::bind) for an orthogonal matrix.
    pub fn unbind(&self, v: &HyperVector) -> Result<HyperVector> {
        check_dim(self.dim, v.dim())?;
        let out = self
            .data
            .chunks_exact(self.dim)
            .map(|col| dot_slices(col, v.as_slice()))
            .collect();
        Ok(HyperVector(out))
    }

    /// `max_{i,j} |(MᵀM − I)_{ij}|`.
    pub fn max_gram_deviation(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .into_par_iter()
            .with_min_len(16)
            .map(|i| {
                let ci = self.column(i);
                (i..n)
                    .map(|j| {
                        let target = if i == j { 1.0 } else { 0.0 };
                        (dot_slices(ci, self.column(j)) - target).abs()
                    })
                    .fold(0.0f64, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

pub fn bind(m: &BindingMatrix, v: &HyperVector) -> Result<HyperVector> {
    m.bind(v)
}

pub fn unbind(m: &BindingMatrix, v: &HyperVector) -> Result<HyperVector> {
    m.unbind(v)
}

/// Generates a random orthogonal matrix from `seed` mixed with the space's
/// master seed.
///
/// Columns are Gaussian candidates orthonormalized with modified
/// Gram-Schmidt. Once column j is normalized its projection is removed from
/// every later column, which applies the same subtractions in the same order
/// as projecting each column against all earlier ones in turn. A column that
/// vanishes after projection is redrawn up to [`MAX_COLUMN_RETRIES`] times.
pub fn gen_orthogonal(seed: u64, config: &SpaceConfig) -> Result<BindingMatrix> {
    config.validate()?;
    let n = config.dimension;
    let mut rng = seeded_rng(seed, config);
    let data: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    orthonormalize(n, data, || {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    })
}

/// Modified Gram-Schmidt over the column-major `data`; `redraw` supplies
/// replacement candidates for columns that vanish.
pub(crate) fn orthonormalize<F>(n: usize, mut data: Vec<f64>, mut redraw: F) -> Result<BindingMatrix>
where
    F: FnMut() -> Vec<f64>,
{
    check_dim(n * n, data.len())?;
    let mut raw_norms: Vec<f64> = data.chunks_exact(n).map(|c| dot_slices(c, c).sqrt()).collect();

    for j in 0..n {
        let mut retries = 0;
        loop {
            let col = &mut data[j * n..(j + 1) * n];
            let len = dot_slices(col, col).sqrt();
            if len > VANISHING_RATIO * raw_norms[j] && len > 0.0 {
                col.iter_mut().for_each(|x| *x /= len);
                break;
            }
            if retries == MAX_COLUMN_RETRIES {
                return Err(Error::Orthogonalization { column: j, retries });
            }
            retries += 1;
            let mut fresh = redraw();
            check_dim(n, fresh.len())?;
            raw_norms[j] = dot_slices(&fresh, &fresh).sqrt();
            for k in 0..j {
                let q = &data[k * n..(k + 1) * n];
                let r = dot_slices(&fresh, q);
                axpy(-r, q, &mut fresh);
            }
            data[j * n..(j + 1) * n].copy_from_slice(&fresh);
        }

        let (done, rest) = data.split_at_mut((j + 1) * n);
        let q = &done[j * n..];
        let project = |col: &mut [f64]| {
            let r = dot_slices(col, q);
            axpy(-r, q, col);
        };
        if n >= PARALLEL_MIN_DIM {
            rest.par_chunks_mut(n).with_min_len(8).for_each(project);
        } else {
            rest.chunks_mut(n).for_each(project);
        }
    }
    Ok(BindingMatrix { dim: n, data })
}
