//! Seed-derived symbol vectors and role matrices.
//!
//! Every vector or matrix is a pure function of its name, the master seed
//! and the dimension. The object seed for a name is
//!
//! ```text
//! fnv1a64(namespace ‖ 0x1F ‖ utf8(name))
//! ```
//!
//! with the 64-bit FNV-1a offset basis `0xcbf29ce484222325` and prime
//! `0x100000001b3`. It is then mixed with the master seed by
//! [`derive_seed`](crate::vsa::derive_seed) and fed to ChaCha8. Namespaces
//! are `sym`, `lit`, `num`, `thr` and `role`, so `"true"` the word and `true`
//! the literal never share a vector. Two names whose hashes collide would
//! alias; at 64 bits this is ignored.
//!
//! Derived entries are cached lazily and never written to disk. A saved
//! codebook holds the space header plus any imported entries, which shadow
//! the derived ones.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::sync::{Arc, RwLock};

use unicode_normalization::UnicodeNormalization;

use crate::error::{check_dim, Error, Result};
use crate::vsa::{gen_orthogonal, random_unit, seeded_rng, BindingMatrix, EntryKind, HyperVector, SpaceConfig};
use crate::wire::{self, Reader};

pub const CODEBOOK_MAGIC: &[u8; 6] = b"MBATCB";
pub const CODEBOOK_VERSION: u8 = 1;

/// The role used for sequence positions.
pub const SEQ_ROLE: &str = "SEQ";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Hash namespaces for derived objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Namespace {
    Symbol,
    Literal,
    Number,
    Threshold,
    Role,
}

impl Namespace {
    pub fn tag(self) -> &'static str {
        match self {
            Namespace::Symbol => "sym",
            Namespace::Literal => "lit",
            Namespace::Number => "num",
            Namespace::Threshold => "thr",
            Namespace::Role => "role",
        }
    }

    pub fn name_seed(self, name: &str) -> u64 {
        let mut bytes = Vec::with_capacity(self.tag().len() + 1 + name.len());
        bytes.extend_from_slice(self.tag().as_bytes());
        bytes.push(0x1F);
        bytes.extend_from_slice(name.as_bytes());
        fnv1a64(&bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    True,
    False,
    Null,
}

impl Literal {
    pub fn name(self) -> &'static str {
        match self {
            Literal::True => "true",
            Literal::False => "false",
            Literal::Null => "null",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "true" => Some(Literal::True),
            "false" => Some(Literal::False),
            "null" => Some(Literal::Null),
            _ => None,
        }
    }
}

/// NFC then lowercase.
pub fn canonical_symbol(name: &str) -> String {
    name.nfc().collect::<String>().to_lowercase()
}

#[derive(Default)]
struct Imports {
    symbols: BTreeMap<String, Arc<HyperVector>>,
    roles: BTreeMap<String, Arc<BindingMatrix>>,
    literals: BTreeMap<Literal, Arc<HyperVector>>,
}

pub struct Codebook {
    space: SpaceConfig,
    imports: Imports,
    vectors: RwLock<HashMap<(Namespace, String), Arc<HyperVector>>>,
    roles: RwLock<HashMap<String, Arc<BindingMatrix>>>,
}

impl fmt::Debug for Codebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Codebook")
            .field("space", &self.space)
            .field("imported_symbols", &self.imports.symbols.len())
            .field("imported_roles", &self.imports.roles.len())
            .field("imported_literals", &self.imports.literals.len())
            .finish()
    }
}

fn cached<K, V, F>(cache: &RwLock<HashMap<K, Arc<V>>>, key: K, make: F) -> Result<Arc<V>>
where
    K: std::hash::Hash + Eq,
    F: FnOnce() -> Result<V>,
{
    if let Some(v) = cache.read().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let fresh = Arc::new(make()?);
    // Concurrent first lookups compute equal values; the first insert wins.
    Ok(cache.write().unwrap().entry(key).or_insert(fresh).clone())
}

impl Codebook {
    pub fn new(space: SpaceConfig) -> Result<Self> {
        space.validate()?;
        Ok(Self {
            space,
            imports: Imports::default(),
            vectors: RwLock::default(),
            roles: RwLock::default(),
        })
    }

    pub fn space(&self) -> &SpaceConfig {
        &self.space
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension
    }

    /// A unit vector derived from `name` within `ns`, ignoring imports.
    pub fn derived_vector(&self, ns: Namespace, name: &str) -> Result<Arc<HyperVector>> {
        if name.is_empty() {
            return Err(Error::EmptyName);
        }
        cached(&self.vectors, (ns, name.to_owned()), || {
            let mut rng = seeded_rng(ns.name_seed(name), &self.space);
            Ok(random_unit(&mut rng, self.space.dimension, self.space.entry_kind))
        })
    }

    /// The word vector for `name` after canonicalization.
    pub fn symbol_vector(&self, name: &str) -> Result<Arc<HyperVector>> {
        let name = canonical_symbol(name);
        if let Some(v) = self.imports.symbols.get(&name) {
            return Ok(v.clone());
        }
        self.derived_vector(Namespace::Symbol, &name)
    }

    pub fn literal_vector(&self, literal: Literal) -> Arc<HyperVector> {
        if let Some(v) = self.imports.literals.get(&literal) {
            return v.clone();
        }
        self.derived_vector(Namespace::Literal, literal.name())
            .expect("literal names are nonempty")
    }

    /// Vector for a number given its canonical decimal text.
    pub fn number_vector(&self, text: &str) -> Result<Arc<HyperVector>> {
        self.derived_vector(Namespace::Number, text)
    }

    pub fn threshold_vector(&self, label: &str) -> Result<Arc<HyperVector>> {
        self.derived_vector(Namespace::Threshold, label)
    }

    /// Role names are used verbatim: JSON keys are case-sensitive.
    pub fn role_matrix(&self, role: &str) -> Result<Arc<BindingMatrix>> {
        if role.is_empty() {
            return Err(Error::EmptyName);
        }
        if let Some(m) = self.imports.roles.get(role) {
            return Ok(m.clone());
        }
        cached(&self.roles, role.to_owned(), || {
            gen_orthogonal(Namespace::Role.name_seed(role), &self.space)
        })
    }

    pub fn seq_matrix(&self) -> Result<Arc<BindingMatrix>> {
        self.role_matrix(SEQ_ROLE)
    }

    /// Imports an external word vector. It is normalized unless `verbatim`.
    pub fn import_symbol(&mut self, name: &str, entries: Vec<f64>, verbatim: bool) -> Result<()> {
        let name = canonical_symbol(name);
        if name.is_empty() {
            return Err(Error::EmptyName);
        }
        let v = self.prepare_import(entries, verbatim)?;
        self.imports.symbols.insert(name, Arc::new(v));
        Ok(())
    }

    pub fn import_literal(&mut self, literal: Literal, entries: Vec<f64>, verbatim: bool) -> Result<()> {
        let v = self.prepare_import(entries, verbatim)?;
        self.imports.literals.insert(literal, Arc::new(v));
        Ok(())
    }

    pub fn import_role(&mut self, role: &str, matrix: BindingMatrix) -> Result<()> {
        if role.is_empty() {
            return Err(Error::EmptyName);
        }
        check_dim(self.space.dimension, matrix.dim())?;
        let deviation = matrix.max_gram_deviation();
        if deviation > self.space.orthogonality_tolerance {
            return Err(Error::NotOrthogonal {
                deviation,
                tolerance: self.space.orthogonality_tolerance,
            });
        }
        self.imports.roles.insert(role.to_owned(), Arc::new(matrix));
        Ok(())
    }

    fn prepare_import(&self, entries: Vec<f64>, verbatim: bool) -> Result<HyperVector> {
        check_dim(self.space.dimension, entries.len())?;
        let v = HyperVector::new(entries)?;
        Ok(if verbatim { v } else { v.normalized() })
    }

    /// Imports a whitespace-separated text table, one `word x1 … xn` row per
    /// line. Blank lines are skipped, as is a leading `count dim` header of
    /// the kind word2vec writes. Returns the number of rows imported.
    pub fn import_table<R: BufRead>(&mut self, reader: R, verbatim: bool) -> Result<usize> {
        let n = self.space.dimension;
        let mut count = 0;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if lineno == 0 && n != 1 && fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok()) {
                continue;
            }
            if fields.len() != n + 1 {
                return Err(Error::Malformed(format!(
                    "line {}: expected a word and {n} numbers, found {} fields",
                    lineno + 1,
                    fields.len()
                )));
            }
            let entries = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Malformed(format!("line {}: {e}: {f:?}", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            self.import_symbol(fields[0], entries, verbatim)?;
            count += 1;
        }
        Ok(count)
    }

    pub fn imported_symbol_count(&self) -> usize {
        self.imports.symbols.len()
    }

    pub fn imported_role_count(&self) -> usize {
        self.imports.roles.len()
    }

    pub fn imported_literal_count(&self) -> usize {
        self.imports.literals.len()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let n = self.space.dimension;
        let dim = u32::try_from(n).map_err(|_| Error::InvalidSpace("dimension exceeds u32".into()))?;
        let mut out = Vec::new();
        out.extend_from_slice(CODEBOOK_MAGIC);
        out.push(CODEBOOK_VERSION);
        wire::put_u32(&mut out, dim);
        wire::put_u64(&mut out, self.space.master_seed);
        out.push(self.space.entry_kind.to_byte());

        let total = self.imports.symbols.len() + self.imports.roles.len() + self.imports.literals.len();
        wire::put_u64(&mut out, total as u64);
        for (name, v) in &self.imports.symbols {
            out.push(0);
            wire::put_string(&mut out, name)?;
            wire::put_f64s(&mut out, v.as_slice());
        }
        for (name, m) in &self.imports.roles {
            out.push(1);
            wire::put_string(&mut out, name)?;
            wire::put_f64s(&mut out, m.as_slice());
        }
        for (lit, v) in &self.imports.literals {
            out.push(2);
            wire::put_string(&mut out, lit.name())?;
            wire::put_f64s(&mut out, v.as_slice());
        }
        Ok(out)
    }

    /// Reads a codebook, taking the orthogonality tolerance from the
    /// default space config.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::decode(bytes, None)
    }

    /// Reads a codebook and checks its dimension against `expected`.
    pub fn load(bytes: &[u8], expected: &SpaceConfig) -> Result<Self> {
        Self::decode(bytes, Some(expected))
    }

    fn decode(bytes: &[u8], expected: Option<&SpaceConfig>) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(CODEBOOK_MAGIC)?;
        let version = r.u8()?;
        if version != CODEBOOK_VERSION {
            return Err(Error::Version(version));
        }
        let dimension = r.u32()? as usize;
        let master_seed = r.u64()?;
        let entry_kind = EntryKind::from_byte(r.u8()?)?;
        let tolerance = expected
            .map(|e| e.orthogonality_tolerance)
            .unwrap_or(crate::vsa::DEFAULT_ORTHOGONALITY_TOLERANCE);
        if let Some(e) = expected {
            check_dim(e.dimension, dimension)?;
        }
        let space = SpaceConfig {
            dimension,
            master_seed,
            orthogonality_tolerance: tolerance,
            entry_kind,
        };
        let mut book = Codebook::new(space)?;

        let count = r.u64()?;
        for _ in 0..count {
            let kind = r.u8()?;
            let name = r.string()?;
            match kind {
                0 => {
                    let v = HyperVector::new(r.f64s(dimension)?)?;
                    book.imports.symbols.insert(name, Arc::new(v));
                }
                1 => {
                    let data = r.f64s(dimension.checked_mul(dimension).ok_or(Error::Truncated)?)?;
                    let m = BindingMatrix::from_columns(dimension, data, tolerance)?;
                    book.imports.roles.insert(name, Arc::new(m));
                }
                2 => {
                    let lit = Literal::from_name(&name)
                        .ok_or_else(|| Error::Malformed(format!("unknown literal {name:?}")))?;
                    let v = HyperVector::new(r.f64s(dimension)?)?;
                    book.imports.literals.insert(lit, Arc::new(v));
                }
                other => return Err(Error::Malformed(format!("unknown entry kind {other}"))),
            }
        }
        r.finish()?;
        Ok(book)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn book(n: usize) -> Codebook {
        Codebook::new(SpaceConfig::new(n, 42).unwrap()).unwrap()
    }

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 64 test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn symbol_vectors_are_deterministic_unit_vectors() {
        let b = book(256);
        let a1 = b.symbol_vector("elephant").unwrap();
        let a2 = b.symbol_vector("elephant").unwrap();
        assert_eq!(*a1, *a2);
        assert!((a1.norm() - 1.0).abs() < 1e-12);
        let fresh = book(256).symbol_vector("elephant").unwrap();
        assert_eq!(*a1, *fresh);
    }

    #[test]
    fn canonicalization_folds_case_and_composition() {
        let b = book(64);
        assert_eq!(*b.symbol_vector("Elephant").unwrap(), *b.symbol_vector("elephant").unwrap());
        // "é" precomposed vs e + combining acute.
        assert_eq!(*b.symbol_vector("caf\u{e9}").unwrap(), *b.symbol_vector("cafe\u{301}").unwrap());
    }

    #[test]
    fn empty_names_rejected() {
        let b = book(8);
        assert!(matches!(b.symbol_vector(""), Err(Error::EmptyName)));
        assert!(matches!(b.role_matrix(""), Err(Error::EmptyName)));
    }

    #[test]
    fn namespaces_are_separate() {
        let b = book(128);
        let word = b.symbol_vector("true").unwrap();
        let lit = b.literal_vector(Literal::True);
        assert_ne!(*word, *lit);
        assert!((lit.norm() - 1.0).abs() < 1e-12);
        assert_ne!(*b.number_vector("29").unwrap(), *b.symbol_vector("29").unwrap());
    }

    #[test]
    fn role_matrices_are_orthogonal_and_cached() {
        let b = book(64);
        let m1 = b.role_matrix("actor").unwrap();
        let m2 = b.role_matrix("actor").unwrap();
        assert!(Arc::ptr_eq(&m1, &m2));
        assert_eq!(*m1, *book(64).role_matrix("actor").unwrap());
        assert!(b.seq_matrix().unwrap().max_gram_deviation() < 1e-8);
        assert_ne!(*m1, *b.role_matrix("object").unwrap());
    }

    #[test]
    fn signed_binary_space_gives_scaled_sign_vectors() {
        let space = SpaceConfig::new(100, 3).unwrap().with_entry_kind(EntryKind::SignedBinary);
        let b = Codebook::new(space).unwrap();
        let v = b.symbol_vector("x").unwrap();
        assert!(v.as_slice().iter().all(|x| (x.abs() - 0.1).abs() < 1e-15));
    }

    #[test]
    fn round_trip_keeps_space_and_derivations() {
        let b = book(32);
        let bytes = b.to_bytes().unwrap();
        assert_eq!(&bytes[..6], b"MBATCB");
        assert_eq!(bytes[6], 1);
        assert_eq!(u32::from_le_bytes(bytes[7..11].try_into().unwrap()), 32);
        assert_eq!(u64::from_le_bytes(bytes[11..19].try_into().unwrap()), 42);
        let back = Codebook::load(&bytes, b.space()).unwrap();
        assert_eq!(back.space(), b.space());
        assert_eq!(*back.symbol_vector("x").unwrap(), *b.symbol_vector("x").unwrap());
        assert_eq!(*back.role_matrix("r").unwrap(), *b.role_matrix("r").unwrap());
    }

    #[test]
    fn imported_vectors_survive_and_shadow() {
        let mut b = book(16);
        let mut raw = Vec::new();
        for i in 0..5 {
            let entries: Vec<f64> = (0..16).map(|j| ((i * 16 + j) as f64).sin()).collect();
            raw.push(entries.clone());
            b.import_symbol(&format!("w{i}"), entries, i % 2 == 0).unwrap();
        }
        let identity = BindingMatrix::identity(16);
        b.import_role("flat", identity.clone()).unwrap();
        b.import_literal(Literal::Null, vec![1.0; 16], false).unwrap();

        let back = Codebook::load(&b.to_bytes().unwrap(), b.space()).unwrap();
        for (i, entries) in raw.iter().enumerate() {
            let name = format!("w{i}");
            let got = back.symbol_vector(&name).unwrap();
            assert_eq!(*got, *b.symbol_vector(&name).unwrap());
            assert_ne!(*got, *back.derived_vector(Namespace::Symbol, &name).unwrap());
            if i % 2 == 0 {
                assert_eq!(got.as_slice(), &entries[..]);
            } else {
                assert!((got.norm() - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(*back.role_matrix("flat").unwrap(), identity);
        assert_eq!(back.literal_vector(Literal::Null).as_slice()[0], 0.25);
        assert_eq!(back.imported_symbol_count(), 5);
    }

    #[test]
    fn load_errors() {
        let b = book(4);
        let mut bytes = b.to_bytes().unwrap();
        assert!(matches!(Codebook::from_bytes(b"NOTCB!\x01"), Err(Error::BadMagic)));
        assert!(matches!(Codebook::from_bytes(b"MB"), Err(Error::BadMagic)));
        assert_eq!(Codebook::from_bytes(b"XXXXXX").unwrap_err().to_string(), "bad magic");

        let mut wrong_version = bytes.clone();
        wrong_version[6] = 9;
        assert!(matches!(Codebook::from_bytes(&wrong_version), Err(Error::Version(9))));

        let other = SpaceConfig::new(5, 42).unwrap();
        assert!(matches!(
            Codebook::load(&bytes, &other),
            Err(Error::DimensionMismatch { expected: 5, found: 4 })
        ));

        bytes.truncate(bytes.len() - 3);
        assert!(matches!(Codebook::from_bytes(&bytes), Err(Error::Truncated)));
    }

    #[test]
    fn import_table_parses_rows() {
        let mut b = book(3);
        let text = "2 3\nalpha 1 0 0\n\nBeta 0 2 0\n";
        assert_eq!(b.import_table(text.as_bytes(), false).unwrap(), 2);
        assert_eq!(b.symbol_vector("beta").unwrap().as_slice(), &[0.0, 1.0, 0.0]);
        assert!(b.import_table("gamma 1 2\n".as_bytes(), false).is_err());
        assert!(b.import_symbol("delta", vec![1.0, 2.0], false).is_err());
    }

    #[test]
    fn concurrent_first_lookups_agree() {
        let b = book(128);
        let got: Vec<Arc<HyperVector>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..4).map(|_| s.spawn(|| b.symbol_vector("race").unwrap())).collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let canonical = b.symbol_vector("race").unwrap();
        for g in got {
            assert_eq!(*g, *canonical);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn lookups_are_order_independent(names in proptest::collection::vec("[a-z]{1,6}", 1..12)) {
            let forward = book(24);
            let backward = book(24);
            let fwd: Vec<_> = names.iter().map(|n| forward.symbol_vector(n).unwrap()).collect();
            let mut bwd: Vec<_> = names.iter().rev().map(|n| backward.symbol_vector(n).unwrap()).collect();
            bwd.reverse();
            for (a, b) in fwd.iter().zip(&bwd) {
                prop_assert_eq!(&**a, &**b);
            }
        }
    }
}
