//! JSON value → hypervector.
//!
//! * object: `Σ M_key · encode(value)`
//! * array: sequence code of the encoded items
//! * string: sum (or sequence) of word vectors
//! * number: a per-value random vector, plus threshold vectors for a
//!   thermometer field
//! * `true` / `false` / `null`: fixed literal vectors
//!
//! Empty strings, arrays and objects encode to the zero vector.

use super::config::{EncodingConfig, NumericKind, NumericMode, RoleKeying, StringOrder};
use super::path::JsonPath;
use super::tokenize::tokenize;
use super::value::JsonValue;
use crate::codebook::{Codebook, Literal};
use crate::error::{Error, Result};
use crate::sequence::encode_sequence;
use crate::vsa::HyperVector;

/// Shortest round-trip decimal text; `2` and `2.0` both give `"2"`, and
/// `-0` is folded into `0`.
pub fn canonical_number_text(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    format!("{x}")
}

pub struct Encoder<'a> {
    book: &'a Codebook,
    cfg: &'a EncodingConfig,
}

impl<'a> Encoder<'a> {
    pub fn new(book: &'a Codebook, cfg: &'a EncodingConfig) -> Self {
        Self { book, cfg }
    }

    fn zero(&self) -> HyperVector {
        HyperVector::zeros(self.book.dimension())
    }

    fn finish(&self, v: HyperVector, normalize: bool) -> HyperVector {
        if normalize {
            v.normalized()
        } else {
            v
        }
    }

    /// Encodes a whole document; the result is normalized iff
    /// `normalize_top` is set.
    pub fn encode_value(&self, value: &JsonValue) -> Result<HyperVector> {
        let v = self.encode_at(value, &JsonPath::root())?;
        Ok(self.finish(v, self.cfg.normalize_top))
    }

    /// Parses and encodes JSON text.
    pub fn encode_text(&self, text: &str) -> Result<HyperVector> {
        self.encode_value(&JsonValue::parse(text)?)
    }

    /// Encodes a value found at `path`, without top-level normalization.
    pub fn encode_at(&self, value: &JsonValue, path: &JsonPath) -> Result<HyperVector> {
        match value {
            JsonValue::Null => Ok((*self.book.literal_vector(Literal::Null)).clone()),
            JsonValue::Bool(true) => Ok((*self.book.literal_vector(Literal::True)).clone()),
            JsonValue::Bool(false) => Ok((*self.book.literal_vector(Literal::False)).clone()),
            JsonValue::Number(x) => {
                let mode = self.cfg.numeric_rules.lookup(path).unwrap_or(&self.cfg.default_numeric);
                self.encode_number(*x, mode)
            }
            JsonValue::String(s) => {
                let order = self
                    .cfg
                    .string_order_rules
                    .lookup(path)
                    .copied()
                    .unwrap_or(self.cfg.default_string_order);
                self.encode_string(s, order)
            }
            JsonValue::Array(items) => self.encode_array(items, path),
            JsonValue::Object(pairs) => self.encode_object(pairs, path),
        }
    }

    pub fn encode_string(&self, s: &str, order: StringOrder) -> Result<HyperVector> {
        let tokens = tokenize(s, &self.cfg.tokenizer);
        let v = match order {
            StringOrder::Bag => {
                let mut acc = self.zero();
                for t in &tokens {
                    acc.add_assign(&*self.book.symbol_vector(t)?)?;
                }
                acc
            }
            StringOrder::Sequence => {
                let items = tokens
                    .iter()
                    .map(|t| self.book.symbol_vector(t).map(|v| (*v).clone()))
                    .collect::<Result<Vec<_>>>()?;
                encode_sequence(&items, &*self.book.seq_matrix()?, false)?
            }
        };
        Ok(self.finish(v, self.cfg.normalize_strings))
    }

    pub fn encode_number(&self, x: f64, mode: &NumericMode) -> Result<HyperVector> {
        if !x.is_finite() {
            return Err(Error::NonFiniteNumber(x));
        }
        let value = self.book.number_vector(&canonical_number_text(x))?;
        match mode.kind() {
            NumericKind::Categorical => Ok((*value).clone()),
            NumericKind::Thermometer => {
                let mut acc = (*value).clone();
                for &t in mode.thresholds().iter().filter(|&&t| x >= t) {
                    let label = format!("{}{}", mode.label_prefix(), canonical_number_text(t));
                    acc.add_assign(&*self.book.threshold_vector(&label)?)?;
                }
                Ok(acc.normalized())
            }
        }
    }

    pub fn encode_array(&self, items: &[JsonValue], path: &JsonPath) -> Result<HyperVector> {
        let item_path = path.child_index();
        let encoded = items
            .iter()
            .map(|item| self.encode_at(item, &item_path))
            .collect::<Result<Vec<_>>>()?;
        if encoded.is_empty() {
            return Ok(self.zero());
        }
        encode_sequence(&encoded, &*self.book.seq_matrix()?, self.cfg.normalize_arrays)
    }

    /// Pairs are summed in key order, so the input order of pairs cannot
    /// change a single bit of the result.
    pub fn encode_object(&self, pairs: &[(String, JsonValue)], path: &JsonPath) -> Result<HyperVector> {
        let mut sorted: Vec<&(String, JsonValue)> = pairs.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateKey(w[0].0.clone()));
        }
        let mut acc = self.zero();
        for (key, value) in sorted {
            let child = path.child_key(key);
            let role = match self.cfg.role_keying {
                RoleKeying::Bare => key.clone(),
                RoleKeying::FullPath => child.to_string(),
            };
            let inner = self.encode_at(value, &child)?;
            acc.add_assign(&self.book.role_matrix(&role)?.bind(&inner)?)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vsa::SpaceConfig;

    fn book(n: usize) -> Codebook {
        Codebook::new(SpaceConfig::new(n, 17).unwrap()).unwrap()
    }

    fn close(a: &HyperVector, b: &HyperVector, tol: f64) -> bool {
        a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn canonical_numbers() {
        assert_eq!(canonical_number_text(2.0), "2");
        assert_eq!(canonical_number_text(-0.0), "0");
        assert_eq!(canonical_number_text(0.1), "0.1");
        assert_eq!(canonical_number_text(-29.5), "-29.5");
        assert_eq!(canonical_number_text(1e21), "1000000000000000000000");
        let b = book(16);
        let cfg = EncodingConfig::default();
        let enc = Encoder::new(&b, &cfg);
        assert_eq!(enc.encode_text("2").unwrap(), enc.encode_text("2.0").unwrap());
    }

    #[test]
    fn empty_containers_are_zero() {
        let b = book(32);
        let cfg = EncodingConfig::default();
        let enc = Encoder::new(&b, &cfg);
        for text in [r#""""#, "[]", "{}", r#""  ,, ""#] {
            assert!(enc.encode_text(text).unwrap().is_zero(), "{text}");
        }
    }

    #[test]
    fn string_bag_is_word_sum() {
        let b = book(64);
        let cfg = EncodingConfig::unnormalized();
        let enc = Encoder::new(&b, &cfg);
        let got = enc.encode_string("the smart researcher", StringOrder::Bag).unwrap();
        let want = b
            .symbol_vector("the")
            .unwrap()
            .add(&b.symbol_vector("smart").unwrap())
            .unwrap()
            .add(&b.symbol_vector("researcher").unwrap())
            .unwrap();
        assert!(close(&got, &want, 1e-15));
        assert_eq!(
            enc.encode_string("a b", StringOrder::Bag).unwrap(),
            enc.encode_string("b a", StringOrder::Bag).unwrap()
        );
    }

    #[test]
    fn thermometer_worked_example() {
        let b = book(64);
        let cfg = EncodingConfig::default();
        let enc = Encoder::new(&b, &cfg);
        let mode = NumericMode::thermometer(vec![15.0, 25.0, 45.0], None).unwrap();
        let got = enc.encode_number(29.0, &mode).unwrap();
        let want = b
            .number_vector("29")
            .unwrap()
            .add(&b.threshold_vector("ge15").unwrap())
            .unwrap()
            .add(&b.threshold_vector("ge25").unwrap())
            .unwrap()
            .normalized();
        assert!(close(&got, &want, 1e-15));
        // Boundary: equality counts as reaching the threshold.
        let at = enc.encode_number(45.0, &mode).unwrap();
        let dot45 = at.dot(&b.threshold_vector("ge45").unwrap()).unwrap();
        assert!(dot45 > 0.3, "{dot45}");
    }

    #[test]
    fn categorical_numbers_are_deterministic() {
        let b = book(64);
        let cfg = EncodingConfig::default();
        let enc = Encoder::new(&b, &cfg);
        let m = NumericMode::categorical();
        assert_eq!(enc.encode_number(29.0, &m).unwrap(), enc.encode_number(29.0, &m).unwrap());
        assert_eq!(*b.number_vector("29").unwrap(), enc.encode_number(29.0, &m).unwrap());
        assert!(matches!(enc.encode_number(f64::NAN, &m), Err(Error::NonFiniteNumber(_))));
    }

    #[test]
    fn literal_and_object_rules() {
        let b = book(48);
        let cfg = EncodingConfig::unnormalized();
        let enc = Encoder::new(&b, &cfg);
        assert_eq!(enc.encode_text("true").unwrap(), *b.literal_vector(Literal::True));
        let active = enc.encode_text(r#"{"active": true}"#).unwrap();
        let want = b.role_matrix("active").unwrap().bind(&b.literal_vector(Literal::True)).unwrap();
        assert_eq!(active, want);
        assert_eq!(
            enc.encode_text(r#"{"a": 1, "b": 2, "c": "x y"}"#).unwrap(),
            enc.encode_text(r#"{"c": "x y", "b": 2, "a": 1}"#).unwrap()
        );
    }

    #[test]
    fn single_item_array() {
        let b = book(48);
        let cfg = EncodingConfig::unnormalized();
        let enc = Encoder::new(&b, &cfg);
        let got = enc.encode_text(r#"["a"]"#).unwrap();
        let want = b
            .seq_matrix()
            .unwrap()
            .bind(&enc.encode_string("a", StringOrder::Bag).unwrap())
            .unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn programmatic_duplicates_rejected() {
        let b = book(8);
        let cfg = EncodingConfig::default();
        let enc = Encoder::new(&b, &cfg);
        let v = JsonValue::Object(vec![("k".into(), JsonValue::Null), ("k".into(), JsonValue::Null)]);
        assert!(matches!(enc.encode_value(&v), Err(Error::DuplicateKey(k)) if k == "k"));
    }

    #[test]
    fn full_path_keying_changes_roles() {
        let b = book(32);
        let bare = EncodingConfig::unnormalized();
        let full = EncodingConfig {
            role_keying: RoleKeying::FullPath,
            ..EncodingConfig::unnormalized()
        };
        let doc = JsonValue::parse(r#"{"a": {"name": "x"}}"#).unwrap();
        let v_bare = Encoder::new(&b, &bare).encode_value(&doc).unwrap();
        let v_full = Encoder::new(&b, &full).encode_value(&doc).unwrap();
        assert_ne!(v_bare, v_full);
        let inner = b.role_matrix("a.name").unwrap().bind(&b.symbol_vector("x").unwrap()).unwrap();
        let want = b.role_matrix("a").unwrap().bind(&inner).unwrap();
        assert!(close(&v_full, &want, 1e-14));
    }

    #[test]
    fn rules_pick_modes_by_path() {
        let b = book(64);
        let cfg = EncodingConfig::unnormalized()
            .with_string_order_rule("title", StringOrder::Sequence)
            .unwrap();
        let enc = Encoder::new(&b, &cfg);
        let doc = enc.encode_text(r#"{"title": "b a", "body": "b a"}"#).unwrap();
        let seq = enc.encode_string("b a", StringOrder::Sequence).unwrap();
        let bag = enc.encode_string("b a", StringOrder::Bag).unwrap();
        let want = b
            .role_matrix("title")
            .unwrap()
            .bind(&seq)
            .unwrap()
            .add(&b.role_matrix("body").unwrap().bind(&bag).unwrap())
            .unwrap();
        assert!(close(&doc, &want, 1e-14));
    }
}
