//! Dotted paths into a JSON tree and the patterns config rules match on.
//!
//! A path is written `members[].powers[]`: keys joined by `.`, and `[]` for
//! any array position. Patterns use the same syntax plus `*` for any single
//! key. The empty string addresses the root.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathSegment {
    Key(String),
    Index,
}

/// Location of a value inside a document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct JsonPath(Vec<PathSegment>);

impl JsonPath {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn child_key(&self, key: &str) -> Self {
        let mut segs = self.0.clone();
        segs.push(PathSegment::Key(key.to_owned()));
        Self(segs)
    }

    pub fn child_index(&self) -> Self {
        let mut segs = self.0.clone();
        segs.push(PathSegment::Index);
        Self(segs)
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.0
    }
}

impl fmt::Display for JsonPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            match seg {
                PathSegment::Key(k) if i == 0 => write!(f, "{k}")?,
                PathSegment::Key(k) => write!(f, ".{k}")?,
                PathSegment::Index => f.write_str("[]")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PatternSegment {
    Key(String),
    AnyKey,
    Index,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPattern {
    text: String,
    segments: Vec<PatternSegment>,
}

impl PathPattern {
    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn matches(&self, path: &JsonPath) -> bool {
        self.segments.len() == path.0.len()
            && self.segments.iter().zip(&path.0).all(|(p, s)| match (p, s) {
                (PatternSegment::Key(a), PathSegment::Key(b)) => a == b,
                (PatternSegment::AnyKey, PathSegment::Key(_)) => true,
                (PatternSegment::Index, PathSegment::Index) => true,
                _ => false,
            })
    }

    // Literal segments outrank wildcards, earlier segments first.
    fn specificity(&self) -> Vec<bool> {
        self.segments.iter().map(|s| !matches!(s, PatternSegment::AnyKey)).collect()
    }
}

impl FromStr for PathPattern {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::Config(format!("bad path pattern {text:?}: {why}"));
        let mut segments = Vec::new();
        if text.is_empty() {
            return Ok(Self { text: String::new(), segments });
        }
        for (i, part) in text.split('.').enumerate() {
            let mut head = part;
            let mut indices = 0;
            while let Some(rest) = head.strip_suffix("[]") {
                head = rest;
                indices += 1;
            }
            match head {
                "" if i == 0 && indices > 0 => {}
                "" => return Err(bad("empty key")),
                "*" => segments.push(PatternSegment::AnyKey),
                h if h.contains(['[', ']', '*']) => return Err(bad("stray bracket or wildcard")),
                h => segments.push(PatternSegment::Key(h.to_owned())),
            }
            segments.extend(std::iter::repeat_n(PatternSegment::Index, indices));
        }
        Ok(Self {
            text: text.to_owned(),
            segments,
        })
    }
}

/// Pattern → value rules; the most specific matching pattern wins.
#[derive(Debug, Clone)]
pub struct PathRules<T> {
    rules: Vec<(PathPattern, T)>,
}

impl<T> Default for PathRules<T> {
    fn default() -> Self {
        Self { rules: Vec::new() }
    }
}

impl<T> PathRules<T> {
    pub fn insert(&mut self, pattern: &str, value: T) -> Result<()> {
        let pattern: PathPattern = pattern.parse()?;
        if let Some(slot) = self.rules.iter_mut().find(|(p, _)| *p == pattern) {
            slot.1 = value;
        } else {
            self.rules.push((pattern, value));
        }
        Ok(())
    }

    pub fn lookup(&self, path: &JsonPath) -> Option<&T> {
        self.rules
            .iter()
            .filter(|(p, _)| p.matches(path))
            .max_by(|(a, _), (b, _)| a.specificity().cmp(&b.specificity()))
            .map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &T)> {
        self.rules.iter().map(|(p, v)| (p.as_str(), v))
    }
}
