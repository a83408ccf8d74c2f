//! JSON documents as fixed-length vectors.

pub mod config;
pub mod encoder;
pub mod path;
pub mod tokenize;
pub mod value;

pub use config::{EncodingConfig, NumericKind, NumericMode, RoleKeying, StringOrder, TokenizerRules};
pub use encoder::{canonical_number_text, Encoder};
pub use path::{JsonPath, PathPattern, PathRules};
pub use tokenize::tokenize;
pub use value::JsonValue;
