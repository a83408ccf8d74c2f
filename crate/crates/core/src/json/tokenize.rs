use unicode_general_category::{get_general_category, GeneralCategory};

use super::config::TokenizerRules;

fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
    )
}

/// Splits `s` into word tokens.
pub fn tokenize(s: &str, rules: &TokenizerRules) -> Vec<String> {
    s.split_whitespace()
        .map(|w| w.trim_matches(is_punctuation))
        .filter(|w| !w.is_empty())
        .map(|w| if rules.lowercase { w.to_lowercase() } else { w.to_owned() })
        .collect()
}
