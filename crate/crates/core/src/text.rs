//! Text normalization and the word tokenizer shared by metrics, analysis
//! and belief-state values.
//!
//! Both are fixed: every score in the crate depends on them.

/// Punctuation that is split off into its own token. `_` is kept inside
/// words so delexicalized placeholders such as `[restaurant_name]` keep
/// their slot name intact.
fn is_separable(c: char) -> bool {
    c.is_ascii_punctuation() && c != '_'
}

/// Lowercases, collapses internal whitespace and strips leading/trailing
/// ASCII punctuation.
pub fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let collapsed = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
        .to_string()
}

/// Lowercase, surround every punctuation character with spaces, then split
/// on whitespace.
///
/// `"Hello, world!"` becomes `["hello", ",", "world", "!"]`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(text.len() + 8);
    for c in text.chars().flat_map(char::to_lowercase) {
        if is_separable(c) {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        } else {
            spaced.push(c);
        }
    }
    spaced.split_whitespace().map(str::to_string).collect()
}

/// Number of tokens [`tokenize`] would produce.
pub fn word_count(text: &str) -> usize {
    tokenize(text).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_collapses_and_strips() {
        assert_eq!(normalize("  Italian   Food. "), "italian food");
        assert_eq!(normalize("\"centre\""), "centre");
        assert_eq!(normalize("?!"), "");
        assert_eq!(normalize("4 stars"), "4 stars");
    }

    #[test]
    fn normalize_keeps_inner_punctuation() {
        assert_eq!(normalize("a-b"), "a-b");
        assert_eq!(normalize("(don't)"), "don't");
    }

    #[test]
    fn tokenize_separates_punctuation() {
        assert_eq!(tokenize("Hello, world!"), vec!["hello", ",", "world", "!"]);
        assert_eq!(
            tokenize("at [restaurant_name]."),
            vec!["at", "[", "restaurant_name", "]", "."]
        );
        assert!(tokenize("   ").is_empty());
    }

    #[test]
    fn word_count_of_summary() {
        assert_eq!(
            word_count("the user books a cheap italian restaurant downtown"),
            8
        );
    }
}
