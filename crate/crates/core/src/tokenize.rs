//! Tokenizer shared by presort training and scoring.
//!
//! Text is split on every non-alphanumeric character, lowercased, and tokens
//! shorter than two characters are dropped. No stemming, no stop list.

use alloc::string::String;

use crate::paper::PaperRecord;

pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= 2)
}

/// Tokens of a paper's title followed by those of its abstract.
pub fn paper_tokens(paper: &PaperRecord) -> impl Iterator<Item = String> + '_ {
    tokens(&paper.title).chain(tokens(&paper.abstract_text))
}
