//! Shared plumbing for the line-oriented text formats.
//!
//! Every format is a sequence of lines of whitespace-separated tokens.
//! Blank lines are skipped and `#` starts a comment that runs to the end
//! of the line.

use thiserror::Error;

/// A parse failure with the 1-based line number and what the parser
/// expected there.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {expected}")]
pub struct ParseError {
    pub line: usize,
    pub expected: String,
}

impl ParseError {
    pub fn new(line: usize, expected: impl Into<String>) -> Self {
        ParseError { line, expected: expected.into() }
    }
}

/// Splits input into (line number, tokens) records, dropping comments and
/// blank lines.
pub fn tokenize(input: &str) -> Vec<(usize, Vec<&str>)> {
    input
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                None
            } else {
                Some((i + 1, tokens))
            }
        })
        .collect()
}

pub fn parse_usize(line: usize, token: &str, what: &str) -> Result<usize, ParseError> {
    token
        .parse()
        .map_err(|_| ParseError::new(line, format!("{what} must be a nonnegative integer, got `{token}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blanks_are_skipped() {
        let toks = tokenize("# header\n\npair ab a # trailing\n");
        assert_eq!(toks, vec![(3, vec!["pair", "ab", "a"])]);
    }
}
