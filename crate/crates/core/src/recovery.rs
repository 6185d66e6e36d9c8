//! Syntax-error spans and recovery points.
//!
//! Because the table is filled right to left, everything to the right of a
//! syntax error is already parsed when the error is reached. An error is
//! any stretch of input not covered by a match of a chosen set of rules;
//! recovery is a lookup of the next such match after the stretch.

use std::sync::Arc;

use thiserror::Error;

use crate::engine::{Match, MemoTable};
use crate::grammar::ClauseId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorSpan {
    /// Inclusive.
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    /// First match of a rule of interest starting at or after `end`.
    pub following_match: Option<Arc<Match>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecoveryError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

fn clauses_for(table: &MemoTable<'_>, rules: &[&str]) -> Result<Vec<ClauseId>, RecoveryError> {
    rules
        .iter()
        .map(|r| {
            table
                .grammar()
                .rule_clause(r)
                .ok_or_else(|| RecoveryError::UnknownRule(r.to_string()))
        })
        .collect()
}

/// Maximal gaps in `[0, input length)` not covered by any positive-length
/// stored match of the given rules.
pub fn find_error_spans(table: &MemoTable<'_>, rules: &[&str]) -> Result<Vec<ErrorSpan>, RecoveryError> {
    let clauses = clauses_for(table, rules)?;
    let mut intervals: Vec<(usize, usize)> = clauses
        .iter()
        .flat_map(|&c| table.matches_of(c))
        .filter(|m| m.len > 0)
        .map(|m| (m.start(), m.end()))
        .collect();
    intervals.sort_unstable();

    let mut gaps = Vec::new();
    let mut covered_to = 0;
    for (start, end) in intervals {
        if start > covered_to {
            gaps.push((covered_to, start));
        }
        covered_to = covered_to.max(end);
    }
    if covered_to < table.input_len() {
        gaps.push((covered_to, table.input_len()));
    }
    Ok(gaps
        .into_iter()
        .map(|(start, end)| ErrorSpan {
            start,
            end,
            following_match: clauses
                .iter()
                .filter_map(|&c| table.next_match_at_or_after(c, end).0)
                .min_by_key(|m| (m.start(), std::cmp::Reverse(m.len)))
                .cloned(),
        })
        .collect())
}

/// The stored match of `rule` with the smallest start position `>= pos`.
pub fn next_match_after(
    table: &MemoTable<'_>,
    rule: &str,
    pos: usize,
) -> Result<Option<Arc<Match>>, RecoveryError> {
    let clause = clauses_for(table, &[rule])?[0];
    Ok(table.next_match_at_or_after(clause, pos).0.cloned())
}
