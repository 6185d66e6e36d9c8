//! Conventional top-down memoized (packrat) PEG parser over the same
//! clause graph. Used as a reference for differential testing and as the
//! baseline engine in benchmarks. Cannot handle left recursion.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::engine::{Match, MemoKey};
use crate::grammar::{ClauseId, ClauseKind, Grammar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("grammar is left-recursive (cycle through `{head}`); top-down parsing would not terminate")]
    LeftRecursive { head: String },
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

/// A top-down packrat parse in progress. Results are memoized per cell, so
/// every clause is evaluated at most once per position.
#[derive(Debug)]
pub struct Packrat<'g> {
    grammar: &'g Grammar,
    input: Vec<char>,
    memo: RefCell<HashMap<MemoKey, Option<Arc<Match>>>>,
}

impl<'g> Packrat<'g> {
    pub fn new(grammar: &'g Grammar, input: &str) -> Result<Self, OracleError> {
        if let Some(head) = grammar.left_recursion_head() {
            return Err(OracleError::LeftRecursive {
                head: grammar.display_clause(head, false),
            });
        }
        Ok(Packrat {
            grammar,
            input: input.chars().collect(),
            memo: RefCell::new(HashMap::new()),
        })
    }

    pub fn input(&self) -> &[char] {
        &self.input
    }

    /// Number of memoized cells, matches and mismatches alike.
    pub fn memo_len(&self) -> usize {
        self.memo.borrow().len()
    }

    pub fn rule_match(&self, rule: &str, pos: usize) -> Result<Option<Arc<Match>>, OracleError> {
        let clause = self
            .grammar
            .rule_clause(rule)
            .ok_or_else(|| OracleError::UnknownRule(rule.to_string()))?;
        Ok(self.eval(clause, pos))
    }

    /// Match `clause` at `pos`.
    pub fn eval(&self, clause: ClauseId, pos: usize) -> Option<Arc<Match>> {
        let key = MemoKey::new(clause, pos);
        if let Some(hit) = self.memo.borrow().get(&key) {
            return hit.clone();
        }
        let result = self.eval_uncached(key);
        self.memo.borrow_mut().insert(key, result.clone());
        result
    }

    fn eval_uncached(&self, key: MemoKey) -> Option<Arc<Match>> {
        let clause = self.grammar.clause(key.clause);
        let pos = key.start_pos;
        let make = |len, idx, subs| {
            Some(Arc::new(Match {
                key,
                len,
                first_matching_sub_clause_idx: idx,
                sub_clause_matches: subs,
            }))
        };
        match &clause.kind {
            ClauseKind::Char(c) => (self.input.get(pos) == Some(c)).then(|| make(1, 0, vec![]))?,
            ClauseKind::CharSet(set) => match self.input.get(pos) {
                Some(&x) if set.contains(x) => make(1, 0, vec![]),
                _ => None,
            },
            ClauseKind::Str(s) => {
                (self.input.get(pos..pos + s.len()) == Some(s.as_slice())).then(|| make(s.len(), 0, vec![]))?
            }
            ClauseKind::Nothing => make(0, 0, vec![]),
            ClauseKind::Seq => {
                let mut subs = Vec::with_capacity(clause.sub_clauses.len());
                let mut cur = pos;
                for sub in &clause.sub_clauses {
                    let m = self.eval(sub.clause, cur)?;
                    cur += m.len;
                    subs.push(m);
                }
                make(cur - pos, 0, subs)
            }
            ClauseKind::First => clause
                .sub_clauses
                .iter()
                .enumerate()
                .find_map(|(i, sub)| self.eval(sub.clause, pos).map(|m| (i, m)))
                .and_then(|(i, m)| make(m.len, i, vec![m])),
            ClauseKind::OneOrMore => {
                let sub = clause.sub_clauses[0].clause;
                let mut subs = Vec::new();
                let mut cur = pos;
                while let Some(m) = self.eval(sub, cur) {
                    let len = m.len;
                    subs.push(m);
                    cur += len;
                    if len == 0 {
                        break;
                    }
                }
                if subs.is_empty() {
                    None
                } else {
                    make(cur - pos, 0, subs)
                }
            }
            ClauseKind::NotFollowedBy => match self.eval(clause.sub_clauses[0].clause, pos) {
                Some(_) => None,
                None => make(0, 0, vec![]),
            },
        }
    }
}

/// Outcome of a packrat parse of the start rule at position 0.
#[derive(Debug)]
pub struct OracleResult {
    pub top: Option<Arc<Match>>,
    pub input_len: usize,
    pub memo_entries: usize,
}

impl OracleResult {
    pub fn is_complete(&self) -> bool {
        self.top.as_ref().map_or(false, |m| m.len == self.input_len)
    }
}

pub fn packrat_parse(grammar: &Grammar, input: &str) -> Result<OracleResult, OracleError> {
    let p = Packrat::new(grammar, input)?;
    let top = p.rule_match(grammar.start_rule(), 0)?;
    Ok(OracleResult {
        top,
        input_len: p.input.len(),
        memo_entries: p.memo_len(),
    })
}
