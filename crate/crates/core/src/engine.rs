//! The memo table and the right-to-left, bottom-up parsing loop.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use crate::grammar::{ClauseId, ClauseKind, Grammar};

/// Row and column of one memo-table cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemoKey {
    pub clause: ClauseId,
    pub start_pos: usize,
}

impl MemoKey {
    pub fn new(clause: ClauseId, start_pos: usize) -> Self {
        MemoKey { clause, start_pos }
    }
}

/// A parse-tree node. Immutable once created; a better match replaces the
/// memo entry and may hold the old one as a descendant.
#[derive(Debug, PartialEq, Eq)]
pub struct Match {
    pub key: MemoKey,
    pub len: usize,
    /// Index of the matching alternative; nonzero only for `First`.
    pub first_matching_sub_clause_idx: usize,
    pub sub_clause_matches: Vec<Arc<Match>>,
}

impl Match {
    pub fn start(&self) -> usize {
        self.key.start_pos
    }

    pub fn end(&self) -> usize {
        self.key.start_pos + self.len
    }

    /// An earlier `First` alternative or a longer match wins. The index
    /// comparison only ever fires for `First`, the only clause kind that
    /// records a nonzero alternative.
    pub fn is_better_than(&self, other: &Match) -> bool {
        self.first_matching_sub_clause_idx < other.first_matching_sub_clause_idx
            || self.len > other.len
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    /// Clauses popped from the priority queue.
    pub evaluations: usize,
    /// Successful memo-entry updates.
    pub updates: usize,
    /// Writes outside the current column. Always zero for a correct parse.
    pub watermark_violations: usize,
}

/// Sparse memo table produced by [`parse`].
#[derive(Debug)]
pub struct MemoTable<'g> {
    grammar: &'g Grammar,
    input: Vec<char>,
    entries: HashMap<MemoKey, Arc<Match>>,
    // Start positions with an entry, per clause, strictly descending: rows
    // are filled right to left.
    by_clause: Vec<Vec<usize>>,
    column: usize,
    stats: ParseStats,
}

// Top-down evaluation of unmemoized nullable clauses recurses; deep enough
// for any realistic grammar, shallow enough to never blow the stack.
const MAX_TOP_DOWN_DEPTH: usize = 512;

impl<'g> MemoTable<'g> {
    pub fn new(grammar: &'g Grammar, input: &str) -> Self {
        let input: Vec<char> = input.chars().collect();
        MemoTable {
            grammar,
            column: input.len(),
            input,
            entries: HashMap::new(),
            by_clause: vec![Vec::new(); grammar.clauses().len()],
            stats: ParseStats::default(),
        }
    }

    pub fn grammar(&self) -> &'g Grammar {
        self.grammar
    }

    pub fn input(&self) -> &[char] {
        &self.input
    }

    pub fn input_len(&self) -> usize {
        self.input.len()
    }

    pub fn stats(&self) -> ParseStats {
        self.stats
    }

    /// Number of stored matches.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: MemoKey) -> Option<&Arc<Match>> {
        self.entries.get(&key)
    }

    /// Stored matches of one clause in ascending start order.
    pub fn matches_of(&self, clause: ClauseId) -> impl DoubleEndedIterator<Item = &Arc<Match>> + '_ {
        self.by_clause[clause.index()]
            .iter()
            .rev()
            .map(move |&pos| &self.entries[&MemoKey::new(clause, pos)])
    }

    pub fn stored_count(&self, clause: ClauseId) -> usize {
        self.by_clause[clause.index()].len()
    }

    /// First stored match of `clause` starting at or after `pos`, with the
    /// number of probes the binary search took.
    pub fn next_match_at_or_after(&self, clause: ClauseId, pos: usize) -> (Option<&Arc<Match>>, usize) {
        let row = &self.by_clause[clause.index()];
        // row is descending: find the last index whose position is >= pos
        let (mut lo, mut hi) = (0, row.len());
        let mut probes = 0;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            probes += 1;
            if row[mid] >= pos {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let found = lo.checked_sub(1).map(|i| &self.entries[&MemoKey::new(clause, row[i])]);
        (found, probes)
    }

    /// Best known match for a cell. Unmemoized `NotFollowedBy` clauses are
    /// evaluated on demand; unmemoized clauses that can match zero
    /// characters are evaluated top-down, which yields their zero-length
    /// match (or a mismatch where a lookahead inside them fails) without
    /// storing anything.
    pub fn look_up_best_match(&self, key: MemoKey) -> Option<Arc<Match>> {
        self.look_up(key, 0)
    }

    fn look_up(&self, key: MemoKey, depth: usize) -> Option<Arc<Match>> {
        if let Some(m) = self.entries.get(&key) {
            return Some(m.clone());
        }
        let clause = self.grammar.clause(key.clause);
        if clause.kind == ClauseKind::NotFollowedBy || clause.can_match_zero_chars {
            if depth >= MAX_TOP_DOWN_DEPTH {
                return None;
            }
            return self.match_clause_at(key, depth + 1);
        }
        None
    }

    /// Try to match `key.clause` at `key.start_pos` from its subclauses'
    /// memo entries (terminals read the input directly).
    pub fn match_clause(&self, key: MemoKey) -> Option<Arc<Match>> {
        self.match_clause_at(key, 0)
    }

    fn match_clause_at(&self, key: MemoKey, depth: usize) -> Option<Arc<Match>> {
        let clause = self.grammar.clause(key.clause);
        let pos = key.start_pos;
        let leaf = |len| {
            Some(Arc::new(Match {
                key,
                len,
                first_matching_sub_clause_idx: 0,
                sub_clause_matches: Vec::new(),
            }))
        };
        match &clause.kind {
            ClauseKind::Char(c) => match self.input.get(pos) {
                Some(x) if x == c => leaf(1),
                _ => None,
            },
            ClauseKind::CharSet(set) => match self.input.get(pos) {
                Some(&x) if set.contains(x) => leaf(1),
                _ => None,
            },
            ClauseKind::Str(s) => {
                if self.input.get(pos..pos + s.len()) == Some(s.as_slice()) {
                    leaf(s.len())
                } else {
                    None
                }
            }
            ClauseKind::Nothing => leaf(0),
            ClauseKind::Seq => {
                let mut subs = Vec::with_capacity(clause.sub_clauses.len());
                let mut cur = pos;
                for sub in &clause.sub_clauses {
                    let m = self.look_up(MemoKey::new(sub.clause, cur), depth)?;
                    cur += m.len;
                    subs.push(m);
                }
                Some(Arc::new(Match {
                    key,
                    len: cur - pos,
                    first_matching_sub_clause_idx: 0,
                    sub_clause_matches: subs,
                }))
            }
            ClauseKind::First => clause.sub_clauses.iter().enumerate().find_map(|(i, sub)| {
                self.look_up(MemoKey::new(sub.clause, pos), depth).map(|m| {
                    Arc::new(Match {
                        key,
                        len: m.len,
                        first_matching_sub_clause_idx: i,
                        sub_clause_matches: vec![m],
                    })
                })
            }),
            ClauseKind::OneOrMore => {
                let sub = clause.sub_clauses[0].clause;
                let mut subs = Vec::new();
                let mut cur = pos;
                while let Some(m) = self.look_up(MemoKey::new(sub, cur), depth) {
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
                    Some(Arc::new(Match {
                        key,
                        len: cur - pos,
                        first_matching_sub_clause_idx: 0,
                        sub_clause_matches: subs,
                    }))
                }
            }
            ClauseKind::NotFollowedBy => {
                let sub = clause.sub_clauses[0].clause;
                match self.look_up(MemoKey::new(sub, pos), depth) {
                    Some(_) => None,
                    None => leaf(0),
                }
            }
        }
    }

    /// Store `new_match` if it improves on the cell, then schedule seed
    /// parents: all of them on improvement, and those that can match zero
    /// characters regardless.
    pub fn add_match(
        &mut self,
        key: MemoKey,
        new_match: Option<Arc<Match>>,
        queue: &mut BinaryHeap<Reverse<ClauseId>>,
    ) {
        let mut updated = false;
        if let Some(m) = new_match {
            let better = match self.entries.get(&key) {
                None => true,
                Some(old) => m.is_better_than(old),
            };
            if better {
                if key.start_pos != self.column {
                    self.stats.watermark_violations += 1;
                }
                if self.entries.insert(key, m).is_none() {
                    let row = &mut self.by_clause[key.clause.index()];
                    if row.last().map_or(true, |&last| last > key.start_pos) {
                        row.push(key.start_pos);
                    } else {
                        let at = row.partition_point(|&p| p > key.start_pos);
                        row.insert(at, key.start_pos);
                    }
                }
                self.stats.updates += 1;
                updated = true;
            }
        }
        let grammar = self.grammar;
        for &parent in &grammar.clause(key.clause).seed_parent_clauses {
            if updated || grammar.clause(parent).can_match_zero_chars {
                queue.push(Reverse(parent));
            }
        }
    }

    /// Best match of a named rule at a position.
    pub fn rule_match(&self, rule: &str, pos: usize) -> Option<Arc<Match>> {
        let clause = self.grammar.rule_clause(rule)?;
        self.look_up_best_match(MemoKey::new(clause, pos))
    }

    /// Match of the start rule at position 0.
    pub fn top_match(&self) -> Option<Arc<Match>> {
        self.rule_match(self.grammar.start_rule(), 0)
    }

    /// True if the start rule matches the entire input.
    pub fn is_complete(&self) -> bool {
        self.top_match().map_or(false, |m| m.len == self.input.len())
    }
}

/// Fill the memo table for `input`: right to left over start positions,
/// and within each position bottom-up in clause order via a priority queue
/// seeded with every terminal except `Nothing`.
pub fn parse<'g>(grammar: &'g Grammar, input: &str) -> MemoTable<'g> {
    let mut table = MemoTable::new(grammar, input);
    let mut queue: BinaryHeap<Reverse<ClauseId>> = BinaryHeap::new();
    for start_pos in (0..table.input.len()).rev() {
        table.column = start_pos;
        queue.extend(grammar.seed_terminals().iter().map(|&c| Reverse(c)));
        while let Some(Reverse(clause)) = queue.pop() {
            table.stats.evaluations += 1;
            let key = MemoKey::new(clause, start_pos);
            let m = table.match_clause(key);
            table.add_match(key, m, &mut queue);
        }
    }
    table.column = 0;
    table
}

impl Grammar {
    pub fn parse<'g>(&'g self, input: &str) -> MemoTable<'g> {
        parse(self, input)
    }
}
