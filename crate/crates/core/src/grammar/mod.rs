//! Grammar data model and preprocessing.
//!
//! Rules are written against the surface [`Expr`] tree. [`Grammar::new`] runs
//! the whole preprocessing pipeline: precedence expansion, desugaring,
//! right-recursive `OneOrMore` rewriting, interning with rule-reference
//! resolution, bottom-up topological sorting, zero-length analysis and
//! seed-parent computation. The resulting [`Grammar`] is immutable.

mod build;
mod expr;
mod toposort;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use expr::{desugar, rewrite_one_or_more, CharSet, Expr};

/// Index of a clause in bottom-up topological order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClauseId(pub(crate) usize);

impl ClauseId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Associativity {
    Left,
    Right,
}

/// A named rule as written by the user (or produced by a rewrite).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub expr: Expr,
    pub precedence: Option<u32>,
    pub associativity: Option<Associativity>,
    pub ast_label: Option<String>,
    /// Helper rule introduced by the `OneOrMore` rewrite.
    pub synthetic: bool,
}

impl Rule {
    pub fn new(name: impl Into<String>, expr: Expr) -> Self {
        Rule {
            name: name.into(),
            expr,
            precedence: None,
            associativity: None,
            ast_label: None,
            synthetic: false,
        }
    }

    pub fn with_precedence(mut self, level: u32, assoc: Option<Associativity>) -> Self {
        self.precedence = Some(level);
        self.associativity = assoc;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.ast_label = Some(label.into());
        self
    }
}

/// Operator of an interned clause. Surface-only operators never survive
/// preprocessing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClauseKind {
    Seq,
    First,
    OneOrMore,
    NotFollowedBy,
    Char(char),
    CharSet(CharSet),
    Str(Vec<char>),
    Nothing,
}

impl ClauseKind {
    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            ClauseKind::Char(_) | ClauseKind::CharSet(_) | ClauseKind::Str(_) | ClauseKind::Nothing
        )
    }
}

/// Edge from a clause to one of its subclauses. AST labels live on edges
/// because interned clauses are shared between contexts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubClause {
    pub clause: ClauseId,
    pub label: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Clause {
    pub kind: ClauseKind,
    pub sub_clauses: Vec<SubClause>,
    pub idx: ClauseId,
    pub can_match_zero_chars: bool,
    pub seed_parent_clauses: Vec<ClauseId>,
    /// Names of rules whose body is this clause, user rules first.
    pub rule_names: Vec<String>,
    /// Right-recursive helper produced from `Y+`: `Seq(Y, First(self, ε))`.
    pub synthetic_repeat: bool,
}

impl Clause {
    pub fn is_terminal(&self) -> bool {
        self.kind.is_terminal()
    }

    pub fn sub_clause_ids(&self) -> impl Iterator<Item = ClauseId> + '_ {
        self.sub_clauses.iter().map(|s| s.clause)
    }
}

/// Per-rule metadata retained after preprocessing.
#[derive(Clone, Debug)]
pub struct RuleInfo {
    pub name: String,
    pub clause: ClauseId,
    pub precedence: Option<u32>,
    pub associativity: Option<Associativity>,
    pub ast_label: Option<String>,
    pub synthetic: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct GrammarOptions {
    /// Rewrite `Y+` into the right-recursive form `X <- Y X?`. When off,
    /// `OneOrMore` clauses are matched iteratively.
    pub rewrite_one_or_more: bool,
}

impl Default for GrammarOptions {
    fn default() -> Self {
        GrammarOptions {
            rewrite_one_or_more: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("grammar has no rules")]
    NoRules,
    #[error("duplicate rule name `{0}`")]
    DuplicateRule(String),
    #[error("reference to undefined rule `{name}` in rule `{referenced_from}`")]
    UnknownRule { name: String, referenced_from: String },
    #[error("rule `{0}` is an alias cycle that never reaches a clause")]
    CyclicAlias(String),
    #[error("`Nothing` cannot be the first subclause of `{0}`")]
    NothingFirst(String),
    #[error("repetition `{0}` repeats a clause that can match zero characters")]
    NullableRepetition(String),
    #[error("rule `{0}` is unreachable from every topological sort root")]
    UnreachableRule(String),
    #[error("empty string literal")]
    EmptyLiteral,
    #[error("precedence level {level} declared twice for rule `{name}`")]
    DuplicatePrecedence { name: String, level: u32 },
    #[error("rule `{name}` level {level} declares associativity but has fewer than two self-references")]
    AssociativityWithoutRecursion { name: String, level: u32 },
    #[error("rule `{0}` mixes precedence levels with a plain definition")]
    MixedPrecedence(String),
    #[error("unknown start rule `{0}`")]
    UnknownStartRule(String),
}

/// A fully preprocessed grammar. Clause indices follow bottom-up
/// topological order, so `clauses()[i].idx == ClauseId(i)`.
#[derive(Clone, Debug)]
pub struct Grammar {
    clauses: Vec<Clause>,
    rules: Vec<RuleInfo>,
    rule_index: HashMap<String, usize>,
    start_rule: String,
    terminals: Vec<ClauseId>,
    nothing: Option<ClauseId>,
    left_recursion_head: Option<ClauseId>,
    warnings: Vec<String>,
    options: GrammarOptions,
}

impl Grammar {
    pub fn new(rules: Vec<Rule>) -> Result<Grammar, GrammarError> {
        Self::with_options(rules, GrammarOptions::default())
    }

    pub fn with_options(rules: Vec<Rule>, options: GrammarOptions) -> Result<Grammar, GrammarError> {
        build::build(rules, options)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, id: ClauseId) -> &Clause {
        &self.clauses[id.0]
    }

    /// User-visible and synthetic rules in declaration order.
    pub fn rules(&self) -> &[RuleInfo] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&RuleInfo> {
        self.rule_index.get(name).map(|&i| &self.rules[i])
    }

    pub fn rule_clause(&self, name: &str) -> Option<ClauseId> {
        self.rule(name).map(|r| r.clause)
    }

    pub fn start_rule(&self) -> &str {
        &self.start_rule
    }

    pub fn set_start_rule(&mut self, name: &str) -> Result<(), GrammarError> {
        if self.rule_index.contains_key(name) {
            self.start_rule = name.to_string();
            Ok(())
        } else {
            Err(GrammarError::UnknownStartRule(name.to_string()))
        }
    }

    /// Terminals seeded at every input position (everything but `Nothing`).
    pub fn seed_terminals(&self) -> &[ClauseId] {
        &self.terminals
    }

    pub fn nothing_clause(&self) -> Option<ClauseId> {
        self.nothing
    }

    /// A clause on a same-position (left-recursive) cycle, if any exists.
    pub fn left_recursion_head(&self) -> Option<ClauseId> {
        self.left_recursion_head
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn options(&self) -> GrammarOptions {
        self.options
    }

    /// Human-readable name for a clause: its rule name if it is a rule body,
    /// otherwise its ASCII-notation rendering.
    pub fn clause_name(&self, id: ClauseId) -> String {
        let clause = self.clause(id);
        match clause.rule_names.first() {
            Some(name) if !self.is_synthetic_name(name) => name.clone(),
            _ => self.display_clause(id, true),
        }
    }

    fn is_synthetic_name(&self, name: &str) -> bool {
        self.rule(name).map_or(false, |r| r.synthetic)
    }

    /// Render a clause in grammar notation. Named subclauses render as rule
    /// references; `expand` controls whether `id` itself is expanded. An
    /// anonymous clause reached again through its own subclauses (possible
    /// once congruent clauses are merged) renders as `#index`.
    pub fn display_clause(&self, id: ClauseId, expand: bool) -> String {
        self.render(id, expand, &mut Vec::new())
    }

    fn render(&self, id: ClauseId, expand: bool, open: &mut Vec<ClauseId>) -> String {
        let clause = self.clause(id);
        if !expand {
            if let Some(name) = clause.rule_names.first() {
                if !self.is_synthetic_name(name) {
                    return name.clone();
                }
            }
        }
        if open.contains(&id) {
            return format!("#{}", id.0);
        }
        open.push(id);
        let text = self.render_body(clause, open);
        open.pop();
        text
    }

    fn render_body(&self, clause: &Clause, open: &mut Vec<ClauseId>) -> String {
        if clause.synthetic_repeat {
            return format!("{}+", self.render_operand(clause.sub_clauses[0].clause, 3, open));
        }
        let mut edge = |s: &SubClause, level: u8| {
            let text = self.render_operand(s.clause, level, open);
            match &s.label {
                Some(l) => format!("{l}:{}", wrap_if(text, self.clause_level(s.clause) < 2)),
                None => text,
            }
        };
        match &clause.kind {
            ClauseKind::Seq => clause
                .sub_clauses
                .iter()
                .map(|s| edge(s, 2))
                .collect::<Vec<_>>()
                .join(" "),
            ClauseKind::First => clause
                .sub_clauses
                .iter()
                .map(|s| edge(s, 1))
                .collect::<Vec<_>>()
                .join(" / "),
            ClauseKind::OneOrMore => format!("{}+", edge(&clause.sub_clauses[0], 3)),
            ClauseKind::NotFollowedBy => format!("!{}", edge(&clause.sub_clauses[0], 2)),
            ClauseKind::Char(c) => Expr::Char(*c).to_string(),
            ClauseKind::CharSet(set) => set.to_string(),
            ClauseKind::Str(s) => Expr::Str(s.iter().collect()).to_string(),
            ClauseKind::Nothing => "()".to_string(),
        }
    }

    fn render_operand(&self, id: ClauseId, min_level: u8, open: &mut Vec<ClauseId>) -> String {
        let text = self.render(id, false, open);
        wrap_if(text, self.clause_level(id) < min_level)
    }

    // 0 = First, 1 = Seq, 2 = prefix, 3 = postfix, 4 = primary
    fn clause_level(&self, id: ClauseId) -> u8 {
        let clause = self.clause(id);
        if clause.synthetic_repeat {
            return 3;
        }
        if let Some(name) = clause.rule_names.first() {
            if !self.is_synthetic_name(name) {
                return 4;
            }
        }
        match clause.kind {
            ClauseKind::First => 0,
            ClauseKind::Seq => 1,
            ClauseKind::NotFollowedBy => 2,
            ClauseKind::OneOrMore => 3,
            _ => 4,
        }
    }
}

fn wrap_if(text: String, wrap: bool) -> String {
    if wrap {
        format!("({text})")
    } else {
        text
    }
}
