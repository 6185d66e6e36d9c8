//! Grammar description language.
//!
//! ```text
//! # comment
//! Program   <- Statement+ ;
//! Statement <- name:Ident WS '=' WS value:Expr ';' ;
//! E[1,L]    <- E ('*' / '/') E ;
//! ```
//!
//! Sequence is juxtaposition; `/` is ordered choice; `+ * ?` are postfix;
//! `! &` are prefix lookaheads; `'c'` / `"str"` are literals; `[a-z]` and
//! `[^...]` are character classes; `()` matches the empty string;
//! `Label:Clause` attaches an AST label. `Name[p]`, `Name[p,L]` and
//! `Name[p,R]` declare one level of a precedence hierarchy.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::grammar::{Associativity, CharSet, Expr, Grammar, GrammarError, GrammarOptions, Rule};

#[derive(Clone, Debug)]
pub struct GrammarSource {
    pub text: String,
    pub origin_name: String,
}

impl GrammarSource {
    pub fn new(origin_name: impl Into<String>, text: impl Into<String>) -> Self {
        GrammarSource {
            text: text.into(),
            origin_name: origin_name.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("offset {position}: {message}")]
pub struct SyntaxDiagnostic {
    /// Character offset into the source text.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("{origin}: {diagnostic}")]
    Syntax {
        origin: String,
        diagnostic: SyntaxDiagnostic,
    },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

/// Parse and fully preprocess a grammar description.
pub fn compile(src: &GrammarSource, options: GrammarOptions) -> Result<Grammar, CompileError> {
    let rules = parse_grammar_source(src).map_err(|diagnostic| CompileError::Syntax {
        origin: src.origin_name.clone(),
        diagnostic,
    })?;
    Ok(Grammar::with_options(rules, options)?)
}

/// Shorthand for [`compile`] with default options.
pub fn compile_str(text: &str) -> Result<Grammar, CompileError> {
    compile(&GrammarSource::new("<string>", text), GrammarOptions::default())
}

pub fn parse_grammar_source(src: &GrammarSource) -> Result<Vec<Rule>, SyntaxDiagnostic> {
    let mut parser = Parser {
        chars: src.text.chars().collect(),
        pos: 0,
        refs: Vec::new(),
    };
    let mut rules: Vec<Rule> = Vec::new();
    let mut plain = HashSet::new();
    let mut levels: HashMap<String, HashSet<u32>> = HashMap::new();
    loop {
        parser.skip_ws();
        if parser.at_end() {
            break;
        }
        let start = parser.pos;
        let rule = parser.rule()?;
        let dup = match rule.precedence {
            None => !plain.insert(rule.name.clone()) || levels.contains_key(&rule.name),
            Some(level) => {
                plain.contains(&rule.name)
                    || !levels.entry(rule.name.clone()).or_default().insert(level)
            }
        };
        if dup {
            return Err(SyntaxDiagnostic {
                position: start,
                message: match rule.precedence {
                    Some(level) => format!("duplicate rule `{}[{level}]`", rule.name),
                    None => format!("duplicate rule `{}`", rule.name),
                },
            });
        }
        rules.push(rule);
    }
    if rules.is_empty() {
        return Err(SyntaxDiagnostic {
            position: 0,
            message: "grammar has no rules".into(),
        });
    }
    for (name, position) in &parser.refs {
        if !plain.contains(name) && !levels.contains_key(name) {
            return Err(SyntaxDiagnostic {
                position: *position,
                message: format!("undefined rule `{name}`"),
            });
        }
    }
    Ok(rules)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    refs: Vec<(String, usize)>,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SyntaxDiagnostic> {
        Err(SyntaxDiagnostic {
            position: self.pos.min(self.chars.len()),
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += 1;
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        let n = token.chars().count();
        if self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().copied().eq(token.chars())
        {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), SyntaxDiagnostic> {
        if self.eat(token) {
            Ok(())
        } else {
            self.error(format!("expected `{token}`"))
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.pos += 1,
            _ => return None,
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    /// Whether the input continues with `[level(,L|R)?] <-`, i.e. a
    /// reference is really the start of the next rule.
    fn at_precedence_header(&mut self) -> bool {
        let saved = self.pos;
        let found = self.eat("[")
            && {
                self.skip_ws();
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                self.pos > start
            }
            && (!self.eat(",") || self.eat("L") || self.eat("R"))
            && self.eat("]")
            && self.eat("<-");
        self.pos = saved;
        found
    }

    fn rule(&mut self) -> Result<Rule, SyntaxDiagnostic> {
        let Some(name) = self.ident() else {
            return self.error("expected rule name");
        };
        let mut rule = Rule::new(name, Expr::Nothing);
        if self.eat("[") {
            self.skip_ws();
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let Ok(level) = digits.parse::<u32>() else {
                self.pos = start;
                return self.error("expected precedence level");
            };
            let assoc = if self.eat(",") {
                if self.eat("L") {
                    Some(Associativity::Left)
                } else if self.eat("R") {
                    Some(Associativity::Right)
                } else {
                    return self.error("expected `L` or `R`");
                }
            } else {
                None
            };
            self.expect("]")?;
            rule = rule.with_precedence(level, assoc);
        }
        self.expect("<-")?;
        let body = self.first()?;
        self.expect(";")?;
        match body {
            Expr::Labeled(label, inner) => {
                rule.ast_label = Some(label);
                rule.expr = *inner;
            }
            body => rule.expr = body,
        }
        Ok(rule)
    }

    fn first(&mut self) -> Result<Expr, SyntaxDiagnostic> {
        let mut items = vec![self.seq()?];
        while self.eat("/") {
            items.push(self.seq()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Expr::First(items)
        })
    }

    fn seq(&mut self) -> Result<Expr, SyntaxDiagnostic> {
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some('/') | Some(';') | Some(')') => break,
                _ => items.push(self.unary()?),
            }
        }
        match items.len() {
            0 => self.error("expected clause"),
            1 => Ok(items.pop().unwrap()),
            _ => Ok(Expr::Seq(items)),
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxDiagnostic> {
        let save = self.pos;
        if let Some(label) = self.ident() {
            self.skip_ws();
            if self.peek() == Some(':') {
                self.pos += 1;
                return Ok(Expr::Labeled(label, Box::new(self.unary()?)));
            }
        }
        self.pos = save;
        if self.eat("!") {
            return Ok(Expr::not_followed_by(self.unary()?));
        }
        if self.eat("&") {
            return Ok(Expr::followed_by(self.unary()?));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxDiagnostic> {
        let mut e = self.primary()?;
        loop {
            self.skip_ws();
            e = match self.peek() {
                Some('+') => Expr::one_or_more(e),
                Some('*') => Expr::zero_or_more(e),
                Some('?') => Expr::optional(e),
                _ => return Ok(e),
            };
            self.pos += 1;
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxDiagnostic> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                if self.eat(")") {
                    return Ok(Expr::Nothing);
                }
                let e = self.first()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(q @ ('\'' | '"')) => {
                self.pos += 1;
                let mut s = String::new();
                loop {
                    match self.peek() {
                        None => {
                            self.pos = start;
                            return self.error("unterminated literal");
                        }
                        Some(c) if c == q => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => s.push(self.literal_char()?),
                    }
                }
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (None, _) => {
                        self.pos = start;
                        self.error("empty literal; use `()` to match nothing")
                    }
                    (Some(c), None) => Ok(Expr::Char(c)),
                    _ => Ok(Expr::Str(s)),
                }
            }
            Some('[') => {
                self.pos += 1;
                let negated = if self.peek() == Some('^') {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                let mut ranges = Vec::new();
                loop {
                    match self.peek() {
                        None => return self.error("unterminated character class"),
                        Some(']') => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => {
                            let lo = self.literal_char()?;
                            let hi = if self.peek() == Some('-')
                                && !matches!(self.chars.get(self.pos + 1), Some(']') | None)
                            {
                                self.pos += 1;
                                self.literal_char()?
                            } else {
                                lo
                            };
                            if hi < lo {
                                return self.error(format!("inverted range `{lo}-{hi}`"));
                            }
                            ranges.push((lo, hi));
                        }
                    }
                }
                if ranges.is_empty() {
                    self.pos = start;
                    return self.error("empty character class");
                }
                Ok(Expr::CharSet(CharSet::new(ranges, negated)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.ident().expect("identifier start");
                if self.eat("<-") || self.at_precedence_header() {
                    self.pos = start;
                    return self.error("missing `;` before this rule");
                }
                self.refs.push((name.clone(), start));
                Ok(Expr::RuleRef(name))
            }
            Some(c) => self.error(format!("unexpected `{c}`")),
            None => self.error("unexpected end of grammar"),
        }
    }

    fn literal_char(&mut self) -> Result<char, SyntaxDiagnostic> {
        let c = self.peek().expect("caller checked for end");
        self.pos += 1;
        if c != '\\' {
            return Ok(c);
        }
        let Some(e) = self.peek() else {
            return self.error("unterminated escape");
        };
        self.pos += 1;
        Ok(match e {
            'n' => '\n',
            'r' => '\r',
            't' => '\t',
            '\\' | '\'' | '"' | ']' | '^' | '-' | '[' => e,
            'u' => {
                let hex: String = self.chars.get(self.pos..self.pos + 4).unwrap_or(&[]).iter().collect();
                let Some(c) = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) else {
                    return self.error("expected four hex digits after `\\u`");
                };
                self.pos += 4;
                c
            }
            other => {
                self.pos -= 2;
                return self.error(format!("unknown escape `\\{other}`"));
            }
        })
    }
}

/// Result of expanding precedence shorthand.
#[derive(Clone, Debug)]
pub struct PrecedenceExpansion {
    pub rules: Vec<Rule>,
    /// Entry rule (lowest level) of each hierarchy, e.g. `E[0]`.
    pub lowest_precedence_rules: Vec<String>,
}

pub fn level_rule_name(base: &str, level: u32) -> String {
    format!("{base}[{level}]")
}

/// Expand every group of rules sharing a name and carrying precedence
/// levels into one rule per level. Self-references are retargeted:
/// left-associative levels keep the leftmost self-reference at the same
/// level and right-associative levels the rightmost; a single
/// self-reference without associativity may nest at the same level
/// (`'-' (E[2] / E[3])`); all others move to the next level. Each level
/// but the highest falls over to the next one, and the highest level's
/// self-references re-enter at the lowest level. The group name becomes
/// an alias of the lowest level.
pub fn rewrite_precedence_hierarchy(rules: Vec<Rule>) -> Result<PrecedenceExpansion, GrammarError> {
    let mut groups: HashMap<String, Vec<(u32, usize)>> = HashMap::new();
    let mut plain = HashSet::new();
    for (i, rule) in rules.iter().enumerate() {
        match rule.precedence {
            Some(level) => groups.entry(rule.name.clone()).or_default().push((level, i)),
            None => {
                plain.insert(rule.name.clone());
            }
        }
    }
    if groups.is_empty() {
        return Ok(PrecedenceExpansion {
            rules,
            lowest_precedence_rules: Vec::new(),
        });
    }
    for (name, levels) in groups.iter_mut() {
        if plain.contains(name) {
            return Err(GrammarError::MixedPrecedence(name.clone()));
        }
        levels.sort();
        for w in levels.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(GrammarError::DuplicatePrecedence {
                    name: name.clone(),
                    level: w[0].0,
                });
            }
        }
    }

    let mut replaced: HashMap<usize, Rule> = HashMap::new();
    let mut lowest = Vec::new();
    let mut alias_after: HashMap<usize, Rule> = HashMap::new();
    for (base, levels) in &groups {
        let names: Vec<String> = levels.iter().map(|(l, _)| level_rule_name(base, *l)).collect();
        for (i, &(level, idx)) in levels.iter().enumerate() {
            let rule = &rules[idx];
            let self_refs = count_refs(&rule.expr, base);
            if rule.associativity.is_some() && self_refs < 2 {
                return Err(GrammarError::AssociativityWithoutRecursion {
                    name: base.clone(),
                    level,
                });
            }
            let curr = &names[i];
            let highest = i + 1 == levels.len();
            let next = &names[(i + 1) % levels.len()];
            let keep_at_curr = match (highest, rule.associativity) {
                (true, _) => None,
                (false, Some(Associativity::Left)) => Some(0),
                (false, Some(Associativity::Right)) => Some(self_refs - 1),
                (false, None) => None,
            };
            let mut seen = 0;
            let body = retarget(&rule.expr, base, &mut seen, &mut |k| {
                if highest {
                    Expr::RuleRef(names[0].clone())
                } else if keep_at_curr == Some(k) {
                    Expr::RuleRef(curr.clone())
                } else if rule.associativity.is_none() && self_refs == 1 {
                    Expr::First(vec![Expr::RuleRef(curr.clone()), Expr::RuleRef(next.clone())])
                } else {
                    Expr::RuleRef(next.clone())
                }
            });
            let body = if highest {
                body
            } else {
                Expr::First(vec![body, Expr::RuleRef(next.clone())])
            };
            replaced.insert(
                idx,
                Rule {
                    name: curr.clone(),
                    expr: body,
                    ..rule.clone()
                },
            );
        }
        lowest.push((levels[0].1, names[0].clone()));
        let last_idx = levels.iter().map(|(_, i)| *i).max().unwrap();
        alias_after.insert(last_idx, Rule::new(base.clone(), Expr::RuleRef(names[0].clone())));
    }
    lowest.sort();

    let mut out = Vec::with_capacity(rules.len() + groups.len());
    for (i, rule) in rules.into_iter().enumerate() {
        out.push(replaced.remove(&i).unwrap_or(rule));
        if let Some(alias) = alias_after.remove(&i) {
            out.push(alias);
        }
    }
    Ok(PrecedenceExpansion {
        rules: out,
        lowest_precedence_rules: lowest.into_iter().map(|(_, n)| n).collect(),
    })
}

fn count_refs(expr: &Expr, name: &str) -> usize {
    let mut n = 0;
    retarget(expr, name, &mut n, &mut |_| Expr::Nothing);
    n
}

fn retarget(expr: &Expr, name: &str, seen: &mut usize, f: &mut dyn FnMut(usize) -> Expr) -> Expr {
    let mut go = |e: &Expr, seen: &mut usize| retarget(e, name, seen, f);
    match expr {
        Expr::RuleRef(n) if n == name => {
            let k = *seen;
            *seen += 1;
            f(k)
        }
        Expr::Seq(items) => Expr::Seq(items.iter().map(|e| go(e, seen)).collect()),
        Expr::First(items) => Expr::First(items.iter().map(|e| go(e, seen)).collect()),
        Expr::OneOrMore(e) => Expr::one_or_more(go(e, seen)),
        Expr::ZeroOrMore(e) => Expr::zero_or_more(go(e, seen)),
        Expr::Optional(e) => Expr::optional(go(e, seen)),
        Expr::FollowedBy(e) => Expr::followed_by(go(e, seen)),
        Expr::NotFollowedBy(e) => Expr::not_followed_by(go(e, seen)),
        Expr::Labeled(l, e) => Expr::Labeled(l.clone(), Box::new(go(e, seen))),
        other => other.clone(),
    }
}

/// Renders rules back into grammar notation accepted by
/// [`parse_grammar_source`].
pub struct RulesDisplay<'a>(pub &'a [Rule]);

impl fmt::Display for RulesDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in self.0 {
            f.write_str(&rule.name)?;
            // expanded levels already carry their level in the name
            let level = if rule.name.ends_with(']') { None } else { rule.precedence };
            match (level, rule.associativity) {
                (Some(p), Some(Associativity::Left)) => write!(f, "[{p},L]")?,
                (Some(p), Some(Associativity::Right)) => write!(f, "[{p},R]")?,
                (Some(p), None) => write!(f, "[{p}]")?,
                (None, _) => {}
            }
            f.write_str(" <- ")?;
            match &rule.ast_label {
                Some(label) => write!(f, "{}", Expr::labeled(label, rule.expr.clone()))?,
                None => write!(f, "{}", rule.expr)?,
            }
            f.write_str(";\n")?;
        }
        Ok(())
    }
}
