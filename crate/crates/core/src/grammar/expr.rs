use std::fmt;

use super::Rule;

/// Inclusive character ranges, optionally negated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharSet {
    pub ranges: Vec<(char, char)>,
    pub negated: bool,
}

impl CharSet {
    pub fn new(ranges: Vec<(char, char)>, negated: bool) -> Self {
        CharSet { ranges, negated }
    }

    pub fn range(lo: char, hi: char) -> Self {
        CharSet::new(vec![(lo, hi)], false)
    }

    pub fn contains(&self, c: char) -> bool {
        self.ranges.iter().any(|&(lo, hi)| lo <= c && c <= hi) != self.negated
    }
}

impl fmt::Display for CharSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        if self.negated {
            f.write_str("^")?;
        }
        for &(lo, hi) in &self.ranges {
            write_escaped(f, lo, ']')?;
            if lo != hi {
                f.write_str("-")?;
                write_escaped(f, hi, ']')?;
            }
        }
        f.write_str("]")
    }
}

fn write_escaped(f: &mut fmt::Formatter<'_>, c: char, delim: char) -> fmt::Result {
    match c {
        '\n' => f.write_str("\\n"),
        '\r' => f.write_str("\\r"),
        '\t' => f.write_str("\\t"),
        '\\' => f.write_str("\\\\"),
        '^' if delim == ']' => f.write_str("\\^"),
        '-' if delim == ']' => f.write_str("\\u002d"),
        c if c == delim => write!(f, "\\{c}"),
        c if c.is_control() => write!(f, "\\u{:04x}", c as u32),
        c => write!(f, "{c}"),
    }
}

/// Surface clause tree, before interning.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Seq(Vec<Expr>),
    First(Vec<Expr>),
    OneOrMore(Box<Expr>),
    ZeroOrMore(Box<Expr>),
    Optional(Box<Expr>),
    FollowedBy(Box<Expr>),
    NotFollowedBy(Box<Expr>),
    Char(char),
    CharSet(CharSet),
    Str(String),
    Nothing,
    RuleRef(String),
    Labeled(String, Box<Expr>),
}

impl Expr {
    pub fn rule(name: &str) -> Expr {
        Expr::RuleRef(name.to_string())
    }

    pub fn seq(items: impl IntoIterator<Item = Expr>) -> Expr {
        Expr::Seq(items.into_iter().collect())
    }

    pub fn first(items: impl IntoIterator<Item = Expr>) -> Expr {
        Expr::First(items.into_iter().collect())
    }

    pub fn one_or_more(e: Expr) -> Expr {
        Expr::OneOrMore(Box::new(e))
    }

    pub fn zero_or_more(e: Expr) -> Expr {
        Expr::ZeroOrMore(Box::new(e))
    }

    pub fn optional(e: Expr) -> Expr {
        Expr::Optional(Box::new(e))
    }

    pub fn followed_by(e: Expr) -> Expr {
        Expr::FollowedBy(Box::new(e))
    }

    pub fn not_followed_by(e: Expr) -> Expr {
        Expr::NotFollowedBy(Box::new(e))
    }

    pub fn labeled(label: &str, e: Expr) -> Expr {
        Expr::Labeled(label.to_string(), Box::new(e))
    }

    /// True if the tree contains any of `FollowedBy`, `Optional`, `ZeroOrMore`.
    pub fn has_surface_operators(&self) -> bool {
        match self {
            Expr::Optional(_) | Expr::ZeroOrMore(_) | Expr::FollowedBy(_) => true,
            Expr::Seq(v) | Expr::First(v) => v.iter().any(Expr::has_surface_operators),
            Expr::OneOrMore(e) | Expr::NotFollowedBy(e) | Expr::Labeled(_, e) => {
                e.has_surface_operators()
            }
            _ => false,
        }
    }

    // 0 = First, 1 = Seq, 2 = prefix/label, 3 = postfix, 4 = primary
    fn level(&self) -> u8 {
        match self {
            Expr::First(v) if v.len() > 1 => 0,
            Expr::Seq(v) if v.len() > 1 => 1,
            Expr::First(_) | Expr::Seq(_) => 4,
            Expr::NotFollowedBy(_) | Expr::FollowedBy(_) | Expr::Labeled(..) => 2,
            Expr::OneOrMore(_) | Expr::ZeroOrMore(_) | Expr::Optional(_) => 3,
            _ => 4,
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Seq(items) | Expr::First(items) if items.len() == 1 => {
                write!(f, "(")?;
                items[0].fmt(f)?;
                write!(f, ")")
            }
            Expr::Seq(items) if items.is_empty() => f.write_str("()"),
            Expr::First(items) if items.is_empty() => f.write_str("()"),
            Expr::Seq(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    item.fmt_operand(f, 2)?;
                }
                Ok(())
            }
            Expr::First(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" / ")?;
                    }
                    item.fmt_operand(f, 1)?;
                }
                Ok(())
            }
            Expr::OneOrMore(e) => {
                e.fmt_operand(f, 3)?;
                f.write_str("+")
            }
            Expr::ZeroOrMore(e) => {
                e.fmt_operand(f, 3)?;
                f.write_str("*")
            }
            Expr::Optional(e) => {
                e.fmt_operand(f, 3)?;
                f.write_str("?")
            }
            Expr::FollowedBy(e) => {
                f.write_str("&")?;
                e.fmt_operand(f, 2)
            }
            Expr::NotFollowedBy(e) => {
                f.write_str("!")?;
                e.fmt_operand(f, 2)
            }
            Expr::Labeled(label, e) => {
                write!(f, "{label}:")?;
                e.fmt_operand(f, 2)
            }
            Expr::Char(c) => {
                f.write_str("'")?;
                write_escaped(f, *c, '\'')?;
                f.write_str("'")
            }
            Expr::Str(s) => {
                f.write_str("'")?;
                for c in s.chars() {
                    write_escaped(f, c, '\'')?;
                }
                f.write_str("'")
            }
            Expr::CharSet(set) => set.fmt(f),
            Expr::Nothing => f.write_str("()"),
            Expr::RuleRef(name) => f.write_str(name),
        }
    }
}

/// Rewrite surface operators into core ones:
/// `e?` into `e / ()`, `e*` into `e+ / ()`, `&e` into `!!e`.
pub fn desugar(expr: &Expr) -> Expr {
    match expr {
        Expr::Optional(e) => Expr::First(vec![desugar(e), Expr::Nothing]),
        Expr::ZeroOrMore(e) => {
            Expr::First(vec![Expr::OneOrMore(Box::new(desugar(e))), Expr::Nothing])
        }
        Expr::FollowedBy(e) => {
            Expr::not_followed_by(Expr::not_followed_by(desugar(e)))
        }
        Expr::Seq(items) => Expr::Seq(items.iter().map(desugar).collect()),
        Expr::First(items) => Expr::First(items.iter().map(desugar).collect()),
        Expr::OneOrMore(e) => Expr::one_or_more(desugar(e)),
        Expr::NotFollowedBy(e) => Expr::not_followed_by(desugar(e)),
        Expr::Labeled(l, e) => Expr::Labeled(l.clone(), Box::new(desugar(e))),
        other => other.clone(),
    }
}

/// Replace every `Y+` in a desugared rule by a reference to a synthetic
/// right-recursive helper rule `Y+ <- Y (Y+)?`. Returns the rewritten rule
/// followed by the helper rules it introduced (possibly with duplicates
/// when the same repetition occurs twice; callers dedup by name).
pub fn rewrite_one_or_more(rule: &Rule) -> Vec<Rule> {
    let mut helpers = Vec::new();
    let expr = rewrite_expr(&rule.expr, &mut helpers);
    let mut out = Vec::with_capacity(helpers.len() + 1);
    out.push(Rule {
        expr,
        ..rule.clone()
    });
    out.extend(helpers);
    out
}

fn rewrite_expr(expr: &Expr, helpers: &mut Vec<Rule>) -> Expr {
    match expr {
        Expr::OneOrMore(e) => {
            let item = rewrite_expr(e, helpers);
            let name = synthetic_name(&item);
            let body = Expr::Seq(vec![
                item,
                Expr::First(vec![Expr::RuleRef(name.clone()), Expr::Nothing]),
            ]);
            helpers.push(Rule {
                synthetic: true,
                ..Rule::new(name.clone(), body)
            });
            Expr::RuleRef(name)
        }
        Expr::Seq(items) => Expr::Seq(items.iter().map(|e| rewrite_expr(e, helpers)).collect()),
        Expr::First(items) => {
            Expr::First(items.iter().map(|e| rewrite_expr(e, helpers)).collect())
        }
        Expr::ZeroOrMore(e) => Expr::zero_or_more(rewrite_expr(e, helpers)),
        Expr::Optional(e) => Expr::optional(rewrite_expr(e, helpers)),
        Expr::FollowedBy(e) => Expr::followed_by(rewrite_expr(e, helpers)),
        Expr::NotFollowedBy(e) => Expr::not_followed_by(rewrite_expr(e, helpers)),
        Expr::Labeled(l, e) => Expr::Labeled(l.clone(), Box::new(rewrite_expr(e, helpers))),
        other => other.clone(),
    }
}

// Contains '+' and is parenthesized, so it can never collide with a user
// identifier.
fn synthetic_name(item: &Expr) -> String {
    format!("({item})+")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::rule("X")
    }

    #[test]
    fn optional_becomes_first_with_nothing() {
        assert_eq!(
            desugar(&Expr::optional(x())),
            Expr::first([x(), Expr::Nothing])
        );
    }

    #[test]
    fn zero_or_more_becomes_one_or_more_or_nothing() {
        assert_eq!(
            desugar(&Expr::zero_or_more(x())),
            Expr::first([Expr::one_or_more(x()), Expr::Nothing])
        );
    }

    #[test]
    fn followed_by_becomes_double_negation() {
        assert_eq!(
            desugar(&Expr::followed_by(x())),
            Expr::not_followed_by(Expr::not_followed_by(x()))
        );
    }

    #[test]
    fn nothing_is_already_core() {
        assert_eq!(desugar(&Expr::Nothing), Expr::Nothing);
    }

    #[test]
    fn desugar_is_deep() {
        let e = Expr::seq([Expr::labeled("a", Expr::optional(x())), Expr::zero_or_more(Expr::followed_by(x()))]);
        assert!(!desugar(&e).has_surface_operators());
    }

    #[test]
    fn one_or_more_rule_becomes_right_recursive() {
        let rule = Rule::new("X", Expr::one_or_more(Expr::rule("Y")));
        let out = rewrite_one_or_more(&rule);
        assert_eq!(out.len(), 2);
        let helper = &out[1];
        assert!(helper.synthetic);
        assert_eq!(out[0].expr, Expr::RuleRef(helper.name.clone()));
        assert_eq!(
            helper.expr,
            Expr::seq([
                Expr::rule("Y"),
                Expr::first([Expr::RuleRef(helper.name.clone()), Expr::Nothing])
            ])
        );
    }

    #[test]
    fn rule_without_repetition_is_unchanged() {
        let rule = Rule::new("X", Expr::Char('a'));
        assert_eq!(rewrite_one_or_more(&rule), vec![rule]);
    }

    #[test]
    fn display_round_trips_precedence() {
        let e = Expr::seq([
            Expr::first([Expr::Char('a'), Expr::Str("bc".into())]),
            Expr::one_or_more(Expr::not_followed_by(x())),
            Expr::labeled("l", Expr::seq([x(), x()])),
            Expr::CharSet(CharSet::new(vec![('a', 'z'), ('-', '-')], true)),
        ]);
        assert_eq!(e.to_string(), "('a' / 'bc') (!X)+ l:(X X) [^a-z\\u002d]");
    }
}
