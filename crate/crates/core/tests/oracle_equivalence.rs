//! Differential tests: the bottom-up engine against the top-down packrat
//! parser on random grammars without left recursion.

use pika::{Expr, Grammar, GrammarOptions, MemoKey, Packrat, Rule};
use proptest::prelude::*;

const ALPHABET: [char; 3] = ['a', 'b', 'c'];

fn terminal() -> impl Strategy<Value = Expr> {
    prop_oneof![
        prop::sample::select(ALPHABET.to_vec()).prop_map(Expr::Char),
        prop::sample::select(vec!["ab", "ba", "cc"]).prop_map(|s| Expr::Str(s.into())),
        Just(Expr::CharSet(pika::CharSet::range('a', 'b'))),
        Just(Expr::CharSet(pika::CharSet::new(vec![('a', 'a')], true))),
    ]
}

/// Rule `i` of `n` may refer forward freely, but backward (or to itself)
/// only after a terminal that consumes input, which rules out any cycle at a
/// single position.
fn rule_body(i: usize, n: usize) -> BoxedStrategy<Expr> {
    let guarded = (terminal(), 0..n).prop_map(|(t, j)| Expr::seq([t, Expr::rule(&name(j))]));
    let leaf = if i + 1 < n {
        let forward = ((i + 1)..n).prop_map(|j| Expr::rule(&name(j)));
        prop_oneof![3 => terminal(), 1 => forward, 1 => guarded].boxed()
    } else {
        prop_oneof![3 => terminal(), 1 => guarded].boxed()
    };
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Seq),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::First),
            inner.clone().prop_map(Expr::one_or_more),
            inner.clone().prop_map(Expr::zero_or_more),
            inner.clone().prop_map(Expr::optional),
            inner.clone().prop_map(Expr::followed_by),
            inner.prop_map(Expr::not_followed_by),
        ]
    })
    .boxed()
}

fn name(i: usize) -> String {
    format!("R{i}")
}

fn grammar_rules() -> impl Strategy<Value = Vec<Rule>> {
    (1usize..=4).prop_flat_map(|n| {
        (0..n)
            .map(|i| rule_body(i, n).prop_map(move |e| Rule::new(name(i), e)))
            .collect::<Vec<_>>()
    })
}

fn input() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(ALPHABET.to_vec()), 0..16).prop_map(|v| v.into_iter().collect())
}

fn check(grammar: &Grammar, input: &str) -> Result<(), TestCaseError> {
    prop_assert!(grammar.left_recursion_head().is_none());
    let table = grammar.parse(input);
    let oracle = Packrat::new(grammar, input).unwrap();
    prop_assert_eq!(table.stats().watermark_violations, 0);
    for pos in 0..=input.chars().count() {
        for rule in grammar.rules() {
            let a = table.look_up_best_match(MemoKey::new(rule.clause, pos));
            let b = oracle.eval(rule.clause, pos);
            prop_assert_eq!(
                &a,
                &b,
                "rule {} at {} (clause {})",
                rule.name,
                pos,
                grammar.display_clause(rule.clause, true)
            );
        }
    }
    // every stored entry is what the top-down parser finds at that cell
    for clause in grammar.clauses() {
        for m in table.matches_of(clause.idx) {
            let b = oracle.eval(m.key.clause, m.start());
            prop_assert_eq!(Some(m), b.as_ref());
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 2048, max_global_rejects: 20_000, ..ProptestConfig::default() })]

    #[test]
    fn engines_agree(rules in grammar_rules(), inputs in prop::collection::vec(input(), 1..6)) {
        for options in [GrammarOptions::default(), GrammarOptions { rewrite_one_or_more: false }] {
            let grammar = match Grammar::with_options(rules.clone(), options) {
                Ok(g) => g,
                Err(_) => return Err(TestCaseError::reject("invalid grammar")),
            };
            for input in &inputs {
                check(&grammar, input)?;
            }
        }
    }
}

#[test]
fn agree_on_primitive_precedence_grammar() {
    let g = pika::compile_str(pika::grammars::PRECEDENCE_PRIMITIVE).unwrap();
    for input in ["1*2+3*4", "1+2+3", "-(a+b)*c", "((x))", "-", "", "a-b*-c"] {
        check(&g, input).unwrap();
    }
}
