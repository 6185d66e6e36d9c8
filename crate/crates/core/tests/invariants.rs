use pika::tree::tree_from_match;
use pika::{
    compile_str, extract_parse_tree, find_error_spans, flatten_one_or_more, grammars, next_match_after, to_ast,
    AstNode, ClauseKind, Grammar, MemoKey, MemoTable, ParseTreeNode,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

const ASSIGN: &str = "
    Program <- WS Assign+;
    Assign  <- Ident WS '=' WS Expr WS ';' WS;
    Expr    <- Term (WS ('+' / '-') WS Term)*;
    Term    <- Ident / [0-9]+ / '(' WS Expr WS ')';
    Ident   <- [a-z]+;
    WS      <- [ ]*;
";

const LABELED: &str = "
    Sum  <- S:(l:Prod (WS '+' WS r:Prod)*);
    Prod <- P:(l:Atom (WS '*' WS r:Atom)*);
    Atom <- num:[0-9]+ / '(' WS Sum WS ')';
    WS   <- [ ]*;
";

fn assert_first_priority(table: &MemoTable<'_>) {
    let g = table.grammar();
    for clause in g.clauses().iter().filter(|c| c.kind == ClauseKind::First) {
        for m in table.matches_of(clause.idx) {
            for earlier in &clause.sub_clauses[..m.first_matching_sub_clause_idx] {
                assert!(
                    table.look_up_best_match(MemoKey::new(earlier.clause, m.start())).is_none(),
                    "{} at {}: earlier alternative also matches",
                    g.display_clause(clause.idx, true),
                    m.start()
                );
            }
        }
    }
}

fn leaves(node: &ParseTreeNode) -> Vec<(usize, usize)> {
    if node.children.is_empty() {
        vec![(node.start, node.len)]
    } else {
        node.children.iter().flat_map(leaves).collect()
    }
}

fn ast_preorder(node: &AstNode, out: &mut Vec<(String, usize, usize)>) {
    out.push((node.label.clone(), node.start, node.len));
    for c in &node.children {
        ast_preorder(c, out);
    }
}

#[test]
fn left_recursive_grammar_terminates_on_arbitrary_text() {
    let g = compile_str(grammars::PRECEDENCE_LEFT_RECURSIVE).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let len = rng.gen_range(0..=128);
        let text: String = (0..len)
            .map(|_| *b"ab1+-*/() x".choose(&mut rng).unwrap() as char)
            .collect();
        let t = g.parse(&text);
        assert_eq!(t.stats().watermark_violations, 0);
        assert_first_priority(&t);
        assert_eq!(t.stored_count(g.nothing_clause().unwrap()), 0);
    }
}

#[test]
fn right_associative_level_nests_right() {
    let g = compile_str("Y1 <- (Y2 '^' Y1) / Y2; Y2 <- [a-z];").unwrap();
    let t = g.parse("a^b^c");
    let top = t.top_match().unwrap();
    assert_eq!(top.len, 5);
    let seq = &top.sub_clause_matches[0];
    assert_eq!(seq.sub_clause_matches[0].len, 1);
    assert_eq!((seq.sub_clause_matches[2].start(), seq.sub_clause_matches[2].len), (2, 3));
}

#[test]
fn shorthand_right_associativity() {
    let g = compile_str("E[0,L] <- E '+' E; E[1,R] <- E '^' E; E[2] <- [a-z];").unwrap();
    let t = g.parse("a^b^c+d");
    assert!(t.is_complete());
    let tree = extract_parse_tree(&t, "E", 0).unwrap().unwrap();
    // E[0] -> Seq(E[0] -> E[1] "a^b^c", '+', E[1] "d")
    let spans: Vec<_> = tree
        .walk()
        .filter(|n| n.name == "E[1]")
        .map(|n| (n.start, n.len))
        .collect();
    assert!(spans.contains(&(0, 5)) && spans.contains(&(2, 3)) && spans.contains(&(6, 1)), "{spans:?}");
}

#[test]
fn flattening_conserves_spans_and_leaves() {
    let g = compile_str(ASSIGN).unwrap();
    let input = "a = 1 + (b - 22);  bb=c;";
    let t = g.parse(input);
    assert!(t.is_complete());
    let tree = extract_parse_tree(&t, "Program", 0).unwrap().unwrap();
    let flat = flatten_one_or_more(&tree);
    assert_eq!((flat.start, flat.len), (tree.start, tree.len));
    let nonempty = |v: Vec<(usize, usize)>| v.into_iter().filter(|l| l.1 > 0).collect::<Vec<_>>();
    assert_eq!(nonempty(leaves(&flat)), nonempty(leaves(&tree)));
    let text: String = nonempty(leaves(&flat))
        .iter()
        .map(|&(s, l)| input[s..s + l].to_string())
        .collect();
    assert_eq!(text, input);
    assert!(flat.walk().all(|n| !n.synthetic_repeat));
    let surviving: Vec<_> = flat.walk().map(|n| (n.clause, n.start, n.len)).collect();
    let original: Vec<_> = tree.walk().map(|n| (n.clause, n.start, n.len)).collect();
    assert!(surviving.iter().all(|s| original.contains(s)));
}

#[test]
fn ast_is_ordered_and_sound() {
    let g = compile_str(LABELED).unwrap();
    let input = "1 + 2*(3 + 4) * 5 + 6";
    let chars: Vec<char> = input.chars().collect();
    let t = g.parse(input);
    assert!(t.is_complete());
    let tree = flatten_one_or_more(&extract_parse_tree(&t, "Sum", 0).unwrap().unwrap());
    let ast = to_ast(&tree, &chars).unwrap();
    assert_eq!(ast.label, "S");
    let mut nodes = Vec::new();
    ast_preorder(&ast, &mut nodes);
    assert!(nodes.windows(2).all(|w| w[0].1 <= w[1].1));
    let labeled: Vec<_> = tree
        .walk()
        .filter_map(|n| n.label.clone().map(|l| (l, n.start, n.len)))
        .collect();
    assert_eq!(nodes, labeled);
    let nums: Vec<_> = nodes.iter().filter(|n| n.0 == "num").map(|n| &input[n.1..n.1 + n.2]).collect();
    assert_eq!(nums, ["1", "2", "3", "4", "5", "6"]);
}

#[test]
fn stored_matches_respect_operator_invariants() {
    let g = compile_str(grammars::PRECEDENCE_LEFT_RECURSIVE).unwrap();
    let t = g.parse("-(a+b)*c-d*(e)");
    for clause in g.clauses() {
        for m in t.matches_of(clause.idx) {
            assert!(m.end() <= t.input_len());
            match clause.kind {
                ClauseKind::Seq => {
                    assert_eq!(m.len, m.sub_clause_matches.iter().map(|c| c.len).sum::<usize>());
                    let mut pos = m.start();
                    for c in &m.sub_clause_matches {
                        assert_eq!(c.start(), pos);
                        pos = c.end();
                    }
                }
                ClauseKind::First => assert_eq!(m.len, m.sub_clause_matches[0].len),
                _ => assert_eq!(m.first_matching_sub_clause_idx, 0),
            }
            assert_eq!(t.get(m.key).unwrap(), m);
        }
    }
}

#[test]
fn tree_and_match_views_agree() {
    let g = compile_str(grammars::NESTED_PARENS).unwrap();
    let t = g.parse("a((b)c)");
    let m = t.top_match().unwrap();
    let tree = tree_from_match(&g, &m, None);
    assert_eq!(tree.walk().count(), count(&m));
    fn count(m: &pika::Match) -> usize {
        1 + m.sub_clause_matches.iter().map(|c| count(c)).sum::<usize>()
    }
}

fn covered_by_brute_force(t: &MemoTable<'_>, g: &Grammar, rules: &[&str]) -> Vec<bool> {
    let mut covered = vec![false; t.input_len()];
    for r in rules {
        let c = g.rule_clause(r).unwrap();
        for pos in 0..t.input_len() {
            if let Some(m) = t.get(MemoKey::new(c, pos)) {
                for x in &mut covered[m.start()..m.end()] {
                    *x = true;
                }
            }
        }
    }
    covered
}

proptest! {
    #[test]
    fn error_spans_are_the_uncovered_complement(
        input in prop::collection::vec(prop::sample::select(vec!["a", "bc", "=", "1", ";", "(", ")", "+", " "]), 0..30)
    ) {
        let input: String = input.concat();
        let g = compile_str(ASSIGN).unwrap();
        let t = g.parse(&input);
        let rules = ["Program", "Assign"];
        let spans = find_error_spans(&t, &rules).unwrap();
        let covered = covered_by_brute_force(&t, &g, &rules);
        let mut from_spans = vec![true; input.len()];
        let mut last_end = 0;
        for s in &spans {
            prop_assert!(s.start < s.end && s.end <= input.len());
            prop_assert!(s.start >= last_end);
            prop_assert!(s.start == 0 || covered[s.start - 1]);
            prop_assert!(s.end == input.len() || covered[s.end]);
            last_end = s.end;
            for x in &mut from_spans[s.start..s.end] {
                *x = false;
            }
        }
        prop_assert_eq!(from_spans, covered);
    }

    #[test]
    fn right_context_is_already_parsed(
        valid1 in "([a-z]{1,3}=[0-9]{1,2};){0,3}",
        junk in "[=+();0-9 ]{1,6}[+(=]",
        valid2 in "([a-z]{1,3}=([0-9]|[a-z]+)(\\+[a-z]){0,2};){1,3}",
    ) {
        let g = compile_str(ASSIGN).unwrap();
        let alone = g.parse(&valid2);
        prop_assume!(alone.is_complete());
        let input = format!("{valid1}{junk}{valid2}");
        let t = g.parse(&input);
        let start = valid1.len() + junk.len();
        let m = next_match_after(&t, "Program", start).unwrap().unwrap();
        prop_assert_eq!((m.start(), m.end()), (start, input.len()));
        let cell = t.rule_match("Program", start).unwrap();
        prop_assert_eq!(cell.len, valid2.len());
    }
}
