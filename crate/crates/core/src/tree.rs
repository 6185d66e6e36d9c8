//! Parse-tree read-out, `OneOrMore` flattening and AST elision.

use thiserror::Error;

use crate::engine::{Match, MemoKey, MemoTable};
use crate::grammar::{ClauseId, ClauseKind, Grammar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseTreeNode {
    /// Rule name, or the clause in grammar notation for anonymous clauses.
    pub name: String,
    pub label: Option<String>,
    pub clause: ClauseId,
    pub start: usize,
    pub len: usize,
    pub children: Vec<ParseTreeNode>,
    /// Unflattened right-recursive repetition node.
    pub synthetic_repeat: bool,
}

impl ParseTreeNode {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn text(&self, input: &[char]) -> String {
        input[self.start..self.end()].iter().collect()
    }

    /// Depth-first preorder traversal.
    pub fn walk(&self) -> impl Iterator<Item = &ParseTreeNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AstNode {
    pub label: String,
    pub start: usize,
    pub len: usize,
    pub text: String,
    pub children: Vec<AstNode>,
    /// Unlabeled root holding several labeled top-level nodes.
    pub synthetic: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

/// Materialize the tree under `m`; `label` is the AST label of the edge
/// that reached it.
pub fn tree_from_match(grammar: &Grammar, m: &Match, label: Option<String>) -> ParseTreeNode {
    let clause = grammar.clause(m.key.clause);
    let edge_label = |i: usize| clause.sub_clauses.get(i).and_then(|s| s.label.clone());
    let children = match clause.kind {
        ClauseKind::First => m
            .sub_clause_matches
            .iter()
            .map(|c| tree_from_match(grammar, c, edge_label(m.first_matching_sub_clause_idx)))
            .collect(),
        ClauseKind::OneOrMore => m
            .sub_clause_matches
            .iter()
            .map(|c| tree_from_match(grammar, c, edge_label(0)))
            .collect(),
        _ => m
            .sub_clause_matches
            .iter()
            .enumerate()
            .map(|(i, c)| tree_from_match(grammar, c, edge_label(i)))
            .collect(),
    };
    ParseTreeNode {
        name: grammar.clause_name(m.key.clause),
        label,
        clause: m.key.clause,
        start: m.key.start_pos,
        len: m.len,
        children,
        synthetic_repeat: clause.synthetic_repeat,
    }
}

/// Parse tree of the best match of `rule` at `start_pos`, if any.
pub fn extract_parse_tree(
    table: &MemoTable<'_>,
    rule: &str,
    start_pos: usize,
) -> Result<Option<ParseTreeNode>, TreeError> {
    let grammar = table.grammar();
    let info = grammar
        .rule(rule)
        .ok_or_else(|| TreeError::UnknownRule(rule.to_string()))?;
    Ok(table
        .look_up_best_match(MemoKey::new(info.clause, start_pos))
        .map(|m| tree_from_match(grammar, &m, info.ast_label.clone())))
}

/// Collapse each right-recursive repetition chain `Y (Y (Y ...)?)?` into a
/// single node whose children are the `Y` nodes in order.
pub fn flatten_one_or_more(node: &ParseTreeNode) -> ParseTreeNode {
    if !node.synthetic_repeat {
        return ParseTreeNode {
            children: node.children.iter().map(flatten_one_or_more).collect(),
            ..shallow(node)
        };
    }
    let mut items = Vec::new();
    let mut cur = node;
    loop {
        items.push(flatten_one_or_more(&cur.children[0]));
        match cur.children.get(1).and_then(|tail| tail.children.first()) {
            Some(next) if next.synthetic_repeat && next.clause == node.clause => cur = next,
            _ => break,
        }
    }
    ParseTreeNode {
        children: items,
        synthetic_repeat: false,
        ..shallow(node)
    }
}

fn shallow(node: &ParseTreeNode) -> ParseTreeNode {
    ParseTreeNode {
        name: node.name.clone(),
        label: node.label.clone(),
        clause: node.clause,
        start: node.start,
        len: node.len,
        children: Vec::new(),
        synthetic_repeat: node.synthetic_repeat,
    }
}

/// Drop every unlabeled node, splicing its labeled descendants into the
/// nearest labeled ancestor.
pub fn to_ast(node: &ParseTreeNode, input: &[char]) -> Option<AstNode> {
    let mut top = collect_labeled(node, input);
    match top.len() {
        0 => None,
        1 => top.pop(),
        _ => Some(AstNode {
            label: String::new(),
            start: node.start,
            len: node.len,
            text: node.text(input),
            children: top,
            synthetic: true,
        }),
    }
}

fn collect_labeled(node: &ParseTreeNode, input: &[char]) -> Vec<AstNode> {
    let children: Vec<AstNode> = node
        .children
        .iter()
        .flat_map(|c| collect_labeled(c, input))
        .collect();
    match &node.label {
        Some(label) => vec![AstNode {
            label: label.clone(),
            start: node.start,
            len: node.len,
            text: node.text(input),
            children,
            synthetic: false,
        }],
        None => children,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta::compile_str;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn hello_chain_flattens() {
        let g = compile_str("W <- [a-z]+;").unwrap();
        let t = g.parse("hello");
        let tree = extract_parse_tree(&t, "W", 0).unwrap().unwrap();
        assert_eq!(tree.len, 5);
        // nested: h, [e, [l, [l, [o]]]]
        let mut depth = 0;
        let mut cur = &tree;
        while cur.synthetic_repeat {
            depth += 1;
            match cur.children[1].children.first() {
                Some(n) if n.synthetic_repeat => cur = n,
                _ => break,
            }
        }
        assert_eq!(depth, 5);
        let flat = flatten_one_or_more(&tree);
        assert_eq!(flat.name, "W");
        let starts: Vec<_> = flat.children.iter().map(|c| (c.start, c.len)).collect();
        assert_eq!(starts, vec![(0, 1), (1, 1), (2, 1), (3, 1), (4, 1)]);
    }

    #[test]
    fn chain_of_length_one() {
        let g = compile_str("W <- [a-z]+;").unwrap();
        let t = g.parse("x");
        let flat = flatten_one_or_more(&extract_parse_tree(&t, "W", 0).unwrap().unwrap());
        assert_eq!(flat.children.len(), 1);
    }

    #[test]
    fn flatten_is_identity_without_repetition() {
        let g = compile_str("S <- 'a' ('b' / 'c');").unwrap();
        let t = g.parse("ac");
        let tree = extract_parse_tree(&t, "S", 0).unwrap().unwrap();
        assert_eq!(flatten_one_or_more(&tree), tree);
    }

    #[test]
    fn unmatched_rule_is_absent_and_unknown_rule_errors() {
        let g = compile_str("S <- 'a';").unwrap();
        let t = g.parse("b");
        assert_eq!(extract_parse_tree(&t, "S", 0).unwrap(), None);
        assert_eq!(
            extract_parse_tree(&t, "Q", 0),
            Err(TreeError::UnknownRule("Q".into()))
        );
    }

    #[test]
    fn nullable_rule_at_end_of_input() {
        let g = compile_str("S <- 'a' T; T <- 'b'?;").unwrap();
        let t = g.parse("a");
        let node = extract_parse_tree(&t, "T", 1).unwrap().unwrap();
        assert_eq!((node.start, node.len), (1, 0));
    }

    #[test]
    fn whitespace_is_elided_from_ast() {
        let g = compile_str(
            "Sum <- S:(left:Term WS '+' WS right:Term); Term <- [a-z]+; WS <- [ ]*;",
        )
        .unwrap();
        let input = "a +  b";
        let t = g.parse(input);
        let tree = flatten_one_or_more(&extract_parse_tree(&t, "Sum", 0).unwrap().unwrap());
        let ast = to_ast(&tree, &chars(input)).unwrap();
        assert_eq!(ast.label, "S");
        let kids: Vec<_> = ast.children.iter().map(|c| (c.label.as_str(), c.text.as_str())).collect();
        assert_eq!(kids, vec![("left", "a"), ("right", "b")]);
        assert!(ast.children.iter().all(|c| c.children.is_empty()));
    }

    #[test]
    fn fully_unlabeled_tree_has_no_ast() {
        let g = compile_str("S <- 'a' 'b';").unwrap();
        let t = g.parse("ab");
        let tree = extract_parse_tree(&t, "S", 0).unwrap().unwrap();
        assert_eq!(to_ast(&tree, &chars("ab")), None);
    }

    #[test]
    fn unlabeled_root_with_two_labels_gets_synthetic_root() {
        let g = compile_str("Sum <- left:Term '+' right:Term; Term <- [a-z];").unwrap();
        let t = g.parse("a+b");
        let tree = extract_parse_tree(&t, "Sum", 0).unwrap().unwrap();
        let ast = to_ast(&tree, &chars("a+b")).unwrap();
        assert!(ast.synthetic);
        let kids: Vec<_> = ast
            .children
            .iter()
            .map(|c| (c.label.as_str(), c.start, c.len, c.text.as_str()))
            .collect();
        assert_eq!(kids, vec![("left", 0, 1, "a"), ("right", 2, 1, "b")]);
    }
}
