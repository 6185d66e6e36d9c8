//! Tree and error-report serialization.

use std::fmt::Write as _;

use pika::{AstNode, ParseTreeNode};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Sexpr,
}

/// Either view of a parse result, ready for serialization.
pub enum TreeView<'a> {
    Parse(&'a ParseTreeNode),
    Ast(&'a AstNode),
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub rule: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub recovery: Option<RecoveryReport>,
}

pub fn parse_node_json(node: &ParseTreeNode) -> Value {
    json!({
        "name": node.name,
        "label": node.label,
        "start": node.start,
        "len": node.len,
        "children": node.children.iter().map(parse_node_json).collect::<Vec<_>>(),
    })
}

pub fn ast_node_json(node: &AstNode) -> Value {
    json!({
        "name": node.label,
        "label": node.label,
        "start": node.start,
        "len": node.len,
        "text": node.text,
        "children": node.children.iter().map(ast_node_json).collect::<Vec<_>>(),
    })
}

fn atom(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_[]+".contains(c)) {
        s.to_string()
    } else {
        serde_json::to_string(s).expect("strings serialize")
    }
}

fn parse_node_sexpr(node: &ParseTreeNode, out: &mut String) {
    out.push('(');
    if let Some(l) = &node.label {
        out.push_str(&atom(l));
        out.push(':');
    }
    out.push_str(&atom(&node.name));
    write!(out, " {} {}", node.start, node.len).unwrap();
    for c in &node.children {
        out.push(' ');
        parse_node_sexpr(c, out);
    }
    out.push(')');
}

fn ast_node_sexpr(node: &AstNode, out: &mut String) {
    out.push('(');
    out.push_str(&atom(&node.label));
    write!(out, " {} {}", node.start, node.len).unwrap();
    if node.children.is_empty() {
        out.push(' ');
        out.push_str(&serde_json::to_string(&node.text).unwrap());
    }
    for c in &node.children {
        out.push(' ');
        ast_node_sexpr(c, out);
    }
    out.push(')');
}

pub fn tree_sexpr(view: &TreeView<'_>) -> String {
    let mut out = String::new();
    match view {
        TreeView::Parse(n) => parse_node_sexpr(n, &mut out),
        TreeView::Ast(n) => ast_node_sexpr(n, &mut out),
    }
    out
}

pub fn tree_json(view: &TreeView<'_>) -> Value {
    match view {
        TreeView::Parse(n) => parse_node_json(n),
        TreeView::Ast(n) => ast_node_json(n),
    }
}

/// Full `parse` command output.
pub fn render(format: Format, complete: bool, tree: Option<TreeView<'_>>, errors: &[ErrorReport]) -> String {
    match format {
        Format::Json => {
            let v = json!({
                "complete": complete,
                "tree": tree.as_ref().map(tree_json),
                "errors": errors,
            });
            let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Sexpr => {
            let mut s = match &tree {
                Some(t) => tree_sexpr(t),
                None => "()".to_string(),
            };
            s.push('\n');
            for e in errors {
                write!(s, "(error {} {} {}", e.start, e.end, serde_json::to_string(&e.text).unwrap()).unwrap();
                if let Some(r) = &e.recovery {
                    write!(s, " (recovery {} {} {})", atom(&r.rule), r.start, r.len).unwrap();
                }
                s.push_str(")\n");
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pika::{compile_str, extract_parse_tree};

    #[test]
    fn sexpr_of_small_tree() {
        let g = compile_str("S <- x:'a' 'b';").unwrap();
        let t = g.parse("ab");
        let tree = extract_parse_tree(&t, "S", 0).unwrap().unwrap();
        assert_eq!(
            tree_sexpr(&TreeView::Parse(&tree)),
            r#"(S 0 2 (x:"'a'" 0 1) ("'b'" 1 1))"#
        );
    }

    #[test]
    fn json_fields() {
        let g = compile_str("S <- 'a';").unwrap();
        let t = g.parse("a");
        let tree = extract_parse_tree(&t, "S", 0).unwrap().unwrap();
        let v = parse_node_json(&tree);
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["children", "label", "len", "name", "start"]);
    }
}
