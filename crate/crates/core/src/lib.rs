//! Pika parsing: PEG packrat parsing run backwards, as bottom-up,
//! right-to-left dynamic programming over a memo table.
//!
//! Left-recursive grammars need no rewriting, and after a syntax error the
//! remainder of the input is already parsed, which makes recovery a lookup.
//!
//! ```
//! let g = pika::compile_str("E <- E '+' N / N; N <- [0-9]+;").unwrap();
//! let table = g.parse("1+2+3");
//! assert!(table.is_complete());
//! ```

pub mod engine;
pub mod grammar;
pub mod grammars;
pub mod meta;
pub mod oracle;
pub mod recovery;
pub mod tree;

pub use engine::{parse, Match, MemoKey, MemoTable, ParseStats};
pub use grammar::{
    Associativity, CharSet, Clause, ClauseId, ClauseKind, Expr, Grammar, GrammarError, GrammarOptions, Rule,
};
pub use meta::{compile, compile_str, CompileError, GrammarSource, SyntaxDiagnostic};
pub use oracle::{packrat_parse, OracleError, OracleResult, Packrat};
pub use recovery::{find_error_spans, next_match_after, ErrorSpan, RecoveryError};
pub use tree::{extract_parse_tree, flatten_one_or_more, to_ast, AstNode, ParseTreeNode, TreeError};
