//! Reference grammars used by tests, benchmarks and the CLI.

/// Precedence climbing with one operator per level and no recursion within
/// a level: runs of equal precedence such as `1+2+3` do not parse.
pub const PRECEDENCE_PRIMITIVE: &str = "\
E4 <- '(' E0 ')';
E3 <- ([0-9]+ / [a-z]+) / E4;
E2 <- ('-' E3) / E3;
E1 <- (E2 ('*' / '/') E2) / E2;
E0 <- (E1 ('+' / '-') E1) / E1;
";

/// Left-recursive precedence climbing: left-associative binary operators,
/// nested unary minus and parentheses.
pub const PRECEDENCE_LEFT_RECURSIVE: &str = "\
E4 <- '(' E0 ')';
E3 <- ([0-9]+ / [a-z]+) / E4;
E2 <- ('-' (E2 / E3)) / E3;
E1 <- (E1 ('*' / '/') E2) / E2;
E0 <- (E0 ('+' / '-') E1) / E1;
";

/// [`PRECEDENCE_LEFT_RECURSIVE`] in precedence shorthand.
pub const PRECEDENCE_SHORTHAND: &str = "\
E[4] <- '(' E ')';
E[3] <- [0-9]+ / [a-z]+;
E[2] <- '-' E;
E[1,L] <- E ('*' / '/') E;
E[0,L] <- E ('+' / '-') E;
";

/// Letters and balanced parentheses.
pub const NESTED_PARENS: &str = "\
P <- V+;
V <- [a-z] / '(' P ')';
";
