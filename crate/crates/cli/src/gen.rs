//! Seeded generators: arithmetic expressions for benchmarks and small random
//! grammars for differential testing.

use pika::{CharSet, Expr, Rule};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_COUNT: usize = 200;
pub const DEFAULT_MAX_DEPTH: usize = 18;

/// Deterministic generator of arithmetic expressions accepted by the
/// primitive precedence grammar: every run of binary operators at one
/// precedence level has length one, so deeper structure is always
/// parenthesized.
pub struct ExprGen {
    rng: ChaCha8Rng,
    max_depth: usize,
}

impl ExprGen {
    pub fn new(seed: u64, max_depth: usize) -> Self {
        ExprGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_depth: max_depth.max(1),
        }
    }

    /// Approximate length targets are drawn log-uniformly so that a corpus
    /// covers several orders of magnitude of input length.
    pub fn next_expr(&mut self) -> String {
        let hi = (5.0 * 2f64.powi(self.max_depth as i32 - 4)).max(1.0);
        let lo = hi.min(5.0);
        let target = if hi > lo {
            (self.rng.gen_range(lo.ln()..=hi.ln())).exp().round() as usize
        } else {
            lo as usize
        };
        let mut out = String::with_capacity(target + 8);
        self.sum(target, 1, &mut out);
        out
    }

    pub fn generate(&mut self, count: usize) -> Vec<String> {
        (0..count).map(|_| self.next_expr()).collect()
    }

    // E0: E1 (('+' / '-') E1)?
    fn sum(&mut self, budget: usize, depth: usize, out: &mut String) {
        if budget >= 7 && self.rng.gen_bool(0.8) {
            let (l, r) = self.split(budget - 1);
            self.product(l, depth, out);
            out.push(*['+', '-'].choose(&mut self.rng).unwrap());
            self.product(r, depth, out);
        } else {
            self.product(budget, depth, out);
        }
    }

    // E1: E2 (('*' / '/') E2)?
    fn product(&mut self, budget: usize, depth: usize, out: &mut String) {
        if budget >= 7 && self.rng.gen_bool(0.7) {
            let (l, r) = self.split(budget - 1);
            self.unary(l, depth, out);
            out.push(*['*', '/'].choose(&mut self.rng).unwrap());
            self.unary(r, depth, out);
        } else {
            self.unary(budget, depth, out);
        }
    }

    // E2: '-' E3 / E3
    fn unary(&mut self, budget: usize, depth: usize, out: &mut String) {
        if budget >= 2 && self.rng.gen_bool(0.2) {
            out.push('-');
            self.primary(budget - 1, depth, out);
        } else {
            self.primary(budget, depth, out);
        }
    }

    // E3: number / identifier / '(' E0 ')'
    fn primary(&mut self, budget: usize, depth: usize, out: &mut String) {
        if budget >= 5 && depth < self.max_depth {
            out.push('(');
            self.sum(budget - 2, depth + 1, out);
            out.push(')');
        } else if self.rng.gen_bool(0.5) {
            let n = self.rng.gen_range(1..=budget.clamp(1, 3));
            for _ in 0..n {
                out.push(self.rng.gen_range('0'..='9'));
            }
        } else {
            let n = self.rng.gen_range(1..=budget.clamp(1, 3));
            for _ in 0..n {
                out.push(self.rng.gen_range('a'..='z'));
            }
        }
    }

    fn split(&mut self, budget: usize) -> (usize, usize) {
        let left = ((budget as f64) * self.rng.gen_range(0.3..0.7)).round() as usize;
        let left = left.clamp(1, budget - 1);
        (left, budget - left)
    }
}

/// `count` expressions from a fresh generator.
pub fn expressions(count: usize, max_depth: usize, seed: u64) -> Vec<String> {
    ExprGen::new(seed, max_depth).generate(count)
}

/// Random grammars without left recursion, using every surface operator.
/// Rule `i` may refer to later rules anywhere but to itself or earlier
/// rules only after a terminal that consumes input, so no rule can reach
/// itself without advancing.
pub struct GrammarGen {
    rng: ChaCha8Rng,
    pub alphabet: Vec<char>,
    pub max_rules: usize,
    pub max_depth: usize,
}

impl GrammarGen {
    pub fn new(seed: u64) -> Self {
        GrammarGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            alphabet: vec!['a', 'b', 'c'],
            max_rules: 4,
            max_depth: 3,
        }
    }

    pub fn rules(&mut self) -> Vec<Rule> {
        let n = self.rng.gen_range(1..=self.max_rules);
        (0..n)
            .map(|i| {
                let depth = self.max_depth;
                Rule::new(format!("R{i}"), self.expr(i, n, depth))
            })
            .collect()
    }

    pub fn input(&mut self, max_len: usize) -> String {
        let len = self.rng.gen_range(0..=max_len);
        (0..len).map(|_| *self.alphabet.choose(&mut self.rng).unwrap()).collect()
    }

    fn terminal(&mut self) -> Expr {
        let c = *self.alphabet.choose(&mut self.rng).unwrap();
        let d = *self.alphabet.choose(&mut self.rng).unwrap();
        match self.rng.gen_range(0..4) {
            0 | 1 => Expr::Char(c),
            2 => Expr::Str(format!("{c}{d}")),
            _ => {
                let (lo, hi) = if c <= d { (c, d) } else { (d, c) };
                Expr::CharSet(CharSet::new(vec![(lo, hi)], self.rng.gen_bool(0.3)))
            }
        }
    }

    fn leaf(&mut self, i: usize, n: usize) -> Expr {
        match self.rng.gen_range(0..5) {
            0 if i + 1 < n => Expr::rule(&format!("R{}", self.rng.gen_range(i + 1..n))),
            1 => {
                let t = self.terminal();
                Expr::seq([t, Expr::rule(&format!("R{}", self.rng.gen_range(0..n)))])
            }
            _ => self.terminal(),
        }
    }

    fn expr(&mut self, i: usize, n: usize, depth: usize) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.leaf(i, n);
        }
        let sub = |g: &mut Self| g.expr(i, n, depth - 1);
        match self.rng.gen_range(0..9) {
            0 | 1 => {
                let k = self.rng.gen_range(2..=3);
                let mut items: Vec<Expr> = (0..k).map(|_| sub(self)).collect();
                if self.rng.gen_bool(0.1) {
                    items.push(Expr::Nothing);
                }
                Expr::Seq(items)
            }
            2 | 3 => {
                let k = self.rng.gen_range(2..=3);
                Expr::First((0..k).map(|_| sub(self)).collect())
            }
            4 => Expr::one_or_more(sub(self)),
            5 => Expr::zero_or_more(sub(self)),
            6 => Expr::optional(sub(self)),
            7 => Expr::followed_by(sub(self)),
            _ => Expr::not_followed_by(sub(self)),
        }
    }
}
