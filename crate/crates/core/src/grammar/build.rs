use std::collections::{HashMap, HashSet};

use super::expr::{desugar, rewrite_one_or_more, Expr};
use super::toposort;
use super::{
    Clause, ClauseId, ClauseKind, Grammar, GrammarError, GrammarOptions, Rule, RuleInfo, SubClause,
};
use crate::meta::rewrite_precedence_hierarchy;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum NodeKind {
    Core(ClauseKind),
    Ref(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    kind: NodeKind,
    subs: Vec<(usize, Option<String>)>,
}

/// Hash-consing arena for clause trees whose rule references are still
/// symbolic.
#[derive(Default)]
struct Interner {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
}

impl Interner {
    fn add(&mut self, node: Node) -> usize {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    fn intern(&mut self, expr: &Expr) -> Result<usize, GrammarError> {
        let (kind, subs) = match expr {
            Expr::Seq(items) | Expr::First(items) if items.is_empty() => {
                (ClauseKind::Nothing, vec![])
            }
            Expr::Seq(items) | Expr::First(items) if items.len() == 1 => {
                return self.intern(&items[0]);
            }
            Expr::Seq(items) => (ClauseKind::Seq, self.edges(items)?),
            Expr::First(items) => (ClauseKind::First, self.edges(items)?),
            Expr::OneOrMore(e) => (ClauseKind::OneOrMore, vec![self.edge(e)?]),
            Expr::NotFollowedBy(e) => (ClauseKind::NotFollowedBy, vec![self.edge(e)?]),
            Expr::Optional(_) | Expr::ZeroOrMore(_) | Expr::FollowedBy(_) => {
                return self.intern(&desugar(expr));
            }
            Expr::Labeled(_, e) => return self.intern(e),
            Expr::Char(c) => (ClauseKind::Char(*c), vec![]),
            Expr::CharSet(set) => (ClauseKind::CharSet(set.clone()), vec![]),
            Expr::Str(s) => match s.chars().count() {
                0 => return Err(GrammarError::EmptyLiteral),
                1 => (ClauseKind::Char(s.chars().next().unwrap()), vec![]),
                _ => (ClauseKind::Str(s.chars().collect()), vec![]),
            },
            Expr::Nothing => (ClauseKind::Nothing, vec![]),
            Expr::RuleRef(name) => {
                return Ok(self.add(Node {
                    kind: NodeKind::Ref(name.clone()),
                    subs: vec![],
                }))
            }
        };
        Ok(self.add(Node {
            kind: NodeKind::Core(kind),
            subs,
        }))
    }

    fn edge(&mut self, expr: &Expr) -> Result<(usize, Option<String>), GrammarError> {
        match expr {
            Expr::Labeled(label, inner) => Ok((self.intern(inner)?, Some(label.clone()))),
            _ => Ok((self.intern(expr)?, None)),
        }
    }

    fn edges(&mut self, items: &[Expr]) -> Result<Vec<(usize, Option<String>)>, GrammarError> {
        items.iter().map(|e| self.edge(e)).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
}

fn collect_refs<'a>(expr: &'a Expr, out: &mut Vec<&'a str>) {
    match expr {
        Expr::RuleRef(name) => out.push(name),
        Expr::Seq(items) | Expr::First(items) => items.iter().for_each(|e| collect_refs(e, out)),
        Expr::OneOrMore(e)
        | Expr::ZeroOrMore(e)
        | Expr::Optional(e)
        | Expr::FollowedBy(e)
        | Expr::NotFollowedBy(e)
        | Expr::Labeled(_, e) => collect_refs(e, out),
        _ => {}
    }
}

pub(super) fn build(rules: Vec<Rule>, options: GrammarOptions) -> Result<Grammar, GrammarError> {
    if rules.is_empty() {
        return Err(GrammarError::NoRules);
    }
    let expanded = rewrite_precedence_hierarchy(rules)?;
    let mut names = HashSet::new();
    for rule in &expanded.rules {
        if !names.insert(rule.name.as_str()) {
            return Err(GrammarError::DuplicateRule(rule.name.clone()));
        }
    }
    for rule in &expanded.rules {
        let mut refs = Vec::new();
        collect_refs(&rule.expr, &mut refs);
        if let Some(missing) = refs.into_iter().find(|r| !names.contains(r)) {
            return Err(GrammarError::UnknownRule {
                name: missing.to_string(),
                referenced_from: rule.name.clone(),
            });
        }
    }

    // Desugar, then hoist a whole-body label onto the rule.
    let mut user_rules = Vec::with_capacity(expanded.rules.len());
    for mut rule in expanded.rules {
        rule.expr = desugar(&rule.expr);
        if let Expr::Labeled(label, inner) = &rule.expr {
            if rule.ast_label.is_none() {
                rule.ast_label = Some(label.clone());
            }
            rule.expr = (**inner).clone();
        }
        user_rules.push(rule);
    }

    let mut all_rules = Vec::new();
    if options.rewrite_one_or_more {
        let mut synthetic = Vec::new();
        let mut seen = HashSet::new();
        for rule in &user_rules {
            let mut out = rewrite_one_or_more(rule).into_iter();
            all_rules.push(out.next().expect("rewritten rule"));
            for helper in out {
                if seen.insert(helper.name.clone()) {
                    synthetic.push(helper);
                }
            }
        }
        all_rules.extend(synthetic);
    } else {
        all_rules = user_rules;
    }

    // Intern with symbolic references.
    let mut interner = Interner::default();
    let mut rule_nodes = Vec::with_capacity(all_rules.len());
    for rule in &all_rules {
        rule_nodes.push(interner.intern(&rule.expr)?);
    }
    let rule_top: HashMap<&str, usize> = all_rules
        .iter()
        .zip(&rule_nodes)
        .map(|(r, &n)| (r.name.as_str(), n))
        .collect();

    // Resolve reference nodes to the node they ultimately stand for.
    let node_count = interner.nodes.len();
    let mut resolved = vec![0; node_count];
    for (i, slot) in resolved.iter_mut().enumerate() {
        let mut cur = i;
        let mut steps = 0;
        while let NodeKind::Ref(name) = &interner.nodes[cur].kind {
            steps += 1;
            if steps > node_count {
                return Err(GrammarError::CyclicAlias(name.clone()));
            }
            cur = rule_top[name.as_str()];
        }
        *slot = cur;
    }

    // Merge clauses that became structurally identical once references were
    // replaced, until a fixed point.
    let mut uf = UnionFind((0..node_count).collect());
    loop {
        let mut merged = false;
        let mut seen: HashMap<(ClauseKind, Vec<(usize, Option<String>)>), usize> = HashMap::new();
        for i in 0..node_count {
            let NodeKind::Core(kind) = &interner.nodes[i].kind else {
                continue;
            };
            if uf.find(i) != i {
                continue;
            }
            let subs: Vec<_> = interner.nodes[i]
                .subs
                .iter()
                .map(|(s, l)| (uf.find(resolved[*s]), l.clone()))
                .collect();
            match seen.entry((kind.clone(), subs)) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    uf.0[i] = *e.get();
                    merged = true;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(i);
                }
            }
        }
        if !merged {
            break;
        }
    }
    let mut canon = |n: usize| uf.find(resolved[n]);

    // Dense temporary graph over reachable canonical nodes.
    let mut temp_of: HashMap<usize, usize> = HashMap::new();
    let mut kinds: Vec<ClauseKind> = Vec::new();
    let mut subs: Vec<Vec<(usize, Option<String>)>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let rule_temps: Vec<usize> = rule_nodes
        .iter()
        .map(|&n| {
            let c = canon(n);
            let next = temp_of.len();
            let t = *temp_of.entry(c).or_insert_with(|| {
                stack.push(c);
                next
            });
            if t == next {
                kinds.push(ClauseKind::Nothing);
                subs.push(Vec::new());
            }
            t
        })
        .collect();
    while let Some(c) = stack.pop() {
        let t = temp_of[&c];
        let NodeKind::Core(kind) = interner.nodes[c].kind.clone() else {
            unreachable!("canonical node is never a reference");
        };
        let mut edges = Vec::new();
        for (s, label) in interner.nodes[c].subs.clone() {
            let sc = canon(s);
            let next = temp_of.len();
            let st = *temp_of.entry(sc).or_insert(next);
            if st == next {
                kinds.push(ClauseKind::Nothing);
                subs.push(Vec::new());
                stack.push(sc);
            }
            edges.push((st, label));
        }
        kinds[t] = kind;
        subs[t] = edges;
    }
    let n = kinds.len();
    let children: Vec<Vec<usize>> = subs
        .iter()
        .map(|s| s.iter().map(|(c, _)| *c).collect())
        .collect();

    let lowest: Vec<usize> = expanded
        .lowest_precedence_rules
        .iter()
        .filter_map(|name| all_rules.iter().position(|r| &r.name == name))
        .map(|i| rule_temps[i])
        .collect();

    let initial = toposort::listing_order(&children, &rule_temps, &lowest);
    if initial.len() != n {
        let visited: HashSet<usize> = initial.iter().copied().collect();
        let missing = rule_temps
            .iter()
            .position(|t| !visited.contains(t))
            .map(|i| all_rules[i].name.clone())
            .unwrap_or_default();
        return Err(GrammarError::UnreachableRule(missing));
    }
    let nullable = compute_can_match_zero_chars(&kinds, &children, &initial);
    let same_pos: Vec<Vec<usize>> = (0..n)
        .map(|t| same_position_children(&kinds[t], &children[t], &nullable))
        .collect();
    let refined = toposort::refine_same_position(&initial, &children, &same_pos);

    let mut final_of = vec![0; n];
    for (i, &t) in refined.order.iter().enumerate() {
        final_of[t] = i;
    }

    let mut clauses: Vec<Clause> = refined
        .order
        .iter()
        .enumerate()
        .map(|(i, &t)| Clause {
            kind: kinds[t].clone(),
            sub_clauses: subs[t]
                .iter()
                .map(|(c, l)| SubClause {
                    clause: ClauseId(final_of[*c]),
                    label: l.clone(),
                })
                .collect(),
            idx: ClauseId(i),
            can_match_zero_chars: nullable[t],
            seed_parent_clauses: Vec::new(),
            rule_names: Vec::new(),
            synthetic_repeat: false,
        })
        .collect();

    compute_seed_parents(&mut clauses);

    let mut rules_out = Vec::with_capacity(all_rules.len());
    for (rule, &t) in all_rules.iter().zip(&rule_temps) {
        let id = ClauseId(final_of[t]);
        if rule.synthetic {
            clauses[id.0].synthetic_repeat = true;
        }
        clauses[id.0].rule_names.push(rule.name.clone());
        rules_out.push(RuleInfo {
            name: rule.name.clone(),
            clause: id,
            precedence: rule.precedence,
            associativity: rule.associativity,
            ast_label: rule.ast_label.clone(),
            synthetic: rule.synthetic,
        });
    }

    let mut grammar = Grammar {
        terminals: clauses
            .iter()
            .filter(|c| c.is_terminal() && c.kind != ClauseKind::Nothing)
            .map(|c| c.idx)
            .collect(),
        nothing: clauses
            .iter()
            .find(|c| c.kind == ClauseKind::Nothing)
            .map(|c| c.idx),
        left_recursion_head: refined.left_recursion_head.map(|t| ClauseId(final_of[t])),
        rule_index: rules_out
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), i))
            .collect(),
        rules: rules_out,
        clauses,
        start_rule: String::new(),
        warnings: Vec::new(),
        options,
    };
    validate(&mut grammar)?;
    grammar.start_rule = default_start_rule(&grammar);
    Ok(grammar)
}

/// Zero-length analysis as a monotone fixed point from all-false, visiting
/// clauses in bottom-up order.
pub(super) fn compute_can_match_zero_chars(
    kinds: &[ClauseKind],
    children: &[Vec<usize>],
    order: &[usize],
) -> Vec<bool> {
    let mut nullable = vec![false; kinds.len()];
    loop {
        let mut changed = false;
        for &c in order {
            let value = match &kinds[c] {
                ClauseKind::Nothing | ClauseKind::NotFollowedBy => true,
                ClauseKind::Char(_) | ClauseKind::CharSet(_) | ClauseKind::Str(_) => false,
                ClauseKind::Seq => children[c].iter().all(|&s| nullable[s]),
                ClauseKind::First => children[c].iter().any(|&s| nullable[s]),
                ClauseKind::OneOrMore => nullable[children[c][0]],
            };
            if value != nullable[c] {
                nullable[c] = value;
                changed = true;
            }
        }
        if !changed {
            return nullable;
        }
    }
}

/// Subclauses that can start matching at the same position as the parent.
pub(super) fn same_position_children(
    kind: &ClauseKind,
    children: &[usize],
    nullable: &[bool],
) -> Vec<usize> {
    match kind {
        ClauseKind::Seq => {
            let mut out = Vec::new();
            for &s in children {
                out.push(s);
                if !nullable[s] {
                    break;
                }
            }
            out
        }
        ClauseKind::First | ClauseKind::OneOrMore | ClauseKind::NotFollowedBy => children.to_vec(),
        _ => Vec::new(),
    }
}

/// A clause's seed parents are the parents that can begin matching at the
/// same position as the clause. `NotFollowedBy` never seeds: it is
/// evaluated on demand.
pub(super) fn compute_seed_parents(clauses: &mut [Clause]) {
    for clause in clauses.iter_mut() {
        clause.seed_parent_clauses.clear();
    }
    for p in 0..clauses.len() {
        let seeders: Vec<ClauseId> = match clauses[p].kind {
            ClauseKind::Seq => {
                let mut out = Vec::new();
                for sub in &clauses[p].sub_clauses {
                    out.push(sub.clause);
                    if !clauses[sub.clause.0].can_match_zero_chars {
                        break;
                    }
                }
                out
            }
            ClauseKind::First | ClauseKind::OneOrMore => clauses[p].sub_clause_ids().collect(),
            _ => Vec::new(),
        };
        let parent = ClauseId(p);
        for s in seeders {
            let list = &mut clauses[s.0].seed_parent_clauses;
            if !list.contains(&parent) {
                list.push(parent);
            }
        }
    }
}

fn validate(grammar: &mut Grammar) -> Result<(), GrammarError> {
    let mut warnings = Vec::new();
    for clause in grammar.clauses() {
        if let Some(first) = clause.sub_clauses.first() {
            if grammar.clause(first.clause).kind == ClauseKind::Nothing {
                return Err(GrammarError::NothingFirst(grammar.display_clause(clause.idx, true)));
            }
        }
        let repeated = match clause.kind {
            ClauseKind::OneOrMore => true,
            ClauseKind::Seq => clause.synthetic_repeat,
            _ => false,
        };
        if repeated && grammar.clause(clause.sub_clauses[0].clause).can_match_zero_chars {
            return Err(GrammarError::NullableRepetition(
                grammar.display_clause(clause.idx, true),
            ));
        }
        if clause.kind == ClauseKind::First {
            let last = clause.sub_clauses.len() - 1;
            if let Some(i) = clause.sub_clauses[..last]
                .iter()
                .position(|s| grammar.clause(s.clause).can_match_zero_chars)
            {
                warnings.push(format!(
                    "alternatives after #{} of `{}` are unreachable: it can match zero characters",
                    i + 1,
                    grammar.display_clause(clause.idx, true)
                ));
            }
        }
    }
    grammar.warnings = warnings;
    Ok(())
}

fn default_start_rule(grammar: &Grammar) -> String {
    let mut referenced = vec![false; grammar.clauses().len()];
    for clause in grammar.clauses() {
        for s in clause.sub_clause_ids() {
            referenced[s.0] = true;
        }
    }
    let user = || grammar.rules().iter().filter(|r| !r.synthetic);
    if let Some(r) = user().find(|r| !referenced[r.clause.0]) {
        return r.name.clone();
    }
    let best = user().map(|r| r.clause).max().expect("at least one user rule");
    user()
        .find(|r| r.clause == best)
        .map(|r| r.name.clone())
        .expect("rule for best clause")
}
