//! Command-line front end: parse files, generate expression corpora and
//! run scaling benchmarks.

pub mod bench;
pub mod gen;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pika::tree::tree_from_match;
use pika::{
    compile, extract_parse_tree, find_error_spans, flatten_one_or_more, grammars, to_ast, Grammar, GrammarOptions,
    GrammarSource, Packrat, ParseTreeNode,
};

use bench::{Engine, Timing};
use output::{ErrorReport, Format, RecoveryReport, TreeView};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SYNTAX: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pika", version, about = "Bottom-up PEG parser with left recursion and error recovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an input file and print its parse tree or AST.
    Parse(ParseArgs),
    /// Generate random arithmetic expressions.
    Gen(GenArgs),
    /// Time parses over a corpus and fit a log-log regression.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GrammarArgs {
    /// Grammar file.
    #[arg(long)]
    pub grammar: Option<PathBuf>,
    /// Match `Y+` iteratively instead of rewriting it to right recursion.
    #[arg(long)]
    pub no_oneormore_rewrite: bool,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[command(flatten)]
    pub grammar: GrammarArgs,
    /// Input file; `-` reads standard input.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub start_rule: Option<String>,
    /// Print the AST (labeled nodes only) instead of the parse tree.
    #[arg(long)]
    pub ast: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Rule whose matches count as well-formed input when locating syntax
    /// errors. Repeatable; defaults to the start rule.
    #[arg(long = "recover-rule")]
    pub recover_rules: Vec<String>,
    #[arg(long, default_value = "pika")]
    pub engine: Engine,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = gen::DEFAULT_COUNT)]
    pub count: usize,
    #[arg(long, default_value_t = gen::DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write one file per expression into this directory instead of
    /// printing one per line.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Grammar file; defaults to the built-in precedence grammar.
    #[command(flatten)]
    pub grammar: GrammarArgs,
    /// Directory of input files; generated when absent.
    pub corpus: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "pika")]
    pub engines: Vec<Engine>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value_t = gen::DEFAULT_COUNT)]
    pub count: usize,
    #[arg(long, default_value_t = gen::DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub start_rule: Option<String>,
}

/// Error that maps to an exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

fn usage(error: anyhow::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error,
    }
}

pub fn load_grammar(args: &GrammarArgs, default: Option<&str>, start_rule: Option<&str>) -> Result<Grammar> {
    let source = match (&args.grammar, default) {
        (Some(path), _) => GrammarSource::new(
            path.display().to_string(),
            fs::read_to_string(path).with_context(|| format!("cannot read grammar {}", path.display()))?,
        ),
        (None, Some(text)) => GrammarSource::new("<built-in>", text),
        (None, None) => bail!("--grammar is required"),
    };
    let options = GrammarOptions {
        rewrite_one_or_more: !args.no_oneormore_rewrite,
    };
    let mut grammar = compile(&source, options)?;
    if let Some(rule) = start_rule {
        grammar.set_start_rule(rule)?;
    }
    Ok(grammar)
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("cannot read input {}", path.display()))
    }
}

/// Result of the `parse` command: exit status and standard output.
pub fn cmd_parse(args: &ParseArgs) -> Result<(i32, String), Failure> {
    let grammar = load_grammar(&args.grammar, None, args.start_rule.as_deref()).map_err(usage)?;
    for w in grammar.warnings() {
        eprintln!("warning: {w}");
    }
    let input = read_input(&args.input).map_err(usage)?;
    let chars: Vec<char> = input.chars().collect();
    let start = grammar.start_rule().to_string();

    let (tree, complete, errors): (Option<ParseTreeNode>, bool, Vec<ErrorReport>) = match args.engine {
        Engine::Pika => {
            let table = grammar.parse(&input);
            let tree = extract_parse_tree(&table, &start, 0).map_err(|e| usage(e.into()))?;
            let complete = table.is_complete();
            let rules: Vec<&str> = if args.recover_rules.is_empty() {
                vec![start.as_str()]
            } else {
                args.recover_rules.iter().map(String::as_str).collect()
            };
            let errors = if complete {
                Vec::new()
            } else {
                find_error_spans(&table, &rules)
                    .map_err(|e| usage(e.into()))?
                    .into_iter()
                    .map(|s| ErrorReport {
                        start: s.start,
                        end: s.end,
                        text: chars[s.start..s.end].iter().collect(),
                        recovery: s.following_match.map(|m| RecoveryReport {
                            rule: grammar.clause_name(m.key.clause),
                            start: m.start(),
                            len: m.len,
                        }),
                    })
                    .collect()
            };
            (tree, complete, errors)
        }
        Engine::Packrat => {
            if !args.recover_rules.is_empty() {
                return Err(usage(anyhow!("--recover-rule requires the pika engine")));
            }
            let p = Packrat::new(&grammar, &input).map_err(|e| usage(e.into()))?;
            let top = p.rule_match(&start, 0).map_err(|e| usage(e.into()))?;
            let label = grammar.rule(&start).and_then(|r| r.ast_label.clone());
            let complete = top.as_ref().map_or(false, |m| m.len == chars.len());
            let errors = if complete {
                Vec::new()
            } else {
                let from = top.as_ref().map_or(0, |m| m.len);
                vec![ErrorReport {
                    start: from,
                    end: chars.len(),
                    text: chars[from..].iter().collect(),
                    recovery: None,
                }]
            };
            (top.map(|m| tree_from_match(&grammar, &m, label)), complete, errors)
        }
    };

    let tree = tree.map(|t| flatten_one_or_more(&t));
    let ast = if args.ast { tree.as_ref().and_then(|t| to_ast(t, &chars)) } else { None };
    let view = match (&tree, &ast, args.ast) {
        (_, Some(a), true) => Some(TreeView::Ast(a)),
        (_, None, true) => None,
        (Some(t), _, false) => Some(TreeView::Parse(t)),
        (None, _, false) => None,
    };
    let text = output::render(args.format, complete, view, &errors);
    Ok((if complete { EXIT_OK } else { EXIT_SYNTAX }, text))
}

pub fn cmd_gen(args: &GenArgs) -> Result<String, Failure> {
    let exprs = gen::expressions(args.count, args.max_depth, args.seed);
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))
                .map_err(usage)?;
            let width = exprs.len().to_string().len();
            for (i, e) in exprs.iter().enumerate() {
                let path = dir.join(format!("expr_{i:0width$}.txt"));
                fs::write(&path, e)
                    .with_context(|| format!("cannot write {}", path.display()))
                    .map_err(usage)?;
            }
            Ok(format!("wrote {} expressions to {}\n", exprs.len(), dir.display()))
        }
        None => Ok(exprs.iter().map(|e| format!("{e}\n")).collect()),
    }
}

fn read_corpus(dir: &Path) -> Result<Vec<(String, String)>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read corpus {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.is_file());
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let id = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            Ok((id, fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?))
        })
        .collect()
}

pub fn cmd_bench(args: &BenchArgs) -> Result<String, Failure> {
    let grammar = load_grammar(
        &args.grammar,
        Some(grammars::PRECEDENCE_PRIMITIVE),
        args.start_rule.as_deref(),
    )
    .map_err(usage)?;
    let inputs = match &args.corpus {
        Some(dir) => read_corpus(dir).map_err(usage)?,
        None => gen::expressions(args.count, args.max_depth, args.seed)
            .into_iter()
            .enumerate()
            .map(|(i, e)| (i.to_string(), e))
            .collect(),
    };
    let mut engines = args.engines.clone();
    engines.dedup();
    let records = bench::run(&grammar, &engines, &inputs, args.jobs, Timing::default()).map_err(usage)?;
    if let Some(path) = &args.csv {
        let file = fs::File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))
            .map_err(usage)?;
        bench::write_csv(&records, file).map_err(usage)?;
    }
    let mut out = String::new();
    for &e in &engines {
        let rows: Vec<_> = records.iter().filter(|r| r.engine == e).collect();
        match bench::fit_records(&records, e) {
            Some(fit) => out.push_str(&format!("{e}: {} inputs, {fit}\n", rows.len())),
            None => out.push_str(&format!(
                "{e}: fit undefined ({} input(s)); parse time {} ns for length {}\n",
                rows.len(),
                rows[0].parse_nanos,
                rows[0].input_length
            )),
        }
    }
    Ok(out)
}

/// Run a parsed command line; returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::Gen(a) => cmd_gen(a).map(|s| (EXIT_OK, s)),
        Command::Bench(a) => cmd_bench(a).map(|s| (EXIT_OK, s)),
    };
    match result {
        Ok((code, text)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return EXIT_USAGE;
            }
            code
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}
