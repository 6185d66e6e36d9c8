//! Timing harness and log-log regression.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use pika::{Grammar, Packrat};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Pika,
    Packrat,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Pika => "pika",
            Engine::Packrat => "packrat",
        })
    }
}

impl FromStr for Engine {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pika" => Ok(Engine::Pika),
            "packrat" => Ok(Engine::Packrat),
            other => bail!("unknown engine `{other}` (expected pika or packrat)"),
        }
    }
}

/// One row of benchmark output.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub engine: Engine,
    pub input_id: String,
    pub input_length: usize,
    pub parse_nanos: u64,
    pub memo_entries: usize,
    #[serde(skip)]
    pub top_len: Option<usize>,
}

/// Least-squares fit of `ln y = m ln x + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
}

/// `None` when fewer than two distinct lengths are available.
pub fn fit_log_log(points: &[(f64, f64)]) -> Option<RegressionFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let m = sxy / sxx;
    let c = my - m * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some(RegressionFit {
        exponent: m,
        coefficient: c.exp(),
        r_squared,
    })
}

impl fmt::Display for RegressionFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "y = {:.3e} x^{:.3} (R^2 = {:.3})",
            self.coefficient, self.exponent, self.r_squared
        )
    }
}

/// Repeat until at least `min_reps` runs and `min_total` elapsed time, and
/// keep the fastest run.
fn min_time<T>(min_reps: usize, min_total: Duration, mut run: impl FnMut() -> T) -> (Duration, T) {
    let started = Instant::now();
    let mut best = Duration::MAX;
    let mut reps = 0;
    loop {
        let t = Instant::now();
        let out = run();
        best = best.min(t.elapsed());
        reps += 1;
        if reps >= min_reps && started.elapsed() >= min_total {
            return (best, out);
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Timing {
    pub min_reps: usize,
    pub min_total: Duration,
}

impl Default for Timing {
    fn default() -> Self {
        Timing {
            min_reps: 3,
            min_total: Duration::from_millis(5),
        }
    }
}

/// Time one parse. Grammar preprocessing is not included.
pub fn measure(grammar: &Grammar, engine: Engine, id: &str, input: &str, timing: Timing) -> Result<BenchRecord> {
    let input_length = input.chars().count();
    let (elapsed, (memo_entries, top_len)) = match engine {
        Engine::Pika => min_time(timing.min_reps, timing.min_total, || {
            let t = grammar.parse(input);
            (t.len(), t.top_match().map(|m| m.len))
        }),
        Engine::Packrat => {
            Packrat::new(grammar, input)?;
            min_time(timing.min_reps, timing.min_total, || {
                let p = Packrat::new(grammar, input).expect("checked above");
                let top = p.rule_match(grammar.start_rule(), 0).expect("start rule exists");
                (p.memo_len(), top.map(|m| m.len))
            })
        }
    };
    Ok(BenchRecord {
        engine,
        input_id: id.to_string(),
        input_length,
        parse_nanos: (elapsed.as_nanos() as u64).max(1),
        memo_entries,
        top_len,
    })
}

/// Run every input through every engine, optionally across `jobs` threads
/// (never within a parse). Records come back in input order, engines
/// interleaved per input.
pub fn run(
    grammar: &Grammar,
    engines: &[Engine],
    inputs: &[(String, String)],
    jobs: usize,
    timing: Timing,
) -> Result<Vec<BenchRecord>> {
    if inputs.is_empty() {
        bail!("benchmark corpus is empty");
    }
    let jobs = jobs.clamp(1, inputs.len());
    let chunk = inputs.len().div_ceil(jobs);
    let results: Vec<Result<Vec<BenchRecord>>> = std::thread::scope(|s| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let mut out = Vec::new();
                    for (id, text) in part {
                        for &e in engines {
                            out.push(measure(grammar, e, id, text, timing)?);
                        }
                    }
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("benchmark thread panicked")).collect()
    });
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    if engines.len() > 1 {
        for (id, _) in inputs {
            let lens: Vec<_> = records.iter().filter(|r| &r.input_id == id).map(|r| r.top_len).collect();
            if lens.windows(2).any(|w| w[0] != w[1]) {
                bail!("engines disagree on input `{id}`: {lens:?}");
            }
        }
    }
    Ok(records)
}

pub fn fit_records(records: &[BenchRecord], engine: Engine) -> Option<RegressionFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.engine == engine)
        .map(|r| (r.input_length as f64, r.parse_nanos as f64))
        .collect();
    fit_log_log(&pts)
}

pub fn write_csv<W: std::io::Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
