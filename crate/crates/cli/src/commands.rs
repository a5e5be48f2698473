use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use concprob::coupling::script::run_script;
use concprob::lang::{parse as parse_program, parse_val, pretty, Expr, Val, WIDTH};
use concprob::laws::{run_suite, Suite};
use concprob::models::{
    approx_n_extrema, approx_n_prime_extrema, count_true_client, counter_program, id,
    skip_cost_bound, skip_list_client, skip_list_spec, skipcost, two_thread_counter, Counter,
    CounterParams,
};
use concprob::rational::{format_rational, int, Rational};
use concprob::sched::{
    brute_force_extremal, evaluate_policy, extract_policy, extremal_expectation, monte_carlo,
    Direction, Functional, SandwichReport, SchedulerPolicy,
};
use concprob::{Error, Exec};
use serde::Serialize;
use serde_json::json;

use crate::report::{rat_cells, Check, Report, Table};

fn config(msg: impl Into<String>) -> anyhow::Error {
    Error::Config(msg.into()).into()
}

fn read_file(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

// laws

#[derive(Debug, Args)]
pub struct LawsArgs {
    /// monad, ordering, peq, psub, extrema or all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn laws(a: &LawsArgs, exec: Exec) -> Result<Report> {
    let suites: Vec<Suite> = if a.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![a.suite.parse::<Suite>()?]
    };
    if a.cases == 0 {
        return Err(config("--cases must be positive"));
    }
    let reports: Vec<_> = suites
        .iter()
        .map(|&s| run_suite(s, a.cases, a.seed, exec))
        .collect();
    let mut checks = Vec::new();
    let mut table = Table::new(&["suite", "law", "cases", "failures"]);
    for r in &reports {
        for l in &r.laws {
            let detail = l
                .counterexample
                .as_ref()
                .map(|c| format!("case {}: {}", c.case, c.detail))
                .unwrap_or_default();
            checks.push(Check::new(
                format!("{}: {}", r.suite, l.law),
                l.failures == 0,
                detail,
            ));
            table.push(vec![
                r.suite.to_string(),
                l.law.clone(),
                l.cases.to_string(),
                l.failures.to_string(),
            ]);
        }
    }
    let inputs = json!({ "suite": a.suite, "cases": a.cases, "seed": a.seed });
    Ok(Report::new("laws", inputs, &reports, checks)?.with_table(table))
}

// extrema

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecModel {
    /// `approxIncr MAX`, functional `id`.
    ApproxIncr,
    /// `approxN n l`, functional `id`.
    #[value(name = "approx-n", alias = "approxN")]
    ApproxN,
    /// `approxN′ n t l`, functional `t − l`.
    #[value(name = "approx-n-prime", alias = "approxN-prime")]
    ApproxNPrime,
}

#[derive(Debug, Args)]
pub struct ExtremaArgs {
    #[arg(long, value_enum)]
    model: SpecModel,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    l: i64,
    #[arg(long, default_value_t = 0)]
    t: i64,
    #[arg(long, default_value_t = 1)]
    max: i64,
}

#[derive(Serialize)]
struct ExtremaResult {
    functional: &'static str,
    lo: String,
    hi: String,
}

pub fn extrema(a: &ExtremaArgs) -> Result<Report> {
    if a.max < 0 || a.l < 0 || a.t < 0 {
        return Err(config("--max, --l and --t must be nonnegative"));
    }
    let (functional, (lo, hi), expected) = match a.model {
        SpecModel::ApproxIncr => ("id", approx_n_extrema(1, 0, a.max, &id), int(1)),
        SpecModel::ApproxN => (
            "id",
            approx_n_extrema(a.n, a.l, a.max, &id),
            int(a.n as i64 + a.l),
        ),
        SpecModel::ApproxNPrime => (
            "t - l",
            approx_n_prime_extrema(a.n, a.t, a.l, a.max, &|t, l| int(t - l)),
            int(a.t - a.l),
        ),
    };
    let checks = vec![
        Check::equal("Emin equals the exact count", &lo, &expected),
        Check::equal("Emax equals the exact count", &hi, &expected),
    ];
    let mut table = Table::new(&["model", "n", "max", "lo", "lo_approx", "hi", "hi_approx"]);
    let [l1, l2] = rat_cells(&lo);
    let [h1, h2] = rat_cells(&hi);
    table.push(vec![
        serde_json::to_value(a.model)?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        a.n.to_string(),
        a.max.to_string(),
        l1,
        l2,
        h1,
        h2,
    ]);
    let inputs = json!({ "model": a.model, "n": a.n, "l": a.l, "t": a.t, "max": a.max });
    let result = ExtremaResult {
        functional,
        lo: format_rational(&lo),
        hi: format_rational(&hi),
    };
    Ok(Report::new("extrema", inputs, result, checks)?.with_table(table))
}

// couple

#[derive(Debug, Args)]
pub struct CoupleArgs {
    /// Derivation script.
    script: PathBuf,
}

pub fn couple(a: &CoupleArgs) -> Result<Report> {
    let text = read_file(&a.script)?;
    let results = run_script(&text)?;
    let checks = results
        .iter()
        .map(|r| {
            let detail = match (&r.error, &r.verdict) {
                (Some(e), _) => e.clone(),
                (None, Some(concprob::coupling::Verdict::Fail { clause, detail })) => {
                    format!("{clause}: {detail}")
                }
                _ => String::new(),
            };
            Check::new(format!("coupling {}", r.name), r.passed, detail)
        })
        .collect();
    let mut table = Table::new(&["coupling", "passed", "lo", "mid", "hi"]);
    for r in &results {
        let sw = r.sandwich.as_ref();
        let cell = |f: fn(&concprob::coupling::Sandwich) -> &Rational| {
            sw.map(|s| format_rational(f(s))).unwrap_or_default()
        };
        table.push(vec![
            r.name.clone(),
            r.passed.to_string(),
            cell(|s| &s.lo),
            cell(|s| &s.mid),
            cell(|s| &s.hi),
        ]);
    }
    let inputs = json!({ "script": a.script.display().to_string() });
    Ok(Report::new("couple", inputs, &results, checks)?.with_table(table))
}

// programs shared by mdp and simulate

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProgramModel {
    UnbiasedCounter,
    MorrisCounter,
    DlmCounter,
    /// Two threads with one inlined unbiased increment each.
    TwoThreadCounter,
    CountTrue,
    Skiplist,
}

#[derive(Debug, Args)]
pub struct ProgramArgs {
    #[arg(long, value_enum, conflicts_with = "program")]
    model: Option<ProgramModel>,
    /// A program file in the s-expression syntax.
    #[arg(long)]
    program: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    threads: usize,
    #[arg(long, default_value_t = 1)]
    incrs: usize,
    #[arg(long, default_value_t = 2)]
    max: i64,
    /// Random bits for the DLM counter.
    #[arg(long, default_value_t = 2)]
    bits: u32,
    /// two-thread-counter: read without waiting for the worker.
    #[arg(long)]
    race: bool,
    /// count-true: first worker's list, e.g. true,false,true.
    #[arg(long, value_delimiter = ',')]
    lb1: Vec<bool>,
    #[arg(long, value_delimiter = ',')]
    lb2: Vec<bool>,
    /// skiplist: keys per thread, threads separated by `;`, e.g. "1,2;3".
    #[arg(long, default_value = "")]
    keys: String,
    /// skiplist: key to look up after all adds.
    #[arg(long, default_value_t = 0)]
    query: i64,
    /// skiplist: flip before taking locks.
    #[arg(long)]
    early_flip: bool,
}

struct Program {
    expr: Expr,
    inputs: serde_json::Value,
    /// Exact value every scheduler must produce, when the model promises one.
    expected: Option<Rational>,
}

fn parse_keys(s: &str) -> Result<Vec<Vec<i64>>> {
    s.split(';')
        .map(|part| {
            part.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse::<i64>()
                        .map_err(|e| config(format!("bad key `{x}`: {e}")))
                })
                .collect()
        })
        .collect()
}

impl ProgramArgs {
    fn build(&self) -> Result<Program> {
        if let Some(path) = &self.program {
            let expr = parse_program(&read_file(path)?)?;
            return Ok(Program {
                expr,
                inputs: json!({ "program": path.display().to_string() }),
                expected: None,
            });
        }
        let model = self
            .model
            .ok_or_else(|| config("one of --model or --program is required"))?;
        let p = CounterParams {
            max: self.max,
            threads: self.threads,
            incrs_per_thread: self.incrs,
        };
        let counter_inputs = json!({
            "model": model, "threads": self.threads, "incrs": self.incrs, "max": self.max
        });
        Ok(match model {
            ProgramModel::UnbiasedCounter => Program {
                expr: counter_program(Counter::Unbiased { max: self.max }, &p)?,
                inputs: counter_inputs,
                expected: Some(int(p.total_incrs() as i64)),
            },
            ProgramModel::MorrisCounter => Program {
                expr: counter_program(Counter::Morris, &p)?,
                inputs: json!({ "model": model, "threads": self.threads, "incrs": self.incrs }),
                expected: None,
            },
            ProgramModel::DlmCounter => Program {
                expr: counter_program(Counter::Dlm { bits: self.bits }, &p)?,
                inputs: json!({ "model": model, "threads": self.threads, "incrs": self.incrs, "bits": self.bits }),
                expected: None,
            },
            ProgramModel::TwoThreadCounter => Program {
                expr: two_thread_counter(self.max, !self.race)?,
                inputs: json!({ "model": model, "max": self.max, "race": self.race }),
                expected: (!self.race).then(|| int(2)),
            },
            ProgramModel::CountTrue => Program {
                expr: count_true_client(Counter::Unbiased { max: self.max }, &self.lb1, &self.lb2)?,
                inputs: json!({ "model": model, "lb1": self.lb1, "lb2": self.lb2, "max": self.max }),
                expected: Some(int(
                    self.lb1.iter().chain(&self.lb2).filter(|&&b| b).count() as i64,
                )),
            },
            ProgramModel::Skiplist => {
                let keys = parse_keys(&self.keys)?;
                Program {
                    expr: skip_list_client(&keys, self.query, self.early_flip)?,
                    inputs: json!({ "model": model, "keys": keys, "query": self.query, "early_flip": self.early_flip }),
                    expected: None,
                }
            }
        })
    }
}

/// `read` (integer result), `z` / `found` (skip-list lookup), or
/// `indicator:VALUE`.
fn functional(name: &str) -> Result<Functional> {
    Ok(match name {
        "read" | "int" => Functional::int(),
        "z" => Functional::new("z", |v: &Val| {
            concprob::models::client_result(v).map(|(_, z, _)| int(z))
        }),
        "found" => Functional::new("found", |v: &Val| {
            concprob::models::client_result(v).map(|(f, _, _)| int(f as i64))
        }),
        _ => match name.strip_prefix("indicator:") {
            Some(v) => Functional::indicator(parse_val(v)?),
            None => return Err(config(format!("unknown functional `{name}`"))),
        },
    })
}

// mdp

#[derive(Debug, Args)]
pub struct MdpArgs {
    #[command(flatten)]
    program: ProgramArgs,
    /// Step budget; every execution must finish within it.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, short = 'f', default_value = "read")]
    functional: String,
    /// Also enumerate history-dependent schedulers, up to this many
    /// decision nodes.
    #[arg(long)]
    brute_force_cap: Option<u64>,
    /// Stutter steps the enumeration may insert.
    #[arg(long, default_value_t = 0)]
    stutters: usize,
}

pub fn mdp(a: &MdpArgs, exec: Exec) -> Result<Report> {
    let prog = a.program.build()?;
    let f = functional(&a.functional)?;
    let r = extremal_expectation(&prog.expr, a.budget, &f, exec)?;
    let replay_lo = evaluate_policy(
        &prog.expr,
        &extract_policy(&r, Direction::Min),
        a.budget,
        &f,
    )?;
    let replay_hi = evaluate_policy(
        &prog.expr,
        &extract_policy(&r, Direction::Max),
        a.budget,
        &f,
    )?;
    let mut checks = vec![
        Check::equal("minimizing policy replays Emin", &replay_lo, &r.lo),
        Check::equal("maximizing policy replays Emax", &replay_hi, &r.hi),
    ];
    if let Some(want) = &prog.expected {
        checks.push(Check::equal("Emin equals the exact count", &r.lo, want));
        checks.push(Check::equal("Emax equals the exact count", &r.hi, want));
    }
    let mut brute = None;
    if let Some(cap) = a.brute_force_cap {
        let b = brute_force_extremal(&prog.expr, r.depth + a.stutters, a.stutters, &f, cap)?;
        checks.push(Check::equal("enumeration agrees on Emin", &b.lo, &r.lo));
        checks.push(Check::equal("enumeration agrees on Emax", &b.hi, &r.hi));
        brute = Some(json!({
            "lo": format_rational(&b.lo), "hi": format_rational(&b.hi), "nodes": b.nodes, "stutters": a.stutters
        }));
    }
    let mut table = Table::new(&["lo", "lo_approx", "hi", "hi_approx", "depth", "states"]);
    let [l1, l2] = rat_cells(&r.lo);
    let [h1, h2] = rat_cells(&r.hi);
    table.push(vec![
        l1,
        l2,
        h1,
        h2,
        r.depth.to_string(),
        r.explored_states.to_string(),
    ]);
    let inputs = json!({
        "program": prog.inputs, "budget": a.budget, "functional": a.functional,
        "brute_force_cap": a.brute_force_cap, "stutters": a.stutters
    });
    let result = json!({
        "extremal": r,
        "replay_lo": format_rational(&replay_lo),
        "replay_hi": format_rational(&replay_hi),
        "brute_force": brute,
    });
    Ok(Report::new("mdp", inputs, result, checks)?.with_table(table))
}

// simulate

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    program: ProgramArgs,
    /// round-robin, seeded-random, or fixed:I,J,... (round-robin once the
    /// list runs out).
    #[arg(long, default_value = "round-robin")]
    scheduler: String,
    /// Seed of the seeded-random scheduler.
    #[arg(long, default_value_t = 0)]
    sched_seed: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Seed of the coin flips.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, short = 'f', default_value = "read")]
    functional: String,
    /// Also compute the exact expectation under the scheduler and check it
    /// lies in the ±3σ interval.
    #[arg(long)]
    exact: bool,
}

fn scheduler(name: &str, seed: u64) -> Result<SchedulerPolicy> {
    Ok(match name {
        "round-robin" => SchedulerPolicy::round_robin(),
        "seeded-random" => SchedulerPolicy::seeded_random(seed),
        _ => match name.strip_prefix("fixed:") {
            Some(list) => {
                let picks = list
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<usize>()
                            .map_err(|e| config(format!("bad thread index `{x}`: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let name = format!("fixed:{list}");
                SchedulerPolicy::new(name, move |t| match picks.get(t.steps()) {
                    Some(&i) => i,
                    None => t.steps() % t.curr().threads.len(),
                })
            }
            None => return Err(config(format!("unknown scheduler `{name}`"))),
        },
    })
}

pub fn simulate(a: &SimulateArgs, exec: Exec) -> Result<Report> {
    let prog = a.program.build()?;
    let f = functional(&a.functional)?;
    let sched = scheduler(&a.scheduler, a.sched_seed)?;
    let mc = monte_carlo(&prog.expr, &sched, a.budget, &f, a.trials, a.seed, exec)?;
    let mut checks = Vec::new();
    let mut exact = None;
    if a.exact {
        let e = evaluate_policy(&prog.expr, &sched, a.budget, &f)?;
        let x = concprob::rational::to_f64(&e);
        checks.push(Check::new(
            "exact expectation within 3σ of the sample mean",
            mc.contains(x),
            format!("exact {x}, interval [{}, {}]", mc.ci_lo, mc.ci_hi),
        ));
        exact = Some(format_rational(&e));
    }
    let mut table = Table::new(&["trials", "mean", "std_error", "ci_lo", "ci_hi"]);
    table.push(vec![
        mc.trials.to_string(),
        mc.mean.to_string(),
        mc.std_error.to_string(),
        mc.ci_lo.to_string(),
        mc.ci_hi.to_string(),
    ]);
    let inputs = json!({
        "program": prog.inputs, "scheduler": sched.name(), "sched_seed": sched.seed(),
        "trials": a.trials, "seed": a.seed, "budget": a.budget, "functional": a.functional
    });
    let result = json!({ "sample": mc, "exact": exact });
    Ok(Report::new("simulate", inputs, result, checks)?.with_table(table))
}

// sandwich

#[derive(Debug, Args)]
pub struct SandwichArgs {
    #[arg(long, default_value_t = 2)]
    threads: usize,
    #[arg(long, default_value_t = 1)]
    incrs: usize,
    #[arg(long, default_value_t = 2)]
    max: i64,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
}

pub fn sandwich(a: &SandwichArgs, exec: Exec) -> Result<Report> {
    let p = CounterParams {
        max: a.max,
        threads: a.threads,
        incrs_per_thread: a.incrs,
    };
    let prog = counter_program(Counter::Unbiased { max: a.max }, &p)?;
    let total = p.total_incrs();
    let spec = approx_n_extrema(total, 0, a.max, &id);
    let r = extremal_expectation(&prog, a.budget, &Functional::int(), exec)?;
    let s = SandwichReport::new(spec, (r.lo.clone(), r.hi.clone()));
    let want = int(total as i64);
    let checks = vec![
        Check::new(
            "Emin[spec] ≤ Emin[program] ≤ Emax[program] ≤ Emax[spec]",
            s.holds,
            String::new(),
        ),
        Check::equal("program Emin equals the count", &s.lo, &want),
        Check::equal("program Emax equals the count", &s.hi, &want),
    ];
    let mut table = Table::new(&[
        "threads", "incrs", "max", "spec_lo", "lo", "hi", "spec_hi", "holds",
    ]);
    table.push(vec![
        a.threads.to_string(),
        a.incrs.to_string(),
        a.max.to_string(),
        format_rational(&s.spec_lo),
        format_rational(&s.lo),
        format_rational(&s.hi),
        format_rational(&s.spec_hi),
        s.holds.to_string(),
    ]);
    let inputs =
        json!({ "threads": a.threads, "incrs": a.incrs, "max": a.max, "budget": a.budget });
    let result = json!({ "sandwich": s, "depth": r.depth, "states": r.explored_states });
    Ok(Report::new("sandwich", inputs, result, checks)?.with_table(table))
}

// skiplist-cost

#[derive(Debug, Args)]
pub struct SkipCostArgs {
    /// Explicit keys; otherwise every duplicate-free list over the universe.
    #[arg(long, value_delimiter = ',')]
    keys: Vec<i64>,
    /// Query keys; default: the whole universe.
    #[arg(long, value_delimiter = ',')]
    query: Vec<i64>,
    /// Universe 1..=N.
    #[arg(long, default_value_t = 4)]
    universe: i64,
    /// Longest list enumerated over the universe.
    #[arg(long, default_value_t = 3)]
    max_len: usize,
}

fn lists(universe: &[i64], max_len: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for l in &frontier {
            for &k in universe {
                if !l.contains(&k) {
                    let mut l2: Vec<i64> = l.clone();
                    l2.push(k);
                    next.push(l2);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn skiplist_cost(a: &SkipCostArgs, exec: Exec) -> Result<Report> {
    if a.universe < 1 {
        return Err(config("--universe must be positive"));
    }
    let universe: Vec<i64> = (1..=a.universe).collect();
    let all = if a.keys.is_empty() {
        lists(&universe, a.max_len)
    } else {
        concprob::models::SkipListKeys {
            keys: a.keys.clone(),
            query_key: 1,
        }
        .validate()?;
        vec![a.keys.clone()]
    };
    let queries = if a.query.is_empty() {
        universe.clone()
    } else {
        a.query.clone()
    };
    let rows = exec.map(all, |l| {
        let spec = skip_list_spec(&l, &[], &[]);
        queries
            .iter()
            .map(|&k| {
                let n = l.iter().filter(|&&i| i < k).count();
                let worst = spec.ex_max(|(tl, bl)| int(skipcost(tl, bl, k)));
                (l.clone(), k, n, worst, skip_cost_bound(n))
            })
            .collect::<Vec<_>>()
    });
    let mut table = Table::new(&[
        "keys",
        "query",
        "n",
        "exmax",
        "exmax_approx",
        "bound",
        "bound_approx",
        "ok",
    ]);
    let mut violations = Vec::new();
    let mut count = 0usize;
    for (l, k, n, worst, bound) in rows.into_iter().flatten() {
        count += 1;
        let ok = worst <= bound;
        if !ok && violations.len() < 5 {
            violations.push(format!(
                "keys {l:?}, query {k}: {} > {}",
                format_rational(&worst),
                format_rational(&bound)
            ));
        }
        let [w1, w2] = rat_cells(&worst);
        let [b1, b2] = rat_cells(&bound);
        let keys = l.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        table.push(vec![
            keys,
            k.to_string(),
            n.to_string(),
            w1,
            w2,
            b1,
            b2,
            ok.to_string(),
        ]);
    }
    let checks = vec![Check::new(
        "Emax[skipcost] ≤ 1 + n/2 + 2(1 − 1/2^(n+1))",
        violations.is_empty(),
        violations.join("; "),
    )];
    let inputs =
        json!({ "keys": a.keys, "query": a.query, "universe": a.universe, "max_len": a.max_len });
    let result = json!({ "instances": count, "violations": violations.len() });
    Ok(Report::new("skiplist-cost", inputs, result, checks)?.with_table(table))
}

// counter-bias

#[derive(Debug, Args)]
pub struct BiasArgs {
    /// Random bits per increment; one row each.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
    bits: Vec<u32>,
    #[arg(long, default_value_t = 2)]
    threads: usize,
    #[arg(long, default_value_t = 1)]
    incrs: usize,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
}

pub fn counter_bias(a: &BiasArgs, exec: Exec) -> Result<Report> {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut table = Table::new(&["bits", "lo", "lo_approx", "hi", "hi_approx", "biased"]);
    let f = Functional::int();
    let p = CounterParams {
        max: 0,
        threads: a.threads,
        incrs_per_thread: a.incrs,
    };
    for &b in &a.bits {
        let prog = counter_program(Counter::Dlm { bits: b }, &p)?;
        let r = extremal_expectation(&prog, a.budget, &f, exec)?;
        let rlo = evaluate_policy(&prog, &extract_policy(&r, Direction::Min), a.budget, &f)?;
        let rhi = evaluate_policy(&prog, &extract_policy(&r, Direction::Max), a.budget, &f)?;
        checks.push(Check::equal(
            format!("bits {b}: minimizing policy replays Emin"),
            &rlo,
            &r.lo,
        ));
        checks.push(Check::equal(
            format!("bits {b}: maximizing policy replays Emax"),
            &rhi,
            &r.hi,
        ));
        checks.push(Check::new(
            format!("bits {b}: the scheduler biases the count"),
            r.lo != r.hi,
            format!("lo = hi = {}", format_rational(&r.lo)),
        ));
        let [l1, l2] = rat_cells(&r.lo);
        let [h1, h2] = rat_cells(&r.hi);
        table.push(vec![
            b.to_string(),
            l1,
            l2,
            h1,
            h2,
            (r.lo != r.hi).to_string(),
        ]);
        rows.push(json!({ "bits": b, "extremal": r }));
    }
    for c in checks.iter_mut().filter(|c| c.passed) {
        c.detail.clear();
    }
    let inputs =
        json!({ "bits": a.bits, "threads": a.threads, "incrs": a.incrs, "budget": a.budget });
    Ok(Report::new("counter-bias", inputs, rows, checks)?.with_table(table))
}

// parse

#[derive(Debug, Args)]
pub struct ParseArgs {
    files: Vec<PathBuf>,
    #[arg(long, default_value_t = WIDTH)]
    width: usize,
}

pub fn parse(a: &ParseArgs) -> Result<Report> {
    if a.files.is_empty() {
        return Err(config("no program files given"));
    }
    let mut checks = Vec::new();
    let mut results = Vec::new();
    for path in &a.files {
        let text = read_file(path)?;
        let e = parse_program(&text).with_context(|| format!("parsing {}", path.display()))?;
        let printed = pretty(&e, a.width);
        let reparsed = parse_program(&printed)?;
        let fixed = pretty(&reparsed, a.width) == printed;
        checks.push(Check::new(
            format!(
                "{}: pretty output parses back to the same program",
                path.display()
            ),
            reparsed == e,
            String::new(),
        ));
        checks.push(Check::new(
            format!("{}: pretty printing is a fixed point", path.display()),
            fixed,
            String::new(),
        ));
        results.push(json!({ "file": path.display().to_string(), "pretty": printed }));
    }
    Ok(Report::new(
        "parse",
        json!({ "files": a.files, "width": a.width }),
        results,
        checks,
    )?)
}
