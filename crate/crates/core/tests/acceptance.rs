//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use concprob::coupling::{self, Clause, Goal, Predicate, Witness};
use concprob::ival::{Index, IndexedValuation};
use concprob::lang::{parse, pretty, WIDTH};
use concprob::laws::{run_suite, Gen, Suite};
use concprob::models::{
    approx_incr, approx_n, approx_n_extrema, approx_n_prime, approx_n_prime_extrema,
    counter_program, id, skip_cost_bound, skip_list_spec, skipcost, two_thread_counter, Counter,
    CounterParams,
};
use concprob::ndset::PSubset;
use concprob::rational::{format_rational, int, ratio};
use concprob::sched::{
    brute_force_extremal, evaluate_policy, extract_policy, extremal_expectation, monte_carlo,
    Direction, Functional, SchedulerPolicy,
};
use concprob::{Exec, ProcessSet, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unbiased(threads: usize, incrs: usize, max: i64) -> concprob::lang::Expr {
    let p = CounterParams {
        max,
        threads,
        incrs_per_thread: incrs,
    };
    counter_program(Counter::Unbiased { max }, &p).expect("valid counter parameters")
}

const BUDGET: usize = 10_000;

fn law_suites() -> Outcome {
    let cases = 1000;
    let mut laws = 0;
    for s in Suite::ALL {
        let r = run_suite(s, cases, 2024, Exec::default());
        for l in &r.laws {
            ensure(l.cases >= cases, || {
                format!("{s}: {} ran {} cases", l.law, l.cases)
            })?;
            if let Some(c) = &l.counterexample {
                return Err(format!(
                    "{s}: {} failed at case {}: {}",
                    l.law, c.case, c.detail
                ));
            }
            laws += 1;
        }
    }
    Ok(format!(
        "{laws} laws x {cases} cases across {} suites",
        Suite::ALL.len()
    ))
}

fn approx_n_exact() -> Outcome {
    let mut checked = 0;
    for max in 0..=4 {
        for n in 0..=6usize {
            let want = int(n as i64);
            let (lo, hi) = approx_n_extrema(n, 0, max, &id);
            ensure(lo == want && hi == want, || {
                format!(
                    "n={n} MAX={max}: [{}, {}]",
                    format_rational(&lo),
                    format_rational(&hi)
                )
            })?;
            // materialized set as an independent check where it stays small
            if n <= 3 {
                let (lo, hi) = approx_n(n, 0, max).extrema(|&l| int(l));
                ensure(lo == want && hi == want, || {
                    format!("materialized n={n} MAX={max} disagrees")
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (n, MAX) pairs give exMin = exMax = n"))
}

fn approx_n_prime_exact() -> Outcome {
    let mut checked = 0;
    for max in 0..=4 {
        for n in 0..=5usize {
            let (lo, hi) = approx_n_prime_extrema(n, 0, 0, max, &|t, l| int(t - l));
            ensure(lo == int(0) && hi == int(0), || {
                format!(
                    "n={n} MAX={max}: [{}, {}]",
                    format_rational(&lo),
                    format_rational(&hi)
                )
            })?;
            if n <= 2 {
                let (lo, hi) = approx_n_prime(n, 0, 0, max).extrema(|(t, l)| int(t - l));
                ensure(lo == int(0) && hi == int(0), || {
                    format!("materialized n={n} MAX={max} disagrees")
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (n, MAX) pairs give exMin = exMax = 0"))
}

fn sandwich() -> Outcome {
    let mut rows = Vec::new();
    for t in 1..=3usize {
        let r = extremal_expectation(
            &unbiased(t, 1, 2),
            BUDGET,
            &Functional::int(),
            Exec::default(),
        )
        .map_err(|e| e.to_string())?;
        let (slo, shi) = approx_n_extrema(t, 0, 2, &id);
        let want = int(t as i64);
        ensure(r.lo == want && r.hi == want, || {
            format!(
                "T={t}: program [{}, {}]",
                format_rational(&r.lo),
                format_rational(&r.hi)
            )
        })?;
        ensure(
            slo <= r.lo && r.hi <= shi && slo == want && shi == want,
            || {
                format!(
                    "T={t}: spec [{}, {}]",
                    format_rational(&slo),
                    format_rational(&shi)
                )
            },
        )?;
        rows.push(format!("T={t}: {} states", r.explored_states));
    }
    Ok(format!("lo = hi = T inside [T, T]; {}", rows.join(", ")))
}

fn dlm_bias() -> Outcome {
    let f = Functional::int();
    let p = CounterParams {
        max: 0,
        threads: 2,
        incrs_per_thread: 1,
    };
    let mut rows = Vec::new();
    for bits in 1..=3 {
        let prog = counter_program(Counter::Dlm { bits }, &p).map_err(|e| e.to_string())?;
        let r =
            extremal_expectation(&prog, BUDGET, &f, Exec::default()).map_err(|e| e.to_string())?;
        ensure(r.lo != r.hi, || {
            format!("B={bits}: no bias, lo = hi = {}", format_rational(&r.lo))
        })?;
        for (dir, want) in [(Direction::Min, &r.lo), (Direction::Max, &r.hi)] {
            let got = evaluate_policy(&prog, &extract_policy(&r, dir), BUDGET, &f)
                .map_err(|e| e.to_string())?;
            ensure(&got == want, || {
                format!(
                    "B={bits}: {dir:?} policy replays {} not {}",
                    format_rational(&got),
                    format_rational(want)
                )
            })?;
        }
        rows.push(format!(
            "B={bits}: [{}, {}]",
            format_rational(&r.lo),
            format_rational(&r.hi)
        ));
    }
    Ok(rows.join(", "))
}

fn duplicate_free_lists(universe: &[i64], max_len: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for l in &frontier {
            for &k in universe {
                if !l.contains(&k) {
                    let mut l2 = l.clone();
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

fn skip_list_bound() -> Outcome {
    let universe: Vec<i64> = (1..=6).collect();
    let lists = duplicate_free_lists(&universe, 5);
    let n_lists = lists.len();
    let bad = Exec::default().map(lists, |l| {
        let spec = skip_list_spec(&l, &[], &[]);
        universe
            .iter()
            .filter_map(|&k| {
                let n = l.iter().filter(|&&i| i < k).count();
                let worst = spec.ex_max(|(tl, bl)| int(skipcost(tl, bl, k)));
                let bound = skip_cost_bound(n);
                (worst > bound).then(|| {
                    format!(
                        "{l:?} k={k}: {} > {}",
                        format_rational(&worst),
                        format_rational(&bound)
                    )
                })
            })
            .collect::<Vec<_>>()
    });
    let bad: Vec<String> = bad.into_iter().flatten().collect();
    ensure(bad.is_empty(), || {
        format!("{} violations, first {}", bad.len(), bad[0])
    })?;
    Ok(format!(
        "{n_lists} lists x {} keys over universe 1..=6",
        universe.len()
    ))
}

fn counter_goal(k: i64) -> (Goal<bool, i64>, Witness<bool, i64>) {
    let r = Predicate::new(
        "R",
        move |x: &bool, y: &i64| if *x { *y == k + 1 } else { *y == 0 },
    );
    let p = ratio(1, k + 1);
    let lhs = IndexedValuation::pchoice(
        &IndexedValuation::ret(true),
        &p,
        &IndexedValuation::ret(false),
    )
    .unwrap();
    let w = coupling::pchoice(
        &coupling::ret(true, k + 1, &r).unwrap(),
        &p,
        &coupling::ret(false, 0, &r).unwrap(),
    )
    .unwrap();
    let narrow = ProcessSet::pchoice(&ProcessSet::ret(k + 1), &p, &ProcessSet::ret(0)).unwrap();
    let spec = approx_incr(4);
    let w = coupling::equiv(&w, (&lhs, &narrow), (&lhs, &spec)).unwrap();
    (
        Goal {
            lhs,
            rhs: spec,
            predicate: r,
        },
        w,
    )
}

fn with_joint<A: Clone, B: Clone>(
    w: &Witness<A, B>,
    entries: Vec<(Index, (A, B), Rational)>,
) -> Witness<A, B> {
    Witness {
        joint: IndexedValuation::from_entries(entries).expect("mutant keeps total mass"),
        ..w.clone()
    }
}

fn coupling_kernel() -> Outcome {
    for k in 0..=4i64 {
        let (goal, w) = counter_goal(k);
        let v = coupling::check(&goal, &w);
        ensure(v.passed(), || format!("k={k}: {v:?}"))?;
        let s = coupling::sandwich(&goal, &w, |x| int(if *x { k + 1 } else { 0 }), |y| int(*y))
            .map_err(|e| format!("k={k}: {e}"))?;
        ensure(s.lo == int(1) && s.mid == int(1) && s.hi == int(1), || {
            format!(
                "k={k}: sandwich {}, {}, {}",
                format_rational(&s.lo),
                format_rational(&s.mid),
                format_rational(&s.hi)
            )
        })?;

        let es: Vec<_> = w
            .joint
            .positive()
            .map(|e| (e.index.clone(), e.value, e.prob.clone()))
            .collect();
        let mut mutants: Vec<(&str, Witness<bool, i64>, Clause)> = Vec::new();
        if es.len() >= 2 {
            // shift 1/100 of mass between the two pairs
            let mut m = es.clone();
            let eps = ratio(1, 100);
            if m[0].2 < eps {
                m.swap(0, 1);
            }
            m[0].2 -= &eps;
            m[1].2 += &eps;
            mutants.push(("mass perturbation", with_joint(&w, m), Clause::LhsMarginal));
            // drop the first pair, giving its mass to the other one
            let mut m = es.clone();
            let gone = m.remove(0);
            m[0].2 += gone.2;
            mutants.push((
                "support-pair deletion",
                with_joint(&w, m),
                Clause::LhsMarginal,
            ));
        } else {
            // k = 0: a single pair; perturbing or dropping it breaks the lhs
            let m = vec![
                (es[0].0.clone(), es[0].1, ratio(99, 100)),
                (Index::Atom(99), (false, 0), ratio(1, 100)),
            ];
            mutants.push(("mass perturbation", with_joint(&w, m), Clause::LhsMarginal));
            let m = vec![(es[0].0.clone(), (false, 0), int(1))];
            mutants.push((
                "support-pair deletion",
                with_joint(&w, m),
                Clause::LhsMarginal,
            ));
        }
        let mut corrupt = w.clone();
        corrupt.rhs_pick = w.rhs_pick.map(|y| y + 1);
        mutants.push(("rhsPick corruption", corrupt, Clause::RhsMarginal));
        for (name, m, want) in mutants {
            let got = coupling::check(&goal, &m).failed_clause();
            ensure(got == Some(want), || {
                format!("k={k}: {name} reported {got:?}, expected {want:?}")
            })?;
        }
    }
    Ok("k = 0..=4 pass with sandwich [1, 1, 1]; 3 mutation classes rejected at the expected clause".into())
}

fn psub_vs_falsifier() -> Outcome {
    let (mut yes, mut no, mut caught) = (0, 0, 0);
    for seed in 0..500u64 {
        let mut g = Gen::from_seed(seed);
        let b = g.set(3, 3);
        let a = if seed % 2 == 0 {
            g.mixtures(&b, 3)
        } else {
            g.set(3, 3)
        };
        let eval = |f: &[Rational], s: &ProcessSet<i64>| s.ex_max(|&v| f[v as usize].clone());
        let mut falsified = false;
        for _ in 0..500 {
            let f = g.function();
            if eval(&f, &a) > eval(&f, &b) {
                falsified = true;
                break;
            }
        }
        match a.subset_p(&b) {
            PSubset::Holds { .. } => {
                ensure(!falsified, || {
                    format!("seed {seed}: LP says yes but a random function separates")
                })?;
                yes += 1;
            }
            PSubset::Fails {
                member,
                separator,
                threshold,
            } => {
                let f = |v: &i64| separator.get(v).cloned().unwrap_or_else(|| int(0));
                let on_a = a.members()[member].expected_value(f);
                let on_b = b.ex_max(f);
                ensure(on_a > threshold && on_b <= threshold, || {
                    format!(
                        "seed {seed}: certificate gives {} on the member, {} on the rhs, threshold {}",
                        format_rational(&on_a),
                        format_rational(&on_b),
                        format_rational(&threshold)
                    )
                })?;
                no += 1;
                caught += falsified as usize;
            }
        }
    }
    Ok(format!("{yes} included, {no} separated by their certificate ({caught} also found by random search)"))
}

fn monte_carlo_consistency() -> Outcome {
    let mut rows = Vec::new();
    for incrs in [1usize, 2] {
        let prog = unbiased(2, incrs, 2);
        let want = 2.0 * incrs as f64;
        for sched in [
            SchedulerPolicy::round_robin(),
            SchedulerPolicy::seeded_random(7),
        ] {
            let mc = monte_carlo(
                &prog,
                &sched,
                BUDGET,
                &Functional::int(),
                100_000,
                11,
                Exec::default(),
            )
            .map_err(|e| e.to_string())?;
            ensure(mc.contains(want), || {
                format!(
                    "{} incrs={incrs}: mean {} outside [{}, {}]",
                    sched.name(),
                    mc.mean,
                    mc.ci_lo,
                    mc.ci_hi
                )
            })?;
            rows.push(format!(
                "{} x{incrs}: {:.4} ± {:.4}",
                sched.name(),
                mc.mean,
                3.0 * mc.std_error
            ));
        }
    }
    Ok(rows.join(", "))
}

fn brute_force_agreement() -> Outcome {
    const CAP: u64 = 1_000_000;
    let f = Functional::int();
    let (mut compared, mut over_cap) = (Vec::new(), 0);
    for join in [false, true] {
        for max in 0..=2 {
            let prog = two_thread_counter(max, join).map_err(|e| e.to_string())?;
            let r = extremal_expectation(&prog, BUDGET, &f, Exec::default())
                .map_err(|e| e.to_string())?;
            match brute_force_extremal(&prog, r.depth, 0, &f, CAP) {
                Ok(b) => {
                    ensure(b.lo == r.lo && b.hi == r.hi, || {
                        format!(
                            "join={join} MAX={max}: enumeration [{}, {}] vs memoized [{}, {}]",
                            format_rational(&b.lo),
                            format_rational(&b.hi),
                            format_rational(&r.lo),
                            format_rational(&r.hi)
                        )
                    })?;
                    // one step short: both sides must refuse
                    let short_memo =
                        extremal_expectation(&prog, r.depth - 1, &f, Exec::default()).is_err();
                    let short_brute = brute_force_extremal(&prog, r.depth - 1, 0, &f, CAP).is_err();
                    ensure(short_memo && short_brute, || {
                        format!("join={join} MAX={max}: short budget accepted")
                    })?;
                    compared.push(format!(
                        "{}{max}: {} nodes",
                        if join { "join" } else { "racy" },
                        b.nodes
                    ));
                }
                Err(concprob::Error::TooLarge { .. }) => over_cap += 1,
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    ensure(!compared.is_empty(), || {
        "no instance fits under the node cap".into()
    })?;
    Ok(format!(
        "{} ({over_cap} instances above 10^6 nodes skipped)",
        compared.join(", ")
    ))
}

fn parser() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..1000 {
        let depth = 1 + i % 6;
        let e = common::random_expr(&mut rng, depth);
        let text = pretty(&e, WIDTH);
        let back = parse(&text).map_err(|err| format!("AST {i}: {err}\n{text}"))?;
        ensure(back == e, || {
            format!("AST {i} changed on round trip:\n{text}")
        })?;
    }
    let programs = common::bundled_programs();
    for (name, text) in &programs {
        let e = parse(text).map_err(|err| format!("{name}: {err}"))?;
        let p1 = pretty(&e, WIDTH);
        let e2 = parse(&p1).map_err(|err| format!("{name} reprinted: {err}"))?;
        ensure(e2 == e && pretty(&e2, WIDTH) == p1, || {
            format!("{name}: not a fixed point")
        })?;
    }
    Ok(format!(
        "1000 ASTs round-trip; {} bundled programs at a fixed point",
        programs.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("law suites", law_suites),
        ("approxN extrema", approx_n_exact),
        ("approxN' extrema", approx_n_prime_exact),
        ("unbiased counter sandwich", sandwich),
        ("random-bits counter bias", dlm_bias),
        ("skip-list cost bound", skip_list_bound),
        ("coupling kernel", coupling_kernel),
        ("subset_p against falsifier", psub_vs_falsifier),
        ("Monte-Carlo consistency", monte_carlo_consistency),
        ("enumeration vs backward induction", brute_force_agreement),
        ("parser", parser),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!(
                "criterion {:>2}: PASS  {name} ({secs:.1}s): {detail}",
                i + 1
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {:>2}: FAIL  {name} ({secs:.1}s): {detail}",
                    i + 1
                );
            }
        }
    }
    let elapsed: Duration = total.elapsed();
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        elapsed.as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
