use concprob::lang::{can_step, parse};
use concprob::models::{counter_program, two_thread_counter, Counter, CounterParams};
use concprob::rational::{int, ratio, to_f64};
use concprob::sched::{
    brute_force_extremal, evaluate_policy, extract_policy, extremal_expectation, monte_carlo,
    outcome_valuation, Direction, Functional, SchedulerPolicy,
};
use concprob::{Error, Exec};

const RACE: &str = "(let x (alloc 0)
  (let d (alloc false)
    (seq (fork (seq (store x (if (flip 1 2) 1 0)) (store d true)))
         (store x 2) (await d) (load x))))";

// The scheduler sees the worker's coin before choosing which write lands
// last: min lets the coin win (E = 1/2), max lets 2 win.
#[test]
fn write_race_extrema() {
    let prog = parse(RACE).unwrap();
    let f = Functional::int();
    for exec in [Exec::Sequential, Exec::Parallel] {
        let r = extremal_expectation(&prog, 100, &f, exec).unwrap();
        assert_eq!((r.lo.clone(), r.hi.clone()), (ratio(1, 2), int(2)));
        for (dir, want) in [(Direction::Min, &r.lo), (Direction::Max, &r.hi)] {
            assert_eq!(
                &evaluate_policy(&prog, &extract_policy(&r, dir), 100, &f).unwrap(),
                want
            );
        }
    }
    let b = brute_force_extremal(&prog, 40, 2, &f, 1_000_000).unwrap();
    assert_eq!((b.lo, b.hi), (ratio(1, 2), int(2)));
}

// Main increments (always +1 from 0) and may read before the worker's add
// lands, so 1 is attainable; the best the scheduler can do is 2, by either
// racing both loads or running the worker first (E = (3 + 1) / 2).
#[test]
fn racy_counter_extrema() {
    for max in 1..=3 {
        let prog = two_thread_counter(max, false).unwrap();
        let r = extremal_expectation(&prog, 1_000, &Functional::int(), Exec::default()).unwrap();
        assert_eq!((r.lo, r.hi), (int(1), int(2)), "MAX={max}");
    }
}

#[test]
fn joined_counter_is_unbiased_under_every_scheduler() {
    for threads in 1..=3 {
        let p = CounterParams {
            max: 2,
            threads,
            incrs_per_thread: 1,
        };
        let prog = counter_program(Counter::Unbiased { max: 2 }, &p).unwrap();
        let r = extremal_expectation(&prog, 10_000, &Functional::int(), Exec::default()).unwrap();
        assert_eq!((r.lo, r.hi), (int(threads as i64), int(threads as i64)));
    }
}

#[test]
fn outcome_valuation_under_a_script() {
    // worker first: coin then 2, so the read is always 2
    let prog = parse(RACE).unwrap();
    let worker_first = SchedulerPolicy::new("worker-first", |t| usize::from(can_step(t.curr(), 1)));
    let v = outcome_valuation(&prog, &worker_first, 200).unwrap();
    let d = v.to_distribution();
    assert_eq!(d.prob(&concprob::lang::Val::Int(2)), int(1));
}

#[test]
fn monte_carlo_brackets_the_exact_policy_value() {
    let prog = parse(RACE).unwrap();
    let f = Functional::int();
    for sched in [
        SchedulerPolicy::round_robin(),
        SchedulerPolicy::seeded_random(3),
    ] {
        let exact = evaluate_policy(&prog, &sched, 200, &f).unwrap();
        let mc = monte_carlo(&prog, &sched, 200, &f, 20_000, 5, Exec::default()).unwrap();
        assert!(
            mc.contains(to_f64(&exact)),
            "{}: {mc:?} vs {exact}",
            sched.name()
        );
        let again = monte_carlo(&prog, &sched, 200, &f, 20_000, 5, Exec::Sequential).unwrap();
        assert_eq!(mc.mean, again.mean);
    }
}

#[test]
fn short_budgets_are_refused() {
    let prog = parse(RACE).unwrap();
    let f = Functional::int();
    assert!(matches!(
        extremal_expectation(&prog, 3, &f, Exec::Sequential),
        Err(Error::BudgetExhausted { .. })
    ));
    assert!(brute_force_extremal(&prog, 3, 0, &f, 1_000).is_err());
}
