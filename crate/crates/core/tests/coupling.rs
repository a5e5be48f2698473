use concprob::coupling::script::run_script;
use concprob::coupling::{self, Clause, Goal, Predicate};
use concprob::ival::IndexedValuation;
use concprob::rational::{int, ratio};
use concprob::ProcessSet;

const SCRIPT: &str = include_str!("../scripts/counter-coupling.scm");

#[test]
fn bundled_counter_script_passes() {
    let reports = run_script(SCRIPT).unwrap();
    assert_eq!(reports.len(), 5);
    for r in &reports {
        assert!(r.passed, "{r:?}");
        let s = r.sandwich.as_ref().unwrap();
        assert_eq!((&s.lo, &s.mid, &s.hi), (&int(1), &int(1), &int(1)));
    }
}

#[test]
fn script_reports_a_witness_outside_the_spec() {
    let text = SCRIPT.replace("(approx-incr 4)", "(approx-incr 1)");
    let reports = run_script(&text).unwrap();
    // k + 1 ≤ 2 stays inside approxIncr 1
    let passed: Vec<bool> = reports.iter().map(|r| r.passed).collect();
    assert_eq!(passed, [true, true, false, false, false]);
}

// A fair coin over {0, 1} coupled with the choice {0, 1}, then bound into
// "stay or add 2" on each side.
#[test]
fn bind_of_coins_gives_an_equality_coupling() {
    let eq = Predicate::new("=", |a: &i64, b: &i64| a == b);
    let coin = |a: i64, b: i64| {
        IndexedValuation::pchoice(
            &IndexedValuation::ret(a),
            &ratio(1, 2),
            &IndexedValuation::ret(b),
        )
        .unwrap()
    };
    let w1 = coupling::pchoice(
        &coupling::ret(1, 1, &eq).unwrap(),
        &ratio(1, 2),
        &coupling::ret(0, 0, &eq).unwrap(),
    )
    .unwrap();
    let f = move |x: &i64| coin(*x, x + 2);
    let f2 = |y: &i64| ProcessSet::choose([*y, y + 2]).unwrap();
    let w = coupling::bind(&w1, f, f2, &eq, |x, _| {
        coupling::pchoice(
            &coupling::ret(*x, *x, &eq)?,
            &ratio(1, 2),
            &coupling::ret(x + 2, x + 2, &eq)?,
        )
    })
    .unwrap();
    let goal = Goal {
        lhs: coin(1, 0).bind(f),
        rhs: ProcessSet::choose([0, 1]).unwrap().bind(f2),
        predicate: eq,
    };
    assert!(coupling::check(&goal, &w).passed());
    let s = coupling::sandwich(&goal, &w, |x| int(*x), |y| int(*y)).unwrap();
    // E = 1/2 for the first coin, plus 1 for the second
    assert_eq!(s.mid, ratio(3, 2));
    assert!(s.lo <= s.mid && s.mid <= s.hi);
}

#[test]
fn corrupted_pick_is_caught_at_the_second_marginal() {
    let eq = Predicate::new("=", |a: &i64, b: &i64| a == b);
    let mut w = coupling::ret(3, 3, &eq).unwrap();
    w.rhs_pick = IndexedValuation::ret(4);
    let goal = Goal {
        lhs: IndexedValuation::ret(3),
        rhs: ProcessSet::choose([3, 4]).unwrap(),
        predicate: eq,
    };
    assert_eq!(
        coupling::check(&goal, &w).failed_clause(),
        Some(Clause::RhsMarginal)
    );
}
