use concprob::laws::{run_suite, Suite};
use concprob::{Error, Exec};

#[test]
fn every_suite_passes_on_a_fresh_seed() {
    for s in Suite::ALL {
        let r = run_suite(s, 300, 77, Exec::default());
        assert!(
            r.passed,
            "{s}: {:?}",
            r.laws.iter().find(|l| l.failures > 0)
        );
        assert_eq!(r.laws.len(), s.law_names().len());
    }
}

#[test]
fn reports_do_not_depend_on_the_executor() {
    let a = run_suite(Suite::Psub, 100, 5, Exec::Sequential);
    let b = run_suite(Suite::Psub, 100, 5, Exec::Parallel);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn suite_names_parse() {
    assert_eq!("peq".parse::<Suite>().unwrap(), Suite::Peq);
    assert!(matches!("nope".parse::<Suite>(), Err(Error::Config(_))));
}
