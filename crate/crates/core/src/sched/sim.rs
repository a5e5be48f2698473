use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lang::{enabled, successors, Config, Expr, Trace};
use crate::rational::{to_f64, Rational};

use super::{deadlock, exhausted, Functional, SchedulerPolicy};

/// Sample statistics with a ±3σ normal-approximation interval for the mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub trials: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl MonteCarlo {
    pub fn contains(&self, x: f64) -> bool {
        self.ci_lo <= x && x <= self.ci_hi
    }
}

/// Draws `true` with probability `p` exactly, by comparing a uniform integer
/// below the denominator with the numerator.
fn bernoulli(rng: &mut ChaCha8Rng, p: &Rational) -> bool {
    match (p.numer().to_u64(), p.denom().to_u64()) {
        (Some(n), Some(d)) => rng.random_range(0..d) < n,
        _ => rng.random::<f64>() < to_f64(p),
    }
}

fn sample(
    prog: &Expr,
    sched: &SchedulerPolicy,
    budget: usize,
    f: &Functional,
    rng: &mut ChaCha8Rng,
) -> Result<Rational> {
    let mut t = Trace::new(Config::new(prog.clone()));
    loop {
        let c = t.curr();
        if let Some(v) = c.result() {
            return f.apply(v);
        }
        if t.steps() == budget {
            return Err(exhausted(budget, c));
        }
        let i = sched.decide(&t);
        let next = match successors(c, i) {
            None if enabled(c).is_empty() => return Err(deadlock(c)),
            None => c.clone(),
            Some(mut outs) if outs.len() == 1 => outs.pop().unwrap().1,
            Some(outs) => {
                // at most two outcomes, from a flip
                let mut rest = outs.into_iter();
                let (p, first) = rest.next().unwrap();
                if bernoulli(rng, &p) {
                    first
                } else {
                    rest.next().unwrap().1
                }
            }
        };
        t.push(next);
    }
}

/// Runs `trials` independent executions. Trial `k` draws from its own
/// ChaCha stream `k` under `seed`, so results do not depend on scheduling of
/// the worker pool.
pub fn monte_carlo(
    prog: &Expr,
    sched: &SchedulerPolicy,
    budget: usize,
    f: &Functional,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<MonteCarlo> {
    if trials < 2 {
        return Err(Error::Config(
            "at least two trials are needed for a variance".into(),
        ));
    }
    let xs = exec.map_range(trials, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        sample(prog, sched, budget, f, &mut rng).map(|r| to_f64(&r))
    });
    let xs: Vec<f64> = xs.into_iter().collect::<Result<_>>()?;
    let n = trials as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let std_error = (variance / n).sqrt();
    Ok(MonteCarlo {
        trials,
        mean,
        variance,
        std_error,
        ci_lo: mean - 3.0 * std_error,
        ci_hi: mean + 3.0 * std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, Val};

    #[test]
    fn coin_mean_is_within_three_sigma() {
        let prog = parse("(flip 1 2)").unwrap();
        let f = Functional::indicator(Val::Bool(true));
        let r = monte_carlo(
            &prog,
            &SchedulerPolicy::round_robin(),
            1,
            &f,
            20_000,
            1,
            Exec::default(),
        )
        .unwrap();
        assert!(r.contains(0.5), "{r:?}");
    }

    #[test]
    fn seeds_reproduce_across_modes() {
        let prog = parse("(if (flip 1 3) (if (flip 2 5) 7 1) 0)").unwrap();
        let f = Functional::int();
        let rr = SchedulerPolicy::round_robin();
        let a = monte_carlo(&prog, &rr, 10, &f, 2_000, 9, Exec::Sequential).unwrap();
        let b = monte_carlo(&prog, &rr, 10, &f, 2_000, 9, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo(&prog, &rr, 10, &f, 2_000, 10, Exec::Sequential).unwrap();
        assert_ne!(a.mean, c.mean);
    }
}
