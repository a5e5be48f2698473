//! The case studies: approximate counters and a two-level skip list, each as
//! a program, a monadic specification, and the functionals relating them.

mod approx;
mod counter;
mod skiplist;

pub use approx::{
    approx_incr, approx_n, approx_n_extrema, approx_n_prime, approx_n_prime_extrema, id,
};
pub use counter::{
    count_true_client, counter_program, dlm_incr, morris_incr, morris_read, two_thread_counter,
    unbiased_incr, unbiased_read, Counter, CounterParams,
};
pub use skiplist::{
    botcost, client_result, levels, rettop, skip_cost_bound, skip_list_add,
    skip_list_add_early_flip, skip_list_client, skip_list_mem, skip_list_new, skip_list_spec,
    skipcost, spec_max_cost, topcost, SkipListKeys, INT_MAX, INT_MIN,
};

/// Named experiment programs with a one-line parameter description.
pub const REGISTRY: &[(&str, &str)] = &[
    ("unbiased", "threads, incrs per thread, MAX"),
    ("morris", "threads, incrs per thread"),
    ("dlm", "threads, incrs per thread, random bits"),
    ("count-true", "two boolean lists, MAX"),
    ("skiplist", "keys per thread, query key, early-flip toggle"),
];
