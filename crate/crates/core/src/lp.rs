//! Exact feasibility of `A x = b, x ≥ 0` over the rationals.
//!
//! Phase-one simplex on a dense tableau with one artificial variable per row
//! and Bland's rule (smallest eligible index enters, ties in the ratio test go
//! to the smallest basic index), which guarantees termination without any
//! tolerance. When the artificial objective cannot reach zero the final basis
//! yields a Farkas certificate `y` with `yᵀA ≤ 0` and `yᵀb > 0`.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// A nonnegative solution of `A x = b`.
    Feasible(Vec<Rational>),
    /// `y` with `yᵀA_j ≤ 0` for every column `j` and `yᵀb > 0`.
    Infeasible(Vec<Rational>),
}

/// Decides whether `A x = b` has a solution with `x ≥ 0`.
///
/// `a` is row-major with `b.len()` rows; every row must have the same length.
pub fn feasibility(a: &[Vec<Rational>], b: &[Rational]) -> Feasibility {
    let m = b.len();
    assert_eq!(a.len(), m, "one row of A per entry of b");
    let n = a.first().map_or(0, Vec::len);
    assert!(a.iter().all(|r| r.len() == n), "ragged constraint matrix");

    if m == 0 {
        return Feasibility::Feasible(vec![Rational::zero(); n]);
    }

    // Flip rows so the right-hand side is nonnegative.
    let sign: Vec<bool> = b.iter().map(Signed::is_negative).collect();
    let width = n + m;
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(width);
        for v in &a[i] {
            row.push(if sign[i] { -v.clone() } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i {
                Rational::one()
            } else {
                Rational::zero()
            });
        }
        tab.push(row);
        rhs.push(if sign[i] { -b[i].clone() } else { b[i].clone() });
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let cost = |j: usize| {
        if j >= n {
            Rational::one()
        } else {
            Rational::zero()
        }
    };

    // reduced costs d_j = c_j − Σ_i c_B(i) T[i][j]
    let mut d: Vec<Rational> = (0..width)
        .map(|j| {
            let s: Rational = (0..m).map(|i| cost(basis[i]) * &tab[i][j]).sum();
            cost(j) - s
        })
        .collect();

    loop {
        let Some(enter) = (0..width).find(|&j| d[j].is_negative()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<Rational> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let r = &rhs[i] / &tab[i][enter];
                let better = match &best {
                    None => true,
                    Some(bv) => r < *bv || (r == *bv && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(r);
                    leave = Some(i);
                }
            }
        }
        // Phase one is bounded below by zero, so an improving column always
        // has a positive entry.
        let r = leave.expect("phase-one objective is bounded");
        pivot(&mut tab, &mut rhs, &mut d, r, enter);
        basis[r] = enter;
    }

    let objective: Rational = (0..m).map(|i| cost(basis[i]) * &rhs[i]).sum();
    if objective.is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (i, &j) in basis.iter().enumerate() {
            if j < n {
                x[j] = rhs[i].clone();
            }
        }
        Feasibility::Feasible(x)
    } else {
        // y_flipped = c_Bᵀ B⁻¹; the artificial block of the tableau holds B⁻¹.
        let y = (0..m)
            .map(|k| {
                let yf: Rational = (0..m).map(|i| cost(basis[i]) * &tab[i][n + k]).sum();
                if sign[k] {
                    -yf
                } else {
                    yf
                }
            })
            .collect();
        Feasibility::Infeasible(y)
    }
}

fn pivot(tab: &mut [Vec<Rational>], rhs: &mut [Rational], d: &mut [Rational], r: usize, c: usize) {
    let p = tab[r][c].clone();
    for v in tab[r].iter_mut() {
        *v /= &p;
    }
    rhs[r] /= &p;
    let prow = tab[r].clone();
    let prhs = rhs[r].clone();
    for i in 0..tab.len() {
        if i == r || tab[i][c].is_zero() {
            continue;
        }
        let f = tab[i][c].clone();
        for (v, pv) in tab[i].iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
        rhs[i] -= &f * &prhs;
    }
    if !d[c].is_zero() {
        let f = d[c].clone();
        for (v, pv) in d.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
}

/// Checks a claimed solution or certificate against the original system.
pub fn verify(a: &[Vec<Rational>], b: &[Rational], outcome: &Feasibility) -> bool {
    let n = a.first().map_or(0, Vec::len);
    match outcome {
        Feasibility::Feasible(x) => {
            x.len() == n
                && x.iter().all(|v| !v.is_negative())
                && a.iter().zip(b).all(|(row, bi)| {
                    let s: Rational = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum();
                    s == *bi
                })
        }
        Feasibility::Infeasible(y) => {
            let yb: Rational = y.iter().zip(b).map(|(yi, bi)| yi * bi).sum();
            yb.is_positive()
                && (0..n).all(|j| {
                    let s: Rational = y.iter().zip(a).map(|(yi, row)| yi * &row[j]).sum();
                    !s.is_positive()
                })
        }
    }
}
