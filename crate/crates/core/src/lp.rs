//! Exact-rational simplex for the regularity feasibility problem.
//!
//! Certifying that a family supports a kappa-regular distribution asks for
//! `x_S >= 0`, `sum x_S = 1`, and `sum_{S superset of T} x_S <= kappa^-|T|`
//! for every candidate `T`. The constraint polytope without the equality is
//! downward closed under scaling, so feasibility is equivalent to
//! `max sum x_S >= 1` over the inequality system alone: the slack basis is
//! feasible at the origin and no phase-one is needed. Bland's pivot rule
//! guarantees termination; a pivot budget guards against runaway instances.

use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// One inequality `sum_{j in vars} x_j <= bound`.
#[derive(Clone, Debug)]
pub struct MassConstraint {
    pub vars: Vec<usize>,
    pub bound: Rational,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    /// A point with `sum x_j >= 1` (not necessarily optimal; the search stops
    /// as soon as the target is reached).
    TargetReached { x: Vec<Rational>, total: Rational },
    /// The true optimum of `max sum x_j`, which is `< 1`; `binding` lists the
    /// constraint indices tight at the optimal vertex.
    Optimal { x: Vec<Rational>, total: Rational, binding: Vec<usize> },
}

/// Maximizes `sum_j x_j` subject to `constraints` and `x >= 0`, stopping
/// early once the total reaches 1. Every variable must appear in at least
/// one constraint (otherwise the program is unbounded and the input family
/// was malformed).
pub fn maximize_total_mass(
    num_vars: usize,
    constraints: &[MassConstraint],
    max_pivots: u64,
) -> Result<LpOutcome> {
    let m = constraints.len();
    let n = num_vars;
    for c in constraints {
        if c.bound.is_negative() {
            return Err(Error::input("negative constraint bound".to_string()));
        }
    }
    {
        let mut covered = vec![false; n];
        for c in constraints {
            for &j in &c.vars {
                covered[j] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::input(
                "unconstrained variable; objective would be unbounded".to_string(),
            ));
        }
    }

    // Dense tableau: m constraint rows over n structural + m slack columns,
    // plus the right-hand side; the last row carries reduced costs and the
    // negated objective value.
    let cols = n + m + 1;
    let mut t: Vec<Vec<Rational>> = vec![vec![Rational::zero(); cols]; m + 1];
    for (i, c) in constraints.iter().enumerate() {
        for &j in &c.vars {
            t[i][j] = Rational::one();
        }
        t[i][n + i] = Rational::one();
        t[i][cols - 1] = c.bound.clone();
    }
    for j in 0..n {
        t[m][j] = Rational::one();
    }
    // basis[i]: variable index basic in row i.
    let mut basis: Vec<usize> = (n..n + m).collect();
    let one = Rational::one();

    let mut pivots = 0u64;
    loop {
        // Objective value so far: -t[m][rhs].
        let value = -t[m][cols - 1].clone();
        if value >= one {
            let x = extract(&t, &basis, n, cols);
            let total = x.iter().sum();
            return Ok(LpOutcome::TargetReached { x, total });
        }

        // Bland: entering column = smallest index with positive reduced cost.
        let entering = (0..cols - 1).find(|&j| t[m][j].is_positive());
        let Some(entering) = entering else {
            let x = extract(&t, &basis, n, cols);
            let total: Rational = x.iter().sum();
            let binding = (0..m)
                .filter(|&i| {
                    let slack = basis
                        .iter()
                        .position(|&b| b == n + i)
                        .map(|row| t[row][cols - 1].clone())
                        .unwrap_or_else(Rational::zero);
                    slack.is_zero()
                })
                .collect();
            return Ok(LpOutcome::Optimal { x, total, binding });
        };

        // Ratio test; ties by smallest basic variable index (Bland).
        let mut leaving: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[i][entering].is_positive() {
                let ratio = &t[i][cols - 1] / &t[i][entering];
                let replace = match &leaving {
                    None => true,
                    Some((best_row, best_ratio)) => {
                        ratio < *best_ratio
                            || (ratio == *best_ratio && basis[i] < basis[*best_row])
                    }
                };
                if replace {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leaving else {
            // Unreachable given the coverage check above.
            return Err(Error::input("unbounded objective".to_string()));
        };

        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::resource(format!(
                "simplex exceeded the pivot budget of {max_pivots}"
            )));
        }

        // Pivot on (pivot_row, entering).
        let pivot = t[pivot_row][entering].clone();
        for v in t[pivot_row].iter_mut() {
            *v /= &pivot;
        }
        for i in 0..=m {
            if i == pivot_row || t[i][entering].is_zero() {
                continue;
            }
            let factor = t[i][entering].clone();
            for j in 0..cols {
                let delta = &factor * &t[pivot_row][j];
                t[i][j] -= delta;
            }
        }
        basis[pivot_row] = entering;
    }
}

fn extract(t: &[Vec<Rational>], basis: &[usize], n: usize, cols: usize) -> Vec<Rational> {
    let mut x = vec![Rational::zero(); n];
    for (row, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[row][cols - 1].clone();
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, rat};

    #[test]
    fn reaches_target_when_feasible() {
        // x0 <= 2/3, x1 <= 2/3: total 4/3 >= 1.
        let constraints = vec![
            MassConstraint { vars: vec![0], bound: rat(2, 3) },
            MassConstraint { vars: vec![1], bound: rat(2, 3) },
        ];
        match maximize_total_mass(2, &constraints, 10_000).unwrap() {
            LpOutcome::TargetReached { total, .. } => assert!(total >= one()),
            other => panic!("expected target, got {other:?}"),
        }
    }

    #[test]
    fn reports_optimum_when_infeasible() {
        // x0 + x1 <= 1/2 and x1 <= 1/4: optimum 1/2 < 1.
        let constraints = vec![
            MassConstraint { vars: vec![0, 1], bound: rat(1, 2) },
            MassConstraint { vars: vec![1], bound: rat(1, 4) },
        ];
        match maximize_total_mass(2, &constraints, 10_000).unwrap() {
            LpOutcome::Optimal { total, binding, .. } => {
                assert_eq!(total, rat(1, 2));
                assert!(binding.contains(&0));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn pivot_budget_enforced() {
        let constraints = vec![
            MassConstraint { vars: vec![0, 1], bound: rat(1, 2) },
            MassConstraint { vars: vec![0], bound: rat(1, 4) },
            MassConstraint { vars: vec![1], bound: rat(1, 4) },
        ];
        assert!(matches!(
            maximize_total_mass(2, &constraints, 0),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn uncovered_variable_rejected() {
        let constraints = vec![MassConstraint { vars: vec![0], bound: one() }];
        assert!(maximize_total_mass(2, &constraints, 100).is_err());
    }

    #[test]
    fn solution_satisfies_constraints() {
        let constraints = vec![
            MassConstraint { vars: vec![0, 1], bound: rat(3, 4) },
            MassConstraint { vars: vec![1, 2], bound: rat(3, 4) },
            MassConstraint { vars: vec![0, 2], bound: rat(3, 4) },
        ];
        match maximize_total_mass(3, &constraints, 10_000).unwrap() {
            LpOutcome::TargetReached { x, total } => {
                assert!(total >= one());
                for c in &constraints {
                    let lhs: Rational = c.vars.iter().map(|&j| x[j].clone()).sum();
                    assert!(lhs <= c.bound);
                }
            }
            other => panic!("expected target, got {other:?}"),
        }
    }
}
