//! Family-level regularity: exact LP certification, supremum bracketing and
//! heavy-set extraction.

use num::traits::{One, Signed};

use crate::error::{Error, Result};
use crate::lp::{maximize_total_mass, LpOutcome, MassConstraint};
use crate::rational::{pow_i64, rat_usize, Rational};
use crate::set_system::{candidate_subsets, ElementSet, SetSystem};
use crate::weighted::{
    is_kappa_regular, InfeasibleReport, RegularityCertificate, WeightedFamily,
};

pub const DEFAULT_PIVOT_BUDGET: u64 = 500_000;

/// Decides whether some kappa-regular distribution is supported on `family`,
/// by exact LP feasibility. `Regular` carries a witness distribution that
/// passes [`is_kappa_regular`]; `Infeasible` logs the binding constraints of
/// the terminal vertex.
pub fn certify_family(family: &SetSystem, kappa: &Rational) -> Result<RegularityCertificate> {
    certify_family_with_budget(family, kappa, DEFAULT_PIVOT_BUDGET)
}

pub fn certify_family_with_budget(
    family: &SetSystem,
    kappa: &Rational,
    max_pivots: u64,
) -> Result<RegularityCertificate> {
    if !family.is_non_trivial() {
        return Err(Error::input(
            "regularity certification requires a non-trivial family".to_string(),
        ));
    }
    if !kappa.is_positive() {
        return Err(Error::input("kappa must be positive".to_string()));
    }
    // kappa <= 1 bounds every mass by at least 1; any distribution works.
    if *kappa <= Rational::one() {
        return Ok(RegularityCertificate::Regular(WeightedFamily::uniform(family.clone())?));
    }

    let constraints = build_constraints(family, kappa);
    let m = family.len();
    match maximize_total_mass(m, &constraints.lp, max_pivots)? {
        LpOutcome::TargetReached { x, total } => {
            // Scale down to total mass exactly 1; scaling preserves every
            // upper-bound constraint.
            let weights: Vec<Rational> = x.iter().map(|v| v / &total).collect();
            let witness = WeightedFamily::distribution(family.clone(), weights)?;
            debug_assert!(is_kappa_regular(&witness, kappa)?.is_regular());
            Ok(RegularityCertificate::Regular(witness))
        }
        LpOutcome::Optimal { total, binding, .. } => {
            let binding_sets = binding.iter().map(|&i| constraints.subsets[i]).collect();
            Ok(RegularityCertificate::Infeasible(InfeasibleReport {
                kappa: kappa.clone(),
                max_total_mass: total,
                binding: binding_sets,
            }))
        }
    }
}

struct ConstraintSet {
    lp: Vec<MassConstraint>,
    subsets: Vec<ElementSet>,
}

/// One constraint per candidate `T`; candidates sharing the same covering
/// subfamily are collapsed to the tightest bound (largest `|T|`, valid for
/// `kappa > 1`).
fn build_constraints(family: &SetSystem, kappa: &Rational) -> ConstraintSet {
    let mut best: std::collections::HashMap<Vec<usize>, ElementSet> =
        std::collections::HashMap::new();
    for t in candidate_subsets(family) {
        let covering: Vec<usize> = (0..family.len())
            .filter(|&i| t.is_subset_of(&family.set(i)))
            .collect();
        if covering.is_empty() {
            continue;
        }
        match best.get_mut(&covering) {
            Some(cur) => {
                if t.len() > cur.len() {
                    *cur = t;
                }
            }
            None => {
                best.insert(covering, t);
            }
        }
    }
    let mut entries: Vec<(ElementSet, Vec<usize>)> =
        best.into_iter().map(|(vars, t)| (t, vars)).collect();
    entries.sort_unstable_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp_lex(&b.0)));
    let mut lp = Vec::with_capacity(entries.len());
    let mut subsets = Vec::with_capacity(entries.len());
    for (t, vars) in entries {
        lp.push(MassConstraint {
            vars,
            bound: pow_i64(kappa, -(t.len() as i64)),
        });
        subsets.push(t);
    }
    ConstraintSet { lp, subsets }
}

/// A bracket `[lo, hi]` around the supremum of certifiable kappa, with a
/// verified witness at `lo`. Sup-valued quantities are always reported as
/// intervals, never as attained values.
#[derive(Clone, Debug)]
pub struct RegularityInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub witness: WeightedFamily,
}

/// Proven upper bound on any feasible kappa: total mass 1 across at most
/// `|F|` sets gives kappa <= |F|; expected set size >= 1 across `n` elements
/// gives kappa <= n; an intersecting family caps at the width.
pub fn regularity_cap(family: &SetSystem, intersecting: Option<bool>) -> Rational {
    let mut cap = family.len().min(family.universe());
    let is_int = intersecting
        .unwrap_or_else(|| crate::sunflower::is_intersecting(family));
    if is_int {
        cap = cap.min(family.width());
    }
    rat_usize(cap.max(1))
}

/// Binary search bracketing `sup { kappa : certify_family = Regular }` to
/// width `tol`. The lower endpoint is certified feasible with a witness; the
/// upper endpoint is either certified infeasible or the proven cap.
pub fn max_regularity(family: &SetSystem, tol: &Rational) -> Result<RegularityInterval> {
    max_regularity_with_budget(family, tol, DEFAULT_PIVOT_BUDGET)
}

pub fn max_regularity_with_budget(
    family: &SetSystem,
    tol: &Rational,
    max_pivots: u64,
) -> Result<RegularityInterval> {
    if !family.is_non_trivial() {
        return Err(Error::input("max regularity requires a non-trivial family".to_string()));
    }
    if !tol.is_positive() {
        return Err(Error::input("tolerance must be positive".to_string()));
    }
    // Every distribution is 1-regular (all masses <= 1).
    let mut lo = Rational::one();
    let mut witness = WeightedFamily::uniform(family.clone())?;
    let mut hi = regularity_cap(family, None);

    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / rat_usize(2);
        match certify_family_with_budget(family, &mid, max_pivots)? {
            RegularityCertificate::Regular(w) => {
                lo = mid;
                witness = w;
            }
            RegularityCertificate::Infeasible(_) => {
                hi = mid;
            }
            RegularityCertificate::Violation(_) => unreachable!("certify never returns Violation"),
        }
    }
    debug_assert!(is_kappa_regular(&witness, &lo)?.is_regular());
    Ok(RegularityInterval { lo, hi, witness })
}

/// The structure side of the decomposition: a non-empty `T` maximizing
/// `count(T) * kappa^|T|` provided that score strictly exceeds `|F|` (the
/// uniform distribution then violates kappa-regularity at `T`). Ties break
/// toward larger score, then smaller `|T|`, then lexicographic `T`.
pub fn heavy_set(
    family: &SetSystem,
    kappa: &Rational,
) -> Result<Option<(ElementSet, usize)>> {
    if family.is_empty() {
        return Err(Error::input("heavy-set search on an empty family".to_string()));
    }
    if *kappa <= Rational::one() {
        return Err(Error::input("heavy-set search requires kappa > 1".to_string()));
    }
    let threshold = rat_usize(family.len());
    let mut best: Option<(Rational, ElementSet, usize)> = None;
    for t in candidate_subsets(family) {
        let count = family.sets().iter().filter(|s| t.is_subset_of(s)).count();
        if count == 0 {
            continue;
        }
        let score = rat_usize(count) * pow_i64(kappa, t.len() as i64);
        if score <= threshold {
            continue;
        }
        let better = match &best {
            None => true,
            Some((best_score, _, _)) => score > *best_score,
        };
        if better {
            best = Some((score, t, count));
        }
    }
    Ok(best.map(|(_, t, count)| (t, count)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, rat};
    use crate::set_system::SetSystem;

    fn fam(universe: usize, members: &[&[usize]]) -> SetSystem {
        let v: Vec<Vec<usize>> = members.iter().map(|m| m.to_vec()).collect();
        SetSystem::from_members(universe, &v).unwrap()
    }

    fn triangle() -> SetSystem {
        fam(3, &[&[0, 1], &[0, 2], &[1, 2]])
    }

    #[test]
    fn triangle_feasible_at_three_halves() {
        match certify_family(&triangle(), &rat(3, 2)).unwrap() {
            RegularityCertificate::Regular(w) => {
                assert!(is_kappa_regular(&w, &rat(3, 2)).unwrap().is_regular());
            }
            other => panic!("expected regular, got {other:?}"),
        }
    }

    #[test]
    fn triangle_infeasible_at_eight_fifths() {
        // Vertex masses sum to 2, so some vertex carries mass >= 2/3 > 5/8.
        match certify_family(&triangle(), &rat(8, 5)).unwrap() {
            RegularityCertificate::Infeasible(report) => {
                assert!(report.max_total_mass < one());
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn singleton_family_certifies_at_one() {
        let f = fam(1, &[&[0]]);
        assert!(certify_family(&f, &one()).unwrap().is_regular());
        assert!(!certify_family(&f, &rat(11, 10)).unwrap().is_regular());
    }

    #[test]
    fn trivial_family_rejected() {
        assert!(certify_family(&SetSystem::empty(2).unwrap(), &one()).is_err());
        assert!(certify_family(&fam(2, &[&[]]), &one()).is_err());
    }

    #[test]
    fn max_regularity_triangle_brackets_three_halves() {
        let interval = max_regularity(&triangle(), &rat(1, 10_000)).unwrap();
        assert!(interval.lo <= rat(3, 2) && rat(3, 2) <= interval.hi);
        assert!(&interval.hi - &interval.lo <= rat(1, 10_000));
    }

    #[test]
    fn max_regularity_singleton() {
        let interval = max_regularity(&fam(1, &[&[0]]), &rat(1, 100)).unwrap();
        assert!(interval.lo <= one() && one() <= interval.hi);
    }

    #[test]
    fn heavy_set_examples() {
        let f = fam(3, &[&[0], &[0, 1], &[0, 2]]);
        let (t, count) = heavy_set(&f, &rat(2, 1)).unwrap().unwrap();
        assert_eq!(t, ElementSet::from_indices(&[0]).unwrap());
        assert_eq!(count, 3);

        // Two disjoint blocks of two transversal sets: uniform is exactly
        // 2-regular, so no heavy set at kappa = 2.
        let blocks = fam(4, &[&[0, 2], &[0, 3], &[1, 2], &[1, 3]]);
        assert!(heavy_set(&blocks, &rat(2, 1)).unwrap().is_none());

        let single = fam(1, &[&[0]]);
        let (t, _) = heavy_set(&single, &rat(2, 1)).unwrap().unwrap();
        assert_eq!(t, ElementSet::from_indices(&[0]).unwrap());
    }
}
