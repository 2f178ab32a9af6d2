//! Weighted families and regular distributions.
//!
//! A [`WeightedFamily`] attaches an exact rational weight to every member of
//! a [`SetSystem`]; with total weight 1 it models a distribution `D` on the
//! family. A distribution is kappa-regular when every fixed non-empty `T` is
//! contained in a sampled set with probability at most `kappa^-|T|`.

use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{pow_i64, rat_usize, Rational};
use crate::set_system::{candidate_subsets, ElementSet, SetSystem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedFamily {
    family: SetSystem,
    weights: Vec<Rational>,
}

impl WeightedFamily {
    /// Non-negative weights, one per member.
    pub fn new(family: SetSystem, weights: Vec<Rational>) -> Result<Self> {
        if family.len() != weights.len() {
            return Err(Error::input(format!(
                "{} weights for {} sets",
                weights.len(),
                family.len()
            )));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::input("negative weight".to_string()));
        }
        Ok(WeightedFamily { family, weights })
    }

    /// A distribution: weights sum to exactly 1 and every positively-weighted
    /// set is non-empty (regularity is undefined on the empty set).
    pub fn distribution(family: SetSystem, weights: Vec<Rational>) -> Result<Self> {
        let d = WeightedFamily::new(family, weights)?;
        if !d.total_mass().is_one() {
            return Err(Error::input("distribution weights must sum to 1".to_string()));
        }
        d.check_support_non_empty()?;
        Ok(d)
    }

    /// The uniform distribution on a non-trivial family.
    pub fn uniform(family: SetSystem) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::input("uniform distribution over an empty family".to_string()));
        }
        let w = rat_usize(family.len()).recip();
        let weights = vec![w; family.len()];
        WeightedFamily::distribution(family, weights)
    }

    fn check_support_non_empty(&self) -> Result<()> {
        for (s, w) in self.family.sets().iter().zip(&self.weights) {
            if w.is_positive() && s.is_empty() {
                return Err(Error::input(
                    "distribution puts positive mass on the empty set".to_string(),
                ));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> &SetSystem {
        &self.family
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn total_mass(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn is_distribution(&self) -> bool {
        self.total_mass().is_one() && self.check_support_non_empty().is_ok()
    }

    /// Indices of positively-weighted sets.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i].is_positive()).collect()
    }

    /// `Pr_{S ~ D}[T subset of S]`, exactly. Total mass for `T = {}`.
    pub fn subset_mass(&self, t: &ElementSet) -> Rational {
        let mut mass = Rational::zero();
        for (s, w) in self.family.sets().iter().zip(&self.weights) {
            if t.is_subset_of(s) {
                mass += w;
            }
        }
        mass
    }

    /// Total weight of the members of `sub` (matched by set equality).
    pub fn mass_of_subfamily(&self, sub: &SetSystem) -> Result<Rational> {
        let mut mass = Rational::zero();
        for s in sub.sets() {
            let i = self
                .family
                .index_of(s)
                .ok_or_else(|| Error::input(format!("set {s} not in the weighted family")))?;
            mass += &self.weights[i];
        }
        Ok(mass)
    }
}

/// A witnessed failure of kappa-regularity: `mass * kappa^|T| > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityViolation {
    pub witness_set: ElementSet,
    pub mass: Rational,
}

/// Diagnostic report for an infeasible family-level certification. No dual
/// certificate is produced; the binding constraint family of the terminal
/// LP vertex is logged instead.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfeasibleReport {
    pub kappa: Rational,
    /// Optimal value of `max sum x_S` under the regularity constraints;
    /// `< 1` exactly when no kappa-regular distribution exists.
    pub max_total_mass: Rational,
    pub binding: Vec<ElementSet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegularityCertificate {
    /// A distribution witnessing kappa-regularity.
    Regular(WeightedFamily),
    /// A specific heavy set for the queried distribution.
    Violation(RegularityViolation),
    /// Family-level certification found the LP infeasible.
    Infeasible(InfeasibleReport),
}

impl RegularityCertificate {
    pub fn is_regular(&self) -> bool {
        matches!(self, RegularityCertificate::Regular(_))
    }
}

/// Exact kappa-regularity check for a distribution. Only `T` contained in at
/// least one support set are enumerated (all others have mass 0). On failure
/// returns a maximally-violating `T`: largest excess `mass - kappa^-|T|`,
/// ties broken by smaller `|T|` then lexicographic.
pub fn is_kappa_regular(d: &WeightedFamily, kappa: &Rational) -> Result<RegularityCertificate> {
    if !d.is_distribution() {
        return Err(Error::input(
            "regularity is defined for distributions on non-empty sets".to_string(),
        ));
    }
    if !kappa.is_positive() {
        return Err(Error::input("kappa must be positive".to_string()));
    }
    let support_sets: Vec<ElementSet> =
        d.support().iter().map(|&i| d.family().set(i)).collect();
    let support_family = SetSystem::new(d.family().universe(), support_sets)?;

    let mut worst: Option<(Rational, ElementSet, Rational)> = None;
    for t in candidate_subsets(&support_family) {
        let mass = d.subset_mass(&t);
        let excess = &mass - pow_i64(kappa, -(t.len() as i64));
        if excess.is_positive() {
            let better = match &worst {
                None => true,
                Some((best_excess, _, _)) => excess > *best_excess,
            };
            if better {
                worst = Some((excess.clone(), t, mass));
            }
        }
    }
    match worst {
        None => Ok(RegularityCertificate::Regular(d.clone())),
        Some((_, witness_set, mass)) => Ok(RegularityCertificate::Violation(
            RegularityViolation { witness_set, mass },
        )),
    }
}

/// Push-forward of `D` along a shrinking map `phi` given member-wise:
/// `phi[i]` is the image of the i-th member and must be a non-empty subset
/// of it. `D'(S') = sum of D(S) over the preimage of S'`.
pub fn pushforward_upper(d: &WeightedFamily, phi: &[ElementSet]) -> Result<WeightedFamily> {
    if phi.len() != d.family().len() {
        return Err(Error::input("phi must map every member of the family".to_string()));
    }
    for (s, img) in d.family().sets().iter().zip(phi) {
        if !img.is_subset_of(s) {
            return Err(Error::input(format!("phi({s}) = {img} is not a subset of {s}")));
        }
        if img.is_empty() {
            return Err(Error::input(format!("phi({s}) is empty")));
        }
    }
    let mut order: Vec<ElementSet> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut weights: Vec<Rational> = Vec::new();
    for (img, w) in phi.iter().zip(d.weights()) {
        match index.get(&img.mask()) {
            Some(&i) => {
                let slot: &mut Rational = &mut weights[i];
                *slot += w;
            }
            None => {
                index.insert(img.mask(), order.len());
                order.push(*img);
                weights.push(w.clone());
            }
        }
    }
    let family = SetSystem::new(d.family().universe(), order)?;
    WeightedFamily::new(family, weights)
}

/// Conditions `D` on a subfamily with positive mass; returns the renormalized
/// restriction and the mass fraction `alpha = D(F')`.
pub fn condition(d: &WeightedFamily, sub: &SetSystem) -> Result<(WeightedFamily, Rational)> {
    let alpha = d.mass_of_subfamily(sub)?;
    if !alpha.is_positive() {
        return Err(Error::input("conditioning on a zero-mass subfamily".to_string()));
    }
    let mut sets = Vec::with_capacity(sub.len());
    let mut weights = Vec::with_capacity(sub.len());
    for s in sub.sets() {
        let i = d.family().index_of(s).expect("checked by mass_of_subfamily");
        sets.push(*s);
        weights.push(d.weight(i) / &alpha);
    }
    let family = SetSystem::new(d.family().universe(), sets)?;
    Ok((WeightedFamily::new(family, weights)?, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, rat};

    fn fam(universe: usize, members: &[&[usize]]) -> SetSystem {
        let v: Vec<Vec<usize>> = members.iter().map(|m| m.to_vec()).collect();
        SetSystem::from_members(universe, &v).unwrap()
    }

    fn eset(indices: &[usize]) -> ElementSet {
        ElementSet::from_indices(indices).unwrap()
    }

    #[test]
    fn subset_mass_examples() {
        let d = WeightedFamily::uniform(fam(3, &[&[0, 1], &[0, 2]])).unwrap();
        assert_eq!(d.subset_mass(&eset(&[0])), one());
        assert_eq!(d.subset_mass(&eset(&[1])), rat(1, 2));
        assert_eq!(d.subset_mass(&ElementSet::EMPTY), one());
    }

    #[test]
    fn regularity_of_two_block_transversals() {
        // Two blocks {0,1}, {2,3}; the four transversal pairs.
        let f = fam(4, &[&[0, 2], &[0, 3], &[1, 2], &[1, 3]]);
        let d = WeightedFamily::uniform(f).unwrap();
        assert!(is_kappa_regular(&d, &rat(2, 1)).unwrap().is_regular());
        match is_kappa_regular(&d, &rat(21, 10)).unwrap() {
            RegularityCertificate::Violation(v) => {
                assert_eq!(v.witness_set.len(), 1);
                assert_eq!(v.mass, rat(1, 2));
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn point_mass_regularity_boundary() {
        let d = WeightedFamily::distribution(fam(1, &[&[0]]), vec![one()]).unwrap();
        assert!(is_kappa_regular(&d, &one()).unwrap().is_regular());
        assert!(!is_kappa_regular(&d, &rat(101, 100)).unwrap().is_regular());
    }

    #[test]
    fn empty_support_set_rejected() {
        let f = fam(2, &[&[]]);
        assert!(WeightedFamily::distribution(f, vec![one()]).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let d = WeightedFamily::uniform(fam(4, &[&[0, 1], &[2, 3]])).unwrap();
        let phi = vec![eset(&[0]), eset(&[2])];
        let pushed = pushforward_upper(&d, &phi).unwrap();
        assert!(pushed.family().same_family(&fam(4, &[&[0], &[2]])));
        assert_eq!(pushed.weights(), &[rat(1, 2), rat(1, 2)]);

        let identity: Vec<ElementSet> = d.family().sets().to_vec();
        let same = pushforward_upper(&d, &identity).unwrap();
        assert_eq!(same.weights(), d.weights());

        let d2 = WeightedFamily::distribution(
            fam(3, &[&[0, 1], &[0, 2]]),
            vec![rat(3, 4), rat(1, 4)],
        )
        .unwrap();
        let merged = pushforward_upper(&d2, &[eset(&[0]), eset(&[0])]).unwrap();
        assert_eq!(merged.family().len(), 1);
        assert_eq!(merged.weights()[0], one());
    }

    #[test]
    fn pushforward_rejects_non_shrinking_maps() {
        let d = WeightedFamily::uniform(fam(3, &[&[0, 1]])).unwrap();
        assert!(pushforward_upper(&d, &[eset(&[2])]).is_err());
        assert!(pushforward_upper(&d, &[ElementSet::EMPTY]).is_err());
    }

    #[test]
    fn condition_examples() {
        let f = fam(4, &[&[0], &[1], &[2], &[3]]);
        let d = WeightedFamily::uniform(f).unwrap();
        let sub = fam(4, &[&[1], &[3]]);
        let (restricted, alpha) = condition(&d, &sub).unwrap();
        assert_eq!(alpha, rat(1, 2));
        assert_eq!(restricted.weights(), &[rat(1, 2), rat(1, 2)]);

        let full = fam(4, &[&[0], &[1], &[2], &[3]]);
        let (_, alpha_full) = condition(&d, &full).unwrap();
        assert_eq!(alpha_full, one());

        let d2 = WeightedFamily::distribution(
            fam(2, &[&[0], &[1]]),
            vec![rat(2, 3), rat(1, 3)],
        )
        .unwrap();
        let (point, alpha2) = condition(&d2, &fam(2, &[&[1]])).unwrap();
        assert_eq!(alpha2, rat(1, 3));
        assert_eq!(point.weights(), &[one()]);
    }

    #[test]
    fn condition_rejects_zero_mass() {
        let d = WeightedFamily::distribution(
            fam(2, &[&[0], &[1]]),
            vec![one(), rat(0, 1)],
        )
        .unwrap();
        assert!(condition(&d, &fam(2, &[&[1]])).is_err());
    }
}
