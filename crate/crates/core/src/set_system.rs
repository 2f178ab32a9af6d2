//! Set systems over a universe of at most 64 elements and their
//! monotone-DNF semantics.
//!
//! A [`SetSystem`] is a family of distinct [`ElementSet`]s over `[n]`; it
//! doubles as the monotone DNF `f(x) = OR_S AND_{i in S} x_i`. Universe
//! elements are dense integer indices; named elements (such as the `(i, a)`
//! pairs of subspace families) are mapped to indices by the `families`
//! module with the name table carried as metadata.

use std::fmt;

use crate::error::{Error, Result};

/// A subset of a universe `[n]`, `n <= 64`, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ElementSet {
    mask: u64,
}

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet { mask: 0 };

    pub fn from_mask(mask: u64) -> Self {
        ElementSet { mask }
    }

    /// Builds from element indices. Indices may arrive in any order but must
    /// be distinct and `< 64`.
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &i in indices {
            if i >= 64 {
                return Err(Error::input(format!("element index {i} exceeds 63")));
            }
            let bit = 1u64 << i;
            if mask & bit != 0 {
                return Err(Error::input(format!("duplicate element index {i}")));
            }
            mask |= bit;
        }
        Ok(ElementSet { mask })
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn members(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut m = self.mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out.push(i);
            m &= m - 1;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 64 && self.mask & (1u64 << i) != 0
    }

    pub fn is_subset_of(&self, other: &ElementSet) -> bool {
        self.mask & other.mask == self.mask
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        ElementSet { mask: self.mask | other.mask }
    }

    pub fn intersection(&self, other: &ElementSet) -> ElementSet {
        ElementSet { mask: self.mask & other.mask }
    }

    pub fn difference(&self, other: &ElementSet) -> ElementSet {
        ElementSet { mask: self.mask & !other.mask }
    }

    pub fn is_disjoint_from(&self, other: &ElementSet) -> bool {
        self.mask & other.mask == 0
    }

    /// Lexicographic order on the ascending member lists; total order used
    /// for all deterministic tie-breaking.
    pub fn cmp_lex(&self, other: &ElementSet) -> std::cmp::Ordering {
        let d = self.mask ^ other.mask;
        if d == 0 {
            return std::cmp::Ordering::Equal;
        }
        let low = d & d.wrapping_neg();
        if self.mask & low != 0 {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.members().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A 0/1 assignment to the universe, identified with the subset of indices
/// set to 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    ones: ElementSet,
}

impl Assignment {
    pub fn from_set(ones: ElementSet) -> Self {
        Assignment { ones }
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        Ok(Assignment { ones: ElementSet::from_indices(indices)? })
    }

    pub fn from_mask(mask: u64) -> Self {
        Assignment { ones: ElementSet::from_mask(mask) }
    }

    pub fn ones(&self) -> ElementSet {
        self.ones
    }

    pub fn mask(&self) -> u64 {
        self.ones.mask()
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1_{}", self.ones)
    }
}

/// Outcome of the proper-upper-bound check: either the relation holds, or a
/// witnessing input separating the two DNFs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProperUpperCheck {
    ProperUpper,
    /// `x = 1_S` with `evaluate(F, x) = 1` and `evaluate(F', x) = 0`.
    Witness(Assignment),
}

/// A family of distinct sets over a universe `[n]`, `n <= 64`.
#[derive(Clone, PartialEq, Eq)]
pub struct SetSystem {
    universe: usize,
    sets: Vec<ElementSet>,
    width: usize,
}

impl SetSystem {
    /// Builds a family; duplicate sets are merged keeping first occurrence
    /// (a family is a set of sets; multiplicity belongs to `WeightedFamily`).
    pub fn new(universe: usize, sets: Vec<ElementSet>) -> Result<Self> {
        if universe > 64 {
            return Err(Error::input(format!(
                "universe size {universe} exceeds the 64-element cap"
            )));
        }
        let umask = universe_mask(universe);
        let mut seen = std::collections::HashSet::with_capacity(sets.len());
        let mut distinct = Vec::with_capacity(sets.len());
        let mut width = 0;
        for s in sets {
            if s.mask() & !umask != 0 {
                return Err(Error::input(format!(
                    "set {s} has elements outside universe of size {universe}"
                )));
            }
            if seen.insert(s.mask()) {
                width = width.max(s.len());
                distinct.push(s);
            }
        }
        Ok(SetSystem { universe, sets: distinct, width })
    }

    pub fn from_members(universe: usize, members: &[Vec<usize>]) -> Result<Self> {
        let sets = members
            .iter()
            .map(|m| ElementSet::from_indices(m))
            .collect::<Result<Vec<_>>>()?;
        SetSystem::new(universe, sets)
    }

    pub fn empty(universe: usize) -> Result<Self> {
        SetSystem::new(universe, Vec::new())
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn universe_set(&self) -> ElementSet {
        ElementSet::from_mask(universe_mask(self.universe))
    }

    pub fn sets(&self) -> &[ElementSet] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> ElementSet {
        self.sets[i]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Max member size; 0 for the empty family.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn contains_set(&self, s: &ElementSet) -> bool {
        self.sets.iter().any(|t| t == s)
    }

    pub fn index_of(&self, s: &ElementSet) -> Option<usize> {
        self.sets.iter().position(|t| t == s)
    }

    /// `f_F(x)`: 1 iff some member is contained in the ones of `x`.
    pub fn evaluate(&self, x: &Assignment) -> Result<bool> {
        if x.mask() & !universe_mask(self.universe) != 0 {
            return Err(Error::input(
                "assignment sets variables outside the universe".to_string(),
            ));
        }
        Ok(self.sets.iter().any(|s| s.is_subset_of(&x.ones())))
    }

    /// Anti-chain check: no member strictly contains another.
    pub fn is_non_redundant(&self) -> bool {
        for (i, s) in self.sets.iter().enumerate() {
            for t in &self.sets[i + 1..] {
                if s.is_subset_of(t) || t.is_subset_of(s) {
                    return false;
                }
            }
        }
        true
    }

    /// Non-empty and free of the empty set.
    pub fn is_non_trivial(&self) -> bool {
        !self.sets.is_empty() && self.sets.iter().all(|s| !s.is_empty())
    }

    /// The sets with no strict superset in the family. Always non-redundant;
    /// keeps at least a `2^-w` fraction of the family.
    pub fn maximal_subsystem(&self) -> SetSystem {
        self.filtered(|s| !self.sets.iter().any(|t| s != t && s.is_subset_of(t)))
    }

    /// The sets with no strict subset in the family: the minimal
    /// representation of the same monotone function.
    pub fn minimal_subsystem(&self) -> SetSystem {
        self.filtered(|s| !self.sets.iter().any(|t| s != t && t.is_subset_of(s)))
    }

    fn filtered(&self, keep: impl Fn(&ElementSet) -> bool) -> SetSystem {
        let sets: Vec<ElementSet> = self.sets.iter().copied().filter(|s| keep(s)).collect();
        let width = sets.iter().map(|s| s.len()).max().unwrap_or(0);
        SetSystem { universe: self.universe, sets, width }
    }

    /// `{S \ T : S in F, T subset of S}`, duplicates merged (first
    /// occurrence order). May contain the empty set; callers needing
    /// non-triviality must check.
    pub fn link(&self, t: &ElementSet) -> SetSystem {
        self.link_with_sources(t).0
    }

    /// `link` plus, for each output set, the index in `self` of the first
    /// member mapping to it. Used by extraction recursions to report
    /// certificates in terms of the original family.
    pub fn link_with_sources(&self, t: &ElementSet) -> (SetSystem, Vec<usize>) {
        let mut seen = std::collections::HashSet::new();
        let mut sets = Vec::new();
        let mut sources = Vec::new();
        for (i, s) in self.sets.iter().enumerate() {
            if t.is_subset_of(s) {
                let residual = s.difference(t);
                if seen.insert(residual.mask()) {
                    sets.push(residual);
                    sources.push(i);
                }
            }
        }
        let width = sets.iter().map(|s| s.len()).max().unwrap_or(0);
        (SetSystem { universe: self.universe, sets, width }, sources)
    }

    /// `K = intersection of all members`; error on the empty family.
    pub fn core_intersection(&self) -> Result<ElementSet> {
        let mut iter = self.sets.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::input("core intersection of an empty family".to_string()))?;
        Ok(iter.fold(*first, |acc, s| acc.intersection(s)))
    }

    /// Is `self` a sub-set-system of `of`?
    pub fn is_proper_lower_of(&self, of: &SetSystem) -> bool {
        self.sets.iter().all(|s| of.contains_set(s))
    }

    /// Union of two families over the same universe (duplicates merged).
    pub fn union_family(&self, other: &SetSystem) -> Result<SetSystem> {
        if self.universe != other.universe {
            return Err(Error::input("family union across different universes".to_string()));
        }
        let mut sets = self.sets.clone();
        sets.extend_from_slice(&other.sets);
        SetSystem::new(self.universe, sets)
    }

    /// Masks sorted ascending; canonical key for memoization and
    /// order-insensitive comparison.
    pub fn canonical_masks(&self) -> Vec<u64> {
        let mut masks: Vec<u64> = self.sets.iter().map(|s| s.mask()).collect();
        masks.sort_unstable();
        masks
    }

    pub fn same_family(&self, other: &SetSystem) -> bool {
        self.universe == other.universe && self.canonical_masks() == other.canonical_masks()
    }
}

impl fmt::Debug for SetSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetSystem(n={}, {{", self.universe)?;
        for (k, s) in self.sets.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}})")
    }
}

pub(crate) fn universe_mask(universe: usize) -> u64 {
    if universe >= 64 {
        u64::MAX
    } else {
        (1u64 << universe) - 1
    }
}

/// Is `fp` a proper upper bound set system for `f`: does every `S in f`
/// contain some `S' in fp`? On failure returns the indicator-vector witness
/// `x = 1_S` for the first offending `S`, which satisfies
/// `evaluate(f, x) = 1` and `evaluate(fp, x) = 0`.
pub fn check_proper_upper(fp: &SetSystem, f: &SetSystem) -> Result<ProperUpperCheck> {
    if fp.universe() != f.universe() {
        return Err(Error::input(
            "proper-upper check requires a common universe".to_string(),
        ));
    }
    for s in f.sets() {
        if !fp.sets().iter().any(|sp| sp.is_subset_of(s)) {
            return Ok(ProperUpperCheck::Witness(Assignment::from_set(*s)));
        }
    }
    Ok(ProperUpperCheck::ProperUpper)
}

/// All distinct non-empty subsets of members of `family`, ordered by
/// (size, lexicographic). These are the only sets with positive mass under
/// any distribution supported on the family.
pub fn candidate_subsets(family: &SetSystem) -> Vec<ElementSet> {
    let mut seen = std::collections::HashSet::new();
    for s in family.sets() {
        let m = s.mask();
        if m == 0 {
            continue;
        }
        // Standard submask walk, skipping the empty set.
        let mut sub = m;
        loop {
            seen.insert(sub);
            sub = (sub - 1) & m;
            if sub == 0 {
                break;
            }
        }
    }
    let mut out: Vec<ElementSet> = seen.into_iter().map(ElementSet::from_mask).collect();
    out.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp_lex(b)));
    out
}
