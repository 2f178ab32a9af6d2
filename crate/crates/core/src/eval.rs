//! Exact and Monte-Carlo p-biased evaluation, approximate-sunflower
//! predicates, the width-halving sandwich recursion against pluggable
//! compression oracles, and the numeric side conditions it relies on.

use std::collections::HashMap;

use num::traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::{pow_i64, rat, Rational};
use crate::set_system::{
    candidate_subsets, check_proper_upper, ElementSet, ProperUpperCheck, SetSystem,
};

fn check_probability(p: &Rational, name: &str) -> Result<()> {
    if !p.is_positive() || *p >= Rational::one() {
        return Err(Error::input(format!("{name} must lie strictly between 0 and 1")));
    }
    Ok(())
}

/// `Pr_{W ~ X_p}[some S in F is contained in W]`, exactly.
///
/// Splits on the most frequent element with memoization on the canonical
/// residual subsystem. Worst case exponential; monotone-DNF counting is
/// hard in general and desk scale is the contract here.
pub fn satisfaction_probability(f: &SetSystem, p: &Rational) -> Result<Rational> {
    check_probability(p, "p")?;
    let masks = reduce_to_minimal(f.sets().iter().map(|s| s.mask()).collect());
    let q = Rational::one() - p;
    let mut memo: HashMap<Vec<u64>, Rational> = HashMap::new();
    Ok(sat_prob_rec(&masks, p, &q, &mut memo))
}

/// Keeps only inclusion-minimal masks (the event is unchanged) and collapses
/// to `[0]` when the empty set is present.
fn reduce_to_minimal(mut masks: Vec<u64>) -> Vec<u64> {
    masks.sort_unstable();
    masks.dedup();
    if masks.first() == Some(&0) {
        return vec![0];
    }
    let mut keep: Vec<u64> = Vec::with_capacity(masks.len());
    'outer: for (i, &m) in masks.iter().enumerate() {
        for (j, &other) in masks.iter().enumerate() {
            if i != j && other & m == other && other != m {
                continue 'outer;
            }
        }
        keep.push(m);
    }
    keep
}

fn sat_prob_rec(
    masks: &[u64],
    p: &Rational,
    q: &Rational,
    memo: &mut HashMap<Vec<u64>, Rational>,
) -> Rational {
    if masks.is_empty() {
        return Rational::zero();
    }
    if masks[0] == 0 {
        return Rational::one();
    }
    if masks.len() == 1 {
        return pow_i64(p, masks[0].count_ones() as i64);
    }
    if masks.iter().all(|m| m.count_ones() == 1) {
        return Rational::one() - pow_i64(q, masks.len() as i64);
    }
    if let Some(hit) = memo.get(masks) {
        return hit.clone();
    }

    // Most frequent element, ties to the lowest index.
    let mut counts = [0u32; 64];
    for &m in masks {
        let mut rest = m;
        while rest != 0 {
            counts[rest.trailing_zeros() as usize] += 1;
            rest &= rest - 1;
        }
    }
    let e = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap();
    let bit = 1u64 << e;

    let ones = reduce_to_minimal(masks.iter().map(|&m| m & !bit).collect());
    let zeros: Vec<u64> = masks.iter().copied().filter(|m| m & bit == 0).collect();

    let p_one = sat_prob_rec(&ones, p, q, memo);
    let p_zero = sat_prob_rec(&zeros, p, q, memo);
    let result = p * p_one + q * p_zero;
    memo.insert(masks.to_vec(), result.clone());
    result
}

/// `(p, eps)`-satisfying: the satisfaction probability strictly exceeds
/// `1 - eps`.
pub fn is_satisfying(f: &SetSystem, p: &Rational, eps: &Rational) -> Result<bool> {
    check_probability(eps, "eps")?;
    let prob = satisfaction_probability(f, p)?;
    Ok(prob > Rational::one() - eps)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Deterministic mixing of a base seed with a stream index; chunked and
/// parallel consumers derive identical streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const MC_CHUNK: u64 = 4096;

/// Unbiased estimator of the satisfaction probability; deterministic given
/// the seed and independent of any chunk-level parallel split.
pub fn monte_carlo_satisfaction(
    f: &SetSystem,
    p: &Rational,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_probability(p, "p")?;
    let num = p
        .numer()
        .to_u64()
        .ok_or_else(|| Error::input("p numerator too large for sampling".to_string()))?;
    let den = p
        .denom()
        .to_u64()
        .ok_or_else(|| Error::input("p denominator too large for sampling".to_string()))?;
    let masks: Vec<u64> = f.sets().iter().map(|s| s.mask()).collect();
    let n = f.universe();

    let mut hits = 0u64;
    let mut done = 0u64;
    let mut chunk = 0u64;
    while done < trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, chunk));
        let in_chunk = MC_CHUNK.min(trials - done);
        for _ in 0..in_chunk {
            let mut w = 0u64;
            for i in 0..n {
                if rng.random_range(0..den) < num {
                    w |= 1u64 << i;
                }
            }
            if masks.iter().any(|&m| m & w == m) {
                hits += 1;
            }
        }
        done += in_chunk;
        chunk += 1;
    }
    let estimate = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
    let stderr = if trials == 0 {
        0.0
    } else {
        (estimate * (1.0 - estimate) / trials as f64).sqrt()
    };
    Ok(MonteCarloEstimate { hits, trials, estimate, stderr })
}

/// Result of the approximate-sunflower predicate. `degenerate` marks the
/// case where the residual system contains the empty set (the core equals a
/// member), which forces probability 1; downstream sunflower extraction
/// needs `|F| >= 2` and non-redundancy, so callers can reject on the flag.
#[derive(Clone, Debug)]
pub struct ApproxSunflowerCheck {
    pub holds: bool,
    pub degenerate: bool,
    pub core: ElementSet,
    pub residual_probability: Rational,
}

/// Strips the common core and tests `(p, eps)`-satisfaction of the residual
/// system.
pub fn is_approx_sunflower(
    f: &SetSystem,
    p: &Rational,
    eps: &Rational,
) -> Result<ApproxSunflowerCheck> {
    check_probability(eps, "eps")?;
    let core = f.core_intersection()?;
    let residual = f.link(&core);
    let degenerate = residual.sets().iter().any(|s| s.is_empty());
    let residual_probability = if degenerate {
        Rational::one()
    } else {
        satisfaction_probability(&residual, p)?
    };
    let holds = residual_probability > Rational::one() - eps;
    Ok(ApproxSunflowerCheck { holds, degenerate, core, residual_probability })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproxSearchMode {
    /// Scan the link subfamilies `F_T = {S in F : T subset of S}` over
    /// `T = {}` and all candidate `T`.
    LinkSearch,
    /// Scan all subfamilies of size >= 2; requires `|F| <= 20`.
    Exhaustive,
}

#[derive(Clone, Debug)]
pub struct ApproxSunflowerFind {
    pub indices: Vec<usize>,
    pub subfamily: SetSystem,
    pub check: ApproxSunflowerCheck,
}

/// Searches for a subfamily of size >= 2 forming a `(p, eps)`-approximate
/// sunflower. A returned subfamily always re-verifies.
pub fn find_approx_sunflower(
    f: &SetSystem,
    p: &Rational,
    eps: &Rational,
    mode: ApproxSearchMode,
) -> Result<Option<ApproxSunflowerFind>> {
    match mode {
        ApproxSearchMode::LinkSearch => {
            let mut candidates: Vec<Option<ElementSet>> = vec![None];
            candidates.extend(candidate_subsets(f).into_iter().map(Some));
            for t in candidates {
                let indices: Vec<usize> = match &t {
                    None => (0..f.len()).collect(),
                    Some(t) => (0..f.len()).filter(|&i| t.is_subset_of(&f.set(i))).collect(),
                };
                if indices.len() < 2 {
                    continue;
                }
                if let Some(found) = try_subfamily(f, &indices, p, eps)? {
                    return Ok(Some(found));
                }
            }
            Ok(None)
        }
        ApproxSearchMode::Exhaustive => {
            if f.len() > 20 {
                return Err(Error::input(
                    "exhaustive approximate-sunflower search capped at 20 sets".to_string(),
                ));
            }
            let m = f.len();
            for mask in 0u32..(1u32 << m) {
                if mask.count_ones() < 2 {
                    continue;
                }
                let indices: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
                if let Some(found) = try_subfamily(f, &indices, p, eps)? {
                    return Ok(Some(found));
                }
            }
            Ok(None)
        }
    }
}

fn try_subfamily(
    f: &SetSystem,
    indices: &[usize],
    p: &Rational,
    eps: &Rational,
) -> Result<Option<ApproxSunflowerFind>> {
    let sets: Vec<ElementSet> = indices.iter().map(|&i| f.set(i)).collect();
    let subfamily = SetSystem::new(f.universe(), sets)?;
    if subfamily.len() < 2 {
        return Ok(None);
    }
    let check = is_approx_sunflower(&subfamily, p, eps)?;
    if check.holds {
        Ok(Some(ApproxSunflowerFind { indices: indices.to_vec(), subfamily, check }))
    } else {
        Ok(None)
    }
}

/// A width-bounded approximate-rewriting oracle: given `F` and an error
/// budget, produce a proper upper bound system for `F` of width at most
/// `width(F)` whose exact uniform-measure distance from `F` is within the
/// budget. Output is re-verified by the recursion driver.
pub trait CompressionOracle {
    fn compress(&self, f: &SetSystem, eps: &Rational) -> Result<SetSystem>;
    fn name(&self) -> &str;
}

/// Returns its input unchanged; distance 0.
pub struct IdentityOracle;

impl CompressionOracle for IdentityOracle {
    fn compress(&self, f: &SetSystem, _eps: &Rational) -> Result<SetSystem> {
        Ok(f.clone())
    }

    fn name(&self) -> &str {
        "identity"
    }
}

pub const DEFAULT_ORACLE_BUDGET: u64 = 2_000_000;

/// Smallest proper upper bound system within exact distance `eps` of `f`
/// under the uniform measure. Candidates are non-empty subsets of members;
/// the search runs by increasing size, breaking ties by fewer total
/// elements, then lexicographically. No size bound is promised.
pub fn exhaustive_compression_oracle(
    f: &SetSystem,
    eps: &Rational,
    budget: u64,
) -> Result<SetSystem> {
    if f.len() > 12 || f.universe() > 12 {
        return Err(Error::input(
            "exhaustive compression oracle capped at 12 sets over 12 elements".to_string(),
        ));
    }
    if !f.is_non_trivial() {
        return Err(Error::input("compression of a trivial family".to_string()));
    }
    if eps.is_negative() {
        return Err(Error::input("negative closeness budget".to_string()));
    }
    let half = rat(1, 2);
    let base_prob = satisfaction_probability(f, &half)?;
    let pool = candidate_subsets(f);
    let member_masks: Vec<u64> = f.sets().iter().map(|s| s.mask()).collect();

    let mut spent = 0u64;
    for size in 1..=f.len() {
        let mut best: Option<(usize, Vec<u64>, SetSystem)> = None;
        let mut chosen: Vec<usize> = Vec::with_capacity(size);
        search_combinations(&pool, size, 0, &mut chosen, &mut spent, budget, &mut |combo| {
            let covered = member_masks
                .iter()
                .all(|&m| combo.iter().any(|&c| pool[c].mask() & m == pool[c].mask()));
            if !covered {
                return Ok(());
            }
            let sets: Vec<ElementSet> = combo.iter().map(|&c| pool[c]).collect();
            let candidate = SetSystem::new(f.universe(), sets)?;
            let prob = satisfaction_probability(&candidate, &half)?;
            // Proper upper bound, so the distance is the probability gap.
            if &prob - &base_prob > *eps {
                return Ok(());
            }
            let total: usize = candidate.sets().iter().map(|s| s.len()).sum();
            let key = candidate.canonical_masks();
            let better = match &best {
                None => true,
                Some((bt, bk, _)) => total < *bt || (total == *bt && key < *bk),
            };
            if better {
                best = Some((total, key, candidate));
            }
            Ok(())
        })?;
        if let Some((_, _, found)) = best {
            return Ok(found);
        }
    }
    // The family itself is always admissible at distance 0.
    unreachable!("family is its own proper upper bound")
}

fn search_combinations(
    pool: &[ElementSet],
    size: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    spent: &mut u64,
    budget: u64,
    visit: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if chosen.len() == size {
        *spent += 1;
        if *spent > budget {
            return Err(Error::resource(format!(
                "compression search budget of {budget} combinations exceeded"
            )));
        }
        return visit(chosen);
    }
    let needed = size - chosen.len();
    if pool.len() - start < needed {
        return Ok(());
    }
    for i in start..pool.len() {
        chosen.push(i);
        search_combinations(pool, size, i + 1, chosen, spent, budget, visit)?;
        chosen.pop();
    }
    Ok(())
}

/// Verifies the oracle contract on concrete output: proper upper bound,
/// width does not grow, exact uniform-measure distance within budget.
/// Returns the exact distance.
pub fn verify_oracle_output(f: &SetSystem, out: &SetSystem, eps: &Rational) -> Result<Rational> {
    match check_proper_upper(out, f)? {
        ProperUpperCheck::ProperUpper => {}
        ProperUpperCheck::Witness(x) => {
            return Err(Error::oracle(format!(
                "output is not a proper upper bound; witness {x:?}"
            )));
        }
    }
    if out.width() > f.width() {
        return Err(Error::oracle(format!(
            "output width {} exceeds input width {}",
            out.width(),
            f.width()
        )));
    }
    let half = rat(1, 2);
    let gap = satisfaction_probability(out, &half)? - satisfaction_probability(f, &half)?;
    debug_assert!(!gap.is_negative());
    if gap > *eps {
        return Err(Error::oracle(format!("output distance {gap} exceeds the budget {eps}")));
    }
    Ok(gap)
}

#[derive(Clone, Copy, Debug)]
pub struct SandwichParams {
    pub c: u32,
    pub c_prime: u32,
}

/// One level of the width-halving recursion, with every family and every
/// exact probability it produced.
#[derive(Clone, Debug)]
pub struct RecursionLevel {
    pub width: usize,
    pub epsilon: Rational,
    /// Oracle budget at this level; `epsilon_next + gamma == epsilon`.
    pub gamma: Rational,
    pub epsilon_next: Rational,
    pub f: SetSystem,
    pub f1: Option<SetSystem>,
    pub f2: Option<SetSystem>,
    pub f3: Option<SetSystem>,
    pub f4: Option<SetSystem>,
    pub f5: Option<SetSystem>,
    pub pr_f_zero: Rational,
    pub pr_f1_zero: Option<Rational>,
    pub pr_f2_zero: Option<Rational>,
    pub pr_f3_zero: Option<Rational>,
    pub pr_f5_zero: Option<Rational>,
    /// `Pr[f=0] <= Pr[f3=0] + gamma`.
    pub chain_f3_holds: Option<bool>,
    /// `Pr[f=0] <= Pr[f5=0] + gamma`.
    pub chain_f5_holds: Option<bool>,
    /// Outward bracket of `kappa_0(width, epsilon)` for the run parameters.
    pub kappa0: Interval,
    pub base_case: bool,
}

#[derive(Clone, Debug)]
pub struct RecursionTrace {
    pub params: SandwichParams,
    pub levels: Vec<RecursionLevel>,
}

/// A rational in `(0, 1]` approximating `1/log2(w)` from below; exact when
/// `w` is a power of two. Any value in `(0,1]` keeps the level accounting
/// identity exact; approximating from below only tightens the recorded
/// chain inequalities.
fn inverse_log2_lower(w: usize) -> Rational {
    debug_assert!(w >= 2);
    if w.is_power_of_two() {
        return rat(1, w.trailing_zeros() as i64);
    }
    let hi = Interval::from_u64(w as u64).log2_pos().hi;
    let scaled = ((1u64 << 30) as f64 / hi).floor() as i64;
    rat(scaled.max(1), 1 << 30)
}

fn kappa0_interval(w: u64, eps: &Interval, c_prime: u32) -> Interval {
    let log_w = Interval::from_u64(w).log2_pos();
    log_w.powi_nonneg(2).div_pos(eps).powi_nonneg(c_prime)
}

/// Runs the width-halving argument concretely: split at `w/2`, compress the
/// wide half at error `gamma = eps/log w`, splice, split again, and recurse
/// on the narrow part at `eps' = eps(1 - 1/log w)`. Exact probabilities
/// replace the analytic bounds at every level, and each level's chain
/// inequalities are recorded as checked facts.
pub fn sandwich_recursion(
    f: &SetSystem,
    eps: &Rational,
    oracle: &dyn CompressionOracle,
    params: SandwichParams,
) -> Result<RecursionTrace> {
    if !f.is_non_trivial() {
        return Err(Error::input("sandwich recursion requires a non-trivial family".to_string()));
    }
    check_probability(eps, "eps")?;
    let half = rat(1, 2);
    let mut levels = Vec::new();
    let mut cur = f.clone();
    let mut cur_eps = eps.clone();

    loop {
        let w = cur.width();
        let pr_f_zero = Rational::one() - satisfaction_probability(&cur, &half)?;
        let kappa0 =
            kappa0_interval(w as u64, &Interval::from_rational(&cur_eps), params.c_prime);

        if w <= 2 {
            levels.push(RecursionLevel {
                width: w,
                epsilon: cur_eps.clone(),
                gamma: Rational::zero(),
                epsilon_next: cur_eps.clone(),
                f: cur.clone(),
                f1: None,
                f2: None,
                f3: None,
                f4: None,
                f5: None,
                pr_f_zero,
                pr_f1_zero: None,
                pr_f2_zero: None,
                pr_f3_zero: None,
                pr_f5_zero: None,
                chain_f3_holds: None,
                chain_f5_holds: None,
                kappa0,
                base_case: true,
            });
            break;
        }

        let lambda = inverse_log2_lower(w);
        let gamma = &cur_eps * &lambda;
        let epsilon_next = &cur_eps * (Rational::one() - &lambda);
        debug_assert_eq!(&gamma + &epsilon_next, cur_eps);

        // Wide half: sets of size >= w/2.
        let f1 = SetSystem::new(
            cur.universe(),
            cur.sets().iter().copied().filter(|s| 2 * s.len() >= w).collect(),
        )?;
        let f2 = oracle.compress(&f1, &gamma)?;
        verify_oracle_output(&f1, &f2, &gamma)?;
        let narrow = SetSystem::new(
            cur.universe(),
            cur.sets().iter().copied().filter(|s| 2 * s.len() < w).collect(),
        )?;
        let f3 = narrow.union_family(&f2)?;

        let pr_f1_zero = Rational::one() - satisfaction_probability(&f1, &half)?;
        let pr_f2_zero = Rational::one() - satisfaction_probability(&f2, &half)?;
        let pr_f3_zero = Rational::one() - satisfaction_probability(&f3, &half)?;
        let chain_f3 = pr_f_zero <= &pr_f3_zero + &gamma;

        if !f3.is_non_trivial() {
            levels.push(RecursionLevel {
                width: w,
                epsilon: cur_eps.clone(),
                gamma,
                epsilon_next,
                f: cur.clone(),
                f1: Some(f1),
                f2: Some(f2),
                f3: Some(f3),
                f4: None,
                f5: None,
                pr_f_zero,
                pr_f1_zero: Some(pr_f1_zero),
                pr_f2_zero: Some(pr_f2_zero),
                pr_f3_zero: Some(pr_f3_zero),
                pr_f5_zero: None,
                chain_f3_holds: Some(chain_f3),
                chain_f5_holds: None,
                kappa0,
                base_case: false,
            });
            break;
        }

        let f4 = SetSystem::new(
            cur.universe(),
            f3.sets().iter().copied().filter(|s| 2 * s.len() >= w).collect(),
        )?;
        let f5 = SetSystem::new(
            cur.universe(),
            f3.sets().iter().copied().filter(|s| 2 * s.len() < w).collect(),
        )?;
        let pr_f5_zero = Rational::one() - satisfaction_probability(&f5, &half)?;
        let chain_f5 = pr_f_zero <= &pr_f5_zero + &gamma;
        let stop = f5.is_empty();

        levels.push(RecursionLevel {
            width: w,
            epsilon: cur_eps.clone(),
            gamma,
            epsilon_next: epsilon_next.clone(),
            f: cur.clone(),
            f1: Some(f1),
            f2: Some(f2),
            f3: Some(f3),
            f4: Some(f4),
            f5: Some(f5.clone()),
            pr_f_zero,
            pr_f1_zero: Some(pr_f1_zero),
            pr_f2_zero: Some(pr_f2_zero),
            pr_f3_zero: Some(pr_f3_zero),
            pr_f5_zero: Some(pr_f5_zero),
            chain_f3_holds: Some(chain_f3),
            chain_f5_holds: Some(chain_f5),
            kappa0,
            base_case: false,
        });

        if stop {
            break;
        }
        cur = f5;
        cur_eps = epsilon_next;
    }
    Ok(RecursionTrace { params, levels })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The outward intervals overlap; no rigorous verdict.
    Indeterminate,
}

#[derive(Clone, Copy, Debug)]
pub struct ConditionCheck {
    pub applicable: bool,
    pub verdict: Verdict,
    pub lhs: Interval,
    pub rhs: Interval,
}

fn compare_ge(lhs: Interval, rhs: Interval) -> Verdict {
    if lhs.definitely_ge(&rhs) {
        Verdict::Pass
    } else if lhs.hi < rhs.lo {
        Verdict::Fail
    } else {
        Verdict::Indeterminate
    }
}

#[derive(Clone, Debug)]
pub struct Kappa0Report {
    pub w: u64,
    pub eps: Rational,
    pub c: u32,
    pub c_prime: u32,
    pub kappa0: Interval,
    /// `kappa0 >= w (2^w log(1/eps))^2`, for `w <= 2`.
    pub condition_i: ConditionCheck,
    /// `kappa0 >= ((log w)/eps)^(12c)`, for `w >= 3`.
    pub condition_ii: ConditionCheck,
    /// `kappa0(w,eps) >= kappa0(floor(w/2), eps(1 - 1/log w)) + 1`, for `w >= 3`.
    pub condition_iii: ConditionCheck,
    pub tau: TauReport,
    pub all_pass: bool,
}

/// Evaluates `kappa_0(w, eps) = ((log w)^2 / eps)^(c')` against the three
/// side conditions of the recursion, with outward-rounded interval
/// arithmetic. Logs are base 2.
pub fn kappa0_conditions(w: u64, eps: &Rational, c: u32, c_prime: u32) -> Result<Kappa0Report> {
    if w == 0 {
        return Err(Error::input("w must be at least 1".to_string()));
    }
    check_probability(eps, "eps")?;
    let eps_iv = Interval::from_rational(eps);
    let kappa0 = kappa0_interval(w, &eps_iv, c_prime);
    let not_applicable = |value: Interval| ConditionCheck {
        applicable: false,
        verdict: Verdict::Pass,
        lhs: value,
        rhs: Interval::point(0.0),
    };

    let condition_i = if w <= 2 {
        let log_inv_eps = Interval::from_rational(&eps.clone().recip()).log2_pos();
        let two_pow_w = Interval::from_u64(1u64 << w);
        let rhs = Interval::from_u64(w)
            .mul_nonneg(&two_pow_w.mul_nonneg(&log_inv_eps).powi_nonneg(2));
        ConditionCheck { applicable: true, verdict: compare_ge(kappa0, rhs), lhs: kappa0, rhs }
    } else {
        not_applicable(kappa0)
    };

    let condition_ii = if w >= 3 {
        let rhs = Interval::from_u64(w).log2_pos().div_pos(&eps_iv).powi_nonneg(12 * c);
        ConditionCheck { applicable: true, verdict: compare_ge(kappa0, rhs), lhs: kappa0, rhs }
    } else {
        not_applicable(kappa0)
    };

    let condition_iii = if w >= 3 {
        let one = Interval::point(1.0);
        let shrink = one.sub(&one.div_pos(&Interval::from_u64(w).log2_pos()));
        let eps_next = eps_iv.mul_nonneg(&shrink);
        let rhs = kappa0_interval(w / 2, &eps_next, c_prime).add(&Interval::point(1.0));
        ConditionCheck { applicable: true, verdict: compare_ge(kappa0, rhs), lhs: kappa0, rhs }
    } else {
        not_applicable(kappa0)
    };

    let tau = tau_check(w.max(2), eps)?;
    let all_pass = [&condition_i, &condition_ii, &condition_iii]
        .iter()
        .all(|chk| chk.verdict == Verdict::Pass)
        && tau.holds;
    Ok(Kappa0Report {
        w,
        eps: eps.clone(),
        c,
        c_prime,
        kappa0,
        condition_i,
        condition_ii,
        condition_iii,
        tau,
        all_pass,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct TauReport {
    pub w: u64,
    pub holds: bool,
    pub equality: bool,
    pub lhs: Interval,
    pub rhs: Interval,
}

/// Checks `tau(floor(w/2), eps(1 - 1/log w)) <= tau(w, eps)` for
/// `tau(w, eps) = (log w)/eps`.
///
/// For even `w` the two sides agree identically: `log(w/2) = log w - 1`
/// cancels against `1 - 1/log w = (log w - 1)/log w`, so equality is
/// reported symbolically (this covers `w = 2`, where the unreduced form is
/// 0/0). Odd `w` is decided by outward interval arithmetic.
pub fn tau_check(w: u64, eps: &Rational) -> Result<TauReport> {
    if w < 2 {
        return Err(Error::input("tau check requires w >= 2".to_string()));
    }
    check_probability(eps, "eps")?;
    let eps_iv = Interval::from_rational(eps);
    let rhs = Interval::from_u64(w).log2_pos().div_pos(&eps_iv);
    if w % 2 == 0 {
        return Ok(TauReport { w, holds: true, equality: true, lhs: rhs, rhs });
    }
    let log_w = Interval::from_u64(w).log2_pos();
    let one = Interval::point(1.0);
    let shrink = one.sub(&one.div_pos(&log_w));
    let eps_next = eps_iv.mul_nonneg(&shrink);
    let lhs = if w / 2 == 1 {
        Interval::point(0.0)
    } else {
        Interval::from_u64(w / 2).log2_pos().div_pos(&eps_next)
    };
    Ok(TauReport { w, holds: lhs.definitely_le(&rhs), equality: false, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(universe: usize, members: &[&[usize]]) -> SetSystem {
        let v: Vec<Vec<usize>> = members.iter().map(|m| m.to_vec()).collect();
        SetSystem::from_members(universe, &v).unwrap()
    }

    /// Independent oracle: inclusion-exclusion over non-empty subfamilies.
    fn ie_probability(f: &SetSystem, p: &Rational) -> Rational {
        let masks: Vec<u64> = f.sets().iter().map(|s| s.mask()).collect();
        let m = masks.len();
        let mut total = Rational::zero();
        for g in 1u32..(1 << m) {
            let mut union = 0u64;
            for (i, &mask) in masks.iter().enumerate() {
                if g & (1 << i) != 0 {
                    union |= mask;
                }
            }
            let term = pow_i64(p, union.count_ones() as i64);
            if g.count_ones() % 2 == 1 {
                total += term;
            } else {
                total -= term;
            }
        }
        total
    }

    #[test]
    fn satisfaction_examples() {
        assert_eq!(satisfaction_probability(&fam(1, &[&[0]]), &rat(1, 3)).unwrap(), rat(1, 3));
        assert_eq!(
            satisfaction_probability(&fam(2, &[&[0], &[1]]), &rat(1, 2)).unwrap(),
            rat(3, 4)
        );
    }

    #[test]
    fn satisfaction_matches_inclusion_exclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.random_range(1..=9usize);
            let m = rng.random_range(1..=6usize);
            let mut members = Vec::new();
            for _ in 0..m {
                let size = rng.random_range(1..=n.min(4));
                let mut idx: Vec<usize> = (0..n).collect();
                for i in (1..idx.len()).rev() {
                    let j = rng.random_range(0..=i);
                    idx.swap(i, j);
                }
                let mut chosen: Vec<usize> = idx[..size].to_vec();
                chosen.sort_unstable();
                members.push(chosen);
            }
            let f = SetSystem::from_members(n, &members).unwrap();
            let p = rat(rng.random_range(1..5), 5);
            assert_eq!(
                satisfaction_probability(&f, &p).unwrap(),
                ie_probability(&f, &p),
                "family {f:?}"
            );
        }
    }

    #[test]
    fn satisfying_boundary_is_strict() {
        assert!(!is_satisfying(&fam(1, &[&[0]]), &rat(1, 2), &rat(1, 2)).unwrap());
        assert!(is_satisfying(&fam(3, &[&[0], &[1], &[2]]), &rat(1, 2), &rat(1, 4)).unwrap());
        assert!(!is_satisfying(&SetSystem::empty(2).unwrap(), &rat(1, 2), &rat(1, 2)).unwrap());
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let f = fam(1, &[&[0]]);
        let est = monte_carlo_satisfaction(&f, &rat(1, 2), 100_000, 11).unwrap();
        assert!((est.estimate - 0.5).abs() < 4.0 * est.stderr + 1e-9);

        let empty = SetSystem::empty(3).unwrap();
        let zero = monte_carlo_satisfaction(&empty, &rat(1, 2), 1_000, 1).unwrap();
        assert_eq!(zero.hits, 0);
    }

    #[test]
    fn monte_carlo_deterministic() {
        let f = fam(4, &[&[0, 1], &[2], &[1, 3]]);
        let a = monte_carlo_satisfaction(&f, &rat(1, 3), 10_000, 99).unwrap();
        let b = monte_carlo_satisfaction(&f, &rat(1, 3), 10_000, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn approx_sunflower_examples() {
        let check =
            is_approx_sunflower(&fam(3, &[&[0, 1], &[0, 2]]), &rat(1, 2), &rat(1, 2)).unwrap();
        assert!(check.holds && !check.degenerate);
        assert_eq!(check.residual_probability, rat(3, 4));

        let degenerate = is_approx_sunflower(&fam(1, &[&[0]]), &rat(1, 2), &rat(1, 2)).unwrap();
        assert!(degenerate.holds && degenerate.degenerate);

        let far =
            is_approx_sunflower(&fam(4, &[&[0, 1], &[2, 3]]), &rat(1, 10), &rat(1, 10)).unwrap();
        assert!(!far.holds);
        assert_eq!(far.residual_probability, rat(199, 10_000));
    }

    #[test]
    fn find_approx_sunflower_on_singletons() {
        let f = fam(8, &[&[0], &[1], &[2], &[3], &[4], &[5], &[6], &[7]]);
        let found =
            find_approx_sunflower(&f, &rat(1, 2), &rat(1, 100), ApproxSearchMode::LinkSearch)
                .unwrap()
                .unwrap();
        assert_eq!(found.indices.len(), 8);

        let single = fam(2, &[&[0, 1]]);
        assert!(find_approx_sunflower(
            &single,
            &rat(1, 2),
            &rat(1, 2),
            ApproxSearchMode::Exhaustive
        )
        .unwrap()
        .is_none());
    }

    #[test]
    fn singleton_threshold_closed_form() {
        // m singletons are (p, eps)-approximate sunflowers exactly when
        // 1 - (1-p)^m > 1 - eps.
        for m in 2..=6usize {
            let members: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
            let f = SetSystem::from_members(m, &members).unwrap();
            let p = rat(1, 3);
            let eps = rat(2, 5);
            let closed = Rational::one() - pow_i64(&(Rational::one() - &p), m as i64);
            let check = is_approx_sunflower(&f, &p, &eps).unwrap();
            assert_eq!(check.residual_probability, closed);
            assert_eq!(check.holds, closed > Rational::one() - &eps);
        }
    }

    #[test]
    fn exhaustive_oracle_zero_distance_is_minimal_representation() {
        let f = fam(3, &[&[0], &[0, 1], &[2]]);
        let out =
            exhaustive_compression_oracle(&f, &Rational::zero(), DEFAULT_ORACLE_BUDGET).unwrap();
        assert!(out.same_family(&f.minimal_subsystem()));
        assert_eq!(verify_oracle_output(&f, &out, &Rational::zero()).unwrap(), Rational::zero());
    }

    #[test]
    fn exhaustive_oracle_quarter_distance() {
        let f = fam(2, &[&[0, 1]]);
        let out = exhaustive_compression_oracle(&f, &rat(1, 4), DEFAULT_ORACLE_BUDGET).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.sets()[0], ElementSet::from_indices(&[0]).unwrap());
    }

    #[test]
    fn exhaustive_oracle_full_budget_returns_core_singleton() {
        let f = fam(3, &[&[0, 1], &[0, 2]]);
        let out = exhaustive_compression_oracle(&f, &rat(99, 100), DEFAULT_ORACLE_BUDGET).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.sets()[0], ElementSet::from_indices(&[0]).unwrap());
    }

    #[test]
    fn oracle_budget_exhaustion_reported() {
        let f = fam(6, &[&[0, 1, 2], &[1, 2, 3], &[2, 3, 4], &[3, 4, 5]]);
        assert!(matches!(
            exhaustive_compression_oracle(&f, &Rational::zero(), 2),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn sandwich_identity_oracle_runs() {
        let f = fam(4, &[&[0, 1, 2], &[2, 3], &[0, 3]]);
        let trace = sandwich_recursion(
            &f,
            &rat(1, 2),
            &IdentityOracle,
            SandwichParams { c: 1, c_prime: 12 },
        )
        .unwrap();
        for level in &trace.levels {
            if let Some(ok) = level.chain_f3_holds {
                assert!(ok);
            }
            if let Some(ok) = level.chain_f5_holds {
                assert!(ok);
            }
            assert_eq!(&level.gamma + &level.epsilon_next, level.epsilon);
        }
        // Identity oracle: f2 = f1, hence f3 = f.
        let first = &trace.levels[0];
        assert!(first.f3.as_ref().unwrap().same_family(&first.f));
    }

    #[test]
    fn sandwich_base_case_widths() {
        let f = fam(3, &[&[0, 1], &[2]]);
        let trace = sandwich_recursion(
            &f,
            &rat(1, 2),
            &IdentityOracle,
            SandwichParams { c: 1, c_prime: 12 },
        )
        .unwrap();
        assert_eq!(trace.levels.len(), 1);
        assert!(trace.levels[0].base_case);
    }

    #[test]
    fn tau_equality_for_even_w() {
        for w in [2u64, 4, 8, 16, 64] {
            let report = tau_check(w, &rat(1, 2)).unwrap();
            assert!(report.holds && report.equality, "w = {w}");
        }
        for w in [3u64, 5, 7, 9, 63] {
            let report = tau_check(w, &rat(1, 2)).unwrap();
            assert!(report.holds && !report.equality, "w = {w}");
        }
    }

    #[test]
    fn kappa0_conditions_examples() {
        let report = kappa0_conditions(4, &rat(1, 2), 2, 24).unwrap();
        assert!(report.condition_ii.applicable && report.condition_iii.applicable);
        assert!(!report.condition_i.applicable);
        assert!(report.all_pass);

        let base = kappa0_conditions(2, &rat(1, 2), 2, 24).unwrap();
        assert!(base.condition_i.applicable);
        assert!(!base.condition_ii.applicable && !base.condition_iii.applicable);

        let failing = kappa0_conditions(4, &rat(1, 2), 2, 1).unwrap();
        assert_eq!(failing.condition_ii.verdict, Verdict::Fail);
        assert!(!failing.all_pass);
    }

    #[test]
    fn monotone_in_family_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let n = rng.random_range(2..=8usize);
            let m = rng.random_range(1..=4usize);
            let mut members = Vec::new();
            for _ in 0..=m {
                let size = rng.random_range(1..=n.min(3));
                let mut idx: Vec<usize> = (0..n).collect();
                for i in (1..idx.len()).rev() {
                    let j = rng.random_range(0..=i);
                    idx.swap(i, j);
                }
                let mut s = idx[..size].to_vec();
                s.sort_unstable();
                members.push(s);
            }
            let extra = members.pop().unwrap();
            let f = SetSystem::from_members(n, &members).unwrap();
            let mut bigger = members.clone();
            bigger.push(extra);
            let g = SetSystem::from_members(n, &bigger).unwrap();
            let p = rat(1, 3);
            assert!(
                satisfaction_probability(&g, &p).unwrap()
                    >= satisfaction_probability(&f, &p).unwrap()
            );
        }
    }
}
