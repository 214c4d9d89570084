//! m-average-free sets: no nontrivial A_1 + ⋯ + A_m = mB inside the set.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::states::multiset_permutations;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Constructed { d: usize, n: usize },
    /// A constructed family cut down to the elements below a bound.
    Truncated { d: usize, n: usize },
    BruteForce,
    User,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Constructed { d, n } => write!(f, "constructed(d={d},n={n})"),
            Provenance::Truncated { d, n } => write!(f, "truncated(d={d},n={n})"),
            Provenance::BruteForce => write!(f, "brute_force"),
            Provenance::User => write!(f, "user"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AvgFreeSet {
    m: usize,
    elements: Vec<BigUint>,
    provenance: Provenance,
}

impl AvgFreeSet {
    /// Sorts and deduplicates; does not verify.
    pub fn new(m: usize, mut elements: Vec<BigUint>, provenance: Provenance) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("average-freeness order must be >= 2, got {m}")));
        }
        elements.sort();
        elements.dedup();
        Ok(AvgFreeSet { m, elements, provenance })
    }

    pub fn from_u64(m: usize, elements: &[u64]) -> Result<Self> {
        AvgFreeSet::new(m, elements.iter().map(|&x| BigUint::from(x)).collect(), Provenance::User)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn elements(&self) -> &[BigUint] {
        &self.elements
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max(&self) -> Option<&BigUint> {
        self.elements.last()
    }

    pub fn to_u64(&self) -> Option<Vec<u64>> {
        self.elements.iter().map(ToPrimitive::to_u64).collect()
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// n! / ((n/d)!)^d.
pub fn family_size(d: usize, n: usize) -> BigUint {
    factorial(n) / factorial(n / d).pow(d as u32)
}

/// Digit base md − (m − 1).
pub fn family_base(m: usize, d: usize) -> usize {
    m * d - (m - 1)
}

/// S_m(d, n): numbers Σ a_i b^{i−1} (b = md − m + 1) whose n digits use each of
/// 0, …, d−1 exactly n/d times.
pub fn construct_avgfree(m: usize, d: usize, n: usize) -> Result<AvgFreeSet> {
    if m < 2 || d < 1 || n == 0 || n % d != 0 {
        return Err(Error::InvalidArgument(format!("need m >= 2, d >= 1 and d | n, got m={m}, d={d}, n={n}")));
    }
    let base = BigUint::from(family_base(m, d));
    let digits: Vec<usize> = (0..d).flat_map(|x| std::iter::repeat(x).take(n / d)).collect();
    let elements = multiset_permutations(digits)
        .into_iter()
        .map(|a| a.iter().rev().fold(BigUint::zero(), |acc, &x| acc * &base + x))
        .collect();
    AvgFreeSet::new(m, elements, Provenance::Constructed { d, n })
}

/// Work cap for `verify_avgfree`.
pub const VERIFY_BUDGET: u128 = 50_000_000;

fn multichoose(n: usize, k: usize) -> u128 {
    // C(n + k − 1, k)
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n + i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Multisets of size `size` from `items` (indices non-decreasing), visiting
/// each with its sum and the repeated value when all entries agree.
fn for_each_multiset(items: &[BigUint], size: usize, f: &mut impl FnMut(BigUint, Option<usize>)) {
    fn rec(
        items: &[BigUint],
        size: usize,
        start: usize,
        sum: BigUint,
        first: Option<usize>,
        uniform: bool,
        f: &mut impl FnMut(BigUint, Option<usize>),
    ) {
        if size == 0 {
            f(sum, if uniform { first } else { None });
            return;
        }
        for i in start..items.len() {
            let u = uniform && first.is_none_or(|x| x == i);
            rec(items, size - 1, i, &sum + &items[i], Some(first.unwrap_or(i)), u, f);
        }
    }
    rec(items, size, 0, BigUint::zero(), None, true, f);
}

/// True iff A_1 + ⋯ + A_m = mB has only the solutions A_i = B.
///
/// Meet in the middle: multisets of ⌈m/2⌉ left terms are tabulated by sum, and
/// each pair (B, right multiset) looks up the complementary sum.
pub fn verify_avgfree(set: &AvgFreeSet) -> Result<bool> {
    verify_avgfree_with_budget(set, VERIFY_BUDGET)
}

pub fn verify_avgfree_with_budget(set: &AvgFreeSet, budget: u128) -> Result<bool> {
    let m = set.m();
    let items = set.elements();
    let s = items.len();
    let left = m.div_ceil(2);
    let right = m - left;
    let needed = multichoose(s, left).saturating_add((s as u128).saturating_mul(multichoose(s, right)));
    if needed > budget {
        return Err(Error::BudgetExceeded { what: "average-free verification", needed, limit: budget });
    }
    let mut table: HashMap<BigUint, usize> = HashMap::new();
    for_each_multiset(items, left, &mut |sum, _| *table.entry(sum).or_insert(0) += 1);
    let mfactor = BigUint::from(m);
    let mut ok = true;
    for (bi, b) in items.iter().enumerate() {
        let target = &mfactor * b;
        for_each_multiset(items, right, &mut |sum, uniform| {
            if !ok || sum > target {
                return;
            }
            let count = table.get(&(&target - &sum)).copied().unwrap_or(0);
            // When the right side is B repeated, the all-B left side is the
            // one trivial completion.
            let trivial = usize::from(uniform == Some(bi) || right == 0);
            if count > trivial {
                ok = false;
            }
        });
        if !ok {
            break;
        }
    }
    Ok(ok)
}

/// Largest N accepted by `max_avgfree_bruteforce` for a given order.
pub fn bruteforce_limit(m: usize) -> usize {
    match m {
        2 => 40,
        3 => 30,
        _ => 24,
    }
}

/// Incremental state for subsets of {1..N}: reach[j][s] says some multiset
/// of j chosen elements sums to s.
#[derive(Clone)]
struct Reach {
    m: usize,
    chosen: Vec<usize>,
    reach: Vec<Vec<bool>>,
}

impl Reach {
    fn new(m: usize, n: usize) -> Self {
        let mut reach = vec![vec![false; m * n + 1]; m];
        reach[0][0] = true;
        Reach { m, chosen: Vec::new(), reach }
    }

    /// Whether x (larger than everything chosen) can join. Any solution using
    /// x has x among the A_i; with c copies of x and c < m the rest are chosen
    /// elements and B is a chosen element.
    fn accepts(&self, x: usize) -> bool {
        let m = self.m;
        for c in 1..m {
            for &b in &self.chosen {
                let total = m * b;
                if total < c * x {
                    continue;
                }
                let rest = total - c * x;
                if rest < self.reach[m - c].len() && self.reach[m - c][rest] {
                    return false;
                }
            }
        }
        true
    }

    fn push(&mut self, x: usize) {
        self.chosen.push(x);
        let len = self.reach[0].len();
        for j in 1..self.m {
            for s in x..len {
                if self.reach[j - 1][s - x] {
                    self.reach[j][s] = true;
                }
            }
        }
    }
}

/// ν_m(N) with a witness, by depth-first search with the bound
/// |chosen| + ν_m(N − x + 1) for the rest of the interval.
pub fn max_avgfree_bruteforce(n: usize, m: usize) -> Result<AvgFreeSet> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("average-freeness order must be >= 2, got {m}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("range bound must be >= 1".into()));
    }
    let limit = bruteforce_limit(m);
    if n > limit {
        return Err(Error::BudgetExceeded { what: "brute-force range", needed: n as u128, limit: limit as u128 });
    }
    let table = nu_table(n, m);
    let witness = &table[n];
    AvgFreeSet::new(m, witness.iter().map(|&x| BigUint::from(x)).collect(), Provenance::BruteForce)
}

static NU_CACHE: OnceLock<Mutex<HashMap<usize, Vec<Vec<usize>>>>> = OnceLock::new();

/// Witnesses for ν_m(0..=n); cached per m and extended on demand.
fn nu_table(n: usize, m: usize) -> Vec<Vec<usize>> {
    let cache = NU_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("cache lock");
    let table = guard.entry(m).or_insert_with(|| vec![Vec::new(), vec![1]]);
    while table.len() <= n {
        let len = table.len();
        let target = table[len - 1].len() + 1;
        let sizes: Vec<usize> = table.iter().map(Vec::len).collect();
        // A set of size ν(len−1)+1 in {1..len} must contain 1 and len.
        let mut state = Reach::new(m, len);
        state.push(1);
        let found = search(&mut state, 2, len, target, &sizes);
        let next = found.unwrap_or_else(|| table[len - 1].clone());
        table.push(next);
    }
    table[..=n].to_vec()
}

fn search(state: &mut Reach, from: usize, n: usize, target: usize, sizes: &[usize]) -> Option<Vec<usize>> {
    if state.chosen.len() == target {
        return Some(state.chosen.clone());
    }
    for x in from..=n {
        if state.chosen.len() + sizes[n - x + 1].min(n - x + 1) < target {
            return None;
        }
        if state.accepts(x) {
            let mut next = state.clone();
            next.push(x);
            if let Some(found) = search(&mut next, x + 1, n, target, sizes) {
                return Some(found);
            }
        }
    }
    None
}

/// Largest bound handled by brute force in `best_avgfree_below`.
pub fn best_bruteforce_cap(m: usize) -> usize {
    if m == 2 { 30 } else { 20 }
}

/// Families larger than this are not enumerated for truncation.
const TRUNCATION_FAMILY_CAP: u64 = 1_000_000;

static BEST_CACHE: OnceLock<Mutex<HashMap<(u128, usize), AvgFreeSet>>> = OnceLock::new();

/// The largest m-average-free set found with every element in 1..bound.
///
/// Candidates: the brute-force optimum on {1..min(bound−1, cap)}, every
/// S_m(d, n) that fits entirely, families that only partly fit cut to the
/// elements below the bound, and {1}. Ties go to the earliest candidate.
pub fn best_avgfree_below(bound: u128, m: usize) -> Result<AvgFreeSet> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("average-freeness order must be >= 2, got {m}")));
    }
    if bound < 2 {
        return Err(Error::InvalidArgument(format!("bound must be >= 2, got {bound}")));
    }
    let cache = BEST_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("cache lock").get(&(bound, m)) {
        return Ok(hit.clone());
    }
    let mut best = AvgFreeSet::new(m, vec![BigUint::one()], Provenance::User)?;
    let mut consider = |cand: AvgFreeSet| {
        if cand.len() > best.len() {
            best = cand;
        }
    };
    let searched = (bound - 1).min(best_bruteforce_cap(m) as u128) as usize;
    consider(max_avgfree_bruteforce(searched, m)?);
    let big_bound = BigUint::from(bound);
    for d in 2.. {
        let base = family_base(m, d) as u128;
        // the smallest family S_m(d, d) already has d digits
        if base.checked_pow(d as u32 - 1).is_none_or(|v| v >= bound) {
            break;
        }
        for n in (d..).step_by(d) {
            let low = base.checked_pow(n as u32 - 1);
            if low.is_none_or(|v| v >= bound) {
                break;
            }
            let fits = base.checked_pow(n as u32).is_some_and(|v| v <= bound);
            if fits {
                consider(construct_avgfree(m, d, n)?);
            } else if family_size(d, n).to_u64().is_some_and(|s| s <= TRUNCATION_FAMILY_CAP) {
                let full = construct_avgfree(m, d, n)?;
                let kept: Vec<BigUint> = full.elements().iter().filter(|x| **x < big_bound && !x.is_zero()).cloned().collect();
                consider(AvgFreeSet::new(m, kept, Provenance::Truncated { d, n })?);
            }
        }
    }
    cache.lock().expect("cache lock").insert((bound, m), best.clone());
    Ok(best)
}
