//! Coppersmith–Winograd style hashing protocol turning W^{⊗kn} into a GHZ
//! state: balanced tuples, modular hashes, average-free block selection and
//! greedy collision elimination.
//!
//! W is taken as Σ_i |0…1_i…0⟩, so a term of W^{⊗kn} is a choice z_j of the
//! party holding |1⟩ in each copy j. The vector I_i of the protocol is the
//! complement of party i's bit string; both are determined by the mask of
//! copies where z_j = i, which is what tuples store.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::avgfree::{best_avgfree_below, AvgFreeSet};
use crate::error::{Error, Result};
use crate::scalars::Rational;
use crate::states::{make_ghz, make_w, multiset_permutations};
use crate::support::binary_entropy;
use crate::tensors::{LocalMapSet, Matrix, SparseTensor, TensorShape};

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;
/// Largest kn for which W^{⊗kn} is built explicitly.
pub const MAX_REALIZE_COPIES: usize = 14;
pub const DEFAULT_ALPHA_SLACK: f64 = 0.01;

/// α_0 = (k−1)^{(k−1)/(k−2)}; α must exceed it.
pub fn alpha_threshold(k: usize) -> f64 {
    ((k - 1) as f64).powf((k - 1) as f64 / (k - 2) as f64)
}

/// Which other vector a collision zeroes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EliminationRule {
    /// Site (i′ + 1) mod k after a collision at site i′.
    #[default]
    NextSite,
    /// The lowest-numbered site other than i′.
    LowestOther,
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub set_b: Option<AvgFreeSet>,
    pub hash: Option<HashParams>,
    pub trials: usize,
    pub rule: EliminationRule,
    pub budget: u128,
}

impl ProtocolConfig {
    pub fn new(k: usize, n: usize, seed: u64) -> Result<Self> {
        if k < 3 || n < 1 {
            return Err(Error::InvalidArgument(format!("protocol needs k >= 3 and n >= 1, got k={k}, n={n}")));
        }
        if k * n > 64 {
            return Err(Error::InvalidArgument(format!("kn = {} exceeds 64 copies", k * n)));
        }
        Ok(ProtocolConfig {
            k,
            n,
            alpha: alpha_threshold(k) + DEFAULT_ALPHA_SLACK,
            seed,
            set_b: None,
            hash: None,
            trials: 1,
            rule: EliminationRule::NextSite,
            budget: DEFAULT_ENUMERATION_BUDGET,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > alpha_threshold(self.k)) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {alpha} must exceed (k-1)^((k-1)/(k-2)) = {}",
                alpha_threshold(self.k)
            )));
        }
        self.alpha = alpha;
        Ok(self)
    }

    /// q = ⌊α^n⌋.
    pub fn q(&self) -> u64 {
        self.alpha.powi(self.n as i32).floor() as u64
    }

    /// M = (k−1)q + 1.
    pub fn modulus(&self) -> u64 {
        (self.k as u64 - 1) * self.q() + 1
    }
}

/// A term of W^{⊗kn} in which every party holds |1⟩ in exactly n copies.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BalancedTuple {
    /// Bit j of masks[i] is set iff party i holds |1⟩ in copy j.
    masks: Vec<u64>,
    copies: usize,
}

impl BalancedTuple {
    pub fn from_parties(parties: &[usize], k: usize) -> Result<Self> {
        let copies = parties.len();
        if copies > 64 || parties.iter().any(|&p| p >= k) {
            return Err(Error::InvalidArgument("party labels out of range or more than 64 copies".into()));
        }
        let mut masks = vec![0u64; k];
        for (j, &p) in parties.iter().enumerate() {
            masks[p] |= 1 << j;
        }
        let n = copies / k;
        if copies % k != 0 || masks.iter().any(|m| m.count_ones() as usize != n) {
            return Err(Error::InvalidArgument("tuple is not balanced".into()));
        }
        Ok(BalancedTuple { masks, copies })
    }

    pub fn parties(&self) -> usize {
        self.masks.len()
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn mask(&self, site: usize) -> u64 {
        self.masks[site]
    }

    /// I_i as a 0/1 vector of length kn.
    pub fn vector(&self, site: usize) -> Vec<u8> {
        (0..self.copies).map(|j| u8::from(self.masks[site] >> j & 1 == 0)).collect()
    }

    /// Party holding |1⟩ in each copy.
    pub fn assignment(&self) -> Vec<usize> {
        (0..self.copies).map(|j| self.masks.iter().position(|m| m >> j & 1 == 1).expect("one party per copy")).collect()
    }

    /// Basis label of party i in W^{⊗kn}, copy 0 most significant.
    pub fn basis_index(&self, site: usize) -> usize {
        (0..self.copies).fold(0, |acc, j| (acc << 1) | (self.masks[site] >> j & 1) as usize)
    }
}

/// (kn)! / (n!)^k.
pub fn multinomial(k: usize, n: usize) -> BigUint {
    let fact = |x: usize| (1..=x).fold(BigUint::from(1u32), |a, i| a * i);
    fact(k * n) / fact(n).pow(k as u32)
}

pub fn enumerate_balanced_tuples(k: usize, n: usize, budget: u128) -> Result<Vec<BalancedTuple>> {
    if k < 2 || n < 1 || k * n > 64 {
        return Err(Error::InvalidArgument(format!("need k >= 2, n >= 1 and kn <= 64, got k={k}, n={n}")));
    }
    let count = multinomial(k, n);
    if count.to_u128().is_none_or(|c| c > budget) {
        return Err(Error::BudgetExceeded {
            what: "balanced tuple enumeration",
            needed: count.to_u128().unwrap_or(u128::MAX),
            limit: budget,
        });
    }
    let content: Vec<usize> = (0..k).flat_map(|i| std::iter::repeat(i).take(n)).collect();
    multiset_permutations(content).into_iter().map(|z| BalancedTuple::from_parties(&z, k)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashParams {
    pub modulus: u64,
    /// One weight per copy, in [0, M).
    pub v: Vec<u64>,
    /// One offset per party except the last, in [0, M).
    pub u: Vec<u64>,
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    (r == 1).then(|| t.rem_euclid(m as i128) as u64)
}

impl HashParams {
    pub fn new(modulus: u64, v: Vec<u64>, u: Vec<u64>, k: usize) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        if u.len() + 1 != k {
            return Err(Error::DimensionMismatch(format!("need {} offsets, got {}", k - 1, u.len())));
        }
        if v.iter().chain(&u).any(|&x| x >= modulus) {
            return Err(Error::InvalidArgument("hash parameters must lie in [0, M)".into()));
        }
        if mod_inverse((k as u64 - 1) % modulus, modulus).is_none() && modulus > 1 {
            return Err(Error::InvalidArgument(format!("k - 1 = {} is not invertible mod {modulus}", k - 1)));
        }
        Ok(HashParams { modulus, v, u })
    }

    pub fn random(k: usize, copies: usize, modulus: u64, rng: &mut impl Rng) -> Result<Self> {
        let v = (0..copies).map(|_| rng.gen_range(0..modulus)).collect();
        let u = (0..k - 1).map(|_| rng.gen_range(0..modulus)).collect();
        HashParams::new(modulus, v, u, k)
    }

    pub fn zero(k: usize, copies: usize, modulus: u64) -> Result<Self> {
        HashParams::new(modulus, vec![0; copies], vec![0; k - 1], k)
    }
}

/// b_i = u_i + Σ_j (I_i)_j v_j for i < k−1 and
/// b_{k−1} = (k−1)^{−1} (Σ u + Σ_j (k−1 − (I_{k−1})_j) v_j), all mod M.
pub fn hash_tuple(h: &HashParams, t: &BalancedTuple) -> Vec<u64> {
    let k = t.parties();
    let m = h.modulus as u128;
    let in_i = |site: usize, j: usize| t.masks[site] >> j & 1 == 0;
    let mut out = Vec::with_capacity(k);
    for site in 0..k - 1 {
        let mut acc = h.u[site] as u128;
        for j in 0..t.copies {
            if in_i(site, j) {
                acc = (acc + h.v[j] as u128) % m;
            }
        }
        out.push((acc % m) as u64);
    }
    let mut acc: u128 = h.u.iter().map(|&x| x as u128).sum::<u128>() % m;
    for j in 0..t.copies {
        let coeff = (k - 1 - usize::from(in_i(k - 1, j))) as u128;
        acc = (acc + coeff * h.v[j] as u128) % m;
    }
    let inv = mod_inverse((k as u64 - 1) % h.modulus, h.modulus).unwrap_or(0) as u128;
    out.push((acc * inv % m) as u64);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStats {
    pub b: u64,
    pub before: usize,
    pub after: usize,
}

#[derive(Clone, Debug)]
pub struct ProtocolResult {
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub alpha: f64,
    pub modulus: u64,
    pub set_b: AvgFreeSet,
    pub hash: HashParams,
    pub tuples_total: usize,
    /// Tuples whose residues all lie in B.
    pub filtered: usize,
    pub blocks: Vec<BlockStats>,
    /// Survivors in block order, then enumeration order.
    pub survivors: Vec<BalancedTuple>,
    pub n_n: usize,
    /// log₂(N_n) / (kn), GHZ copies per W copy.
    pub rate: f64,
    /// Mean of |L_b| over b ∈ B.
    pub mean_list_size: f64,
    pub degenerate: bool,
}

/// Greedy elimination inside one block; returns indices into `list`.
fn eliminate(list: &[&BalancedTuple], k: usize, rule: EliminationRule) -> Vec<usize> {
    let mut zeroed: Vec<HashSet<u64>> = vec![HashSet::new(); k];
    let mut occupied: Vec<HashMap<u64, usize>> = vec![HashMap::new(); k];
    let mut alive: Vec<bool> = vec![false; list.len()];
    for (idx, t) in list.iter().enumerate() {
        if (0..k).any(|i| zeroed[i].contains(&t.masks[i])) {
            continue;
        }
        let Some(hit) = (0..k).find(|&i| occupied[i].contains_key(&t.masks[i])) else {
            for i in 0..k {
                occupied[i].insert(t.masks[i], idx);
            }
            alive[idx] = true;
            continue;
        };
        let target = match rule {
            EliminationRule::NextSite => (hit + 1) % k,
            EliminationRule::LowestOther => usize::from(hit == 0),
        };
        let vector = t.masks[target];
        zeroed[target].insert(vector);
        if let Some(&victim) = occupied[target].get(&vector) {
            alive[victim] = false;
            for i in 0..k {
                occupied[i].remove(&list[victim].masks[i]);
            }
        }
    }
    (0..list.len()).filter(|&i| alive[i]).collect()
}

pub fn run_protocol(cfg: &ProtocolConfig) -> Result<ProtocolResult> {
    let (k, n) = (cfg.k, cfg.n);
    let copies = k * n;
    let q = cfg.q();
    let modulus = cfg.modulus();
    let set_b = match &cfg.set_b {
        Some(b) => b.clone(),
        None => best_avgfree_below(q as u128 + 1, k - 1)?,
    };
    let b_values: Vec<u64> = set_b
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument("B has elements beyond 64 bits".into()))?;
    let b_lookup: HashSet<u64> = b_values.iter().copied().collect();
    let hash = match &cfg.hash {
        Some(h) => h.clone(),
        None => HashParams::random(k, copies, modulus, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?,
    };
    if hash.v.len() != copies || hash.u.len() + 1 != k {
        return Err(Error::DimensionMismatch("hash parameters do not match k and n".into()));
    }
    let tuples = enumerate_balanced_tuples(k, n, cfg.budget)?;

    let mut lists: BTreeMap<u64, Vec<&BalancedTuple>> = BTreeMap::new();
    let mut filtered = 0;
    for t in &tuples {
        let b = hash_tuple(&hash, t);
        if !b.iter().all(|x| b_lookup.contains(x)) {
            continue;
        }
        filtered += 1;
        if b.iter().any(|&x| x != b[0]) {
            return Err(Error::Precondition(format!(
                "residues {b:?} all lie in B but differ; B is not {}-average-free below M/(k-1)",
                k - 1
            )));
        }
        lists.entry(b[0]).or_default().push(t);
    }

    let blocks: Vec<(u64, Vec<&BalancedTuple>)> = lists.into_iter().collect();
    let kept: Vec<Vec<usize>> = blocks.par_iter().map(|(_, list)| eliminate(list, k, cfg.rule)).collect();
    let mut survivors = Vec::new();
    let mut stats = Vec::with_capacity(blocks.len());
    for ((b, list), keep) in blocks.iter().zip(&kept) {
        stats.push(BlockStats { b: *b, before: list.len(), after: keep.len() });
        survivors.extend(keep.iter().map(|&i| list[i].clone()));
    }
    for site in 0..k {
        let distinct: HashSet<u64> = survivors.iter().map(|t| t.masks[site]).collect();
        assert_eq!(distinct.len(), survivors.len(), "survivors share a vector at site {site}");
    }
    let n_n = survivors.len();
    let rate = if n_n > 1 { (n_n as f64).log2() / copies as f64 } else { 0.0 };
    let mean_list_size = if b_values.is_empty() {
        0.0
    } else {
        let sizes: HashMap<u64, usize> = stats.iter().map(|s| (s.b, s.before)).collect();
        b_values.iter().map(|b| sizes.get(b).copied().unwrap_or(0) as f64).sum::<f64>() / b_values.len() as f64
    };
    Ok(ProtocolResult {
        k,
        n,
        seed: cfg.seed,
        alpha: cfg.alpha,
        modulus,
        set_b,
        hash,
        tuples_total: tuples.len(),
        filtered,
        blocks: stats,
        survivors,
        n_n,
        rate,
        mean_list_size,
        degenerate: n_n == 0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedCounts {
    /// (kn choose n,…,n) M^{−(k−1)}.
    pub mean_list_size: Rational,
    /// ½ (kn choose n,…,n) (((k−1)n choose n,…,n) − 1) M^{−(k−1)} M^{−(k−2)}.
    pub mean_collision_pairs: Rational,
}

pub fn expected_counts(k: usize, n: usize, modulus: u64) -> Result<ExpectedCounts> {
    if k < 2 || n < 1 || modulus == 0 {
        return Err(Error::InvalidArgument("need k >= 2, n >= 1, M >= 1".into()));
    }
    let outer = Rational::from(num_bigint::BigInt::from(multinomial(k, n)));
    let inner = Rational::from(num_bigint::BigInt::from(multinomial(k - 1, n)));
    let m = Rational::from(modulus as i64);
    let pow = |e: usize| (0..e).fold(Rational::one(), |acc, _| acc * m.clone());
    let mean_list_size = outer.clone() / pow(k - 1);
    let mean_collision_pairs =
        Rational::new(1, 2)? * outer * (inner - Rational::one()) / (pow(k - 1) * pow(k - 2));
    Ok(ExpectedCounts { mean_list_size, mean_collision_pairs })
}

#[derive(Clone, Debug)]
pub struct Realization {
    pub maps: LocalMapSet<Rational>,
    pub verified: bool,
}

/// Per-site 0/1 maps sending the label of each survivor's vector to that
/// survivor's index (all other labels to 0), applied to W^{⊗kn}.
pub fn realize_local_maps(res: &ProtocolResult) -> Result<Realization> {
    let (k, copies) = (res.k, res.k * res.n);
    if copies > MAX_REALIZE_COPIES {
        return Err(Error::BudgetExceeded {
            what: "realized copies kn",
            needed: copies as u128,
            limit: MAX_REALIZE_COPIES as u128,
        });
    }
    let dim = 1usize << copies;
    let rows = res.n_n.max(1);
    let maps = (0..k)
        .map(|site| {
            let mut m = Matrix::zeros(rows, dim, ());
            for (r, t) in res.survivors.iter().enumerate() {
                m.set(r, t.basis_index(site), Rational::one());
            }
            m
        })
        .collect();
    let maps = LocalMapSet::new(maps)?;
    let image = make_w(k)?.tensor_power(copies)?.apply_local_maps(&maps)?;
    let verified = if res.n_n == 0 {
        image.is_zero()
    } else {
        image == make_ghz(res.n_n, k)?
    };
    Ok(Realization { maps, verified })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub k: usize,
    pub n: usize,
    pub modulus: u64,
    pub b_size: usize,
    pub seeds: usize,
    pub mean_n: f64,
    pub best_n: usize,
    /// Mean over seeds of log₂(N_n)/(kn), with 0 for N_n ≤ 1.
    pub mean_rate: f64,
    pub best_rate: f64,
    pub bound: f64,
    pub degenerate: bool,
}

/// Runs seeds 0..seeds for each n; per-seed runs are parallel and collected in
/// seed order.
pub fn rate_table(k: usize, ns: &[usize], seeds: usize, alpha: Option<f64>) -> Result<Vec<RateRow>> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let base = ProtocolConfig::new(k, n, 0)?;
        let base = match alpha {
            Some(a) => base.with_alpha(a)?,
            None => base,
        };
        let results: Vec<ProtocolResult> = (0..seeds as u64)
            .into_par_iter()
            .map(|seed| run_protocol(&ProtocolConfig { seed, ..base.clone() }))
            .collect::<Result<_>>()?;
        let best = results.iter().map(|r| r.n_n).max().unwrap_or(0);
        let count = results.len().max(1) as f64;
        let best_rate = if best > 1 { (best as f64).log2() / (k * n) as f64 } else { 0.0 };
        rows.push(RateRow {
            k,
            n,
            modulus: base.modulus(),
            b_size: results.first().map_or(0, |r| r.set_b.len()),
            seeds,
            mean_n: results.iter().map(|r| r.n_n as f64).sum::<f64>() / count,
            best_n: best,
            mean_rate: results.iter().map(|r| r.rate).sum::<f64>() / count,
            best_rate,
            bound: binary_entropy(1.0 / k as f64),
            degenerate: best == 0,
        });
    }
    Ok(rows)
}

pub const RATE_CSV_HEADER: &str = "k,n,M,B_size,seeds,mean_N,best_N,mean_rate,best_rate,bound,flag";

pub fn rate_rows_csv(rows: &[RateRow]) -> String {
    let mut out = String::from(RATE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{},{:.6},{:.6},{:.6},{}\n",
            r.k,
            r.n,
            r.modulus,
            r.b_size,
            r.seeds,
            r.mean_n,
            r.best_n,
            r.mean_rate,
            r.best_rate,
            r.bound,
            if r.degenerate { "degenerate" } else { "" }
        ));
    }
    out
}

/// GHZ_N as a rational tensor on k parties, or the zero tensor when N = 0.
pub fn ghz_or_zero(n: usize, k: usize) -> Result<SparseTensor<Rational>> {
    if n == 0 {
        Ok(SparseTensor::zero(TensorShape::uniform(k, 1)?, ()))
    } else {
        make_ghz(n, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_counts() {
        assert_eq!(enumerate_balanced_tuples(3, 1, DEFAULT_ENUMERATION_BUDGET).unwrap().len(), 6);
        assert_eq!(enumerate_balanced_tuples(3, 2, DEFAULT_ENUMERATION_BUDGET).unwrap().len(), 90);
        assert_eq!(enumerate_balanced_tuples(3, 3, DEFAULT_ENUMERATION_BUDGET).unwrap().len(), 1680);
        assert!(enumerate_balanced_tuples(3, 3, 100).is_err());
    }

    #[test]
    fn tuple_vectors_balanced() {
        for t in enumerate_balanced_tuples(4, 2, DEFAULT_ENUMERATION_BUDGET).unwrap() {
            let mut col = vec![0u8; 8];
            for i in 0..4 {
                let v = t.vector(i);
                assert_eq!(v.iter().filter(|&&x| x == 1).count(), 3 * 2);
                col.iter_mut().zip(&v).for_each(|(c, x)| *c += x);
            }
            assert!(col.iter().all(|&c| c == 3));
        }
    }

    #[test]
    fn zero_hash_is_zero() {
        let h = HashParams::zero(3, 6, 13).unwrap();
        for t in enumerate_balanced_tuples(3, 2, DEFAULT_ENUMERATION_BUDGET).unwrap() {
            assert_eq!(hash_tuple(&h, &t), vec![0, 0, 0]);
        }
    }

    #[test]
    fn hand_computed_residues() {
        // k = 3, M = 9, copies 0..3 with z = (2, 0, 1): I_0 = 101, I_1 = 110, I_2 = 011.
        let h = HashParams::new(9, vec![4, 7, 2], vec![5, 8], 3).unwrap();
        let t = BalancedTuple::from_parties(&[2, 0, 1], 3).unwrap();
        assert_eq!(t.vector(0), vec![1, 0, 1]);
        // b_0 = 5 + 4 + 2 = 11 ≡ 2; b_1 = 8 + 4 + 7 = 19 ≡ 1;
        // b_2 = 2^{-1}(13 + 2·4 + 1·7 + 1·2) = 2^{-1}·30 ≡ 5·3 = 15 ≡ 6.
        assert_eq!(hash_tuple(&h, &t), vec![2, 1, 6]);
    }

    #[test]
    fn config_parameters() {
        let c = ProtocolConfig::new(3, 1, 0).unwrap();
        assert_eq!((c.q(), c.modulus()), (4, 9));
        assert!(c.clone().with_alpha(4.0).is_err());
        assert!(ProtocolConfig::new(2, 1, 0).is_err());
    }

    #[test]
    fn expected_count_formulas() {
        let e = expected_counts(3, 1, 9).unwrap();
        assert_eq!(e.mean_list_size, Rational::new(6, 81).unwrap());
        assert_eq!(e.mean_collision_pairs, Rational::new(3, 729).unwrap());
        let e = expected_counts(3, 2, 7).unwrap();
        assert_eq!(e.mean_list_size, Rational::new(90, 49).unwrap());
    }

    #[test]
    fn runs_are_reproducible_and_ghz_shaped() {
        let cfg = ProtocolConfig::new(3, 2, 7).unwrap();
        let a = run_protocol(&cfg).unwrap();
        let b = run_protocol(&cfg).unwrap();
        assert_eq!(a.survivors, b.survivors);
        assert!(a.rate <= binary_entropy(1.0 / 3.0));
        let real = realize_local_maps(&a).unwrap();
        assert!(real.verified);
    }

    #[test]
    fn degenerate_hash_single_block() {
        let mut cfg = ProtocolConfig::new(3, 1, 0).unwrap();
        cfg.hash = Some(HashParams::zero(3, 3, cfg.modulus()).unwrap());
        cfg.set_b = Some(AvgFreeSet::from_u64(2, &[0]).unwrap());
        let r = run_protocol(&cfg).unwrap();
        assert_eq!(r.blocks.len(), 1);
        assert_eq!(r.blocks[0].before, 6);
        assert_eq!(r.n_n, 1);
        let real = realize_local_maps(&r).unwrap();
        assert!(real.verified);
    }

    #[test]
    fn alternate_rule_keeps_injectivity() {
        let mut cfg = ProtocolConfig::new(3, 3, 11).unwrap();
        cfg.rule = EliminationRule::LowestOther;
        let r = run_protocol(&cfg).unwrap();
        for site in 0..3 {
            let distinct: HashSet<u64> = r.survivors.iter().map(|t| t.mask(site)).collect();
            assert_eq!(distinct.len(), r.n_n);
        }
    }

    #[test]
    fn csv_rows() {
        let rows = rate_table(3, &[1, 2], 4, None).unwrap();
        let csv = rate_rows_csv(&rows);
        assert!(csv.starts_with(RATE_CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
        assert!(rows.iter().all(|r| r.best_rate <= r.bound));
    }
}
