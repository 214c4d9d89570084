//! Restrictions, Schmidt-rank profiles, rank-based rate bounds and the
//! party-reduction search that extracts EPR pairs from globally entangled
//! states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalars::Field;
use crate::tensors::{LocalMapSet, Matrix, SparseTensor};

/// Cut enumeration is exponential in the party count.
pub const MAX_PROFILE_PARTIES: usize = 16;

/// One representative per bipartition {S, S̄}: the smaller side, or the side
/// containing site 0 on ties. Sorted by size, then lexicographically.
pub fn cut_classes(k: usize) -> Result<Vec<Vec<usize>>> {
    if k > MAX_PROFILE_PARTIES {
        return Err(Error::BudgetExceeded {
            what: "cut enumeration parties",
            needed: k as u128,
            limit: MAX_PROFILE_PARTIES as u128,
        });
    }
    let mut cuts: Vec<Vec<usize>> = (1u32..(1u32 << k) - 1)
        .filter(|&mask| {
            let size = mask.count_ones() as usize;
            2 * size < k || (2 * size == k && mask & 1 == 1)
        })
        .map(|mask| (0..k).filter(|&i| mask >> i & 1 == 1).collect())
        .collect();
    cuts.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(cuts)
}

pub fn complement(cut: &[usize], k: usize) -> Vec<usize> {
    (0..k).filter(|i| !cut.contains(i)).collect()
}

/// Flattening rank for every cut class.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtProfile {
    pub parties: usize,
    pub ranks: Vec<(Vec<usize>, usize)>,
}

impl SchmidtProfile {
    pub fn rank_of(&self, cut: &[usize]) -> Option<usize> {
        let mut c = cut.to_vec();
        c.sort_unstable();
        let alt = complement(&c, self.parties);
        self.ranks.iter().find(|(s, _)| *s == c || *s == alt).map(|(_, r)| *r)
    }

    pub fn min_rank(&self) -> usize {
        self.ranks.iter().map(|(_, r)| *r).min().unwrap_or(0)
    }
}

pub fn schmidt_profile<S: Field>(psi: &SparseTensor<S>) -> Result<SchmidtProfile> {
    let k = psi.parties();
    let ranks = cut_classes(k)?
        .into_iter()
        .map(|cut| psi.flattening_rank(&cut).map(|r| (cut, r)))
        .collect::<Result<_>>()?;
    Ok(SchmidtProfile { parties: k, ranks })
}

/// True iff (A_1 ⊗ ⋯ ⊗ A_k) ψ = φ exactly.
///
/// On success the flattening ranks of φ are checked against those of ψ for
/// every cut; a violation means the arithmetic is broken and panics.
pub fn check_restriction<S: Field>(
    psi: &SparseTensor<S>,
    phi: &SparseTensor<S>,
    maps: &LocalMapSet<S>,
) -> Result<bool> {
    let image = psi.apply_local_maps(maps)?;
    if image.dims() != phi.dims() {
        return Err(Error::DimensionMismatch(format!(
            "maps produce dims {:?}, target has {:?}",
            image.dims(),
            phi.dims()
        )));
    }
    let ok = image == *phi;
    if ok && psi.parties() >= 2 && psi.parties() <= MAX_PROFILE_PARTIES {
        for cut in cut_classes(psi.parties())? {
            let (rp, rs) = (phi.flattening_rank(&cut)?, psi.flattening_rank(&cut)?);
            assert!(rp <= rs, "rank increased under a restriction across {cut:?}: {rs} -> {rp}");
        }
    }
    Ok(ok)
}

/// Lower bound max_S log rk_S φ / log rk_S ψ, kept as an exact rank pair.
#[derive(Clone, Debug, PartialEq)]
pub enum RankRateBound {
    Finite { cut: Vec<usize>, target_rank: usize, source_rank: usize },
    /// Some cut has rk_S ψ = 1 < rk_S φ: no finite number of copies suffices.
    Infinite { cut: Vec<usize> },
}

impl RankRateBound {
    pub fn value(&self) -> f64 {
        match self {
            RankRateBound::Finite { target_rank, source_rank, .. } => {
                if *target_rank <= 1 {
                    0.0
                } else {
                    (*target_rank as f64).ln() / (*source_rank as f64).ln()
                }
            }
            RankRateBound::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn exact(&self) -> String {
        match self {
            RankRateBound::Finite { target_rank, source_rank, .. } => {
                format!("log {target_rank} / log {source_rank}")
            }
            RankRateBound::Infinite { .. } => "inf".to_string(),
        }
    }
}

pub fn rate_lower_bound_ranks<S: Field>(psi: &SparseTensor<S>, phi: &SparseTensor<S>) -> Result<RankRateBound> {
    if psi.parties() != phi.parties() {
        return Err(Error::PartyMismatch { left: psi.parties(), right: phi.parties() });
    }
    let mut best: Option<RankRateBound> = None;
    for cut in cut_classes(psi.parties())? {
        let rs = psi.flattening_rank(&cut)?;
        let rt = phi.flattening_rank(&cut)?;
        if rs <= 1 {
            if rt > 1 {
                return Ok(RankRateBound::Infinite { cut });
            }
            continue;
        }
        let candidate = RankRateBound::Finite { cut, target_rank: rt.max(1), source_rank: rs };
        if best.as_ref().is_none_or(|b| candidate.value() > b.value()) {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| Error::Precondition("the source has rank 1 across every cut".into()))
}

pub fn is_globally_entangled<S: Field>(psi: &SparseTensor<S>) -> Result<bool> {
    if psi.parties() < 2 {
        return Ok(false);
    }
    for cut in cut_classes(psi.parties())? {
        if psi.flattening_rank(&cut)? < 2 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which family of linear forms produced a reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateStage {
    Coordinate,
    TwoTerm,
    Random,
}

impl CandidateStage {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateStage::Coordinate => "coordinate",
            CandidateStage::TwoTerm => "two-term",
            CandidateStage::Random => "random",
        }
    }
}

/// A linear form at one site whose contraction leaves a globally entangled
/// state on the remaining parties.
#[derive(Clone, Debug)]
pub struct Reduction<S: Field> {
    pub site: usize,
    pub form: Vec<S>,
    pub stage: CandidateStage,
    pub candidates_tried: usize,
    pub reduced: SparseTensor<S>,
}

/// Seeded random stage: rounds of growing coefficient height.
const RANDOM_ROUNDS: i64 = 8;
const RANDOM_PER_ROUND: usize = 16;

/// Indices of site-`c` slices that are linearly independent, in order. With
/// ψ = Σ_p |p⟩ ⊗ ψ_p these are the p whose ψ_p form a basis of the span.
fn independent_slices<S: Field>(psi: &SparseTensor<S>, c: usize) -> Vec<usize> {
    let d = psi.dims()[c];
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); d];
    let mut col_keys = std::collections::BTreeMap::new();
    let mut cells = Vec::new();
    for (idx, v) in psi.entries() {
        let mut rest = idx.clone();
        let p = rest.remove(c);
        let n = col_keys.len();
        let col = *col_keys.entry(rest).or_insert(n);
        cells.push((p, col, v.clone()));
        rows[p].push(col);
    }
    let zero = S::zero(psi.domain());
    let mut dense = vec![vec![zero; col_keys.len()]; d];
    for (p, col, v) in cells {
        dense[p][col] = v;
    }
    let mut chosen: Vec<usize> = Vec::new();
    for p in 0..d {
        let mut trial: Vec<Vec<S>> = chosen.iter().map(|&q| dense[q].clone()).collect();
        trial.push(dense[p].clone());
        if S::matrix_rank(trial) == chosen.len() + 1 {
            chosen.push(p);
        }
    }
    chosen
}

/// Finds a linear form P at site `c` such that (P at c)ψ is globally entangled
/// on the other k − 1 parties.
///
/// Candidates are tried in order: coordinate forms δ_p over independent
/// slices, then δ_{p₁} + δ_{p₂} over pairs p₁ < p₂, then seeded random integer
/// forms with growing coefficient height.
pub fn reduce_party<S: Field>(psi: &SparseTensor<S>, c: usize, seed: u64) -> Result<Reduction<S>> {
    let k = psi.parties();
    if k < 3 {
        return Err(Error::Precondition(format!("party reduction needs k >= 3, got {k}")));
    }
    if c >= k {
        return Err(Error::InvalidArgument(format!("site {c} out of range for {k} parties")));
    }
    if !is_globally_entangled(psi)? {
        return Err(Error::Precondition("input state is biseparable".into()));
    }
    let d = psi.dims()[c];
    let domain = psi.domain().clone();
    let delta = |ps: &[usize]| -> Vec<S> {
        (0..d).map(|i| if ps.contains(&i) { S::one(&domain) } else { S::zero(&domain) }).collect()
    };

    let slices = independent_slices(psi, c);
    let mut candidates: Vec<(CandidateStage, Vec<S>)> = Vec::new();
    for &p in &slices {
        candidates.push((CandidateStage::Coordinate, delta(&[p])));
    }
    for (i, &p1) in slices.iter().enumerate() {
        for &p2 in &slices[i + 1..] {
            candidates.push((CandidateStage::TwoTerm, delta(&[p1, p2])));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for height in 1..=RANDOM_ROUNDS {
        for _ in 0..RANDOM_PER_ROUND {
            let form: Vec<S> = (0..d).map(|_| S::from_i64(rng.gen_range(-height..=height), &domain)).collect();
            if form.iter().any(|v| !v.is_zero()) {
                candidates.push((CandidateStage::Random, form));
            }
        }
    }

    for (tried, (stage, form)) in candidates.into_iter().enumerate() {
        let reduced = psi.contract_site(c, &form)?;
        if is_globally_entangled(&reduced)? {
            return Ok(Reduction { site: c, form, stage, candidates_tried: tried + 1, reduced });
        }
    }
    Err(Error::SearchExhausted(format!(
        "no linear form at site {c} keeps the state globally entangled after {} random rounds",
        RANDOM_ROUNDS
    )))
}

/// A single-copy restriction ψ ⊸ EPR_{first,partner}.
#[derive(Clone, Debug)]
pub struct EprWitness<S: Field> {
    pub first: usize,
    pub partner: usize,
    pub steps: Vec<Reduction<S>>,
    /// Two-party state left after all reductions.
    pub final_state: SparseTensor<S>,
    pub final_rank: usize,
    /// Local maps on the original parties producing the EPR pair exactly.
    pub maps: LocalMapSet<S>,
    pub verified: bool,
}

/// For each partner j ≠ 0, reduces every other party and records the maps
/// that turn one copy of ψ into EPR_{0,j}.
pub fn epr_chain_extract<S: Field>(psi: &SparseTensor<S>, seed: u64) -> Result<Vec<EprWitness<S>>> {
    let k = psi.parties();
    if !is_globally_entangled(psi)? {
        return Err(Error::Precondition("input state is biseparable".into()));
    }
    let domain = psi.domain().clone();
    let mut out = Vec::with_capacity(k.saturating_sub(1));
    for partner in 1..k {
        let mut current = psi.clone();
        let mut labels: Vec<usize> = (0..k).collect();
        let mut steps = Vec::new();
        let mut forms: Vec<Option<Vec<S>>> = vec![None; k];
        for site in (1..k).rev().filter(|&s| s != partner) {
            let pos = labels.iter().position(|&l| l == site).expect("site still present");
            let red = reduce_party(&current, pos, seed.wrapping_add(site as u64))?;
            current = red.reduced.clone();
            labels.remove(pos);
            forms[site] = Some(red.form.clone());
            steps.push(Reduction { site, ..red });
        }
        debug_assert_eq!(labels, vec![0, partner]);
        let final_rank = current.flattening_rank(&[0])?;
        let (a0, aj) = epr_maps(&current)?;
        let maps: Vec<Matrix<S>> = (0..k)
            .map(|s| {
                if s == 0 {
                    Ok(a0.clone())
                } else if s == partner {
                    Ok(aj.clone())
                } else {
                    let form = forms[s].clone().expect("every other site reduced");
                    Matrix::from_rows(domain.clone(), vec![form])
                }
            })
            .collect::<Result<_>>()?;
        let maps = LocalMapSet::new(maps)?;
        let epr = crate::states::make_epr_pair(0, partner, k)?
            .map_scalars(domain.clone(), |v| S::from_rational(v, &domain));
        let verified = check_restriction(psi, &epr, &maps)?;
        out.push(EprWitness { first: 0, partner, steps, final_state: current, final_rank, maps, verified });
    }
    Ok(out)
}

/// Maps (A, B) with (A ⊗ B) M = |00⟩ + |11⟩ for a bipartite M of rank ≥ 2.
fn epr_maps<S: Field>(m: &SparseTensor<S>) -> Result<(Matrix<S>, Matrix<S>)> {
    let (d0, d1) = (m.dims()[0], m.dims()[1]);
    let domain = m.domain().clone();
    let zero = S::zero(&domain);
    let get = |a: usize, b: usize| m.get(&[a, b]).cloned().unwrap_or_else(|| zero.clone());
    for r1 in 0..d0 {
        for r2 in r1 + 1..d0 {
            for c1 in 0..d1 {
                for c2 in c1 + 1..d1 {
                    let (a, b, c, d) = (get(r1, c1), get(r1, c2), get(r2, c1), get(r2, c2));
                    let det = a.mul(&d).sub(&b.mul(&c));
                    let Some(inv_det) = det.inv() else { continue };
                    // N^{-1} = (1/det) [[d, -b], [-c, a]]
                    let ninv = [[d.mul(&inv_det), b.neg().mul(&inv_det)], [c.neg().mul(&inv_det), a.mul(&inv_det)]];
                    let mut left = Matrix::zeros(2, d0, domain.clone());
                    for (i, row) in ninv.iter().enumerate() {
                        left.set(i, r1, row[0].clone());
                        left.set(i, r2, row[1].clone());
                    }
                    let mut right = Matrix::zeros(2, d1, domain.clone());
                    right.set(0, c1, S::one(&domain));
                    right.set(1, c2, S::one(&domain));
                    return Ok((left, right));
                }
            }
        }
    }
    Err(Error::Precondition("two-party state has Schmidt rank < 2".into()))
}
