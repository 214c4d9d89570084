//! Support functionals in a fixed basis: weighted marginal entropies
//! H_θ(P) = Σ_j θ_j H(P_j), their maxima over supports, maximal points under
//! the product order, and the resulting conversion-rate lower bounds.
//!
//! All entropies are in bits.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalars::{Rational, Ring};
use crate::states::Partition;
use crate::tensors::SparseTensor;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 100_000;
/// Denominators below this are skipped in rate bounds.
pub const MIN_DENOMINATOR: f64 = 1e-12;

/// A point of the probability simplex on k parties, stored exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Theta {
    weights: Vec<Rational>,
}

impl Theta {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("theta needs at least one weight".into()));
        }
        if weights.iter().any(Rational::is_negative) {
            return Err(Error::InvalidArgument("theta weights must be nonnegative".into()));
        }
        let total = weights.iter().fold(Rational::zero(), |a, b| a + b);
        if total != Rational::one() {
            return Err(Error::InvalidArgument(format!("theta weights sum to {total}, not 1")));
        }
        Ok(Theta { weights })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("theta needs at least one weight".into()));
        }
        Theta::new(vec![Rational::new(1, k as i64)?; k])
    }

    /// All θ with θ_j = a_j / n, in lexicographic order of (a_1, …, a_k).
    pub fn grid(k: usize, n: usize) -> Result<Vec<Theta>> {
        if k == 0 || n == 0 {
            return Err(Error::InvalidArgument("grid needs k >= 1 and n >= 1".into()));
        }
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k);
        compositions(k, n, &mut current, &mut out);
        out.into_iter()
            .map(|a| Theta::new(a.into_iter().map(|x| Rational::new(x as i64, n as i64)).collect::<Result<_>>()?))
            .collect()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.weights.iter().map(Rational::to_f64).collect()
    }

    /// "u" for uniform on k parties, otherwise comma-separated rationals or
    /// decimals.
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        let text = text.trim();
        if text == "u" {
            return Theta::uniform(k);
        }
        let weights = text.split(',').map(parse_weight).collect::<Result<Vec<_>>>()?;
        if weights.len() != k {
            return Err(Error::InvalidArgument(format!("theta has {} weights for {k} parties", weights.len())));
        }
        Theta::new(weights)
    }
}

fn parse_weight(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let den = format!("1{}", "0".repeat(frac.len()));
        return Rational::from_str(&format!("{digits}/{den}"));
    }
    Rational::from_str(s)
}

impl std::fmt::Display for Theta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn compositions(k: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() + 1 == k {
        current.push(left);
        out.push(current.clone());
        current.pop();
        return;
    }
    for a in 0..=left {
        current.push(a);
        compositions(k, left - a, current, out);
        current.pop();
    }
}

/// A probability distribution on a finite set of index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportDistribution {
    support: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

impl SupportDistribution {
    pub fn new(support: Vec<Vec<usize>>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::DimensionMismatch(format!("{} tuples but {} probabilities", support.len(), probs.len())));
        }
        if support.is_empty() {
            return Err(Error::InvalidArgument("distribution needs a nonempty support".into()));
        }
        let k = support[0].len();
        if support.iter().any(|t| t.len() != k) {
            return Err(Error::DimensionMismatch("tuples of different lengths".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("probabilities must be nonnegative and sum to 1".into()));
        }
        Ok(SupportDistribution { support, probs })
    }

    pub fn uniform(support: Vec<Vec<usize>>) -> Result<Self> {
        let p = 1.0 / support.len().max(1) as f64;
        let n = support.len();
        SupportDistribution::new(support, vec![p; n])
    }

    pub fn point(tuple: Vec<usize>) -> Self {
        SupportDistribution { support: vec![tuple], probs: vec![1.0] }
    }

    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn parties(&self) -> usize {
        self.support[0].len()
    }

    /// P_j as a map from label to probability, one per site.
    pub fn marginals(&self) -> Vec<BTreeMap<usize, f64>> {
        let k = self.parties();
        let mut out = vec![BTreeMap::new(); k];
        for (t, &p) in self.support.iter().zip(&self.probs) {
            for (j, &x) in t.iter().enumerate() {
                *out[j].entry(x).or_insert(0.0) += p;
            }
        }
        out
    }

    /// tP + (1 − t)Q on a common support.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.support != other.support {
            return Err(Error::InvalidArgument("mixing distributions on different supports".into()));
        }
        let probs = self.probs.iter().zip(&other.probs).map(|(p, q)| t * p + (1.0 - t) * q).collect();
        Ok(SupportDistribution { support: self.support.clone(), probs })
    }
}

/// Shannon entropy in bits.
pub fn entropy_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum::<f64>().max(0.0)
}

/// h(p) = −p log₂ p − (1 − p) log₂(1 − p).
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits([p, 1.0 - p])
}

pub fn entropy_htheta(p: &SupportDistribution, theta: &Theta) -> Result<f64> {
    if theta.len() != p.parties() {
        return Err(Error::PartyMismatch { left: theta.len(), right: p.parties() });
    }
    let th = theta.to_f64();
    Ok(p.marginals().iter().zip(&th).map(|(m, &w)| w * entropy_bits(m.values().copied())).sum())
}

#[derive(Clone, Debug)]
pub struct MaxEntropy {
    /// −∞ for an empty support.
    pub value: f64,
    pub argmax: Option<SupportDistribution>,
    /// Frank–Wolfe gap max_x g(x) − Σ_x P(x) g(x) of the gradient g.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Gradient of H_θ at P, up to an additive constant: g(x) = −Σ_j θ_j log₂ P_j(x_j).
fn gradient(support: &[Vec<usize>], probs: &[f64], theta: &[f64]) -> Vec<f64> {
    let k = theta.len();
    let mut marg: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
    for (t, &p) in support.iter().zip(probs) {
        for j in 0..k {
            *marg[j].entry(t[j]).or_insert(0.0) += p;
        }
    }
    support
        .iter()
        .map(|t| {
            (0..k)
                .filter(|&j| theta[j] > 0.0)
                .map(|j| {
                    let m = marg[j][&t[j]];
                    if m > 0.0 { -theta[j] * m.log2() } else { f64::INFINITY }
                })
                .sum()
        })
        .collect()
}

fn fw_gap(g: &[f64], probs: &[f64]) -> f64 {
    let top = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let avg: f64 = g.iter().zip(probs).map(|(a, p)| a * p).sum();
    (top - avg).max(0.0)
}

/// Maximizes H_θ over distributions on Ψ by exponentiated-gradient ascent with
/// step 1, starting from uniform. The uniform distribution is also scored on
/// its own and the better of the two is returned.
pub fn max_entropy_over_support(support: &[Vec<usize>], theta: &Theta, tol: f64) -> Result<MaxEntropy> {
    if support.is_empty() {
        return Ok(MaxEntropy { value: f64::NEG_INFINITY, argmax: None, kkt_residual: 0.0, iterations: 0, converged: true });
    }
    let k = support[0].len();
    if theta.len() != k {
        return Err(Error::PartyMismatch { left: theta.len(), right: k });
    }
    let th = theta.to_f64();
    let uniform = SupportDistribution::uniform(support.to_vec())?;
    let uniform_value = entropy_htheta(&uniform, theta)?;

    let mut probs = uniform.probs().to_vec();
    let mut iterations = 0;
    let mut residual = fw_gap(&gradient(support, &probs, &th), &probs);
    while residual >= tol && iterations < MAX_ITERATIONS {
        let g = gradient(support, &probs, &th);
        let shift = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // natural-log gradient, step 1
        let mut next: Vec<f64> = probs.iter().zip(&g).map(|(p, gi)| p * ((gi - shift) * std::f64::consts::LN_2).exp()).collect();
        let z: f64 = next.iter().sum();
        next.iter_mut().for_each(|p| *p /= z);
        probs = next;
        iterations += 1;
        residual = fw_gap(&gradient(support, &probs, &th), &probs);
    }
    let found = SupportDistribution::new(support.to_vec(), probs)?;
    let found_value = entropy_htheta(&found, theta)?;
    let (value, argmax, kkt_residual) = if uniform_value >= found_value {
        let r = fw_gap(&gradient(support, uniform.probs(), &th), uniform.probs());
        (uniform_value, uniform, r.min(residual))
    } else {
        (found_value, found, residual)
    };
    Ok(MaxEntropy { value, argmax: Some(argmax), kkt_residual, iterations, converged: kkt_residual < tol })
}

/// Tuples of Ψ not strictly dominated coordinate-wise by another tuple of Ψ.
pub fn maximal_points(support: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let set: BTreeSet<&Vec<usize>> = support.iter().collect();
    set.iter()
        .filter(|x| !set.iter().any(|y| y != *x && y.iter().zip(x.iter()).all(|(a, b)| a >= b)))
        .map(|x| (*x).clone())
        .collect()
}

pub fn is_antichain(support: &[Vec<usize>]) -> bool {
    maximal_points(support).len() == support.iter().collect::<BTreeSet<_>>().len()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportFunctionals {
    /// H_θ(supp f): an upper bound on the basis-minimized functional.
    pub rho_upper_est: f64,
    /// H_θ(max supp f): a lower bound on the basis-maximized functional.
    pub rho_lower_est: f64,
    pub oblique: bool,
    pub argmax: Option<SupportDistribution>,
    /// Sites whose labels were reversed before the estimates (empty for the
    /// given basis).
    pub reversed_sites: Vec<usize>,
}

/// Estimates in the basis the tensor is written in.
pub fn functionals_fixed_basis<S: Ring>(f: &SparseTensor<S>, theta: &Theta) -> Result<SupportFunctionals> {
    let support = f.support();
    let upper = max_entropy_over_support(&support, theta, DEFAULT_TOL)?;
    let max_pts = maximal_points(&support);
    let oblique = max_pts.len() == support.len();
    let lower = if oblique { upper.value } else { max_entropy_over_support(&max_pts, theta, DEFAULT_TOL)?.value };
    Ok(SupportFunctionals {
        rho_upper_est: upper.value,
        rho_lower_est: lower,
        oblique,
        argmax: upper.argmax,
        reversed_sites: Vec::new(),
    })
}

/// Reverses the label order i ↦ d − 1 − i at each site in `sites`.
pub fn reverse_labels<S: Ring>(f: &SparseTensor<S>, sites: &[usize]) -> Result<SparseTensor<S>> {
    let mut out = f.clone();
    for &s in sites {
        let d = f.dims()[s];
        let labels: Vec<usize> = (0..d).rev().collect();
        out = out.relabel_site(s, &labels)?;
    }
    Ok(out)
}

/// Parties beyond which the ordering search is not attempted.
pub const MAX_ORDERING_PARTIES: usize = 12;

/// Fixed-basis estimates after the best label reversal.
///
/// Reordering a basis is a change of basis, so the largest lower estimate over
/// the reversals of subsets of sites (site 0 never reversed, as a global
/// reversal changes nothing) is still a lower bound, and the upper estimate is
/// unchanged. Returns the first oblique ordering if one exists, otherwise the
/// ordering with the largest lower estimate.
pub fn functionals<S: Ring>(f: &SparseTensor<S>, theta: &Theta) -> Result<SupportFunctionals> {
    let base = functionals_fixed_basis(f, theta)?;
    let k = f.parties();
    if base.oblique || k > MAX_ORDERING_PARTIES || k < 2 {
        return Ok(base);
    }
    let orderings: Vec<Vec<usize>> =
        (1u32..1 << (k - 1)).map(|mask| (0..k - 1).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()).collect();
    let mut best = base;
    let mut seen: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    for sites in orderings {
        let g = reverse_labels(f, &sites)?;
        let support = g.support();
        let max_pts = maximal_points(&support);
        if max_pts.len() == support.len() {
            let mut out = functionals_fixed_basis(&g, theta)?;
            out.reversed_sites = sites;
            return Ok(out);
        }
        if !seen.insert(max_pts.clone()) {
            continue;
        }
        let lower = max_entropy_over_support(&max_pts, theta, DEFAULT_TOL)?.value;
        if lower > best.rho_lower_est {
            best.rho_lower_est = lower;
            best.reversed_sites = sites;
        }
    }
    Ok(best)
}

/// max over the grid of ρ_θ(φ) / ρ_θ(ψ), using the lower estimate for φ and the
/// exact value for the oblique ψ.
pub fn rate_lower_bound_support<S: Ring, T: Ring>(psi: &SparseTensor<S>, phi: &SparseTensor<T>, grid: &[Theta]) -> Result<RateBound> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty theta grid".into()));
    }
    let per: Vec<Result<Option<(f64, Theta)>>> = grid
        .par_iter()
        .map(|theta| {
            let fp = functionals(psi, theta)?;
            if !fp.oblique {
                return Err(Error::Precondition("source is not oblique in any tried label ordering".into()));
            }
            if fp.rho_upper_est < MIN_DENOMINATOR {
                return Ok(None);
            }
            let ft = functionals(phi, theta)?;
            Ok(Some((ft.rho_lower_est / fp.rho_upper_est, theta.clone())))
        })
        .collect();
    let mut best: Option<(f64, Theta)> = None;
    for r in per {
        if let Some((v, th)) = r? {
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, th));
            }
        }
    }
    let (value, theta) = best.ok_or_else(|| Error::Precondition("every denominator on the grid vanishes".into()))?;
    Ok(RateBound { value, theta })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateBound {
    pub value: f64,
    pub theta: Theta,
}

/// A closed form together with its decimal value.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactValue {
    pub exact: String,
    pub value: f64,
}

/// ω(W_k, GHZ) = 1 / h(1/k).
pub fn w_ghz_rate(k: usize) -> Result<ExactValue> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("W needs k >= 2, got {k}")));
    }
    let h = (1.0 / k as f64) * (k as f64).log2() + ((k - 1) as f64 / k as f64) * (k as f64 / (k - 1) as f64).log2();
    let exact = if k == 2 {
        "1/((1/2)log2(2) + (1/2)log2(2))".to_string()
    } else {
        format!("1/((1/{k})log2({k}) + ({}/{k})log2({k}/{}))", k - 1, k - 1)
    };
    Ok(ExactValue { exact, value: 1.0 / h })
}

/// 1 / H(λ / |λ|); infinite when the entropy vanishes.
pub fn dicke_rate_lower(lambda: &Partition) -> f64 {
    let w = lambda.weight() as f64;
    let h = entropy_bits(lambda.parts().iter().map(|&p| p as f64 / w));
    if h <= 0.0 { f64::INFINITY } else { 1.0 / h }
}
