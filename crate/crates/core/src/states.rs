//! Named states: GHZ, W, Dicke D_{m,n}, generalized Dicke D_{λ,k}, EPR pairs.
//!
//! Amplitudes are all 1 (unnormalized).

use crate::error::{Error, Result};
use crate::scalars::Rational;
use crate::tensors::{SparseTensor, TensorShape};

/// Integer partition λ_1 ≥ ⋯ ≥ λ_d > 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("partition must have at least one part".into()));
        }
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("{parts:?} is not weakly decreasing and positive")));
        }
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// |λ| = Σ λ_i.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// (λ_1 + 1)⋯(λ_d + 1).
    pub fn box_count(&self) -> usize {
        self.parts.iter().map(|p| p + 1).product()
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        write!(f, "({})", s.join(","))
    }
}

fn ones_tensor(shape: TensorShape, support: impl IntoIterator<Item = Vec<usize>>) -> Result<SparseTensor<Rational>> {
    SparseTensor::from_entries(shape, (), support.into_iter().map(|i| (i, Rational::one())))
}

/// GHZ_a = Σ_{i<a} |i…i⟩ on k parties.
pub fn make_ghz(a: usize, k: usize) -> Result<SparseTensor<Rational>> {
    if a < 1 || k < 2 {
        return Err(Error::InvalidArgument(format!("GHZ needs level >= 1 and >= 2 parties, got a={a}, k={k}")));
    }
    ones_tensor(TensorShape::uniform(k, a)?, (0..a).map(|i| vec![i; k]))
}

/// W = |10…0⟩ + |010…0⟩ + ⋯ + |0…01⟩.
pub fn make_w(k: usize) -> Result<SparseTensor<Rational>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("W needs >= 2 parties, got {k}")));
    }
    ones_tensor(
        TensorShape::uniform(k, 2)?,
        (0..k).map(|i| {
            let mut v = vec![0; k];
            v[i] = 1;
            v
        }),
    )
}

/// Symmetrization of |0^m 1^n⟩.
pub fn make_dicke(m: usize, n: usize) -> Result<SparseTensor<Rational>> {
    if m + n < 2 {
        return Err(Error::InvalidArgument(format!("Dicke state needs m + n >= 2, got m={m}, n={n}")));
    }
    let mut content = vec![0; m];
    content.extend(std::iter::repeat(1).take(n));
    ones_tensor(TensorShape::uniform(m + n, 2)?, multiset_permutations(content))
}

/// D_{λ,k}: all strings with λ_i copies of symbol i (1 ≤ i ≤ d) and k − |λ|
/// zeros.
pub fn make_dicke_lambda(lambda: &Partition, k: usize) -> Result<SparseTensor<Rational>> {
    if k < lambda.weight() {
        return Err(Error::InvalidArgument(format!("k = {k} is smaller than |λ| = {}", lambda.weight())));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("D_{λ,k} needs at least 2 parties".into()));
    }
    let mut content = vec![0; k - lambda.weight()];
    for (i, &p) in lambda.parts().iter().enumerate() {
        content.extend(std::iter::repeat(i + 1).take(p));
    }
    ones_tensor(TensorShape::uniform(k, lambda.len() + 1)?, multiset_permutations(content))
}

/// EPR pair |00⟩ + |11⟩ on sites i and j (0-based), dimension 1 elsewhere.
pub fn make_epr_pair(i: usize, j: usize, k: usize) -> Result<SparseTensor<Rational>> {
    if i == j || i.max(j) >= k {
        return Err(Error::InvalidArgument(format!("EPR pair needs distinct sites below {k}, got ({i},{j})")));
    }
    let mut dims = vec![1; k];
    dims[i] = 2;
    dims[j] = 2;
    let mut one = vec![0; k];
    one[i] = 1;
    one[j] = 1;
    ones_tensor(TensorShape::new(dims)?, [vec![0; k], one])
}

/// Distinct permutations of a multiset, in lexicographic order.
pub fn multiset_permutations(mut items: Vec<usize>) -> Vec<Vec<usize>> {
    items.sort_unstable();
    let mut out = vec![items.clone()];
    // next_permutation until it wraps
    loop {
        let Some(i) = (0..items.len().saturating_sub(1)).rev().find(|&i| items[i] < items[i + 1]) else {
            break;
        };
        let j = (i + 1..items.len()).rev().find(|&j| items[j] > items[i]).expect("successor exists");
        items.swap(i, j);
        items[i + 1..].reverse();
        out.push(items.clone());
    }
    out
}
