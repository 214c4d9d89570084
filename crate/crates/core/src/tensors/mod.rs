//! Sparse k-partite tensors over exact scalars.
//!
//! A tensor stores only its nonzero entries, keyed by 0-based index tuples,
//! so the stored key set is exactly the support in the working basis. All
//! operations return new values; nothing is mutated in place after
//! construction.

mod matrix;
pub mod rank;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use matrix::{LocalMapSet, Matrix};

use crate::error::{Error, Result};
use crate::scalars::{Field, Ring};

/// Local dimensions (d_1, …, d_k) of a k-partite space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TensorShape {
    dims: Vec<usize>,
}

impl TensorShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("a tensor needs at least one party".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(format!("all local dimensions must be >= 1, got {dims:?}")));
        }
        Ok(TensorShape { dims })
    }

    pub fn uniform(parties: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; parties])
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    /// Ambient dimension d_1⋯d_k, saturating.
    pub fn volume(&self) -> u128 {
        self.dims.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }
}

/// Tensor in H_1 ⊗ ⋯ ⊗ H_k with no stored zeros.
#[derive(Clone, PartialEq)]
pub struct SparseTensor<S: Ring> {
    shape: TensorShape,
    domain: S::Domain,
    entries: BTreeMap<Vec<usize>, S>,
}

impl<S: Ring> std::fmt::Debug for SparseTensor<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseTensor")
            .field("dims", &self.shape.dims)
            .field("domain", &self.domain)
            .field("entries", &self.entries)
            .finish()
    }
}

impl<S: Ring> SparseTensor<S> {
    pub fn zero(shape: TensorShape, domain: S::Domain) -> Self {
        SparseTensor { shape, domain, entries: BTreeMap::new() }
    }

    /// Builds a tensor from (index, value) pairs; repeated indices are summed
    /// and zero results dropped.
    pub fn from_entries(
        shape: TensorShape,
        domain: S::Domain,
        entries: impl IntoIterator<Item = (Vec<usize>, S)>,
    ) -> Result<Self> {
        let mut t = Self::zero(shape, domain);
        for (idx, v) in entries {
            t.check_index(&idx)?;
            if v.domain() != t.domain {
                return Err(Error::DomainMismatch(format!("{:?} vs {:?}", v.domain(), t.domain)));
            }
            t.accumulate(idx, v);
        }
        Ok(t)
    }

    /// The 1 ⊗ ⋯ ⊗ 1 tensor with every local dimension 1.
    pub fn unit(parties: usize, domain: S::Domain) -> Result<Self> {
        let one = S::one(&domain);
        Self::from_entries(TensorShape::uniform(parties, 1)?, domain, [(vec![0; parties], one)])
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.shape.parties() {
            return Err(Error::DimensionMismatch(format!(
                "index {idx:?} has {} components, tensor has {} parties",
                idx.len(),
                self.shape.parties()
            )));
        }
        if idx.iter().zip(&self.shape.dims).any(|(&i, &d)| i >= d) {
            return Err(Error::DimensionMismatch(format!("index {idx:?} out of bounds {:?}", self.shape.dims)));
        }
        Ok(())
    }

    fn accumulate(&mut self, idx: Vec<usize>, v: S) {
        if v.is_zero() {
            return;
        }
        match self.entries.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&v);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn parties(&self) -> usize {
        self.shape.parties()
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn domain(&self) -> &S::Domain {
        &self.domain
    }

    pub fn get(&self, idx: &[usize]) -> Option<&S> {
        self.entries.get(idx)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &S)> {
        self.entries.iter()
    }

    /// Support in the working basis, in lexicographic order.
    pub fn support(&self) -> Vec<Vec<usize>> {
        self.entries.keys().cloned().collect()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn same_parties(&self, other: &Self) -> Result<()> {
        if self.parties() != other.parties() {
            return Err(Error::PartyMismatch { left: self.parties(), right: other.parties() });
        }
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(format!("{:?} vs {:?}", self.domain, other.domain)));
        }
        Ok(())
    }

    /// Party-wise tensor product: site j of the result is H_j ⊗ K_j with the
    /// first factor's index most significant.
    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        self.same_parties(other)?;
        let dims: Vec<usize> = self.dims().iter().zip(other.dims()).map(|(a, b)| a * b).collect();
        let mut out = Self::zero(TensorShape::new(dims)?, self.domain.clone());
        for (i, a) in &self.entries {
            for (j, b) in &other.entries {
                let idx = i.iter().zip(j).zip(other.dims()).map(|((&x, &y), &d)| x * d + y).collect();
                // products of nonzero field elements never cancel
                out.entries.insert(idx, a.mul(b));
            }
        }
        out.entries.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// n-fold tensor power; n = 0 gives the unit tensor.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        let mut acc = Self::unit(self.parties(), self.domain.clone())?;
        for _ in 0..n {
            acc = acc.tensor_product(self)?;
        }
        Ok(acc)
    }

    /// Block-diagonal direct sum; `other` occupies the trailing index ranges.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.same_parties(other)?;
        let dims: Vec<usize> = self.dims().iter().zip(other.dims()).map(|(a, b)| a + b).collect();
        let mut entries = self.entries.clone();
        for (j, b) in &other.entries {
            let idx = j.iter().zip(self.dims()).map(|(&y, &d)| y + d).collect();
            entries.insert(idx, b.clone());
        }
        Ok(SparseTensor { shape: TensorShape::new(dims)?, domain: self.domain.clone(), entries })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_parties(other)?;
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims(), other.dims())));
        }
        let mut out = self.clone();
        for (i, v) in &other.entries {
            out.accumulate(i.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.shape.clone(), self.domain.clone());
        for (i, v) in &self.entries {
            out.accumulate(i.clone(), v.mul(c));
        }
        out
    }

    /// Applies (A_1 ⊗ ⋯ ⊗ A_k), contracting one site at a time.
    pub fn apply_local_maps(&self, maps: &LocalMapSet<S>) -> Result<Self> {
        if maps.parties() != self.parties() {
            return Err(Error::PartyMismatch { left: maps.parties(), right: self.parties() });
        }
        let mut current = self.clone();
        for (site, m) in maps.maps().iter().enumerate() {
            current = current.apply_at_site(site, m)?;
        }
        Ok(current)
    }

    /// Applies a single matrix at `site`, identity elsewhere.
    pub fn apply_at_site(&self, site: usize, m: &Matrix<S>) -> Result<Self> {
        if m.domain() != &self.domain {
            return Err(Error::DomainMismatch(format!("map over {:?}, tensor over {:?}", m.domain(), self.domain)));
        }
        if m.cols() != self.dims()[site] {
            return Err(Error::DimensionMismatch(format!(
                "site {site}: map has {} columns, local dimension is {}",
                m.cols(),
                self.dims()[site]
            )));
        }
        let columns: Vec<Vec<(usize, &S)>> = (0..m.cols())
            .map(|c| (0..m.rows()).filter_map(|r| Some((r, m.get(r, c))).filter(|(_, v)| !v.is_zero())).collect())
            .collect();
        let mut acc: HashMap<Vec<usize>, S> = HashMap::new();
        for (idx, v) in &self.entries {
            for &(r, a) in &columns[idx[site]] {
                let mut new_idx = idx.clone();
                new_idx[site] = r;
                let term = a.mul(v);
                match acc.get_mut(&new_idx) {
                    Some(x) => *x = x.add(&term),
                    None => {
                        acc.insert(new_idx, term);
                    }
                }
            }
        }
        let mut dims = self.dims().to_vec();
        dims[site] = m.rows();
        let entries = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(SparseTensor { shape: TensorShape::new(dims)?, domain: self.domain.clone(), entries })
    }

    /// Contracts `site` against the linear form `form` and removes the party.
    pub fn contract_site(&self, site: usize, form: &[S]) -> Result<Self> {
        if site >= self.parties() || self.parties() < 2 {
            return Err(Error::InvalidArgument(format!("cannot remove site {site} of {}", self.parties())));
        }
        if form.len() != self.dims()[site] {
            return Err(Error::DimensionMismatch(format!(
                "form has length {}, site {site} has dimension {}",
                form.len(),
                self.dims()[site]
            )));
        }
        let mut dims = self.dims().to_vec();
        dims.remove(site);
        let mut out = Self::zero(TensorShape::new(dims)?, self.domain.clone());
        for (idx, v) in &self.entries {
            let c = &form[idx[site]];
            if c.is_zero() {
                continue;
            }
            let mut rest = idx.clone();
            rest.remove(site);
            out.accumulate(rest, c.mul(v));
        }
        Ok(out)
    }

    /// Moves original site i to position `perm[i]`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let k = self.parties();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of {k} sites")));
        }
        let mut dims = vec![0; k];
        for (i, &p) in perm.iter().enumerate() {
            dims[p] = self.dims()[i];
        }
        let entries = self
            .entries
            .iter()
            .map(|(idx, v)| {
                let mut n = vec![0; k];
                for (i, &p) in perm.iter().enumerate() {
                    n[p] = idx[i];
                }
                (n, v.clone())
            })
            .collect();
        Ok(SparseTensor { shape: TensorShape::new(dims)?, domain: self.domain.clone(), entries })
    }

    /// Reorders the basis at `site`: label x becomes `labels[x]`.
    pub fn relabel_site(&self, site: usize, labels: &[usize]) -> Result<Self> {
        let d = self.dims()[site];
        let mut seen = vec![false; d];
        if labels.len() != d || labels.iter().any(|&l| l >= d || std::mem::replace(&mut seen[l], true)) {
            return Err(Error::InvalidArgument(format!("{labels:?} is not a relabeling of dimension {d}")));
        }
        let entries = self
            .entries
            .iter()
            .map(|(idx, v)| {
                let mut n = idx.clone();
                n[site] = labels[idx[site]];
                (n, v.clone())
            })
            .collect();
        Ok(SparseTensor { shape: self.shape.clone(), domain: self.domain.clone(), entries })
    }

    pub fn map_scalars<T: Ring>(&self, domain: T::Domain, f: impl Fn(&S) -> T) -> SparseTensor<T> {
        let mut out = SparseTensor::zero(self.shape.clone(), domain);
        for (i, v) in &self.entries {
            out.accumulate(i.clone(), f(v));
        }
        out
    }

    /// Row and column keys of the S | S̄ flattening, restricted to occupied
    /// positions.
    fn flattening_parts(&self, sites: &[usize]) -> Result<(Vec<bool>, usize)> {
        let k = self.parties();
        let mut in_s = vec![false; k];
        for &s in sites {
            if s >= k {
                return Err(Error::InvalidArgument(format!("site {s} out of range for {k} parties")));
            }
            in_s[s] = true;
        }
        let count = in_s.iter().filter(|&&b| b).count();
        if count == 0 || count == k {
            return Err(Error::InvalidArgument("a cut must be a nonempty proper subset of the sites".into()));
        }
        Ok((in_s, count))
    }
}

impl<S: Field> SparseTensor<S> {
    /// Rank of the matrix grouping the sites in `sites` as rows and the rest
    /// as columns (the Schmidt rank across the cut).
    pub fn flattening_rank(&self, sites: &[usize]) -> Result<usize> {
        let (in_s, _) = self.flattening_parts(sites)?;
        let mut row_keys: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut col_keys: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let split = |idx: &Vec<usize>| -> (Vec<usize>, Vec<usize>) {
            let mut r = Vec::new();
            let mut c = Vec::new();
            for (i, &x) in idx.iter().enumerate() {
                if in_s[i] {
                    r.push(x)
                } else {
                    c.push(x)
                }
            }
            (r, c)
        };
        let mut cells = Vec::with_capacity(self.entries.len());
        for (idx, v) in &self.entries {
            let (r, c) = split(idx);
            let nr = row_keys.len();
            let ri = *row_keys.entry(r).or_insert(nr);
            let nc = col_keys.len();
            let ci = *col_keys.entry(c).or_insert(nc);
            cells.push((ri, ci, v));
        }
        if cells.is_empty() {
            return Ok(0);
        }
        let zero = S::zero(&self.domain);
        let mut rows = vec![vec![zero; col_keys.len()]; row_keys.len()];
        for (r, c, v) in cells {
            rows[r][c] = v.clone();
        }
        Ok(S::matrix_rank(rows))
    }
}

/// Set of index tuples, used for supports detached from their values.
pub type Support = BTreeSet<Vec<usize>>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Rational;

    fn t(dims: &[usize], entries: &[(&[usize], i64)]) -> SparseTensor<Rational> {
        SparseTensor::from_entries(
            TensorShape::new(dims.to_vec()).unwrap(),
            (),
            entries.iter().map(|(i, v)| (i.to_vec(), Rational::from(*v))),
        )
        .unwrap()
    }

    #[test]
    fn zero_entries_are_dropped() {
        let a = t(&[2, 2], &[(&[0, 0], 1), (&[0, 0], -1), (&[1, 1], 0)]);
        assert!(a.is_zero());
    }

    #[test]
    fn out_of_bounds_rejected() {
        let r = SparseTensor::from_entries(TensorShape::new(vec![2]).unwrap(), (), [(vec![2], Rational::one())]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        assert!(TensorShape::new(vec![2, 0]).is_err());
    }

    #[test]
    fn product_with_unit_is_identity() {
        let a = t(&[2, 3], &[(&[0, 2], 5), (&[1, 0], -2)]);
        let u = SparseTensor::unit(2, ()).unwrap();
        assert_eq!(a.tensor_product(&u).unwrap(), a);
        assert_eq!(u.tensor_product(&a).unwrap(), a);
    }

    #[test]
    fn party_mismatch() {
        let a = t(&[2, 2], &[(&[0, 0], 1)]);
        let b = t(&[2, 2, 2], &[(&[0, 0, 0], 1)]);
        assert!(matches!(a.tensor_product(&b), Err(Error::PartyMismatch { .. })));
        assert!(matches!(a.direct_sum(&b), Err(Error::PartyMismatch { .. })));
    }

    #[test]
    fn direct_sum_with_zero_pads() {
        let z = SparseTensor::<Rational>::zero(TensorShape::new(vec![1, 2]).unwrap(), ());
        let a = t(&[2, 2], &[(&[1, 1], 3)]);
        let s = z.direct_sum(&a).unwrap();
        assert_eq!(s.dims(), &[3, 4]);
        assert_eq!(s.support(), vec![vec![2, 3]]);
    }

    #[test]
    fn swap_two_sites() {
        let a = t(&[2, 2], &[(&[0, 1], 1)]);
        let b = a.permute_parties(&[1, 0]).unwrap();
        assert_eq!(b.support(), vec![vec![1, 0]]);
        assert!(a.permute_parties(&[0, 0]).is_err());
    }

    #[test]
    fn contraction_removes_site() {
        let a = t(&[2, 2, 2], &[(&[0, 0, 0], 1), (&[1, 1, 1], 1)]);
        let b = a.contract_site(2, &[Rational::one(), Rational::one()]).unwrap();
        assert_eq!(b, t(&[2, 2], &[(&[0, 0], 1), (&[1, 1], 1)]));
    }

    #[test]
    fn invalid_cut() {
        let a = t(&[2, 2], &[(&[0, 0], 1)]);
        assert!(a.flattening_rank(&[]).is_err());
        assert!(a.flattening_rank(&[0, 1]).is_err());
        assert!(a.flattening_rank(&[5]).is_err());
    }
}
