use crate::error::{Error, Result};
use crate::scalars::Ring;

use super::TensorShape;

/// Dense row-major matrix over a ring.
#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<S: Ring> {
    rows: usize,
    cols: usize,
    domain: S::Domain,
    data: Vec<S>,
}

impl<S: Ring> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize, domain: S::Domain) -> Self {
        let data = vec![S::zero(&domain); rows * cols];
        Matrix { rows, cols, domain, data }
    }

    pub fn identity(n: usize, domain: S::Domain) -> Self {
        let mut m = Self::zeros(n, n, domain);
        for i in 0..n {
            m.data[i * n + i] = S::one(&m.domain);
        }
        m
    }

    pub fn from_rows(domain: S::Domain, rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidArgument("matrix must be nonempty".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        let data: Vec<S> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| v.domain() != domain) {
            return Err(Error::DomainMismatch("matrix entry outside the declared domain".into()));
        }
        Ok(Matrix { rows: r, cols: c, domain, data })
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(domain: S::Domain, diag: Vec<S>) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n, domain);
        for (i, v) in diag.into_iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> &S::Domain {
        &self.domain
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.cols).map(<[S]>::to_vec).collect()
    }

    /// self · rhs.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols, self.domain.clone());
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(l, j);
                    if !b.is_zero() {
                        let v = out.get(i, j).add(&a.mul(b));
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product with `self` as the most significant factor.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols, self.domain.clone());
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        let b = rhs.get(k, l);
                        if !b.is_zero() {
                            out.set(i * rhs.rows + k, j * rhs.cols + l, a.mul(b));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn kron_power(&self, n: usize) -> Self {
        let mut acc = Self::identity(1, self.domain.clone());
        for _ in 0..n {
            acc = acc.kron(self);
        }
        acc
    }

    pub fn map<T: Ring>(&self, domain: T::Domain, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect(), domain }
    }

    pub fn scale_column(&mut self, c: usize, by: &S) {
        for r in 0..self.rows {
            let v = self.get(r, c).mul(by);
            self.set(r, c, v);
        }
    }
}

/// One linear map per party, A_j : H_j → K_j.
#[derive(Clone, PartialEq, Debug)]
pub struct LocalMapSet<S: Ring> {
    maps: Vec<Matrix<S>>,
}

impl<S: Ring> LocalMapSet<S> {
    pub fn new(maps: Vec<Matrix<S>>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidArgument("a local map set needs at least one party".into()));
        }
        if maps.iter().any(|m| m.domain() != maps[0].domain()) {
            return Err(Error::DomainMismatch("local maps over different scalar domains".into()));
        }
        Ok(LocalMapSet { maps })
    }

    pub fn identity(shape: &TensorShape, domain: S::Domain) -> Self {
        LocalMapSet { maps: shape.dims().iter().map(|&d| Matrix::identity(d, domain.clone())).collect() }
    }

    pub fn parties(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[Matrix<S>] {
        &self.maps
    }

    pub fn map(&self, site: usize) -> &Matrix<S> {
        &self.maps[site]
    }

    pub fn domain(&self) -> &S::Domain {
        self.maps[0].domain()
    }

    /// Shape of the codomain.
    pub fn output_shape(&self) -> Result<TensorShape> {
        TensorShape::new(self.maps.iter().map(Matrix::rows).collect())
    }

    /// Shape of the domain.
    pub fn input_shape(&self) -> Result<TensorShape> {
        TensorShape::new(self.maps.iter().map(Matrix::cols).collect())
    }

    /// The map set "`self` after `first`", i.e. A_j · B_j per site.
    pub fn after(&self, first: &LocalMapSet<S>) -> Result<Self> {
        if self.parties() != first.parties() {
            return Err(Error::PartyMismatch { left: self.parties(), right: first.parties() });
        }
        let maps = self.maps.iter().zip(&first.maps).map(|(a, b)| a.matmul(b)).collect::<Result<_>>()?;
        Ok(LocalMapSet { maps })
    }

    pub fn map_scalars<T: Ring>(&self, domain: T::Domain, f: impl Fn(&S) -> T) -> LocalMapSet<T> {
        LocalMapSet { maps: self.maps.iter().map(|m| m.map(domain.clone(), &f)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Rational;

    fn m(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows((), rows.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn kron_and_matmul() {
        let a = m(&[&[1, 2], &[0, 1]]);
        let b = m(&[&[0, 1], &[1, 0]]);
        let k = a.kron(&b);
        assert_eq!(k, m(&[&[0, 1, 0, 2], &[1, 0, 2, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]]));
        assert_eq!(a.matmul(&b).unwrap(), m(&[&[2, 1], &[1, 0]]));
        assert!(a.matmul(&m(&[&[1, 2, 3]])).is_err());
        assert_eq!(a.kron_power(0), Matrix::identity(1, ()));
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![Rational::one()], vec![Rational::one(), Rational::zero()]];
        assert!(Matrix::from_rows((), rows).is_err());
    }
}
