use std::fmt;

use super::{Rational, Ring};

/// Polynomial in ε with coefficients in `S`, constant term first.
///
/// Trailing zero coefficients are never stored, so the zero polynomial has an
/// empty coefficient list.
#[derive(Clone, PartialEq)]
pub struct EpsPolynomial<S: Ring> {
    domain: S::Domain,
    coeffs: Vec<S>,
}

impl<S: Ring> EpsPolynomial<S> {
    pub fn new(domain: S::Domain, mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(Ring::is_zero) {
            coeffs.pop();
        }
        EpsPolynomial { domain, coeffs }
    }

    pub fn constant(c: S) -> Self {
        let domain = c.domain();
        Self::new(domain, vec![c])
    }

    /// c·ε^degree.
    pub fn monomial(c: S, degree: usize) -> Self {
        let domain = c.domain();
        let mut coeffs = vec![S::zero(&domain); degree];
        coeffs.push(c);
        Self::new(domain, coeffs)
    }

    pub fn eps(domain: &S::Domain) -> Self {
        Self::monomial(S::one(domain), 1)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn scalar_domain(&self) -> &S::Domain {
        &self.domain
    }

    /// Coefficient of ε^d, zero when absent.
    pub fn coeff_at(&self, d: usize) -> S {
        self.coeffs.get(d).cloned().unwrap_or_else(|| S::zero(&self.domain))
    }

    /// Highest power of ε present; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Lowest power of ε present; `None` for the zero polynomial.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn evaluate(&self, at: &S) -> S {
        self.coeffs.iter().rev().fold(S::zero(&self.domain), |acc, c| acc.mul(at).add(c))
    }

    pub fn map_coeffs<T: Ring>(&self, domain: &T::Domain, f: impl Fn(&S) -> T) -> EpsPolynomial<T> {
        EpsPolynomial::new(domain.clone(), self.coeffs.iter().map(f).collect())
    }

    /// Substitutes ε ↦ ε^w.
    pub fn substitute_power(&self, w: usize) -> Self {
        if self.coeffs.is_empty() || w == 1 {
            return self.clone();
        }
        let mut out = vec![S::zero(&self.domain); (self.coeffs.len() - 1) * w + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * w] = c.clone();
        }
        Self::new(self.domain.clone(), out)
    }
}

impl<S: Ring + fmt::Display> fmt::Display for EpsPolynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, c)| match d {
                0 => format!("{c}"),
                1 => format!("({c})e"),
                _ => format!("({c})e^{d}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl<S: Ring> fmt::Debug for EpsPolynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coeffs).finish()
    }
}

impl<S: Ring> Ring for EpsPolynomial<S> {
    type Domain = S::Domain;

    fn domain(&self) -> S::Domain {
        self.domain.clone()
    }

    fn zero(domain: &S::Domain) -> Self {
        EpsPolynomial { domain: domain.clone(), coeffs: Vec::new() }
    }

    fn one(domain: &S::Domain) -> Self {
        Self::constant(S::one(domain))
    }

    fn from_rational(r: &Rational, domain: &S::Domain) -> Self {
        Self::new(domain.clone(), vec![S::from_rational(r, domain)])
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), rhs.coeffs.get(i)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Self::new(self.domain.clone(), coeffs)
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Self::zero(&self.domain);
        }
        let mut out = vec![S::zero(&self.domain); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        Self::new(self.domain.clone(), out)
    }

    fn neg(&self) -> Self {
        EpsPolynomial { domain: self.domain.clone(), coeffs: self.coeffs.iter().map(Ring::neg).collect() }
    }
}
