use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{DomainLabel, Field, Rational, Ring};
use crate::error::Error;

/// Coefficients (constant term first) of the N-th cyclotomic polynomial Φ_N,
/// obtained by dividing x^N − 1 by Φ_d for every proper divisor d of N.
pub fn cyclotomic_polynomial(n: u32) -> Result<Vec<BigInt>, Error> {
    if n == 0 {
        return Err(Error::InvalidArgument("cyclotomic order must be >= 1".into()));
    }
    Ok(modulus(n).to_vec())
}

fn modulus(n: u32) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let p = Arc::new(compute_cyclotomic(n));
    cache.lock().unwrap().insert(n, p.clone());
    p
}

fn compute_cyclotomic(n: u32) -> Vec<BigInt> {
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            num = exact_div_monic(&num, &modulus(d));
        }
    }
    num
}

/// Quotient of `num` by a monic divisor; the division must be exact.
fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dd = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dd;
    let mut quot = vec![BigInt::zero(); qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact cyclotomic division");
    quot
}

/// The field Q(ζ_N), identified by its order N.
#[derive(Clone)]
pub struct CyclotomicField {
    order: u32,
    modulus: Arc<Vec<BigInt>>,
}

impl CyclotomicField {
    pub fn new(order: u32) -> Result<Self, Error> {
        if order == 0 {
            return Err(Error::InvalidArgument("cyclotomic order must be >= 1".into()));
        }
        Ok(CyclotomicField { order, modulus: modulus(order) })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// deg Φ_N = φ(N).
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn zero(&self) -> Cyclotomic {
        Cyclotomic { field: self.clone(), coeffs: vec![Rational::zero(); self.degree()] }
    }

    pub fn one(&self) -> Cyclotomic {
        self.constant(Rational::one())
    }

    pub fn constant(&self, r: Rational) -> Cyclotomic {
        let mut z = self.zero();
        z.coeffs[0] = r;
        z
    }

    /// ζ_N^j for any integer j (negative exponents wrap modulo N).
    pub fn zeta_pow(&self, j: i64) -> Cyclotomic {
        let e = j.rem_euclid(self.order as i64) as usize;
        let mut raw = vec![Rational::zero(); e.max(self.degree()) + 1];
        raw[e] = Rational::one();
        self.reduce(raw)
    }

    pub fn from_coeffs(&self, coeffs: Vec<Rational>) -> Cyclotomic {
        self.reduce(coeffs)
    }

    /// Reduces an arbitrary polynomial in ζ modulo Φ_N.
    fn reduce(&self, mut raw: Vec<Rational>) -> Cyclotomic {
        let deg = self.degree();
        if raw.len() > deg {
            for i in (deg..raw.len()).rev() {
                if raw[i].is_zero() {
                    continue;
                }
                let c = std::mem::take(&mut raw[i]);
                for (j, mj) in self.modulus[..deg].iter().enumerate() {
                    if !mj.is_zero() {
                        raw[i - deg + j] = &raw[i - deg + j] - &(&c * &Rational::from_integer(mj.clone()));
                    }
                }
            }
        }
        raw.resize(deg, Rational::zero());
        Cyclotomic { field: self.clone(), coeffs: raw }
    }
}

impl PartialEq for CyclotomicField {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
    }
}

impl fmt::Debug for CyclotomicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(zeta_{})", self.order)
    }
}

impl DomainLabel for CyclotomicField {
    fn label(&self) -> String {
        format!("cyclotomic:{}", self.order)
    }
}

/// Element of Q(ζ_N) stored as its canonical residue modulo Φ_N.
#[derive(Clone)]
pub struct Cyclotomic {
    field: CyclotomicField,
    coeffs: Vec<Rational>,
}

impl Cyclotomic {
    pub fn field(&self) -> &CyclotomicField {
        &self.field
    }

    pub fn order(&self) -> u32 {
        self.field.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Rational value, if the element lies in Q.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.coeffs[1..].iter().all(Rational::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check(&self, rhs: &Self) -> Result<(), Error> {
        if self.field.order != rhs.field.order {
            return Err(Error::DomainMismatch(format!(
                "cyclotomic orders {} and {}",
                self.field.order, rhs.field.order
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, Error> {
        self.check(rhs)?;
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        Ok(Cyclotomic { field: self.field.clone(), coeffs })
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, Error> {
        self.check(rhs)?;
        let deg = self.field.degree();
        let mut raw = vec![Rational::zero(); 2 * deg - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] = &raw[i + j] + &(a * b);
                }
            }
        }
        Ok(self.field.reduce(raw))
    }

    pub fn try_inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(self.field.constant(r.recip().expect("nonzero")));
        }
        // Solve (self · x) = 1 as a linear system in the coefficients of x.
        let deg = self.field.degree();
        let mut cols = Vec::with_capacity(deg);
        let mut basis = self.field.one();
        let zeta = self.field.zeta_pow(1);
        for _ in 0..deg {
            cols.push(self.try_mul(&basis)?.coeffs);
            basis = basis.try_mul(&zeta)?;
        }
        let mut aug: Vec<Vec<Rational>> = (0..deg)
            .map(|r| {
                let mut row: Vec<Rational> = (0..deg).map(|c| cols[c][r].clone()).collect();
                row.push(if r == 0 { Rational::one() } else { Rational::zero() });
                row
            })
            .collect();
        for c in 0..deg {
            let p = (c..deg).find(|&r| !aug[r][c].is_zero()).ok_or(Error::DivisionByZero)?;
            aug.swap(c, p);
            let pinv = aug[c][c].recip().expect("pivot");
            for v in aug[c].iter_mut() {
                *v = &*v * &pinv;
            }
            for r in 0..deg {
                if r != c && !aug[r][c].is_zero() {
                    let f = aug[r][c].clone();
                    let pivot_row = aug[c].clone();
                    for (v, pv) in aug[r].iter_mut().zip(&pivot_row) {
                        *v = &*v - &(&f * pv);
                    }
                }
            }
        }
        let coeffs = aug.into_iter().map(|mut row| row.pop().unwrap()).collect();
        Ok(Cyclotomic { field: self.field.clone(), coeffs })
    }

    /// Image under Q(ζ_N) → Q(ζ_M), ζ_N ↦ ζ_M^{M/N}; requires N | M.
    pub fn embed(&self, target: &CyclotomicField) -> Result<Self, Error> {
        if target.order % self.field.order != 0 {
            return Err(Error::DomainMismatch(format!(
                "cannot embed order {} into order {}",
                self.field.order, target.order
            )));
        }
        let step = (target.order / self.field.order) as usize;
        let mut raw = vec![Rational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            raw[i * step] = c.clone();
        }
        Ok(target.reduce(raw))
    }

    /// Complex value with ζ_N = e^{2πi/N}; display only.
    pub fn approx(&self) -> (f64, f64) {
        let n = self.field.order as f64;
        self.coeffs.iter().enumerate().fold((0.0, 0.0), |(re, im), (j, c)| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n;
            let v = c.to_f64();
            (re + v * t.cos(), im + v * t.sin())
        })
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        self.field.order == other.field.order && self.coeffs == other.coeffs
    }
}

impl Eq for Cyclotomic {}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| match j {
                0 => c.to_string(),
                1 => format!("({c})*z{}", self.field.order),
                _ => format!("({c})*z{}^{j}", self.field.order),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Ring for Cyclotomic {
    type Domain = CyclotomicField;

    fn domain(&self) -> CyclotomicField {
        self.field.clone()
    }

    fn zero(domain: &CyclotomicField) -> Self {
        domain.zero()
    }

    fn one(domain: &CyclotomicField) -> Self {
        domain.one()
    }

    fn from_rational(r: &Rational, domain: &CyclotomicField) -> Self {
        domain.constant(r.clone())
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    fn add(&self, rhs: &Self) -> Self {
        self.try_add(rhs).expect("cyclotomic order mismatch")
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.try_mul(rhs).expect("cyclotomic order mismatch")
    }

    fn neg(&self) -> Self {
        Cyclotomic { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Field for Cyclotomic {
    fn inv(&self) -> Option<Self> {
        self.try_inv().ok()
    }
}
