//! ε-parameterized local maps and degeneration certificates
//! (A_1(ε) ⊗ ⋯ ⊗ A_k(ε)) ψ = ε^d φ + ε^{d+1} φ_1 + ⋯ + ε^{d+e} φ_e.

use num_integer::binomial;

use crate::error::{Error, Result};
use crate::scalars::{Cyclotomic, CyclotomicField, EpsPolynomial, Field, Rational, Ring};
use crate::slocc::cut_classes;
use crate::states::{make_dicke, make_dicke_lambda, make_ghz, make_w, Partition};
use crate::tensors::{LocalMapSet, Matrix, SparseTensor};

/// One matrix per site with entries polynomial in ε.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsLocalMaps<S: Ring>(LocalMapSet<EpsPolynomial<S>>);

impl<S: Ring> EpsLocalMaps<S> {
    pub fn new(maps: Vec<Matrix<EpsPolynomial<S>>>) -> Result<Self> {
        LocalMapSet::new(maps).map(EpsLocalMaps)
    }

    /// ε-independent maps.
    pub fn constant(maps: &LocalMapSet<S>) -> Self {
        let domain = maps.domain().clone();
        EpsLocalMaps(maps.map_scalars(domain, |v| EpsPolynomial::constant(v.clone())))
    }

    pub fn inner(&self) -> &LocalMapSet<EpsPolynomial<S>> {
        &self.0
    }

    pub fn parties(&self) -> usize {
        self.0.parties()
    }

    pub fn map(&self, site: usize) -> &Matrix<EpsPolynomial<S>> {
        self.0.map(site)
    }

    pub fn domain(&self) -> &S::Domain {
        self.0.domain()
    }

    /// Largest ε-degree over all entries of all maps.
    pub fn max_degree(&self) -> usize {
        self.0
            .maps()
            .iter()
            .flat_map(|m| m.to_rows().into_iter().flatten())
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    /// The plain local maps A_j(ε₀).
    pub fn specialize(&self, at: &S) -> LocalMapSet<S> {
        let domain = self.domain().clone();
        LocalMapSet::new(self.0.maps().iter().map(|m| m.map(domain.clone(), |p| p.evaluate(at))).collect())
            .expect("same party count and domain")
    }

    /// Entry-wise image of the polynomial coefficients.
    pub fn map_coeffs<T: Ring>(&self, domain: T::Domain, f: impl Fn(&S) -> T) -> EpsLocalMaps<T> {
        let d2 = domain.clone();
        EpsLocalMaps(self.0.map_scalars(domain, |p| p.map_coeffs(&d2, &f)))
    }
}

/// Coefficient tensors of (A_1(ε) ⊗ ⋯ ⊗ A_k(ε)) ψ, indexed by ε-degree.
pub fn expand<S: Ring>(source: &SparseTensor<S>, maps: &EpsLocalMaps<S>) -> Result<Vec<SparseTensor<S>>> {
    let domain = source.domain().clone();
    let lifted = source.map_scalars(domain.clone(), |v| EpsPolynomial::constant(v.clone()));
    let image = lifted.apply_local_maps(maps.inner())?;
    let top = image.entries().filter_map(|(_, p)| p.degree()).max();
    let Some(top) = top else { return Ok(Vec::new()) };
    (0..=top)
        .map(|t| {
            SparseTensor::from_entries(
                image.shape().clone(),
                domain.clone(),
                image.entries().map(|(i, p)| (i.clone(), p.coeff_at(t))),
            )
        })
        .collect()
}

/// A claimed degeneration ψ ⊵ φ with leading degree d and error degree e.
#[derive(Clone, Debug)]
pub struct DegenerationCertificate<S: Ring> {
    source: SparseTensor<S>,
    target: SparseTensor<S>,
    maps: EpsLocalMaps<S>,
    d: usize,
    e: usize,
    /// Coefficients of ε^{d+1}, …, ε^{d+e} when recorded.
    errors: Vec<SparseTensor<S>>,
    /// Exponents used to merge several parameters into one.
    weights: Option<Vec<usize>>,
    /// Invertible source-level map already folded into `maps`.
    pre_map: Option<LocalMapSet<S>>,
}

impl<S: Ring> DegenerationCertificate<S> {
    pub fn new(
        source: SparseTensor<S>,
        target: SparseTensor<S>,
        maps: EpsLocalMaps<S>,
        d: usize,
        e: usize,
    ) -> Result<Self> {
        let k = source.parties();
        if target.parties() != k || maps.parties() != k {
            return Err(Error::PartyMismatch { left: k, right: target.parties().max(maps.parties()) });
        }
        let input = maps.inner().input_shape()?;
        let output = maps.inner().output_shape()?;
        if input.dims() != source.dims() || output.dims() != target.dims() {
            return Err(Error::DimensionMismatch(format!(
                "maps {:?} -> {:?} do not fit source {:?} and target {:?}",
                input.dims(),
                output.dims(),
                source.dims(),
                target.dims()
            )));
        }
        if source.domain() != maps.domain() || target.domain() != maps.domain() {
            return Err(Error::DomainMismatch("certificate parts over different scalar domains".into()));
        }
        Ok(DegenerationCertificate { source, target, maps, d, e, errors: Vec::new(), weights: None, pre_map: None })
    }

    /// Identity maps with d = e = 0.
    pub fn trivial(psi: &SparseTensor<S>) -> Self {
        let maps = EpsLocalMaps::constant(&LocalMapSet::identity(psi.shape(), psi.domain().clone()));
        DegenerationCertificate::new(psi.clone(), psi.clone(), maps, 0, 0).expect("identity maps fit")
    }

    pub fn source(&self) -> &SparseTensor<S> {
        &self.source
    }

    pub fn target(&self) -> &SparseTensor<S> {
        &self.target
    }

    pub fn maps(&self) -> &EpsLocalMaps<S> {
        &self.maps
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn errors(&self) -> &[SparseTensor<S>] {
        &self.errors
    }

    pub fn weights(&self) -> Option<&[usize]> {
        self.weights.as_deref()
    }

    pub fn pre_map(&self) -> Option<&LocalMapSet<S>> {
        self.pre_map.as_ref()
    }

    /// Expands the maps and stores ε^{d+1} … ε^{d+e} as the error tensors.
    pub fn record_errors(&mut self) -> Result<()> {
        let coeffs = expand(&self.source, &self.maps)?;
        let zero = SparseTensor::zero(self.target.shape().clone(), self.target.domain().clone());
        self.errors = (self.d + 1..=self.d + self.e).map(|t| coeffs.get(t).cloned().unwrap_or_else(|| zero.clone())).collect();
        Ok(())
    }

    /// Replaces d and e with the measured values and records the errors.
    pub fn measure(mut self) -> Result<Self> {
        let report = verify_degeneration(&self)?;
        let (Some(d), Some(e)) = (report.measured_d, report.measured_e) else {
            return Err(Error::InvalidCertificate("the maps annihilate the source".into()));
        };
        self.d = d;
        self.e = e;
        self.record_errors()?;
        Ok(self)
    }

    /// The same certificate over another scalar type.
    pub fn map_scalars<T: Ring>(&self, domain: T::Domain, f: impl Fn(&S) -> T) -> DegenerationCertificate<T> {
        DegenerationCertificate {
            source: self.source.map_scalars(domain.clone(), &f),
            target: self.target.map_scalars(domain.clone(), &f),
            maps: self.maps.map_coeffs(domain.clone(), &f),
            d: self.d,
            e: self.e,
            errors: self.errors.iter().map(|t| t.map_scalars(domain.clone(), &f)).collect(),
            weights: self.weights.clone(),
            pre_map: self.pre_map.as_ref().map(|m| m.map_scalars(domain.clone(), &f)),
        }
    }

    /// Attaches error tensors read from elsewhere; checked by verification.
    pub fn with_errors(mut self, errors: Vec<SparseTensor<S>>) -> Self {
        self.errors = errors;
        self
    }

    pub fn with_weights(mut self, weights: Option<Vec<usize>>) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_pre_map(mut self, pre_map: LocalMapSet<S>) -> Self {
        self.pre_map = Some(pre_map);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegenerationReport {
    pub valid: bool,
    /// Lowest ε-degree with a nonzero coefficient.
    pub measured_d: Option<usize>,
    /// Highest nonzero degree minus `measured_d`.
    pub measured_e: Option<usize>,
    pub issues: Vec<String>,
}

pub fn verify_degeneration<S: Ring>(cert: &DegenerationCertificate<S>) -> Result<DegenerationReport> {
    let coeffs = expand(&cert.source, &cert.maps)?;
    let nonzero: Vec<usize> = (0..coeffs.len()).filter(|&t| !coeffs[t].is_zero()).collect();
    let measured_d = nonzero.first().copied();
    let measured_e = measured_d.map(|d| nonzero.last().unwrap() - d);
    let mut issues = Vec::new();
    if let Some(t) = nonzero.iter().find(|&&t| t < cert.d) {
        issues.push(format!("coefficient of e^{t} is nonzero"));
    }
    let leading = coeffs.get(cert.d).cloned().unwrap_or_else(|| SparseTensor::zero(cert.target.shape().clone(), cert.target.domain().clone()));
    if leading != cert.target {
        issues.push(format!("coefficient of e^{} differs from the target", cert.d));
    }
    if let Some(top) = nonzero.last() {
        if *top > cert.d + cert.e {
            issues.push(format!("nonzero terms up to e^{top}, beyond declared d + e = {}", cert.d + cert.e));
        }
    }
    if !cert.errors.is_empty() {
        for (i, err) in cert.errors.iter().enumerate() {
            let t = cert.d + 1 + i;
            let actual = coeffs.get(t).cloned().unwrap_or_else(|| SparseTensor::zero(err.shape().clone(), err.domain().clone()));
            if actual != *err {
                issues.push(format!("recorded error tensor for e^{t} is wrong"));
            }
        }
    }
    Ok(DegenerationReport { valid: issues.is_empty(), measured_d, measured_e, issues })
}

fn eps_matrix<S: Ring>(domain: &S::Domain, rows: Vec<Vec<EpsPolynomial<S>>>) -> Result<Matrix<EpsPolynomial<S>>> {
    Matrix::from_rows(domain.clone(), rows)
}

fn poly<S: Ring>(domain: &S::Domain, coeffs: Vec<S>) -> EpsPolynomial<S> {
    EpsPolynomial::new(domain.clone(), coeffs)
}

/// GHZ_2 ⊵ W_k with A(ε) = [[1, −1], [ε, 0]] at every site.
///
/// A maps |1⟩ to −|0⟩, so A^{⊗k}(|0…0⟩ + c|1…1⟩) cancels |0…0⟩ only for
/// c = (−1)^{k+1}. The pre-map diag(1, c) at site 0 is folded into the maps.
pub fn w_from_ghz(k: usize) -> Result<DegenerationCertificate<Rational>> {
    let source = make_ghz(2, k)?;
    let target = make_w(k)?;
    let q = |v: i64| Rational::from(v);
    let sign = if k % 2 == 1 { 1 } else { -1 };
    let a = |c: i64| {
        eps_matrix::<Rational>(
            &(),
            vec![
                vec![poly(&(), vec![q(1)]), poly(&(), vec![q(-c)])],
                vec![poly(&(), vec![q(0), q(1)]), poly(&(), vec![])],
            ],
        )
    };
    let mut maps = vec![a(sign)?];
    for _ in 1..k {
        maps.push(a(1)?);
    }
    let mut pre = vec![Matrix::diagonal((), vec![q(1), q(sign)])];
    pre.extend((1..k).map(|_| Matrix::identity(2, ())));
    let mut cert = DegenerationCertificate::new(source, target, EpsLocalMaps::new(maps)?, 1, k - 1)?;
    cert.pre_map = Some(LocalMapSet::new(pre)?);
    cert.record_errors()?;
    Ok(cert)
}

/// GHZ_{s+1} ⊵ D_{m,n} with s = min(m, n), over Q(ζ_{s+1}).
///
/// Each column j = 1..s+1 is εζ^j|b⟩ + |1−b⟩ where b is the rarer symbol, and
/// site 0 carries the phase ζ^{−sj}/(s+1). A basis string with w copies of b
/// picks up ε^w and survives the phase average iff w ≡ s mod (s+1). d and e
/// are measured from the expansion.
pub fn dicke_from_ghz(m: usize, n: usize) -> Result<DegenerationCertificate<Cyclotomic>> {
    let k = m + n;
    let target_q = make_dicke(m, n)?;
    let s = m.min(n);
    let b = usize::from(m > n);
    let level = s + 1;
    let field = CyclotomicField::new(level as u32)?;
    let source = make_ghz(level, k)?.map_scalars(field.clone(), |v| field.constant(v.clone()));
    let target = target_q.map_scalars(field.clone(), |v| field.constant(v.clone()));
    let scale = field.constant(Rational::new(1, level as i64)?);
    let zero = EpsPolynomial::zero(&field);
    let maps = (0..k)
        .map(|site| {
            let mut rows = vec![vec![zero.clone(); level]; 2];
            for col in 0..level {
                let j = col as i64 + 1;
                let phase = if site == 0 { field.zeta_pow(-(s as i64) * j).mul(&scale) } else { field.one() };
                rows[b][col] = poly(&field, vec![field.zero(), field.zeta_pow(j).mul(&phase)]);
                rows[1 - b][col] = EpsPolynomial::constant(phase);
            }
            eps_matrix(&field, rows)
        })
        .collect::<Result<_>>()?;
    DegenerationCertificate::new(source, target, EpsLocalMaps::new(maps)?, s, 0)?.measure()
}

/// Finite-difference degeneration GHZ_{Π(λ_t+1)} ⊵ D_{λ,k}.
///
/// Source index i = (i_1, …, i_d) with 0 ≤ i_t ≤ λ_t, first part most
/// significant. Column i is |0⟩ + Σ_t (λ_t − i_t) ε^{w_t} |t⟩ and site 0
/// also carries Π_t (−1)^{i_t} C(λ_t, i_t) / λ_t!. Parameters are merged by
/// ε_t = ε^{w_t} with w_t = (1 + λ_1)^{t−1}.
pub fn dicke_lambda_from_ghz(lambda: &Partition, k: usize) -> Result<DegenerationCertificate<Rational>> {
    let target = make_dicke_lambda(lambda, k)?;
    let parts = lambda.parts();
    let dparts = parts.len();
    let base = 1 + parts[0];
    let weights: Vec<usize> = (0..dparts).map(|t| base.pow(t as u32)).collect();
    let level = lambda.box_count();
    let source = make_ghz(level, k)?;

    let multi = |mut lin: usize| -> Vec<usize> {
        let mut idx = vec![0; dparts];
        for t in (0..dparts).rev() {
            idx[t] = lin % (parts[t] + 1);
            lin /= parts[t] + 1;
        }
        idx
    };
    let factorials: Rational = parts.iter().map(|&p| Rational::from((1..=p as i64).product::<i64>())).fold(Rational::one(), |a, b| a * b);
    let zero = EpsPolynomial::<Rational>::zero(&());
    let maps = (0..k)
        .map(|site| {
            let mut rows = vec![vec![zero.clone(); level]; dparts + 1];
            for (col, idx) in (0..level).map(|c| (c, multi(c))) {
                let coeff = if site == 0 {
                    let num: i64 = idx
                        .iter()
                        .zip(parts)
                        .map(|(&i, &p)| if i % 2 == 0 { 1 } else { -1 } * binomial(p as i64, i as i64))
                        .product();
                    Rational::from(num) / factorials.clone()
                } else {
                    Rational::one()
                };
                rows[0][col] = EpsPolynomial::constant(coeff.clone());
                for t in 0..dparts {
                    let x = Rational::from((parts[t] - idx[t]) as i64) * coeff.clone();
                    rows[t + 1][col] = EpsPolynomial::monomial(x, weights[t]);
                }
            }
            eps_matrix(&(), rows)
        })
        .collect::<Result<_>>()?;
    let d: usize = parts.iter().zip(&weights).map(|(p, w)| p * w).sum();
    let mut cert = DegenerationCertificate::new(source, target, EpsLocalMaps::new(maps)?, d, 0)?.measure()?;
    cert.weights = Some(weights);
    Ok(cert)
}

/// Level r if the tensor is exactly GHZ_r = Σ_{i<r} |i…i⟩.
pub fn ghz_level<S: Ring>(t: &SparseTensor<S>) -> Option<usize> {
    let r = t.dims()[0];
    if t.dims().iter().any(|&d| d != r) || t.support_size() != r {
        return None;
    }
    let ok = t.entries().all(|(idx, v)| v.is_one() && idx.iter().all(|&i| i == idx[0]));
    ok.then_some(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BorderRankBounds {
    /// Largest flattening rank.
    pub lower: usize,
    /// GHZ level of a verified certificate source.
    pub upper: Option<usize>,
}

pub fn border_rank_bounds<S: Field>(psi: &SparseTensor<S>, cert: Option<&DegenerationCertificate<S>>) -> Result<BorderRankBounds> {
    let mut lower = 1;
    for cut in cut_classes(psi.parties())? {
        lower = lower.max(psi.flattening_rank(&cut)?);
    }
    if psi.is_zero() {
        lower = 0;
    }
    let upper = match cert {
        None => None,
        Some(c) => {
            if c.target() != psi {
                return Err(Error::InvalidCertificate("certificate target is not the given state".into()));
            }
            let level = ghz_level(c.source())
                .ok_or_else(|| Error::InvalidCertificate("certificate source is not a GHZ state".into()))?;
            let report = verify_degeneration(c)?;
            if !report.valid {
                return Err(Error::InvalidCertificate(report.issues.join("; ")));
            }
            Some(level)
        }
    };
    Ok(BorderRankBounds { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The three-party tangent construction: (|0⟩+ε|1⟩)^{⊗3} − |000⟩ from GHZ_2.
    fn tangent_w3() -> DegenerationCertificate<Rational> {
        let q = Rational::from;
        let p = |c: Vec<i64>| EpsPolynomial::new((), c.into_iter().map(q).collect());
        let first = Matrix::from_rows((), vec![vec![p(vec![1]), p(vec![-1])], vec![p(vec![0, 1]), p(vec![])]]).unwrap();
        let other = Matrix::from_rows((), vec![vec![p(vec![1]), p(vec![1])], vec![p(vec![0, 1]), p(vec![])]]).unwrap();
        let maps = EpsLocalMaps::new(vec![first, other.clone(), other]).unwrap();
        DegenerationCertificate::new(make_ghz(2, 3).unwrap(), make_w(3).unwrap(), maps, 1, 2).unwrap()
    }

    #[test]
    fn tangent_construction() {
        let cert = tangent_w3();
        let r = verify_degeneration(&cert).unwrap();
        assert!(r.valid, "{:?}", r.issues);
        assert_eq!((r.measured_d, r.measured_e), (Some(1), Some(2)));
        let coeffs = expand(cert.source(), cert.maps()).unwrap();
        assert_eq!(coeffs[2], crate::states::make_dicke(1, 2).unwrap());
        assert_eq!(coeffs[3].support(), vec![vec![1, 1, 1]]);
    }

    #[test]
    fn trivial_certificate() {
        let g = make_ghz(5, 3).unwrap();
        let r = verify_degeneration(&DegenerationCertificate::trivial(&g)).unwrap();
        assert!(r.valid);
        assert_eq!((r.measured_d, r.measured_e), (Some(0), Some(0)));
    }

    #[test]
    fn wrong_leading_degree_rejected() {
        let c = w_from_ghz(3).unwrap();
        let bad = DegenerationCertificate::new(c.source().clone(), c.target().clone(), c.maps().clone(), 2, 2).unwrap();
        let r = verify_degeneration(&bad).unwrap();
        assert!(!r.valid);
        assert_eq!(r.measured_d, Some(1));
    }

    #[test]
    fn w_certificates() {
        for k in 2..=7 {
            let c = w_from_ghz(k).unwrap();
            let r = verify_degeneration(&c).unwrap();
            assert!(r.valid, "k={k}: {:?}", r.issues);
            assert_eq!((r.measured_d, r.measured_e), (Some(1), Some(k - 1)));
            assert_eq!(c.errors().len(), k - 1);
        }
        // k = 2 gives |10⟩ + |01⟩ at order ε and |11⟩ at ε².
        let c = w_from_ghz(2).unwrap();
        assert_eq!(c.errors()[0].support(), vec![vec![1, 1]]);
    }

    #[test]
    fn dicke_certificates_measure_leading_degree() {
        // (m, n, d, e): the leading degree is min(m, n); the next surviving
        // weight is 2s + 1.
        for (m, n, d, e) in [(1, 2, 1, 2), (2, 2, 2, 0), (2, 3, 2, 3), (3, 4, 3, 4), (2, 1, 1, 2), (1, 1, 1, 0)] {
            let c = dicke_from_ghz(m, n).unwrap();
            assert_eq!(ghz_level(c.source()), Some(m.min(n) + 1));
            let r = verify_degeneration(&c).unwrap();
            assert!(r.valid, "({m},{n}): {:?}", r.issues);
            assert_eq!((c.d(), c.e()), (d, e), "({m},{n})");
        }
    }

    #[test]
    fn dicke_lambda_certificates() {
        let l = Partition::new(vec![1, 1]).unwrap();
        let c = dicke_lambda_from_ghz(&l, 3).unwrap();
        assert_eq!(ghz_level(c.source()), Some(4));
        assert_eq!(c.weights(), Some(&[1, 2][..]));
        assert_eq!((c.d(), c.e()), (3, 2));
        assert!(verify_degeneration(&c).unwrap().valid);

        let l = Partition::new(vec![2, 1]).unwrap();
        let c = dicke_lambda_from_ghz(&l, 4).unwrap();
        assert_eq!(ghz_level(c.source()), Some(6));
        assert!(verify_degeneration(&c).unwrap().valid);
        assert_eq!((c.d(), c.e()), (2 + 3, 3));

        let l = Partition::new(vec![2]).unwrap();
        let c = dicke_lambda_from_ghz(&l, 4).unwrap();
        assert_eq!(ghz_level(c.source()), Some(3));
        assert_eq!(c.target(), &make_dicke(2, 2).unwrap());
    }

    #[test]
    fn specialization_matches_expansion() {
        let c = w_from_ghz(4).unwrap();
        for eps0 in [Rational::new(1, 3).unwrap(), Rational::from(-2), Rational::new(5, 7).unwrap()] {
            let image = c.source().apply_local_maps(&c.maps().specialize(&eps0)).unwrap();
            let mut expected = c.target().scale(&eps0.pow(c.d() as u64));
            for (i, err) in c.errors().iter().enumerate() {
                expected = expected.add(&err.scale(&eps0.pow((c.d() + 1 + i) as u64))).unwrap();
            }
            assert_eq!(image, expected);
        }
    }

    #[test]
    fn border_rank() {
        let w = make_w(3).unwrap();
        let b = border_rank_bounds(&w, Some(&w_from_ghz(3).unwrap())).unwrap();
        assert_eq!(b, BorderRankBounds { lower: 2, upper: Some(2) });
        let g = make_ghz(5, 3).unwrap();
        let b = border_rank_bounds(&g, Some(&DegenerationCertificate::trivial(&g))).unwrap();
        assert_eq!(b, BorderRankBounds { lower: 5, upper: Some(5) });
        assert!(border_rank_bounds(&g, Some(&w_from_ghz(3).unwrap())).is_err());
    }
}
