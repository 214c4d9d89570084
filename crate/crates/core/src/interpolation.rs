//! Turning a degeneration into an exact restriction
//! ψ^{⊗n} ⊗ GHZ_{ne+1} ⊸ φ^{⊗n} by evaluating the ε-maps at roots of unity.

use num_integer::Integer;

use crate::degeneration::{ghz_level, DegenerationCertificate};
use crate::error::{Error, Result};
use crate::scalars::{Cyclotomic, CyclotomicEmbed, CyclotomicField, Rational, Ring};
use crate::states::make_ghz;
use crate::tensors::{LocalMapSet, Matrix, SparseTensor, TensorShape};

/// Default cap on tensor sizes handled during compilation.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Maps A′_m = Σ_{j=1}^{N} A_m(ζ^j)^{⊗n} ⊗ |0⟩⟨j| and the auxiliary
/// GHZ′_N = (1/N) Σ_j ζ^{−ndj} |j…j⟩, with N = ne + 1.
///
/// Auxiliary index j is stored as basis label j − 1 and is the least
/// significant factor of every site.
#[derive(Clone, Debug)]
pub struct CompiledRestriction {
    pub n: usize,
    pub order: usize,
    pub field: CyclotomicField,
    pub maps: LocalMapSet<Cyclotomic>,
    pub ghz_prime: SparseTensor<Cyclotomic>,
    /// φ^{⊗n} ⊗ |0…0⟩.
    pub witness: SparseTensor<Cyclotomic>,
    pub prefactor: Rational,
}

fn embed_tensor<S: CyclotomicEmbed>(t: &SparseTensor<S>, field: &CyclotomicField) -> Result<SparseTensor<Cyclotomic>> {
    let entries = t.entries().map(|(i, v)| v.to_cyclotomic(field).map(|c| (i.clone(), c))).collect::<Result<Vec<_>>>()?;
    SparseTensor::from_entries(t.shape().clone(), field.clone(), entries)
}

fn pow_u128(base: usize, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

/// Field Q(ζ_M) holding both the certificate scalars and the N-th roots.
fn working_field<S: CyclotomicEmbed>(cert: &DegenerationCertificate<S>, order: usize) -> Result<CyclotomicField> {
    let base = S::domain_order(cert.source().domain()) as usize;
    let m = base.lcm(&order);
    CyclotomicField::new(u32::try_from(m).map_err(|_| Error::InvalidArgument(format!("field order {m} too large")))?)
}

pub fn compile_restriction<S: CyclotomicEmbed>(
    cert: &DegenerationCertificate<S>,
    n: usize,
    budget: u128,
) -> Result<CompiledRestriction> {
    if n == 0 {
        return Err(Error::InvalidArgument("power n must be at least 1".into()));
    }
    let order = n * cert.e() + 1;
    let in_support = pow_u128(cert.source().support_size(), n).saturating_mul(order as u128);
    let out_volume = cert.target().dims().iter().fold(1u128, |acc, &d| acc.saturating_mul(pow_u128(d, n)));
    let needed = in_support.max(out_volume);
    if needed > budget {
        return Err(Error::BudgetExceeded { what: "compiled restriction size", needed, limit: budget });
    }
    let field = working_field(cert, order)?;
    let step = (field.order() as usize / order) as i64;
    let zeta = |j: i64| field.zeta_pow(j * step);

    let eps_maps = cert.maps().map_coeffs(field.clone(), |v| v.to_cyclotomic(&field).expect("order divides working field"));
    let k = cert.source().parties();
    let mut maps = Vec::with_capacity(k);
    for site in 0..k {
        let a = eps_maps.map(site);
        let (rows, cols) = (pow_u128(a.rows(), n) as usize, pow_u128(a.cols(), n) as usize);
        let mut out = Matrix::zeros(rows, cols * order, field.clone());
        for j in 1..=order {
            let root = zeta(j as i64);
            let at = a.map(field.clone(), |p| p.evaluate(&root)).kron_power(n);
            for r in 0..rows {
                for c in 0..cols {
                    let v = at.get(r, c);
                    if !v.is_zero() {
                        out.set(r, c * order + (j - 1), v.clone());
                    }
                }
            }
        }
        maps.push(out);
    }
    let maps = LocalMapSet::new(maps)?;

    let prefactor = Rational::new(1, order as i64)?;
    let scale = field.constant(prefactor.clone());
    let nd = (n * cert.d()) as i64;
    let ghz_prime = SparseTensor::from_entries(
        TensorShape::uniform(k, order)?,
        field.clone(),
        (1..=order).map(|j| (vec![j - 1; k], zeta(-nd * j as i64).mul(&scale))),
    )?;
    let witness = embed_tensor(cert.target(), &field)?
        .tensor_power(n)?
        .tensor_product(&SparseTensor::unit(k, field.clone())?)?;
    Ok(CompiledRestriction { n, order, field, maps, ghz_prime, witness, prefactor })
}

impl CompiledRestriction {
    /// Diagonal map at site 0 with GHZ_N ↦ GHZ′_N.
    pub fn phase_map(&self) -> LocalMapSet<Cyclotomic> {
        let k = self.ghz_prime.parties();
        let diag = (0..self.order)
            .map(|j| self.ghz_prime.get(&vec![j; k]).cloned().unwrap_or_else(|| self.field.zero()))
            .collect();
        let mut maps = vec![Matrix::diagonal(self.field.clone(), diag)];
        maps.extend((1..k).map(|_| Matrix::identity(self.order, self.field.clone())));
        LocalMapSet::new(maps).expect("uniform domain")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompiledCheck {
    pub ok: bool,
    pub phase_map_ok: bool,
    /// Indices where the image and φ^{⊗n} ⊗ |0…0⟩ differ.
    pub diff_count: usize,
    pub diff_sample: Vec<Vec<usize>>,
}

/// Computes (A′_1 ⊗ ⋯ ⊗ A′_k)(ψ^{⊗n} ⊗ GHZ′_N) and compares it with
/// φ^{⊗n} ⊗ |0…0⟩; also checks GHZ_N ⊸ GHZ′_N via the phase map.
pub fn verify_compiled<S: CyclotomicEmbed>(c: &CompiledRestriction, cert: &DegenerationCertificate<S>) -> Result<CompiledCheck> {
    let source = embed_tensor(cert.source(), &c.field)?.tensor_power(c.n)?;
    let input = source.tensor_product(&c.ghz_prime)?;
    let image = input.apply_local_maps(&c.maps)?;
    let expected = embed_tensor(cert.target(), &c.field)?
        .tensor_power(c.n)?
        .tensor_product(&SparseTensor::unit(cert.target().parties(), c.field.clone())?)?;
    let diff = image.add(&expected.scale(&c.field.one().neg()))?;
    let ghz = make_ghz(c.order, c.ghz_prime.parties())?;
    let ghz = embed_tensor(&ghz, &c.field)?;
    let phase_map_ok = ghz.apply_local_maps(&c.phase_map())? == c.ghz_prime;
    Ok(CompiledCheck {
        ok: diff.is_zero() && phase_map_ok && expected == c.witness,
        phase_map_ok,
        diff_count: diff.support_size(),
        diff_sample: diff.support().into_iter().take(8).collect(),
    })
}

/// rk(φ^{⊗n}) ≤ r^n (ne + 1) for a certificate with a GHZ_r source.
#[derive(Clone, Debug)]
pub struct RankPowerBound {
    pub bound: u128,
    pub level: usize,
    pub order: usize,
    /// Exact check of the compiled witness, when it fits the budget.
    pub verified: Option<bool>,
}

pub fn rank_power_bound<S: CyclotomicEmbed>(cert: &DegenerationCertificate<S>, n: usize, budget: u128) -> Result<RankPowerBound> {
    let level = ghz_level(cert.source())
        .ok_or_else(|| Error::InvalidCertificate("certificate source is not a GHZ state".into()))?;
    let order = n * cert.e() + 1;
    let bound = pow_u128(level, n).saturating_mul(order as u128);
    let verified = match compile_restriction(cert, n, budget) {
        Ok(c) => Some(verify_compiled(&c, cert)?.ok),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RankPowerBound { bound, level, order, verified })
}

/// (n + ω(ψ, GHZ) log₂(ne + 1)) / n, the finite-n upper bound on ω(ψ, φ).
pub fn rate_bound_term(n: usize, e: usize, omega_psi_ghz: f64) -> f64 {
    (n as f64 + omega_psi_ghz * ((n * e + 1) as f64).log2()) / n as f64
}
