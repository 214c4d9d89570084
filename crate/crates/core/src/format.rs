//! Structured-text (JSON) files for tensors, local map sets and degeneration
//! certificates.
//!
//! Rationals are written as `"n/d"` strings, cyclotomic elements as
//! `{order, coeffs}` and ε-polynomials as arrays of coefficients by degree.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::degeneration::{DegenerationCertificate, EpsLocalMaps};
use crate::error::{Error, Result};
use crate::scalars::{Cyclotomic, CyclotomicField, DomainLabel, EpsPolynomial, Ring};
use crate::tensors::{LocalMapSet, Matrix, SparseTensor, TensorShape};
use crate::Rational;

/// Scalars that can be written to and read from files.
pub trait Serial: Ring {
    fn domain_label(domain: &Self::Domain) -> String;
    fn parse_domain(label: &str) -> Result<Self::Domain>;
    fn to_value(&self) -> Value;
    fn from_value(v: &Value, domain: &Self::Domain) -> Result<Self>;
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn rational_from_value(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => s.parse(),
        Value::Number(n) if n.is_i64() => Ok(Rational::from(n.as_i64().unwrap_or_default())),
        _ => Err(parse_err(format!("expected a rational string, got {v}"))),
    }
}

impl Serial for Rational {
    fn domain_label(_: &()) -> String {
        ().label()
    }

    fn parse_domain(label: &str) -> Result<()> {
        if label == "rational" {
            Ok(())
        } else {
            Err(parse_err(format!("expected scalar_domain \"rational\", got {label:?}")))
        }
    }

    fn to_value(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_value(v: &Value, _: &()) -> Result<Self> {
        rational_from_value(v)
    }
}

impl Serial for Cyclotomic {
    fn domain_label(domain: &CyclotomicField) -> String {
        domain.label()
    }

    fn parse_domain(label: &str) -> Result<CyclotomicField> {
        let order = label
            .strip_prefix("cyclotomic:")
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| parse_err(format!("expected scalar_domain \"cyclotomic:N\", got {label:?}")))?;
        CyclotomicField::new(order)
    }

    fn to_value(&self) -> Value {
        json!({
            "order": self.order(),
            "coeffs": self.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }

    fn from_value(v: &Value, domain: &CyclotomicField) -> Result<Self> {
        if let Ok(r) = rational_from_value(v) {
            return Ok(domain.constant(r));
        }
        let order = v
            .get("order")
            .and_then(Value::as_u64)
            .ok_or_else(|| parse_err(format!("cyclotomic value without order: {v}")))?;
        let coeffs = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err(format!("cyclotomic value without coeffs: {v}")))?
            .iter()
            .map(rational_from_value)
            .collect::<Result<Vec<_>>>()?;
        let own = CyclotomicField::new(order as u32)?;
        if coeffs.len() > own.degree() {
            return Err(parse_err(format!("{} coefficients exceed the degree {} of Q(zeta_{order})", coeffs.len(), own.degree())));
        }
        own.from_coeffs(coeffs).embed(domain)
    }
}

fn eps_to_value<S: Serial>(p: &EpsPolynomial<S>) -> Value {
    Value::Array(p.coeffs().iter().map(Serial::to_value).collect())
}

fn eps_from_value<S: Serial>(v: &Value, domain: &S::Domain) -> Result<EpsPolynomial<S>> {
    match v {
        Value::Array(items) => {
            let coeffs = items.iter().map(|c| S::from_value(c, domain)).collect::<Result<Vec<_>>>()?;
            Ok(EpsPolynomial::new(domain.clone(), coeffs))
        }
        other => Ok(EpsPolynomial::constant(S::from_value(other, domain)?)),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntryFile {
    pub index: Vec<usize>,
    pub value: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub parties: usize,
    pub dims: Vec<usize>,
    pub scalar_domain: String,
    pub entries: Vec<EntryFile>,
}

pub fn tensor_to_file<S: Serial>(t: &SparseTensor<S>) -> TensorFile {
    TensorFile {
        parties: t.parties(),
        dims: t.dims().to_vec(),
        scalar_domain: S::domain_label(t.domain()),
        entries: t.entries().map(|(idx, v)| EntryFile { index: idx.clone(), value: v.to_value() }).collect(),
    }
}

pub fn tensor_from_file<S: Serial>(f: &TensorFile) -> Result<SparseTensor<S>> {
    if f.dims.len() != f.parties {
        return Err(parse_err(format!("{} dims for {} parties", f.dims.len(), f.parties)));
    }
    let domain = S::parse_domain(&f.scalar_domain)?;
    let entries = f
        .entries
        .iter()
        .map(|e| Ok((e.index.clone(), S::from_value(&e.value, &domain)?)))
        .collect::<Result<Vec<_>>>()?;
    SparseTensor::from_entries(TensorShape::new(f.dims.clone())?, domain, entries)
}

/// A tensor over either supported scalar domain.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyTensor {
    Rational(SparseTensor<Rational>),
    Cyclotomic(SparseTensor<Cyclotomic>),
}

impl AnyTensor {
    pub fn from_file(f: &TensorFile) -> Result<Self> {
        if f.scalar_domain.starts_with("cyclotomic:") {
            Ok(AnyTensor::Cyclotomic(tensor_from_file(f)?))
        } else {
            Ok(AnyTensor::Rational(tensor_from_file(f)?))
        }
    }

    pub fn to_file(&self) -> TensorFile {
        match self {
            AnyTensor::Rational(t) => tensor_to_file(t),
            AnyTensor::Cyclotomic(t) => tensor_to_file(t),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: TensorFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        Self::from_file(&f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("tensor files serialize")
    }

    pub fn parties(&self) -> usize {
        match self {
            AnyTensor::Rational(t) => t.parties(),
            AnyTensor::Cyclotomic(t) => t.parties(),
        }
    }

    /// Order of the cyclotomic domain, 1 for rationals.
    pub fn order(&self) -> u32 {
        match self {
            AnyTensor::Rational(_) => 1,
            AnyTensor::Cyclotomic(t) => t.domain().order(),
        }
    }

    /// The tensor over Q(ζ_N) for a multiple N of its own order.
    pub fn to_cyclotomic(&self, field: &CyclotomicField) -> Result<SparseTensor<Cyclotomic>> {
        match self {
            AnyTensor::Rational(t) => Ok(t.map_scalars(field.clone(), |r| field.constant(r.clone()))),
            AnyTensor::Cyclotomic(t) => {
                if field.order() % t.domain().order() != 0 {
                    return Err(Error::DomainMismatch(format!(
                        "Q(zeta_{}) does not embed into Q(zeta_{})",
                        t.domain().order(),
                        field.order()
                    )));
                }
                Ok(t.map_scalars(field.clone(), |c| c.embed(field).expect("order divides")))
            }
        }
    }
}

impl From<SparseTensor<Rational>> for AnyTensor {
    fn from(t: SparseTensor<Rational>) -> Self {
        AnyTensor::Rational(t)
    }
}

impl From<SparseTensor<Cyclotomic>> for AnyTensor {
    fn from(t: SparseTensor<Cyclotomic>) -> Self {
        AnyTensor::Cyclotomic(t)
    }
}

pub fn tensor_to_json<S: Serial>(t: &SparseTensor<S>) -> String {
    serde_json::to_string_pretty(&tensor_to_file(t)).expect("tensor files serialize")
}

pub fn tensor_from_json<S: Serial>(text: &str) -> Result<SparseTensor<S>> {
    let f: TensorFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    tensor_from_file(&f)
}

/// One local map as a dense row list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapSetFile {
    pub parties: usize,
    pub scalar_domain: String,
    pub maps: Vec<MatrixFile>,
}

fn matrix_to_file<S: Ring>(m: &Matrix<S>, f: impl Fn(&S) -> Value) -> MatrixFile {
    MatrixFile {
        rows: m.rows(),
        cols: m.cols(),
        entries: m.to_rows().iter().map(|row| row.iter().map(&f).collect()).collect(),
    }
}

fn matrix_from_file<S: Ring>(
    m: &MatrixFile,
    domain: &S::Domain,
    f: impl Fn(&Value) -> Result<S>,
) -> Result<Matrix<S>> {
    if m.entries.len() != m.rows || m.entries.iter().any(|r| r.len() != m.cols) {
        return Err(parse_err(format!("matrix entries do not match {}x{}", m.rows, m.cols)));
    }
    let rows = m.entries.iter().map(|r| r.iter().map(&f).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(domain.clone(), rows)
}

pub fn maps_to_file<S: Serial>(maps: &LocalMapSet<S>) -> MapSetFile {
    MapSetFile {
        parties: maps.parties(),
        scalar_domain: S::domain_label(maps.domain()),
        maps: maps.maps().iter().map(|m| matrix_to_file(m, Serial::to_value)).collect(),
    }
}

pub fn maps_from_file<S: Serial>(f: &MapSetFile) -> Result<LocalMapSet<S>> {
    let domain = S::parse_domain(&f.scalar_domain)?;
    if f.maps.len() != f.parties {
        return Err(parse_err(format!("{} maps for {} parties", f.maps.len(), f.parties)));
    }
    let maps = f.maps.iter().map(|m| matrix_from_file(m, &domain, |v| S::from_value(v, &domain))).collect::<Result<_>>()?;
    LocalMapSet::new(maps)
}

pub fn eps_maps_to_file<S: Serial>(maps: &EpsLocalMaps<S>) -> MapSetFile {
    MapSetFile {
        parties: maps.parties(),
        scalar_domain: S::domain_label(maps.domain()),
        maps: maps.inner().maps().iter().map(|m| matrix_to_file(m, eps_to_value)).collect(),
    }
}

pub fn eps_maps_from_file<S: Serial>(f: &MapSetFile) -> Result<EpsLocalMaps<S>> {
    let domain = S::parse_domain(&f.scalar_domain)?;
    if f.maps.len() != f.parties {
        return Err(parse_err(format!("{} maps for {} parties", f.maps.len(), f.parties)));
    }
    let maps = f
        .maps
        .iter()
        .map(|m| matrix_from_file(m, &domain, |v| eps_from_value::<S>(v, &domain)))
        .collect::<Result<_>>()?;
    EpsLocalMaps::new(maps)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    pub source: TensorFile,
    pub target: TensorFile,
    pub maps: MapSetFile,
    pub d: usize,
    pub e: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<TensorFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_map: Option<MapSetFile>,
}

pub fn certificate_to_file<S: Serial>(c: &DegenerationCertificate<S>) -> CertificateFile {
    CertificateFile {
        source: tensor_to_file(c.source()),
        target: tensor_to_file(c.target()),
        maps: eps_maps_to_file(c.maps()),
        d: c.d(),
        e: c.e(),
        errors: c.errors().iter().map(tensor_to_file).collect(),
        weights: c.weights().map(<[usize]>::to_vec),
        pre_map: c.pre_map().map(maps_to_file),
    }
}

pub fn certificate_from_file<S: Serial>(f: &CertificateFile) -> Result<DegenerationCertificate<S>> {
    let errors = f.errors.iter().map(tensor_from_file).collect::<Result<Vec<_>>>()?;
    let pre_map = f.pre_map.as_ref().map(maps_from_file).transpose()?;
    let cert = DegenerationCertificate::new(
        tensor_from_file(&f.source)?,
        tensor_from_file(&f.target)?,
        eps_maps_from_file(&f.maps)?,
        f.d,
        f.e,
    )?
    .with_errors(errors)
    .with_weights(f.weights.clone());
    Ok(match pre_map {
        Some(p) => cert.with_pre_map(p),
        None => cert,
    })
}

/// A certificate over either supported scalar domain.
#[derive(Clone, Debug)]
pub enum AnyCertificate {
    Rational(DegenerationCertificate<Rational>),
    Cyclotomic(DegenerationCertificate<Cyclotomic>),
}

impl AnyCertificate {
    pub fn parse(text: &str) -> Result<Self> {
        let f: CertificateFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        if f.maps.scalar_domain.starts_with("cyclotomic:") {
            Ok(AnyCertificate::Cyclotomic(certificate_from_file(&f)?))
        } else {
            Ok(AnyCertificate::Rational(certificate_from_file(&f)?))
        }
    }

    pub fn to_json(&self) -> String {
        let f = match self {
            AnyCertificate::Rational(c) => certificate_to_file(c),
            AnyCertificate::Cyclotomic(c) => certificate_to_file(c),
        };
        serde_json::to_string_pretty(&f).expect("certificate files serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degeneration::{dicke_from_ghz, w_from_ghz};
    use crate::states::make_w;

    #[test]
    fn rational_tensor_round_trip() {
        let w = make_w(3).unwrap();
        let text = tensor_to_json(&w);
        assert!(text.contains("\"scalar_domain\": \"rational\""));
        assert_eq!(tensor_from_json::<Rational>(&text).unwrap(), w);
    }

    #[test]
    fn cyclotomic_values() {
        let f = CyclotomicField::new(3).unwrap();
        let z = f.zeta_pow(1);
        let v = z.to_value();
        assert_eq!(v["order"], 3);
        assert_eq!(Cyclotomic::from_value(&v, &f).unwrap(), z);
        // ζ_3 read into Q(ζ_6) is ζ_6².
        let f6 = CyclotomicField::new(6).unwrap();
        assert_eq!(Cyclotomic::from_value(&v, &f6).unwrap(), f6.zeta_pow(2));
        assert_eq!(Cyclotomic::from_value(&json!("1/2"), &f).unwrap(), f.constant(Rational::new(1, 2).unwrap()));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(AnyTensor::parse("{\"parties\": 2, \"dims\": [2], \"scalar_domain\": \"rational\", \"entries\": []}").is_err());
        assert!(AnyTensor::parse("{\"parties\": 1, \"dims\": [2], \"scalar_domain\": \"real\", \"entries\": []}").is_err());
        assert!(AnyTensor::parse(
            "{\"parties\": 1, \"dims\": [2], \"scalar_domain\": \"rational\", \"entries\": [{\"index\": [2], \"value\": \"1\"}]}"
        )
        .is_err());
    }

    #[test]
    fn certificate_round_trip() {
        let c = w_from_ghz(4).unwrap();
        let text = AnyCertificate::Rational(c.clone()).to_json();
        let AnyCertificate::Rational(back) = AnyCertificate::parse(&text).unwrap() else { panic!("domain changed") };
        assert_eq!(back.source(), c.source());
        assert_eq!(back.target(), c.target());
        assert_eq!(back.maps().inner(), c.maps().inner());
        assert_eq!((back.d(), back.e()), (c.d(), c.e()));
        assert_eq!(back.errors(), c.errors());

        let c = dicke_from_ghz(1, 2).unwrap();
        let text = AnyCertificate::Cyclotomic(c.clone()).to_json();
        let AnyCertificate::Cyclotomic(back) = AnyCertificate::parse(&text).unwrap() else { panic!("domain changed") };
        assert_eq!(back.maps().inner(), c.maps().inner());
    }

    #[test]
    fn map_set_round_trip() {
        let c = w_from_ghz(3).unwrap();
        let m = c.maps().specialize(&Rational::new(1, 3).unwrap());
        let f = maps_to_file(&m);
        assert_eq!(maps_from_file::<Rational>(&f).unwrap(), m);
    }
}
