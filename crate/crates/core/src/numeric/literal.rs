//! The JSON matrix literal:
//! `{"rows": R, "cols": C, "field": "real"|"complex"|"rational", "data": [...]}`
//! with row-major data, complex entries as `[re, im]` and rationals as `"p/q"`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
    Rational,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Real => "real",
            FieldKind::Complex => "complex",
            FieldKind::Rational => "rational",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Real(f64),
    Complex(Complex64),
    Rational(BigRational),
}

impl Scalar {
    pub fn kind(&self) -> FieldKind {
        match self {
            Scalar::Real(_) => FieldKind::Real,
            Scalar::Complex(_) => FieldKind::Complex,
            Scalar::Rational(_) => FieldKind::Rational,
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Complex(z) => Scalar::Complex(z.conj()),
            other => other.clone(),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

pub fn format_rational(v: &BigRational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// A dense matrix tagged with its field.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
    Rational(DMatrix<BigRational>),
}

impl ScalarMatrix {
    pub fn kind(&self) -> FieldKind {
        match self {
            ScalarMatrix::Real(_) => FieldKind::Real,
            ScalarMatrix::Complex(_) => FieldKind::Complex,
            ScalarMatrix::Rational(_) => FieldKind::Rational,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            ScalarMatrix::Real(m) => m.shape(),
            ScalarMatrix::Complex(m) => m.shape(),
            ScalarMatrix::Rational(m) => m.shape(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        match self {
            ScalarMatrix::Real(m) => Scalar::Real(m[(i, j)]),
            ScalarMatrix::Complex(m) => Scalar::Complex(m[(i, j)]),
            ScalarMatrix::Rational(m) => Scalar::Rational(m[(i, j)].clone()),
        }
    }

    /// Real view; rationals are rounded, complex matrices are rejected.
    pub fn to_real(&self) -> Result<DMatrix<f64>> {
        match self {
            ScalarMatrix::Real(m) => Ok(m.clone()),
            ScalarMatrix::Rational(m) => Ok(m.map(|v| v.to_f64().unwrap_or(f64::NAN))),
            ScalarMatrix::Complex(_) => Err(Error::FieldMismatch {
                expected: FieldKind::Real,
                found: FieldKind::Complex,
            }),
        }
    }

    /// Exact view; floats are only accepted when every entry is an integer
    /// or a dyadic value representable exactly.
    pub fn to_rational(&self) -> Result<DMatrix<BigRational>> {
        match self {
            ScalarMatrix::Rational(m) => Ok(m.clone()),
            ScalarMatrix::Real(m) => {
                let mut out = DMatrix::zeros(m.nrows(), m.ncols());
                for (o, v) in out.iter_mut().zip(m.iter()) {
                    *o = BigRational::from_float(*v).ok_or_else(|| {
                        Error::Parse(format!("entry {v} has no exact rational value"))
                    })?;
                }
                Ok(out)
            }
            ScalarMatrix::Complex(_) => Err(Error::FieldMismatch {
                expected: FieldKind::Rational,
                found: FieldKind::Complex,
            }),
        }
    }

    /// Real matrices pass through; complex ones are realified.
    pub fn to_realified(&self) -> Result<DMatrix<f64>> {
        match self {
            ScalarMatrix::Complex(m) => Ok(super::realify(m)),
            other => other.to_real(),
        }
    }

    pub fn conjugate_transpose(&self) -> ScalarMatrix {
        match self {
            ScalarMatrix::Real(m) => ScalarMatrix::Real(m.transpose()),
            ScalarMatrix::Complex(m) => ScalarMatrix::Complex(m.adjoint()),
            ScalarMatrix::Rational(m) => ScalarMatrix::Rational(m.transpose()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Literal {
    rows: usize,
    cols: usize,
    field: FieldKind,
    data: Vec<Value>,
}

fn real_entry(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        Value::String(s) => parse_rational(s)?
            .to_f64()
            .ok_or_else(|| Error::Parse(format!("bad number {s}"))),
        other => Err(Error::Parse(format!("expected a real entry, got {other}"))),
    }
}

impl ScalarMatrix {
    fn from_literal(lit: Literal) -> Result<Self> {
        let (rows, cols) = (lit.rows, lit.cols);
        if lit.data.len() != rows * cols {
            return Err(Error::Parse(format!(
                "matrix literal declares {rows}x{cols} but has {} entries",
                lit.data.len()
            )));
        }
        let at = |i: usize, j: usize| &lit.data[i * cols + j];
        Ok(match lit.field {
            FieldKind::Real => {
                let mut m = DMatrix::zeros(rows, cols);
                for i in 0..rows {
                    for j in 0..cols {
                        m[(i, j)] = real_entry(at(i, j))?;
                    }
                }
                ScalarMatrix::Real(m)
            }
            FieldKind::Complex => {
                let mut m = DMatrix::zeros(rows, cols);
                for i in 0..rows {
                    for j in 0..cols {
                        m[(i, j)] = match at(i, j) {
                            Value::Array(pair) if pair.len() == 2 => {
                                Complex64::new(real_entry(&pair[0])?, real_entry(&pair[1])?)
                            }
                            other => {
                                return Err(Error::Parse(format!(
                                    "complex entries are [re, im] pairs, got {other}"
                                )))
                            }
                        };
                    }
                }
                ScalarMatrix::Complex(m)
            }
            FieldKind::Rational => {
                let mut m = DMatrix::zeros(rows, cols);
                for i in 0..rows {
                    for j in 0..cols {
                        m[(i, j)] = match at(i, j) {
                            Value::String(s) => parse_rational(s)?,
                            Value::Number(n) if n.is_i64() => {
                                BigRational::from_integer(n.as_i64().unwrap().into())
                            }
                            other => {
                                return Err(Error::Parse(format!(
                                    "rational entries are \"p/q\" strings, got {other}"
                                )))
                            }
                        };
                    }
                }
                ScalarMatrix::Rational(m)
            }
        })
    }

    fn to_literal(&self) -> Literal {
        let (rows, cols) = self.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(match self {
                    ScalarMatrix::Real(m) => Value::from(m[(i, j)]),
                    ScalarMatrix::Complex(m) => {
                        Value::Array(vec![Value::from(m[(i, j)].re), Value::from(m[(i, j)].im)])
                    }
                    ScalarMatrix::Rational(m) => Value::String(format_rational(&m[(i, j)])),
                });
            }
        }
        Literal {
            rows,
            cols,
            field: self.kind(),
            data,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_literal(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_literal()).expect("literal serialises")
    }
}

impl Serialize for ScalarMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_literal().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScalarMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let lit = Literal::deserialize(d)?;
        ScalarMatrix::from_literal(lit).map_err(serde::de::Error::custom)
    }
}

impl From<DMatrix<f64>> for ScalarMatrix {
    fn from(m: DMatrix<f64>) -> Self {
        ScalarMatrix::Real(m)
    }
}

impl From<DMatrix<BigRational>> for ScalarMatrix {
    fn from(m: DMatrix<BigRational>) -> Self {
        ScalarMatrix::Rational(m)
    }
}

impl From<DMatrix<Complex64>> for ScalarMatrix {
    fn from(m: DMatrix<Complex64>) -> Self {
        ScalarMatrix::Complex(m)
    }
}
