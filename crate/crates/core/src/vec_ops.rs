//! Small fixed-width integer vector helpers. All arithmetic is checked.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::intlattice::{hnf, IntMatrix};

pub type IVec = Vec<i64>;

pub fn dot(a: &[i64], b: &[i64]) -> Result<i64> {
    let s: i128 = a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum();
    i64::try_from(s).map_err(|_| Error::Overflow)
}

pub fn dot128(a: &[i128], b: &[i128]) -> Result<i128> {
    a.iter().zip(b).try_fold(0i128, |acc, (&x, &y)| {
        x.checked_mul(y).and_then(|p| acc.checked_add(p)).ok_or(Error::Overflow)
    })
}

/// `s·x − t·y`, checked.
pub fn lin_comb128(s: i128, x: &[i128], t: i128, y: &[i128]) -> Result<Vec<i128>> {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            s.checked_mul(a)
                .zip(t.checked_mul(b))
                .and_then(|(p, q)| p.checked_sub(q))
                .ok_or(Error::Overflow)
        })
        .collect()
}

pub fn make_primitive128(v: &mut [i128]) {
    let g = v.iter().fold(0i128, |g, x| g.gcd(x));
    if g > 1 {
        for x in v.iter_mut() {
            *x /= g;
        }
    }
}

pub fn make_primitive(v: &mut [i64]) {
    let g = v.iter().fold(0i64, |g, x| g.gcd(x));
    if g > 1 {
        for x in v.iter_mut() {
            *x /= g;
        }
    }
}

pub fn to_i64_vec(v: &[i128]) -> Result<IVec> {
    v.iter()
        .map(|&x| i64::try_from(x).map_err(|_| Error::Overflow))
        .collect()
}

pub fn sub(a: &[i64], b: &[i64]) -> Result<IVec> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_sub(*y).ok_or(Error::Overflow))
        .collect()
}

pub fn is_zero(v: &[i64]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// Rank of a list of vectors of width `dim`.
pub fn rank(dim: usize, rows: &[&[i64]]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = IntMatrix::from_i64_rows(dim, rows).expect("uniform width");
    let (h, _) = hnf(&m);
    (0..h.rows())
        .filter(|&i| h.row(i).iter().any(|x| x != &num_bigint::BigInt::ZERO))
        .count()
}

/// Serde adapter: integer vectors as arrays of decimal strings.
pub mod decimal_rows {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<i64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<i64>>, D::Error> {
        let raw: Vec<Vec<serde_json::Value>> = Vec::deserialize(d)?;
        raw.iter()
            .map(|r| {
                r.iter()
                    .map(|x| super::parse_i64(x).map_err(D::Error::custom))
                    .collect()
            })
            .collect()
    }
}

pub fn parse_i64(v: &serde_json::Value) -> Result<i64> {
    match v {
        serde_json::Value::String(s) => s
            .trim()
            .parse::<i64>()
            .map_err(|e| Error::Parse(format!("bad integer {s:?}: {e}"))),
        serde_json::Value::Number(n) => n.as_i64().ok_or_else(|| Error::Parse(format!("not an integer: {n}"))),
        other => Err(Error::Parse(format!("expected integer, got {other}"))),
    }
}
