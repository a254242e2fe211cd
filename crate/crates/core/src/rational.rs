//! Exact rationals and their text form.
//!
//! Every scalar in the crate is a [`Rational`]. The text form is an optional
//! leading `-`, decimal digits, and an optional `/denominator`; the
//! denominator is omitted when it is 1. No whitespace is allowed.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse(text: &str) -> Result<Rational> {
    let bad = |msg: &str| Error::Parse {
        offset: 0,
        message: format!("invalid rational {text:?}: {msg}"),
    };
    let body = text.strip_prefix('-').unwrap_or(text);
    let negative = body.len() != text.len();
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(num) {
        return Err(bad("expected digits"));
    }
    let mut n: BigInt = num.parse().map_err(|_| bad("numerator"))?;
    if negative {
        n = -n;
    }
    let d: BigInt = match den {
        Some(d) if digits(d) => d.parse().map_err(|_| bad("denominator"))?,
        Some(_) => return Err(bad("expected digits after '/'")),
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

pub fn format(q: &Rational) -> String {
    q.to_string()
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Formats an approximate real to 12 significant digits.
pub fn format_approx(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 12 - 1 - x.abs().log10().floor() as i32;
    if digits >= 0 {
        let s = format!("{:.*}", digits as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

pub fn pow(q: &Rational, k: u32) -> Rational {
    num_traits::pow(q.clone(), k as usize)
}

/// The exact `k`-th root of a nonnegative rational, if it is rational.
pub fn exact_root(q: &Rational, k: u32) -> Option<Rational> {
    if q.is_negative() || k == 0 {
        return None;
    }
    if k == 1 {
        return Some(q.clone());
    }
    let n = q.numer().nth_root(k);
    let d = q.denom().nth_root(k);
    if num_traits::pow(n.clone(), k as usize) == *q.numer()
        && num_traits::pow(d.clone(), k as usize) == *q.denom()
    {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Approximate `k`-th root, used only for display and tolerance checks.
pub fn root_f64(q: &Rational, k: u32) -> f64 {
    let x = to_f64(q);
    if k == 1 {
        x
    } else {
        x.powf(1.0 / k as f64)
    }
}

pub(crate) mod serde_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod serde_vec {
    use super::Rational;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&super::format(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| super::parse(t).map_err(serde::de::Error::custom))
            .collect()
    }
}
