//! Exact rational scalars and their `"p/q"` text form.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Reduced fraction with positive denominator. `BigRational` normalizes on
/// every construction, so equality is structural.
pub type Rational = BigRational;
pub type QVector = Vec<Rational>;
pub type ZVector = Vec<BigInt>;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qvec(xs: &[(i64, i64)]) -> QVector {
    xs.iter().map(|&(n, d)| qf(n, d)).collect()
}

pub fn from_int(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|_| bad())?;
    let d = BigInt::from_str(den).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn floor(x: &Rational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil(x: &Rational) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Rational) -> Rational {
    x - from_int(&floor(x))
}

/// Smallest integer `m >= 0` with `m^2 >= x`.
pub fn ceil_sqrt(x: &Rational) -> BigInt {
    if !x.is_positive() {
        return BigInt::zero();
    }
    let c = ceil(x);
    let mut m = c.sqrt();
    while from_int(&(&m * &m)) < *x {
        m += 1;
    }
    while m.is_positive() && from_int(&((&m - 1) * (&m - 1))) >= *x {
        m -= 1;
    }
    m
}

/// gcd of a list of rationals: the positive generator of the group they span.
pub fn rational_gcd(xs: &[Rational]) -> Rational {
    let mut g = Rational::zero();
    for x in xs {
        if x.is_zero() {
            continue;
        }
        if g.is_zero() {
            g = x.abs();
            continue;
        }
        let num = g.numer() * x.denom();
        let num = num.gcd(&(x.numer() * g.denom()));
        g = Rational::new(num, g.denom() * x.denom());
    }
    g
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add(a: &[Rational], b: &[Rational]) -> QVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> QVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(s: &Rational, a: &[Rational]) -> QVector {
    a.iter().map(|x| s * x).collect()
}

pub fn neg(a: &[Rational]) -> QVector {
    a.iter().map(|x| -x).collect()
}

pub fn zeros(n: usize) -> QVector {
    vec![Rational::zero(); n]
}

pub fn is_zero_vec(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn int_to_q(a: &[BigInt]) -> QVector {
    a.iter().map(from_int).collect()
}

/// Serde adaptors writing rationals as `"p/q"` strings. Integers are also
/// accepted on input.
pub mod serde_q {
    use serde::de::{self, Deserializer};
    use serde::{Deserialize, Serialize, Serializer};

    use super::{format_rational, parse_rational, Rational};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        S(String),
        I(i64),
    }

    fn from_raw<E: de::Error>(r: Raw) -> Result<Rational, E> {
        match r {
            Raw::S(s) => parse_rational(&s).map_err(E::custom),
            Raw::I(i) => Ok(super::q(i)),
        }
    }

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        format_rational(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        from_raw(Raw::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            xs.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<Raw>::deserialize(d)?.into_iter().map(from_raw).collect()
        }
    }

    pub mod mat {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            xs.iter()
                .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            Vec::<Vec<Raw>>::deserialize(d)?
                .into_iter()
                .map(|r| r.into_iter().map(from_raw).collect())
                .collect()
        }
    }
}
