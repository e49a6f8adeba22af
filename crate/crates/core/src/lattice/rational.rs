//! Exact rational scalars and integer vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number, always kept in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Integer coordinates of a lattice vector.
pub type LatticeVector = Vec<BigInt>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn lattice(v: &[i64]) -> LatticeVector {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn to_rational_vec(v: &[BigInt]) -> Vec<Rational> {
    v.iter().cloned().map(Rational::from_integer).collect()
}

pub fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_rat(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pairing of an integer form with a rational point.
pub fn dot_mixed(a: &[BigInt], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| y * Rational::from_integer(x.clone()))
        .sum()
}

/// Scales a rational vector to the primitive integer vector on the same ray.
/// Returns `None` for the zero vector.
pub fn primitive(v: &[Rational]) -> Option<LatticeVector> {
    if v.iter().all(Zero::is_zero) {
        return None;
    }
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    Some(primitive_int(&ints))
}

pub fn primitive_int(v: &[BigInt]) -> LatticeVector {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

pub fn is_primitive(v: &[BigInt]) -> bool {
    v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x)).is_one()
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Parses "p/q", "p" or a decimal-free integer into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Converts an arbitrarily large positive or negative ratio of integers to the
/// nearest-ish `f64` without going through overflowing intermediate floats.
pub fn ratio_to_f64(numer: &BigInt, denom: &BigInt) -> f64 {
    if numer.is_zero() {
        return 0.0;
    }
    let negative = numer.is_negative() != denom.is_negative();
    let mut n = numer.abs();
    let mut d = denom.abs();
    let shift = n.bits() as i64 - d.bits() as i64 - 62;
    if shift > 0 {
        d <<= shift as usize;
    } else {
        n <<= (-shift) as usize;
    }
    let q = (n / d).to_f64().unwrap_or(f64::NAN);
    let v = scale_pow2(q, shift);
    if negative {
        -v
    } else {
        v
    }
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

pub fn to_f64(x: &Rational) -> f64 {
    ratio_to_f64(x.numer(), x.denom())
}

/// Exact power with a possibly negative integer exponent.
pub fn pow_i(x: &Rational, e: &BigInt) -> Rational {
    let mag = e.abs().to_u32().expect("exponent out of range");
    let p = num_traits::pow(x.clone(), mag as usize);
    if e.is_negative() {
        p.recip()
    } else {
        p
    }
}

/// Serde adapter writing rationals as "p/q" strings.
pub mod as_string {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational `{s}`")))
    }
}

/// Serde adapter for vectors of rationals as strings.
pub mod vec_as_string {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| D::Error::custom(format!("bad rational `{s}`"))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_stay_reduced() {
        let x = rat(6, -4);
        assert_eq!(x.numer(), &BigInt::from(-3));
        assert_eq!(x.denom(), &BigInt::from(2));
    }

    #[test]
    fn primitive_scaling() {
        let v = vec![rat(1, 2), rat(-3, 4), int(0)];
        assert_eq!(primitive(&v).unwrap(), lattice(&[2, -3, 0]));
        assert!(primitive(&[int(0), int(0)]).is_none());
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("-6/4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), int(7));
        assert!(parse_rational("1/0").is_none());
        assert_eq!(format_rational(&rat(10, 5)), "2");
        assert_eq!(format_rational(&rat(1, 36)), "1/36");
    }

    #[test]
    fn big_ratio_conversion() {
        let n = BigInt::from(19u32) << 5000usize;
        let d = BigInt::from(512u32) << 5000usize;
        assert!((ratio_to_f64(&n, &d) - 19.0 / 512.0).abs() < 1e-15);
        assert!((ratio_to_f64(&BigInt::from(-1), &BigInt::from(3)) + 1.0 / 3.0).abs() < 1e-16);
    }
}
