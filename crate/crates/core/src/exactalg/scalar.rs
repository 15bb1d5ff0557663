//! Exact rational scalars and their canonical `"p/q"` text form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::AlgError;

/// The exact coefficient field. `BigRational` keeps numerator and denominator
/// coprime with a positive denominator, which is exactly the invariant we need.
pub type Scalar = BigRational;

pub fn q(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Scalar {
    Scalar::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"-0.25"`.
pub fn parse_scalar(s: &str) -> Result<Scalar, AlgError> {
    let s = s.trim();
    let bad = || AlgError::Parse(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Scalar::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let v = Scalar::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Scalar::from_integer(n))
}

/// Canonical text form, always with an explicit denominator.
pub fn fmt_scalar(x: &Scalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_scalar_list(s: &str) -> Result<Vec<Scalar>, AlgError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_scalar).collect()
}

/// Exact square root when `x` is the square of a rational.
pub fn sqrt_exact(x: &Scalar) -> Option<Scalar> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Scalar::new(n, d))
    } else {
        None
    }
}

pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Very large parts: scale both down to a common exponent first.
        let shift = x.numer().bits().max(x.denom().bits()).saturating_sub(900);
        let n = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Best rational approximation with denominator at most `max_den`.
pub fn from_f64_approx(v: f64, max_den: u64) -> Scalar {
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut x = v;
    for _ in 0..64 {
        let a = x.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = x - a;
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    Scalar::new(BigInt::from(h1), BigInt::from(k1))
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Elementary symmetric polynomial `e_k` of the given values.
pub fn elementary_symmetric(vals: &[Scalar], k: usize) -> Scalar {
    let mut e = vec![Scalar::zero(); k + 1];
    e[0] = Scalar::one();
    for v in vals {
        for j in (1..=k).rev() {
            let t = &e[j - 1] * v;
            e[j] += t;
        }
    }
    e[k].clone()
}

pub fn lcm_of_denoms<'a>(it: impl IntoIterator<Item = &'a Scalar>) -> BigInt {
    it.into_iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/2", "0/1", "5/1"] {
            assert_eq!(fmt_scalar(&parse_scalar(s).unwrap()), s);
        }
        assert_eq!(parse_scalar("6/8").unwrap(), qf(3, 4));
        assert_eq!(parse_scalar("-0.25").unwrap(), qf(-1, 4));
        assert_eq!(parse_scalar("12").unwrap(), q(12));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("x").is_err());
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(sqrt_exact(&qf(9, 4)), Some(qf(3, 2)));
        assert_eq!(sqrt_exact(&q(2)), None);
        assert_eq!(sqrt_exact(&q(-4)), None);
    }

    #[test]
    fn continued_fraction_recovers_small_rationals() {
        assert_eq!(from_f64_approx(-0.375, 1000), qf(-3, 8));
        assert_eq!(from_f64_approx(1.0 / 3.0, 1000), qf(1, 3));
    }

    #[test]
    fn symmetric_functions() {
        let v = [q(1), q(2), q(3)];
        assert_eq!(elementary_symmetric(&v, 0), q(1));
        assert_eq!(elementary_symmetric(&v, 1), q(6));
        assert_eq!(elementary_symmetric(&v, 2), q(11));
        assert_eq!(elementary_symmetric(&v, 3), q(6));
        assert_eq!(binomial(6, 2), BigInt::from(15));
    }
}
