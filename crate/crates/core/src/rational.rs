//! Exact rational helpers.

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

pub fn rat(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse = |t: &str| {
        t.trim()
            .parse::<i128>()
            .map_err(|_| Error::Parse(format!("bad rational `{s}`")))
    };
    match s.split_once('/') {
        Some((a, b)) => {
            let den = parse(b)?;
            if den == 0 {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(Rational::new(parse(a)?, den))
        }
        None => Ok(Rational::from_integer(parse(s)?)),
    }
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Exact conversion of a finite double (every finite double is dyadic).
pub fn f64_to_big(x: f64) -> BigRational {
    assert!(x.is_finite(), "non-finite value");
    if x == 0.0 {
        return BigRational::zero();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let m = BigInt::from(sign) * BigInt::from(mant);
    if e >= 0 {
        BigRational::from_integer(m << e as usize)
    } else {
        BigRational::new(m, BigInt::one() << (-e) as usize)
    }
}

pub fn big_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    let nb = r.numer().abs().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        r.numer().abs() / (r.denom() << shift as usize)
    } else {
        (r.numer().abs() << (-shift) as usize) / r.denom()
    };
    let half = (shift / 2) as i32;
    let v = scaled.to_f64().unwrap_or(0.0) * 2f64.powi(half) * 2f64.powi(shift as i32 - half);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

/// a/b rounded to the nearest double (ties to even), for quotients in the normal range.
pub fn ratio_to_f64(a: &BigUint, b: &BigUint) -> f64 {
    assert!(!b.is_zero(), "zero denominator");
    if a.is_zero() {
        return 0.0;
    }
    let shift = 55 - (a.bits() as i64 - b.bits() as i64);
    let (num, den) = if shift >= 0 {
        (a << shift as usize, b.clone())
    } else {
        (a.clone(), b << (-shift) as usize)
    };
    let (q, r) = num.div_rem(&den);
    let extra = q.bits() - 53;
    let mut m = (&q >> extra as usize).to_u64().unwrap();
    let low = (&q & ((BigUint::one() << extra as usize) - 1u32)).to_u64().unwrap();
    let half = 1u64 << (extra - 1);
    if low > half || (low == half && (!r.is_zero() || m & 1 == 1)) {
        m += 1;
    }
    let e = extra as i64 - shift;
    assert!((-1022..=971).contains(&(e + 52)), "quotient outside the normal range");
    let h = (e / 2) as i32;
    m as f64 * 2f64.powi(h) * 2f64.powi(e as i32 - h)
}

/// ⌈log₂ (a / b)⌉ for positive integers, exactly.
pub fn ceil_log2_ratio(a: &BigUint, b: &BigUint) -> i64 {
    assert!(!a.is_zero() && !b.is_zero());
    let mut e = a.bits() as i64 - b.bits() as i64;
    // 2^(e-1) < a/b < 2^(e+1); settle the exact ceiling.
    loop {
        if le_pow2(a, b, e) {
            if le_pow2(a, b, e - 1) {
                e -= 1;
            } else {
                return e;
            }
        } else {
            e += 1;
        }
    }
}

/// a/b ≤ 2^e
fn le_pow2(a: &BigUint, b: &BigUint, e: i64) -> bool {
    if e >= 0 {
        a <= &(b << e as usize)
    } else {
        (a << (-e) as usize) <= *b
    }
}

pub fn ceil_log2_u(n: &BigUint) -> u64 {
    if n <= &BigUint::one() {
        0
    } else {
        (n - 1u32).bits()
    }
}

pub fn ceil_log2(n: u128) -> u32 {
    if n <= 1 {
        0
    } else {
        128 - (n - 1).leading_zeros()
    }
}
