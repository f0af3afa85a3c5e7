//! Exact dyadic rationals `m / 2^e`.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use dashu_int::IBig;
use dashu_ratio::RBig;

use crate::error::Error;

/// `mantissa * 2^-exponent`, kept canonical: the mantissa is odd unless the exponent is zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mant: IBig,
    exp: u32,
}

impl DyadicRational {
    pub const ZERO: DyadicRational = DyadicRational { mant: IBig::ZERO, exp: 0 };

    pub fn new(mant: IBig, exp: u32) -> Self {
        let mut d = DyadicRational { mant, exp };
        d.canonicalize();
        d
    }

    pub fn from_int(n: i64) -> Self {
        DyadicRational { mant: IBig::from(n), exp: 0 }
    }

    /// `n * 2^k` for any integer `k`.
    pub fn from_int_pow2(n: i64, k: i32) -> Self {
        if k >= 0 {
            DyadicRational { mant: IBig::from(n) << (k as usize), exp: 0 }
        } else {
            Self::new(IBig::from(n), k.unsigned_abs())
        }
    }

    pub fn pow2(k: i32) -> Self {
        Self::from_int_pow2(1, k)
    }

    fn canonicalize(&mut self) {
        if self.exp == 0 {
            return;
        }
        match self.mant.trailing_zeros() {
            None => self.exp = 0,
            Some(tz) => {
                let s = (tz as u32).min(self.exp);
                if s > 0 {
                    self.mant = &self.mant >> (s as usize);
                    self.exp -= s;
                }
            }
        }
    }

    pub fn mantissa(&self) -> &IBig {
        &self.mant
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant == IBig::ZERO
    }

    pub fn signum(&self) -> i32 {
        match self.mant.cmp(&IBig::ZERO) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    fn aligned(&self, other: &Self) -> (IBig, IBig, u32) {
        let e = self.exp.max(other.exp);
        let a = &self.mant << ((e - self.exp) as usize);
        let b = &other.mant << ((e - other.exp) as usize);
        (a, b, e)
    }

    /// Multiply by `2^k`.
    pub fn scale_pow2(&self, k: i32) -> Self {
        if k >= 0 {
            let k = k as u32;
            if k <= self.exp {
                DyadicRational { mant: self.mant.clone(), exp: self.exp - k }
            } else {
                DyadicRational { mant: &self.mant << ((k - self.exp) as usize), exp: 0 }
            }
        } else {
            Self::new(self.mant.clone(), self.exp + k.unsigned_abs())
        }
    }

    /// `floor(self * 2^k)`.
    pub fn floor_scaled(&self, k: i32) -> IBig {
        let shift = k as i64 - self.exp as i64;
        if shift >= 0 {
            &self.mant << (shift as usize)
        } else {
            &self.mant >> ((-shift) as usize)
        }
    }

    /// `floor(self * 2^k)` as a machine integer; panics on overflow.
    pub fn floor_scaled_i64(&self, k: i32) -> i64 {
        i64::try_from(self.floor_scaled(k)).expect("dyadic index out of i64 range")
    }

    pub fn to_f64(&self) -> f64 {
        let m = self.mant.to_f64().value();
        libm::ldexp(m, -(self.exp as i32))
    }

    pub fn to_rational(&self) -> RBig {
        RBig::from_parts(self.mant.clone(), dashu_int::UBig::ONE << (self.exp as usize))
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min_ref<'a>(&'a self, other: &'a Self) -> &'a Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max_ref<'a>(&'a self, other: &'a Self) -> &'a Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Render as `"m/2^e"`.
    pub fn to_fraction_string(&self) -> String {
        alloc::format!("{}/2^{}", self.mant, self.exp)
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<i64> for DyadicRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.mant.cmp(&other.mant);
        }
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        if self.exp == rhs.exp {
            return DyadicRational::new(&self.mant + &rhs.mant, self.exp);
        }
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::new(a + b, e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        if self.exp == rhs.exp {
            return DyadicRational::new(&self.mant - &rhs.mant, self.exp);
        }
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::new(a - b, e)
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        // product of odd mantissas is odd, so no renormalisation needed
        DyadicRational { mant: &self.mant * &rhs.mant, exp: self.exp + rhs.exp }
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational { mant: -&self.mant, exp: self.exp }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for DyadicRational {
            type Output = DyadicRational;
            fn $f(self, rhs: DyadicRational) -> DyadicRational {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&DyadicRational> for DyadicRational {
            type Output = DyadicRational;
            fn $f(self, rhs: &DyadicRational) -> DyadicRational {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational { mant: -self.mant, exp: self.exp }
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.mant)
        } else {
            write!(f, "{}/2^{}", self.mant, self.exp)
        }
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `"m"`, `"m/2^e"` and `"m/q"` with `q` a power of two.
impl FromStr for DyadicRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Parse(alloc::format!("not a dyadic rational: {s:?}"));
        let (num, den) = match s.split_once('/') {
            None => (s, None),
            Some((n, d)) => (n.trim(), Some(d.trim())),
        };
        let mant = IBig::from_str_radix(num, 10).map_err(|_| bad())?;
        let exp = match den {
            None => 0,
            Some(d) => {
                if let Some(e) = d.strip_prefix("2^") {
                    e.parse::<u32>().map_err(|_| bad())?
                } else {
                    let q = d.parse::<u128>().map_err(|_| bad())?;
                    if q == 0 || !q.is_power_of_two() {
                        return Err(bad());
                    }
                    q.trailing_zeros()
                }
            }
        };
        Ok(DyadicRational::new(mant, exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        let x = DyadicRational::new(IBig::from(12), 3);
        assert_eq!(x.mantissa(), &IBig::from(3));
        assert_eq!(x.exponent(), 1);
        assert_eq!(DyadicRational::new(IBig::ZERO, 7).exponent(), 0);
        assert_eq!(d("4/2^2"), d("1"));
    }

    #[test]
    fn arithmetic_and_order() {
        assert_eq!(d("1/2^1") + d("1/2^2"), d("3/2^2"));
        assert_eq!(d("1/2^1") - d("3/2^2"), d("-1/2^2"));
        assert_eq!(d("3/2^1") * d("1/2^1"), d("3/4"));
        assert!(d("-1/2^10") < DyadicRational::ZERO);
        assert!(d("5/2^3") > d("1/2"));
        assert_eq!(d("5/2^3").scale_pow2(3), d("5"));
        assert_eq!(d("5").scale_pow2(-3), d("5/8"));
    }

    #[test]
    fn floor_scaled_rounds_down() {
        assert_eq!(d("-1/2^2").floor_scaled_i64(0), -1);
        assert_eq!(d("-1/2^2").floor_scaled_i64(2), -1);
        assert_eq!(d("3/2^2").floor_scaled_i64(1), 1);
        assert_eq!(d("3").floor_scaled_i64(-1), 1);
        assert_eq!(d("-3").floor_scaled_i64(-1), -2);
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "-7/2^3", "123456789012345678901234567890/2^70"] {
            let x = d(s);
            assert_eq!(d(&x.to_fraction_string()), x);
            assert_eq!(d(&x.to_string()), x);
        }
        assert!("1/3".parse::<DyadicRational>().is_err());
    }
}
