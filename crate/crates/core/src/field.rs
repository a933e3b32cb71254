//! The prime field F_p for odd primes `3 <= p < 2^16`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated odd prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Prime(u32);

impl Prime {
    pub const MAX: u32 = 1 << 16;

    pub fn new(p: u32) -> Result<Self> {
        if p == 2 {
            return Err(Error::EvenPrime);
        }
        if p >= Self::MAX {
            return Err(Error::ModulusTooLarge(p));
        }
        if p < 2 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Reduces an arbitrary signed integer to its residue in `[0, p)`.
    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    /// Multiplicative inverse of a nonzero residue.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.0), "inverse of zero in F_{}", self.0);
        let (mut r0, mut r1) = (self.0 as i64, (a % self.0) as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        self.reduce(t0)
    }
}

impl TryFrom<u32> for Prime {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u32 {
    fn from(p: Prime) -> u32 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A single element of F_p carrying its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpScalar {
    value: u32,
    p: Prime,
}

impl FpScalar {
    pub fn new(p: Prime, x: i64) -> Self {
        FpScalar {
            value: p.reduce(x),
            p,
        }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn prime(self) -> Prime {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Option<Self> {
        (self.value != 0).then(|| FpScalar {
            value: self.p.inv(self.value),
            p: self.p,
        })
    }

    fn check(self, other: Self) {
        assert_eq!(self.p, other.p, "mixing scalars of different moduli");
    }
}

impl Add for FpScalar {
    type Output = FpScalar;
    fn add(self, rhs: Self) -> Self {
        self.check(rhs);
        FpScalar {
            value: self.p.add(self.value, rhs.value),
            p: self.p,
        }
    }
}

impl Sub for FpScalar {
    type Output = FpScalar;
    fn sub(self, rhs: Self) -> Self {
        self.check(rhs);
        FpScalar {
            value: self.p.sub(self.value, rhs.value),
            p: self.p,
        }
    }
}

impl Mul for FpScalar {
    type Output = FpScalar;
    fn mul(self, rhs: Self) -> Self {
        self.check(rhs);
        FpScalar {
            value: self.p.mul(self.value, rhs.value),
            p: self.p,
        }
    }
}

impl Neg for FpScalar {
    type Output = FpScalar;
    fn neg(self) -> Self {
        FpScalar {
            value: self.p.neg(self.value),
            p: self.p,
        }
    }
}

impl fmt::Display for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_moduli() {
        assert!(matches!(Prime::new(2), Err(Error::EvenPrime)));
        assert!(matches!(Prime::new(9), Err(Error::NotPrime(9))));
        assert!(matches!(Prime::new(1), Err(Error::NotPrime(1))));
        assert!(matches!(Prime::new(0), Err(Error::NotPrime(0))));
        assert!(matches!(Prime::new(65537), Err(Error::ModulusTooLarge(_))));
        assert!(Prime::new(65521).is_ok());
    }

    #[test]
    fn inverses() {
        for p in [3u32, 5, 7, 101, 65521] {
            let f = Prime::new(p).unwrap();
            for a in 1..p.min(500) {
                assert_eq!(f.mul(a, f.inv(a)), 1);
            }
        }
    }

    #[test]
    fn scalar_arithmetic() {
        let p = Prime::new(7).unwrap();
        let a = FpScalar::new(p, -3);
        assert_eq!(a.value(), 4);
        let b = FpScalar::new(p, 5);
        assert_eq!((a + b).value(), 2);
        assert_eq!((a - b).value(), 6);
        assert_eq!((a * b).value(), 6);
        assert_eq!((-a).value(), 3);
        assert_eq!((a * a.inv().unwrap()).value(), 1);
        assert!(FpScalar::new(p, 14).inv().is_none());
    }
}
