//! Prime-field arithmetic. Every operation here is charged as a single local
//! operation when it runs inside a simulated kernel.

use crate::error::{Error, Result};

/// Coefficient of a polynomial over `Z/pZ`, always reduced to `[0, p)`.
pub type Coeff = u64;

const MAX_MODULUS: u64 = 1 << 31;

/// The coefficient field `Z/pZ` for a word-sized prime `p < 2^31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    p: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl Field {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..MAX_MODULUS).contains(&p) {
            return Err(Error::ModulusOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Field { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary signed integer into the field.
    pub fn reduce(&self, v: i64) -> Coeff {
        v.rem_euclid(self.p as i64) as Coeff
    }

    pub fn add(&self, a: Coeff, b: Coeff) -> Coeff {
        (a + b) % self.p
    }

    pub fn sub(&self, a: Coeff, b: Coeff) -> Coeff {
        (a + self.p - b) % self.p
    }

    pub fn neg(&self, a: Coeff) -> Coeff {
        (self.p - a) % self.p
    }

    pub fn mul(&self, a: Coeff, b: Coeff) -> Coeff {
        a * b % self.p
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: Coeff) -> Result<Coeff> {
        if a.is_multiple_of(self.p) {
            return Err(Error::DivisionByZero);
        }
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Ok(self.reduce(t0))
    }

    /// `a / b`, i.e. `a * b^{-1}`.
    pub fn div(&self, a: Coeff, b: Coeff) -> Result<Coeff> {
        Ok(self.mul(a, self.inv(b)?))
    }
}
