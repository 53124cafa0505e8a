use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::field::{Coeff, Field};

/// Dense univariate polynomial: coefficients in ascending order of degree,
/// leading coefficient last. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<Coeff>,
}

impl Poly {
    /// Builds a polynomial, dropping trailing zero coefficients.
    pub fn new(mut coeffs: Vec<Coeff>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Reduces every coefficient into `field` before trimming.
    pub fn from_ints(field: &Field, coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| field.reduce(c)).collect())
    }

    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Coeff) -> Self {
        Poly::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Number of terms, null or not (`deg + 1`).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<Coeff> {
        self.coeffs.last().copied()
    }

    pub fn coeff(&self, i: usize) -> Coeff {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Scales so the leading coefficient is one; zero stays zero.
    pub fn monic(&self, field: &Field) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(lc) => {
                let inv = field.inv(lc).expect("leading coefficient is nonzero");
                Poly::new(self.coeffs.iter().map(|&c| field.mul(c, inv)).collect())
            }
        }
    }

    /// Random polynomial with exactly `terms` terms and a nonzero leading coefficient.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, field: &Field, terms: usize) -> Poly {
        let p = field.modulus();
        let mut coeffs: Vec<Coeff> = (0..terms).map(|_| rng.gen_range(0..p)).collect();
        if let Some(last) = coeffs.last_mut() {
            *last = rng.gen_range(1..p);
        }
        Poly { coeffs }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c == 1 => write!(f, "X")?,
                1 => write!(f, "{c}*X")?,
                _ if c == 1 => write!(f, "X^{i}")?,
                _ => write!(f, "{c}*X^{i}")?,
            }
        }
        Ok(())
    }
}
