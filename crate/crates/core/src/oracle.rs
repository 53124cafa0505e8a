//! Serial reference arithmetic used as ground truth for the simulated kernels.
//! Nothing here shares code with the kernel implementations.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::Poly;

/// Schoolbook Euclidean division: `a = q*b + r` with `deg r < deg b`.
pub fn oracle_divmod(field: &Field, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
    let db = b.degree().ok_or(Error::DivisionByZero)?;
    let lc_inv = field.inv(b.coeff(db))?;
    let mut r: Vec<u64> = a.coeffs().to_vec();
    if r.len() <= db {
        return Ok((Poly::zero(), a.clone()));
    }
    let mut q = vec![0u64; r.len() - db];
    for i in (db..r.len()).rev() {
        let c = field.mul(r[i], lc_inv);
        q[i - db] = c;
        if c == 0 {
            continue;
        }
        for (k, &bk) in b.coeffs().iter().enumerate() {
            let idx = i - db + k;
            r[idx] = field.sub(r[idx], field.mul(c, bk));
        }
    }
    r.truncate(db);
    Ok((Poly::new(q), Poly::new(r)))
}

/// Convolution product.
pub fn oracle_mul(field: &Field, a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let mut f = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.coeffs().iter().enumerate() {
        for (j, &bj) in b.coeffs().iter().enumerate() {
            f[i + j] = field.add(f[i + j], field.mul(ai, bj));
        }
    }
    Poly::new(f)
}

/// Monic generator of the ideal `(a, b)`.
pub fn oracle_gcd(field: &Field, a: &Poly, b: &Poly) -> Result<Poly> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::InvalidInput("gcd(0, 0) is undefined".into()));
    }
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let (_, r) = oracle_divmod(field, &x, &y)?;
        x = y;
        y = r;
    }
    Ok(x.monic(field))
}
