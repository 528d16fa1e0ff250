//! Prime-field arithmetic.
//!
//! Every payload symbol and every coding coefficient lives in `GF(p)` for a
//! prime `p` chosen per instance. The modulus is held by [`PrimeField`]; the
//! elements themselves are bare residues.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} does not fit in 32 bits")]
    ModulusTooLarge(u64),
    #[error("element {value} does not belong to GF({modulus})")]
    ForeignElement { value: u32, modulus: u32 },
    #[error("division by zero in GF({0})")]
    DivisionByZero(u32),
}

/// A residue modulo the enclosing field's prime.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub(crate) fn from_raw(v: u32) -> Fe {
        Fe(v)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Arithmetic context for `GF(p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, GfError> {
        if p > u32::MAX as u64 {
            return Err(GfError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        Ok(Self { p: p as u32 })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, v: u64) -> Fe {
        Fe((v % self.p as u64) as u32)
    }

    /// Maps a signed integer to its residue, so `from_i64(-1)` is `p - 1`.
    pub fn from_i64(&self, v: i64) -> Fe {
        Fe(v.rem_euclid(self.p as i64) as u32)
    }

    /// Accepts `v` only if it is already a canonical residue.
    pub fn try_elem(&self, v: u32) -> Result<Fe, GfError> {
        if v < self.p {
            Ok(Fe(v))
        } else {
            Err(GfError::ForeignElement { value: v, modulus: self.p })
        }
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.0 < self.p
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let s = a.0 as u64 + b.0 as u64;
        let p = self.p as u64;
        Fe(if s >= p { s - p } else { s } as u32)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        if a.0 >= b.0 {
            Fe(a.0 - b.0)
        } else {
            Fe((a.0 as u64 + self.p as u64 - b.0 as u64) as u32)
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            a
        } else {
            Fe(self.p - a.0)
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32)
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        if self.p == 1 {
            return Fe::ZERO;
        }
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: Fe) -> Result<Fe, GfError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(GfError::DivisionByZero(self.p));
        }
        Ok(self.pow(a, self.p as u64 - 2))
    }

    pub fn checked_add(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    pub fn checked_sub(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.sub(a, b))
    }

    pub fn checked_mul(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn checked_neg(&self, a: Fe) -> Result<Fe, GfError> {
        self.check(a)?;
        Ok(self.neg(a))
    }

    fn check(&self, a: Fe) -> Result<(), GfError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(GfError::ForeignElement { value: a.0, modulus: self.p })
        }
    }

    /// `dst += c * src`, element-wise.
    pub fn axpy(&self, dst: &mut [Fe], c: Fe, src: &[Fe]) {
        debug_assert_eq!(dst.len(), src.len());
        if c.is_zero() {
            return;
        }
        for (d, s) in dst.iter_mut().zip(src) {
            *d = self.add(*d, self.mul(c, *s));
        }
    }

    pub fn scale(&self, v: &mut [Fe], c: Fe) {
        for x in v.iter_mut() {
            *x = self.mul(*x, c);
        }
    }

    /// Signed representative in `(-p/2, p/2]`, used when printing coefficients.
    pub fn signed(&self, a: Fe) -> i64 {
        let v = a.0 as i64;
        let p = self.p as i64;
        if v > p / 2 {
            v - p
        } else {
            v
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime admissible for `users` users and `files` files.
///
/// A demand count `N^s_k` can reach `users - files + 1`, so the
/// characteristic must be at least `users - files + 2`.
pub fn choose_prime(users: usize, files: usize) -> u32 {
    let mut p = min_characteristic(users, files).max(2) as u64;
    while !is_prime(p) {
        p += 1;
    }
    p as u32
}

/// Lower bound `K - N + 2` on the field characteristic.
pub fn min_characteristic(users: usize, files: usize) -> usize {
    (users + 2).saturating_sub(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn choose_prime_examples() {
        assert_eq!(choose_prime(6, 6), 2);
        assert_eq!(choose_prime(6, 3), 5);
        assert_eq!(choose_prime(8, 8), 2);
        assert_eq!(choose_prime(4, 3), 3);
        assert_eq!(choose_prime(14, 2), 17);
    }

    #[test]
    fn small_arithmetic() {
        let f5 = field(5);
        assert_eq!(f5.add(Fe(3), Fe(4)), Fe(2));
        assert_eq!(f5.neg(Fe(1)), Fe(4));
        assert_eq!(field(2).sub(Fe(0), Fe(1)), Fe(1));
        assert_eq!(f5.inv(Fe(2)).unwrap(), Fe(3));
        assert_eq!(field(7).inv(Fe(1)).unwrap(), Fe(1));
    }

    #[test]
    fn inverse_matches_brute_force_scan() {
        let f = field(11);
        let scan = (1..11u32).find(|b| (4 * b) % 11 == 1).unwrap();
        assert_eq!(scan, 3);
        assert_eq!(f.inv(Fe(4)).unwrap(), Fe(scan));
    }

    #[test]
    fn errors() {
        assert_eq!(field(5).inv(Fe::ZERO), Err(GfError::DivisionByZero(5)));
        assert_eq!(PrimeField::new(9), Err(GfError::NotPrime(9)));
        assert_eq!(PrimeField::new(1), Err(GfError::NotPrime(1)));
        let f3 = field(3);
        let from_seven = field(7).elem(5);
        assert_eq!(f3.checked_add(Fe(1), from_seven), Err(GfError::ForeignElement { value: 5, modulus: 3 }));
        assert!(f3.try_elem(3).is_err());
        assert_eq!(f3.from_i64(-1), Fe(2));
    }

    #[test]
    fn field_axioms_exhaustive_up_to_31() {
        for p in (2..=31u64).filter(|&p| is_prime(p)) {
            let f = field(p);
            for a in 0..p as u32 {
                let a = Fe(a);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE, "p={p}");
                }
                for b in 0..p as u32 {
                    let b = Fe(b);
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.add(f.sub(a, b), b), a);
                    assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
                }
            }
        }
    }

    #[test]
    fn choose_prime_is_admissible() {
        for k in 2..40 {
            for n in 2..=k {
                let p = choose_prime(k, n) as usize;
                assert!(is_prime(p as u64));
                assert!(p >= k - n + 2);
                assert!((k - n + 2..p).all(|q| !is_prime(q as u64)));
            }
        }
    }

    #[test]
    fn signed_representative() {
        let f = field(7);
        assert_eq!(f.signed(Fe(6)), -1);
        assert_eq!(f.signed(Fe(3)), 3);
        assert_eq!(f.signed(Fe(4)), -3);
    }
}
