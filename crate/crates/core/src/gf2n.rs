//! Arithmetic in GF(2^n) for 1 ≤ n ≤ 64.
//!
//! Elements are n-bit polynomial coefficient vectors packed into a `u64`
//! (bit i is the coefficient of x^i). Multiplication is a portable shift-xor
//! carry-less product followed by reduction modulo a fixed irreducible
//! polynomial. The modulus for each degree is chosen deterministically as the
//! smallest irreducible polynomial with nonzero constant term, so every
//! output of this crate is bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 64;

/// An element of GF(2^width).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    bits: u64,
    width: u32,
}

impl FieldElement {
    pub fn new(bits: u64, width: u32) -> Result<Self> {
        check_degree(width)?;
        if bits & !mask(width) != 0 {
            return Err(Error::OutOfRange { value: bits, width });
        }
        Ok(Self { bits, width })
    }

    pub fn zero(width: u32) -> Result<Self> {
        Self::new(0, width)
    }

    pub fn one(width: u32) -> Result<Self> {
        Self::new(1, width)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }
}

/// A monic irreducible polynomial of degree n over GF(2), stored with its
/// leading coefficient (so it needs n + 1 bits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldModulus {
    poly: u128,
    degree: u32,
}

impl FieldModulus {
    /// Wraps `poly` after checking that it is monic of the given degree and
    /// irreducible.
    pub fn new(poly: u128, degree: u32) -> Result<Self> {
        check_degree(degree)?;
        if poly >> degree != 1 {
            return Err(Error::InvalidParameters(format!(
                "{poly:#b} is not a monic polynomial of degree {degree}"
            )));
        }
        if !is_irreducible(poly) {
            return Err(Error::InvalidParameters(format!("{poly:#b} is reducible")));
        }
        Ok(Self { poly, degree })
    }

    pub fn poly(&self) -> u128 {
        self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn mask(&self) -> u64 {
        mask(self.degree)
    }

    /// Reduces a polynomial of degree < 2n modulo this modulus.
    pub fn reduce(&self, mut p: u128) -> u64 {
        let n = self.degree;
        let mut top = 127 - p.leading_zeros().min(127);
        while p >> n != 0 {
            if p >> top & 1 == 1 {
                p ^= self.poly << (top - n);
            }
            top -= 1;
        }
        p as u64
    }

    /// Product of two raw n-bit elements.
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(clmul(a, b))
    }

    /// Square-and-multiply exponentiation; `pow(a, 0) == 1` for every a.
    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Horner evaluation of Σ coeffs[i]·x^i.
    pub fn eval(&self, coeffs: &[u64], x: u64) -> u64 {
        coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }

    fn check(&self, e: FieldElement) -> Result<u64> {
        if e.width != self.degree {
            return Err(Error::WidthMismatch { left: e.width, right: self.degree });
        }
        Ok(e.bits)
    }

    fn element(&self, bits: u64) -> FieldElement {
        FieldElement { bits, width: self.degree }
    }
}

fn check_degree(n: u32) -> Result<()> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(n));
    }
    Ok(())
}

fn mask(n: u32) -> u64 {
    if n >= 64 { u64::MAX } else { (1u64 << n) - 1 }
}

/// Portable carry-less product of two 64-bit polynomials.
pub fn clmul(a: u64, b: u64) -> u128 {
    let a = a as u128;
    let mut b = b;
    let mut acc = 0u128;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

pub fn gf_add(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    if a.width != b.width {
        return Err(Error::WidthMismatch { left: a.width, right: b.width });
    }
    Ok(FieldElement { bits: a.bits ^ b.bits, width: a.width })
}

pub fn gf_mul(a: FieldElement, b: FieldElement, m: &FieldModulus) -> Result<FieldElement> {
    let (a, b) = (m.check(a)?, m.check(b)?);
    Ok(m.element(m.mul(a, b)))
}

pub fn gf_pow(a: FieldElement, e: u64, m: &FieldModulus) -> Result<FieldElement> {
    let a = m.check(a)?;
    Ok(m.element(m.pow(a, e)))
}

pub fn poly_eval(coeffs: &[FieldElement], x: FieldElement, m: &FieldModulus) -> Result<FieldElement> {
    if coeffs.is_empty() {
        return Err(Error::EmptyPolynomial);
    }
    let x = m.check(x)?;
    let raw = coeffs.iter().map(|&c| m.check(c)).collect::<Result<Vec<_>>>()?;
    Ok(m.element(m.eval(&raw, x)))
}

/// The deterministic modulus for GF(2^n).
///
/// Candidates are scanned in increasing order over monic degree-n polynomials
/// with constant term 1. For n ≥ 2 this is exactly the smallest irreducible
/// polynomial (anything divisible by x is reducible); for n = 1 it yields
/// x + 1, and since no product of two 1-bit elements ever needs reducing the
/// choice does not affect GF(2) arithmetic.
pub fn find_modulus(n: u32) -> Result<FieldModulus> {
    check_degree(n)?;
    let mut poly = (1u128 << n) | 1;
    loop {
        if is_irreducible(poly) {
            return Ok(FieldModulus { poly, degree: n });
        }
        poly += 2;
    }
}

fn degree_of(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

/// Remainder of `a` divided by `b` in GF(2)[x].
pub fn poly_rem(mut a: u128, b: u128) -> u128 {
    assert!(b != 0, "division by the zero polynomial");
    let db = degree_of(b);
    while a != 0 && degree_of(a) >= db {
        a ^= b << (degree_of(a) - db);
    }
    a
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

fn mulmod(a: u128, b: u128, f: u128) -> u128 {
    // a, b have degree < deg f ≤ 64, so both fit into 64 bits.
    poly_rem(clmul(a as u64, b as u64), f)
}

/// Ben-Or irreducibility test: f of degree n is irreducible iff
/// gcd(x^(2^i) − x, f) = 1 for every 1 ≤ i ≤ n/2.
pub fn is_irreducible(f: u128) -> bool {
    let n = degree_of(f);
    if n < 1 || n > MAX_DEGREE as i32 {
        return false;
    }
    let x = poly_rem(0b10, f);
    let mut h = x;
    for _ in 0..n / 2 {
        h = mulmod(h, h, f);
        if poly_gcd(f, h ^ x) != 1 {
            return false;
        }
    }
    true
}
