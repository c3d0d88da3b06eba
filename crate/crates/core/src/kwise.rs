//! The k-wise independent keyed family f_key(x) = Σ c_i·x^i over GF(2^n).
//!
//! A key is the coefficient vector of a random polynomial of degree k − 1.
//! Evaluations at any k distinct points are jointly uniform because the
//! Vandermonde system mapping coefficients to those evaluations is
//! invertible. The 1-bit variant keeps the least significant bit.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2n::{find_modulus, FieldModulus};

/// Largest n·k accepted by the exhaustive independence checks.
pub const MAX_EXHAUSTIVE_BITS: u32 = 16;

/// Key of the k-wise independent family. Serializes as `{n, k, coeffs}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KWiseKey {
    pub n: u32,
    pub k: usize,
    pub coeffs: Vec<u64>,
}

impl KWiseKey {
    pub fn new(n: u32, coeffs: Vec<u64>) -> Result<Self> {
        let key = Self { n, k: coeffs.len(), coeffs };
        key.validate()?;
        Ok(key)
    }

    pub fn validate(&self) -> Result<()> {
        let m = find_modulus(self.n)?;
        if self.k == 0 || self.coeffs.len() != self.k {
            return Err(Error::InvalidParameters(format!(
                "key declares k = {} but carries {} coefficients",
                self.k,
                self.coeffs.len()
            )));
        }
        if let Some(&c) = self.coeffs.iter().find(|&&c| c & !m.mask() != 0) {
            return Err(Error::OutOfRange { value: c, width: self.n });
        }
        Ok(())
    }

    /// Binds the key to the field so repeated evaluation skips the modulus search.
    pub fn function(&self) -> Result<KWiseFunction> {
        self.validate()?;
        Ok(KWiseFunction { modulus: find_modulus(self.n)?, coeffs: self.coeffs.clone() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("key serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let key: Self = serde_json::from_str(s)
            .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        key.validate()?;
        Ok(key)
    }
}

/// A key together with its field, ready for evaluation.
#[derive(Clone, Debug)]
pub struct KWiseFunction {
    modulus: FieldModulus,
    coeffs: Vec<u64>,
}

impl KWiseFunction {
    pub fn n(&self) -> u32 {
        self.modulus.degree()
    }

    pub fn eval_full(&self, x: u64) -> u64 {
        debug_assert!(x & !self.modulus.mask() == 0);
        self.modulus.eval(&self.coeffs, x)
    }

    pub fn eval_bit(&self, x: u64) -> u8 {
        (self.eval_full(x) & 1) as u8
    }

    /// Truth table of the 1-bit function over all 2^n inputs.
    pub fn bit_table(&self) -> Vec<u64> {
        (0..1u64 << self.n()).map(|x| self.eval_bit(x) as u64).collect()
    }

    /// Full-width table over all 2^n inputs.
    pub fn full_table(&self) -> Vec<u64> {
        (0..1u64 << self.n()).map(|x| self.eval_full(x)).collect()
    }
}

/// Samples k coefficients uniformly from {0, ..., 2^n − 1}.
///
/// The generator is ChaCha8 seeded through `seed_from_u64`; coefficients are
/// drawn in order c_0, c_1, ... as full 64-bit words masked to n bits.
pub fn sample_key(n: u32, k: usize, seed: u64) -> Result<KWiseKey> {
    let m = find_modulus(n)?;
    if k == 0 {
        return Err(Error::InvalidParameters("k must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..k).map(|_| rng.random::<u64>() & m.mask()).collect();
    Ok(KWiseKey { n, k, coeffs })
}

pub fn eval_full(key: &KWiseKey, x: u64) -> Result<u64> {
    check_input(key.n, x)?;
    Ok(key.function()?.eval_full(x))
}

pub fn eval_bit(key: &KWiseKey, x: u64) -> Result<u8> {
    check_input(key.n, x)?;
    Ok(key.function()?.eval_bit(x))
}

fn check_input(n: u32, x: u64) -> Result<()> {
    if n < 64 && x >> n != 0 {
        return Err(Error::OutOfRange { value: x, width: n });
    }
    Ok(())
}

/// Outcome of an exhaustive independence check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KWiseReport {
    pub n: u32,
    pub k: usize,
    /// Bits of output per input point (n for the full family, 1 for the bit).
    pub output_bits: u32,
    pub keys: u64,
    pub input_sets: u64,
    /// max |Pr[outputs = y] − 2^(−k·output_bits)| over all input sets and y.
    pub worst_deviation: f64,
    pub pass: bool,
}

/// Enumerates every key and every set of k distinct inputs, checking that
/// each output tuple occurs with probability exactly 2^(−nk).
pub fn verify_kwise_exhaustive(n: u32, k: usize) -> Result<KWiseReport> {
    verify_exhaustive(n, k, n)
}

/// Same as [`verify_kwise_exhaustive`] for the least-significant-bit truncation.
pub fn verify_kwise_bits_exhaustive(n: u32, k: usize) -> Result<KWiseReport> {
    verify_exhaustive(n, k, 1)
}

fn verify_exhaustive(n: u32, k: usize, output_bits: u32) -> Result<KWiseReport> {
    let m = find_modulus(n)?;
    if k == 0 {
        return Err(Error::InvalidParameters("k must be at least 1".into()));
    }
    let key_bits = n as u64 * k as u64;
    if key_bits > MAX_EXHAUSTIVE_BITS as u64 {
        return Err(Error::InstanceTooLarge(format!(
            "n·k = {key_bits} exceeds {MAX_EXHAUSTIVE_BITS} for exhaustive key enumeration"
        )));
    }
    if k as u64 > 1u64 << n {
        return Err(Error::InvalidParameters(format!("k = {k} exceeds the 2^{n} field elements")));
    }
    let keys = 1u64 << key_bits;
    let out_mask = (1u64 << output_bits) - 1;
    let tuples = 1usize << (output_bits as usize * k);
    let target = 1.0 / tuples as f64;

    let sets: Vec<Vec<u64>> = (0..1u64 << n).combinations(k).collect();
    let worst = sets
        .par_iter()
        .map(|xs| {
            let mut counts = vec![0u64; tuples];
            let mut coeffs = vec![0u64; k];
            for key in 0..keys {
                for (i, c) in coeffs.iter_mut().enumerate() {
                    *c = (key >> (i as u32 * n)) & m.mask();
                }
                let idx = xs.iter().fold(0usize, |acc, &x| {
                    (acc << output_bits) | (m.eval(&coeffs, x) & out_mask) as usize
                });
                counts[idx] += 1;
            }
            counts
                .iter()
                .map(|&c| (c as f64 / keys as f64 - target).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    Ok(KWiseReport {
        n,
        k,
        output_bits,
        keys,
        input_sets: sets.len() as u64,
        worst_deviation: worst,
        pass: worst == 0.0,
    })
}
