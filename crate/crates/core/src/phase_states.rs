//! Binary-phase and complex-phase state vectors.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalization tolerance for state vectors.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Largest qubit count for which a full table or state vector is built.
pub const MAX_QUBITS: u32 = 26;

/// A phase function f: {0,1}^n → {0, ..., modulus − 1}, given as a table
/// indexed by x (bit i of x is coordinate i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseFunction {
    n: u32,
    modulus: u64,
    table: Vec<u64>,
}

impl PhaseFunction {
    pub fn new(table: Vec<u64>, modulus: u64) -> Result<Self> {
        let len = table.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameters(format!(
                "table length {len} is not 2^n for n ≥ 1"
            )));
        }
        let n = len.trailing_zeros();
        if n > MAX_QUBITS {
            return Err(Error::InstanceTooLarge(format!("{n} qubits")));
        }
        if modulus < 2 {
            return Err(Error::InvalidParameters(format!("phase modulus {modulus} < 2")));
        }
        if let Some(&v) = table.iter().find(|&&v| v >= modulus) {
            return Err(Error::InvalidParameters(format!(
                "table entry {v} outside 0..{modulus}"
            )));
        }
        Ok(Self { n, modulus, table })
    }

    /// f ≡ 0 on n bits.
    pub fn zero(n: u32, modulus: u64) -> Result<Self> {
        Self::new(vec![0; 1usize << n.min(MAX_QUBITS + 1)], modulus)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }
}

/// Amplitudes over the 2^n computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: u32,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidParameters(format!("{len} amplitudes is not a power of two")));
        }
        let state = Self { n: len.trailing_zeros(), amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameters(format!("state norm² is {norm}")));
        }
        Ok(state)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|a| a.im == 0.0)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch(self.amplitudes.len(), other.amplitudes.len()));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// |⟨self|other⟩|.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// CSV with header `index,re,im`, one row per basis state in ascending order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, a) in self.amplitudes.iter().enumerate() {
            writeln!(out, "{i},{},{}", fmt_float(a.re), fmt_float(a.im)).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "index,re,im" => {}
            _ => return Err(Error::Parse { line: 1, message: "expected header index,re,im".into() }),
        }
        let mut amplitudes = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(parse_err(format!("expected 3 fields, got {}", fields.len())));
            }
            let index: usize = fields[0].parse().map_err(|e| parse_err(format!("index: {e}")))?;
            if index != amplitudes.len() {
                return Err(parse_err(format!("index {index} out of order")));
            }
            let re: f64 = fields[1].parse().map_err(|e| parse_err(format!("re: {e}")))?;
            let im: f64 = fields[2].parse().map_err(|e| parse_err(format!("im: {e}")))?;
            amplitudes.push(Complex64::new(re, im));
        }
        Self::new(amplitudes)
    }
}

/// Shortest round-tripping decimal, with negative zero printed as zero.
pub(crate) fn fmt_float(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:?}")
}

/// 2^(−n/2), exact for even n.
pub fn uniform_amplitude(n: u32) -> f64 {
    let half = (0.5f64).powi((n / 2) as i32);
    if n.is_multiple_of(2) { half } else { half * FRAC_1_SQRT_2 }
}

/// exp(2πi·v/2^bits), with the quadrant taken exactly so multiples of a
/// quarter turn carry no rounding.
pub fn root_of_unity(v: u64, bits: u32) -> Complex64 {
    let v = if bits >= 64 { v } else { v & ((1u64 << bits) - 1) };
    let (quadrant, rem, rem_bits) = if bits >= 2 {
        (v >> (bits - 2), v & ((1u64 << (bits - 2)) - 1), bits - 2)
    } else {
        // bits = 1: v ∈ {0, 1} is a half turn count.
        (v << 1, 0, 0)
    };
    let (c, s) = if rem == 0 {
        (1.0, 0.0)
    } else {
        let angle = TAU * (rem as f64 / (1u64 << rem_bits) as f64) / 4.0;
        (angle.cos(), angle.sin())
    };
    match quadrant & 3 {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        2 => Complex64::new(-c, -s),
        _ => Complex64::new(s, -c),
    }
}

/// 2^(−n/2) Σ (−1)^f(x) |x⟩. All amplitudes are exactly real.
pub fn gen_binary_phase(f: &PhaseFunction) -> Result<StateVector> {
    if f.modulus != 2 {
        return Err(Error::ModulusMismatch { expected: 2, found: f.modulus });
    }
    let a = uniform_amplitude(f.n);
    let amplitudes = f
        .table
        .iter()
        .map(|&b| Complex64::new(if b == 0 { a } else { -a }, 0.0))
        .collect();
    Ok(StateVector { n: f.n, amplitudes })
}

/// 2^(−n/2) Σ ω_{2^n}^f(x) |x⟩.
pub fn gen_complex_phase(f: &PhaseFunction) -> Result<StateVector> {
    let expected = 1u64 << f.n;
    if f.modulus != expected {
        return Err(Error::ModulusMismatch { expected, found: f.modulus });
    }
    let a = uniform_amplitude(f.n);
    let amplitudes = f.table.iter().map(|&v| root_of_unity(v, f.n) * a).collect();
    Ok(StateVector { n: f.n, amplitudes })
}
