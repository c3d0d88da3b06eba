//! t-copy moment matrices of the phase-state ensembles and of Haar-random
//! states, stored sparsely by row.
//!
//! `rho_complex` and `rho_binary` are built from the pair predicates of
//! [`crate::combinatorics`]; [`entry_oracle`] recomputes any single entry as a
//! brute-force expectation over phase functions and never consults those
//! predicates. `rho_haar` is the normalized symmetrizer (1/t!) Σ_π P_π built
//! by literally summing coordinate permutations.

use std::fmt::Write as _;

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{check_enumerable, decode_entries, multichoose_count, ClassStructure};
use crate::error::{Error, Result};
use crate::phase_states::{fmt_float, root_of_unity};

/// Densification limit.
pub const MAX_DENSE_DIM: usize = 4096;

/// Cap on stored nonzeros for any sparse build.
pub const MAX_NONZEROS: u64 = 50_000_000;

/// Budget for the brute-force oracle: at most 2^24 phase assignments.
pub const MAX_ORACLE_ASSIGNMENTS: u64 = 1 << 24;

/// Largest t for which the symmetrizer enumerates all of S_t.
pub const MAX_HAAR_T: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixLabel {
    /// E_f[(|f⟩⟨f|)^⊗t] for binary phases.
    Binary,
    /// The same for phases ω_{2^n}^f(x).
    Complex,
    /// Binary minus complex.
    Diff,
    /// Haar t-th moment.
    Haar,
    Other,
}

/// A square complex matrix over tuple indices, stored as sorted sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix {
    label: MatrixLabel,
    t: u32,
    n: u32,
    rows: Vec<Vec<(u32, Complex64)>>,
}

impl MomentMatrix {
    /// Builds from arbitrary rows; columns are sorted and exact zeros dropped.
    pub fn from_rows(label: MatrixLabel, t: u32, n: u32, mut rows: Vec<Vec<(u32, Complex64)>>) -> Result<Self> {
        let dim = rows.len();
        for row in &mut rows {
            row.retain(|(_, v)| *v != Complex64::ZERO);
            row.sort_unstable_by_key(|&(c, _)| c);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidParameters("duplicate column in sparse row".into()));
            }
            if row.last().is_some_and(|&(c, _)| c as usize >= dim) {
                return Err(Error::InvalidParameters("column out of range".into()));
            }
        }
        Ok(Self { label, t, n, rows })
    }

    pub fn identity_scaled(dim_bits: u32, value: f64) -> Self {
        let rows = (0..1u32 << dim_bits).map(|i| vec![(i, Complex64::new(value, 0.0))]).collect();
        Self { label: MatrixLabel::Other, t: 1, n: dim_bits, rows }
    }

    pub fn zeros(dim_bits: u32) -> Self {
        Self { label: MatrixLabel::Other, t: 1, n: dim_bits, rows: vec![Vec::new(); 1 << dim_bits] }
    }

    pub fn label(&self) -> MatrixLabel {
        self.label
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(u32, Complex64)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, row: u64, col: u64) -> Complex64 {
        let r = &self.rows[row as usize];
        r.binary_search_by_key(&(col as u32), |&(c, _)| c)
            .map_or(Complex64::ZERO, |i| r[i].1)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim() as u64).map(|i| self.entry(i, i)).sum()
    }

    /// max |A_xy − conj(A_yx)| over stored entries.
    pub fn hermitian_deviation(&self) -> f64 {
        self.rows
            .par_iter()
            .enumerate()
            .map(|(x, row)| {
                row.iter()
                    .map(|&(y, v)| (v - self.entry(y as u64, x as u64).conj()).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.rows.iter().flatten().all(|(_, v)| v.im == 0.0)
    }

    /// self − other, dropping exact zeros.
    pub fn sub(&self, other: &MomentMatrix) -> Result<MomentMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        let rows = self
            .rows
            .par_iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                a.iter()
                    .copied()
                    .merge_join_by(b.iter().copied(), |x, y| x.0.cmp(&y.0))
                    .map(|e| match e {
                        itertools::EitherOrBoth::Both((c, u), (_, v)) => (c, u - v),
                        itertools::EitherOrBoth::Left(p) => p,
                        itertools::EitherOrBoth::Right((c, v)) => (c, -v),
                    })
                    .filter(|(_, v)| *v != Complex64::ZERO)
                    .collect()
            })
            .collect();
        Ok(MomentMatrix { label: MatrixLabel::Other, t: self.t, n: self.n, rows })
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = self.dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::InstanceTooLarge(format!("dense view of dimension {dim}")));
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c as usize)] = v;
            }
        }
        Ok(m)
    }

    /// Coordinate-list CSV: a `dim,<D>` line, then `row,col,re,im` and one
    /// line per stored entry in row-major order.
    pub fn to_coo_csv(&self) -> String {
        let mut out = format!("dim,{}\nrow,col,re,im\n", self.dim());
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                writeln!(out, "{r},{c},{},{}", fmt_float(v.re), fmt_float(v.im)).unwrap();
            }
        }
        out
    }

    pub fn from_coo_csv(text: &str) -> Result<MomentMatrix> {
        let mut lines = text.lines().enumerate();
        let dim: usize = match lines.next() {
            Some((_, l)) => l
                .strip_prefix("dim,")
                .and_then(|d| d.trim().parse().ok())
                .ok_or(Error::Parse { line: 1, message: "expected dim,<D>".into() })?,
            None => return Err(Error::Parse { line: 1, message: "empty input".into() }),
        };
        if !dim.is_power_of_two() {
            return Err(Error::Parse { line: 1, message: format!("dimension {dim} is not 2^k") });
        }
        match lines.next() {
            Some((_, h)) if h.trim() == "row,col,re,im" => {}
            _ => return Err(Error::Parse { line: 2, message: "expected header row,col,re,im".into() }),
        }
        let mut rows = vec![Vec::new(); dim];
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse { line: i + 1, message: m.to_string() };
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(err("expected 4 fields"));
            }
            let r: usize = f[0].parse().map_err(|_| err("bad row"))?;
            let c: u32 = f[1].parse().map_err(|_| err("bad column"))?;
            let re: f64 = f[2].parse().map_err(|_| err("bad real part"))?;
            let im: f64 = f[3].parse().map_err(|_| err("bad imaginary part"))?;
            if r >= dim {
                return Err(err("row out of range"));
            }
            rows[r].push((c, Complex64::new(re, im)));
        }
        MomentMatrix::from_rows(MatrixLabel::Other, 1, dim.trailing_zeros(), rows)
    }
}

fn check_phase_params(t: u32, n: u32) -> Result<()> {
    check_enumerable(t, n)?;
    if n < 64 && t as u64 >= 1u64 << n {
        return Err(Error::InvalidParameters(format!(
            "t = {t} must be strictly smaller than 2^n = {}",
            1u64 << n
        )));
    }
    Ok(())
}

fn scale(t: u32, n: u32) -> f64 {
    (0.5f64).powi((t * n) as i32)
}

/// Builds a matrix whose row x holds 2^(−tn) on every member of the class
/// `class_of(x)` picks out.
fn class_indicator_matrix(
    label: MatrixLabel,
    structure: &ClassStructure,
    members: &[Vec<u32>],
    class_of: impl Fn(u64) -> usize + Sync,
) -> Result<MomentMatrix> {
    let (t, n) = (structure.t(), structure.n());
    let nnz: u64 = members.iter().map(|m| (m.len() as u64).pow(2)).sum();
    if nnz > MAX_NONZEROS {
        return Err(Error::InstanceTooLarge(format!("{nnz} nonzeros")));
    }
    let v = Complex64::new(scale(t, n), 0.0);
    let rows = (0..structure.dim() as u64)
        .into_par_iter()
        .map(|x| members[class_of(x)].iter().map(|&c| (c, v)).collect())
        .collect();
    Ok(MomentMatrix { label, t, n, rows })
}

/// Entry 2^(−tn) exactly on permutation pairs.
pub fn rho_complex(t: u32, n: u32) -> Result<MomentMatrix> {
    check_phase_params(t, n)?;
    let s = ClassStructure::build(t, n)?;
    rho_complex_from(&s)
}

pub fn rho_complex_from(s: &ClassStructure) -> Result<MomentMatrix> {
    check_phase_params(s.t(), s.n())?;
    let members: Vec<Vec<u32>> =
        s.perm_classes().iter().map(|p| p.members.iter().map(|&m| m as u32).collect()).collect();
    class_indicator_matrix(MatrixLabel::Complex, s, &members, |x| s.perm_class_of(x))
}

/// Entry 2^(−tn) exactly on stabilization pairs.
pub fn rho_binary(t: u32, n: u32) -> Result<MomentMatrix> {
    check_phase_params(t, n)?;
    let s = ClassStructure::build(t, n)?;
    rho_binary_from(&s)
}

pub fn rho_binary_from(s: &ClassStructure) -> Result<MomentMatrix> {
    check_phase_params(s.t(), s.n())?;
    let members: Vec<Vec<u32>> = (0..s.stab_classes().len())
        .map(|sid| s.stab_members(sid).into_iter().map(|m| m as u32).collect())
        .collect();
    class_indicator_matrix(MatrixLabel::Binary, s, &members, |x| s.stab_class_of(x))
}

/// rho_binary − rho_complex; 2^(−tn) exactly on remote-stabilization pairs.
pub fn rho_diff(t: u32, n: u32) -> Result<MomentMatrix> {
    check_phase_params(t, n)?;
    let s = ClassStructure::build(t, n)?;
    rho_diff_from(&s)
}

pub fn rho_diff_from(s: &ClassStructure) -> Result<MomentMatrix> {
    let mut d = rho_binary_from(s)?.sub(&rho_complex_from(s)?)?;
    d.label = MatrixLabel::Diff;
    Ok(d)
}

/// The Haar t-th moment: Σ_π P_π / (t!·C(2^n + t − 1, t)).
pub fn rho_haar(t: u32, n: u32) -> Result<MomentMatrix> {
    check_enumerable(t, n)?;
    if t > MAX_HAAR_T {
        return Err(Error::InstanceTooLarge(format!("t = {t} > {MAX_HAAR_T} for S_t enumeration")));
    }
    let dim = 1u64 << (t * n);
    let perms: Vec<Vec<usize>> = (0..t as usize).permutations(t as usize).collect();
    let work = dim * perms.len() as u64;
    if work > MAX_NONZEROS {
        return Err(Error::InstanceTooLarge(format!("{work} permutation images")));
    }
    let norm = perms.len() as f64
        * multichoose_count(t, n).to_f64().expect("multichoose fits in f64 at enumerable sizes");
    let rows = (0..dim)
        .into_par_iter()
        .map(|x| {
            let e = decode_entries(t, n, x);
            // Σ_π P_π is symmetric, so row x counts the permutation images of x.
            let mut images: Vec<u32> = perms
                .iter()
                .map(|p| p.iter().fold(0u64, |acc, &i| (acc << n) | e[i]) as u32)
                .collect();
            images.sort_unstable();
            images
                .chunk_by(|a, b| a == b)
                .map(|g| (g[0], Complex64::new(g.len() as f64 / norm, 0.0)))
                .collect()
        })
        .collect();
    Ok(MomentMatrix { label: MatrixLabel::Haar, t, n, rows })
}

/// An exact element (1/denominator)·Σ_j coeffs[j]·ω_d^j of the d-th
/// cyclotomic field, d a power of two, in the basis {ω^j : j < d/2}
/// (for d = 2 the basis is {1}).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicValue {
    pub d: u64,
    pub coeffs: Vec<i64>,
    pub denominator: u64,
}

impl CyclotomicValue {
    /// Equality with the rational p/q, exactly.
    pub fn equals_rational(&self, p: i64, q: u64) -> bool {
        let lhs = self.coeffs[0] as i128 * q as i128;
        let rhs = p as i128 * self.denominator as i128;
        lhs == rhs && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn to_complex(&self) -> Complex64 {
        let bits = self.d.trailing_zeros();
        let s: Complex64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| root_of_unity(j as u64, bits) * c as f64)
            .sum();
        s / self.denominator as f64
    }
}

/// E_f[ω_d^(Σ f(x_i) − Σ f(y_i))] by enumerating every assignment of f on
/// the distinct strings of (x, y), returned exactly.
pub fn expectation_oracle(t: u32, n: u32, x: u64, y: u64, d: u64) -> Result<CyclotomicValue> {
    check_phase_params(t, n)?;
    if d != 2 && d != 1u64 << n {
        return Err(Error::InvalidParameters(format!("phase modulus {d} is neither 2 nor 2^n")));
    }
    let xe = decode_entries(t, n, x);
    let ye = decode_entries(t, n, y);
    let distinct: Vec<u64> = xe.iter().chain(&ye).copied().sorted_unstable().dedup().collect();
    let m = distinct.len() as u32;
    let assignments = (d as u128).pow(m);
    if assignments > MAX_ORACLE_ASSIGNMENTS as u128 {
        return Err(Error::InstanceTooLarge(format!("{d}^{m} phase assignments")));
    }
    let mask = d - 1;
    // Net exponent weight of each distinct string: (#x occurrences − #y occurrences) mod d.
    let mut weight = vec![0u64; m as usize];
    for s in &xe {
        let i = distinct.binary_search(s).unwrap();
        weight[i] = (weight[i] + 1) & mask;
    }
    for s in &ye {
        let i = distinct.binary_search(s).unwrap();
        weight[i] = weight[i].wrapping_sub(1) & mask;
    }

    let mut counts = vec![0u64; d as usize];
    let mut f = vec![0u64; m as usize];
    let mut phase = 0u64;
    for _ in 0..assignments as u64 {
        counts[phase as usize] += 1;
        // Odometer step over {0..d−1}^m. Raising a digit by one, or wrapping
        // it from d − 1 to 0, shifts the phase by that string's weight mod d.
        for (digit, &w) in f.iter_mut().zip(&weight) {
            phase = (phase + w) & mask;
            *digit += 1;
            if *digit < d {
                break;
            }
            *digit = 0;
        }
    }
    let half = (d / 2) as usize;
    let coeffs = if d == 2 {
        vec![counts[0] as i64 - counts[1] as i64]
    } else {
        (0..half).map(|j| counts[j] as i64 - counts[j + half] as i64).collect()
    };
    Ok(CyclotomicValue { d, coeffs, denominator: assignments as u64 })
}

/// The (x, y) entry 2^(−tn)·E_f[ω_d^(Σ f(x_i) − Σ f(y_i))], by brute force.
pub fn entry_oracle(t: u32, n: u32, x: u64, y: u64, d: u64) -> Result<Complex64> {
    Ok(expectation_oracle(t, n, x, y, d)?.to_complex() * scale(t, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(t: u32, n: u32, e: &[u64]) -> u64 {
        let _ = t;
        crate::combinatorics::encode_entries(n, e)
    }

    fn scaled(m: &MomentMatrix, x: u64, y: u64) -> f64 {
        m.entry(x, y).re * (1u64 << (m.t() * m.n())) as f64
    }

    #[test]
    fn complex_examples() {
        let m = rho_complex(2, 2).unwrap();
        assert!((m.trace().re - 1.0).abs() < 1e-12);
        for i in 0..16 {
            assert_eq!(m.entry(i, i).re, 1.0 / 16.0);
        }
        assert_eq!(m.entry(idx(2, 2, &[0, 1]), idx(2, 2, &[1, 0])).re, 1.0 / 16.0);
        assert_eq!(m.entry(idx(2, 2, &[0, 0]), idx(2, 2, &[1, 1])), Complex64::ZERO);
        assert!(rho_complex(4, 2).is_err());
        assert!(rho_complex(2, 1).is_err());
        assert!(rho_complex(1, 1).is_ok());
    }

    #[test]
    fn binary_and_diff_examples() {
        let b = rho_binary(2, 2).unwrap();
        let (x, y) = (idx(2, 2, &[0, 0]), idx(2, 2, &[1, 1]));
        assert_eq!(scaled(&b, x, y), 1.0);
        assert_eq!(scaled(&b, idx(2, 2, &[0, 1]), idx(2, 2, &[0, 1])), 1.0);
        assert_eq!(scaled(&b, idx(2, 2, &[0, 1]), idx(2, 2, &[0, 2])), 0.0);
        let d = rho_diff(2, 2).unwrap();
        assert_eq!(scaled(&d, x, y), 1.0);
        for i in 0..16 {
            assert_eq!(d.entry(i, i), Complex64::ZERO);
        }
        assert_eq!(rho_diff(1, 3).unwrap().nnz(), 0);
    }

    #[test]
    fn row_support_matches_class_sizes() {
        let s = ClassStructure::build(3, 2).unwrap();
        let c = rho_complex_from(&s).unwrap();
        let d = rho_diff_from(&s).unwrap();
        for x in 0..64u64 {
            let p = &s.perm_classes()[s.perm_class_of(x)];
            assert_eq!(c.rows()[x as usize].len() as u64, p.size());
            if p.is_all_distinct() {
                assert!(d.rows()[x as usize].is_empty());
            }
        }
    }

    #[test]
    fn haar_examples() {
        let h = rho_haar(1, 3).unwrap();
        for i in 0..8 {
            assert_eq!(h.rows()[i as usize], vec![(i as u32, Complex64::new(0.125, 0.0))]);
        }
        for (t, n) in [(2, 2), (3, 2), (2, 3)] {
            let h = rho_haar(t, n).unwrap();
            assert!((h.trace().re - 1.0).abs() < 1e-12);
            assert_eq!(h.hermitian_deviation(), 0.0);
        }
    }

    #[test]
    fn oracle_examples() {
        let (x, y) = (idx(2, 2, &[0, 0]), idx(2, 2, &[1, 1]));
        assert!(expectation_oracle(2, 2, x, y, 2).unwrap().equals_rational(1, 1));
        assert!(expectation_oracle(2, 2, x, y, 4).unwrap().equals_rational(0, 1));
        assert_eq!(entry_oracle(2, 2, x, y, 2).unwrap(), Complex64::new(1.0 / 16.0, 0.0));
        let (p, q) = (idx(2, 2, &[0, 1]), idx(2, 2, &[1, 0]));
        for d in [2, 4] {
            assert!(expectation_oracle(2, 2, p, q, d).unwrap().equals_rational(1, 1));
        }
        // Odd multiplicity difference: (00, 01) vs (00, 00).
        let r = idx(2, 2, &[0, 0]);
        assert!(expectation_oracle(2, 2, p, r, 2).unwrap().equals_rational(0, 1));
        assert!(expectation_oracle(2, 2, p, r, 3).is_err());
    }

    #[test]
    fn coo_csv_round_trip() {
        let m = rho_diff(2, 2).unwrap();
        let csv = m.to_coo_csv();
        assert!(csv.starts_with("dim,16\nrow,col,re,im\n"));
        let back = MomentMatrix::from_coo_csv(&csv).unwrap();
        assert_eq!(back.rows(), m.rows());
        assert!(matches!(MomentMatrix::from_coo_csv("dim,16\nrow,col,re,im\n0,1,2\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn subtraction_requires_matching_dims() {
        let a = MomentMatrix::zeros(2);
        let b = MomentMatrix::zeros(3);
        assert!(a.sub(&b).is_err());
    }
}
