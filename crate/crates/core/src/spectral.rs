//! Spectra, trace distances, and the quantitative bounds on the binary-phase
//! ensemble.
//!
//! Moment matrices are block diagonal once their indices are grouped into
//! connected components of the sparsity graph (stabilization classes for the
//! phase ensembles, permutation classes for the Haar moment), so
//! [`hermitian_spectrum`] diagonalizes each component densely and merges the
//! eigenvalues. This keeps full spectra at dimension 4096 cheap.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{distinct_class_count, multichoose_count, ClassStructure};
use crate::error::{Error, Result};
use crate::moment::{
    rho_binary_from, rho_complex_from, rho_diff_from, rho_haar, MatrixLabel, MomentMatrix,
    MAX_DENSE_DIM,
};

/// Maximum entrywise deviation from Hermiticity accepted by the eigensolver.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Full verification runs are limited to t·n ≤ 12 (dimension 4096).
pub const VERIFY_MAX_BITS: u32 = 12;

/// Eigenvalues sorted in descending order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub dim: usize,
    pub label: MatrixLabel,
}

impl Spectrum {
    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Σ |λ| over negative eigenvalues.
    pub fn negative_mass(&self) -> f64 {
        self.eigenvalues.iter().filter(|&&v| v < 0.0).map(|v| -v).sum()
    }

    /// Count of |λ| > tol·max|λ|; zero for the zero matrix.
    pub fn rank(&self, tol: f64) -> usize {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0;
        }
        self.eigenvalues.iter().filter(|v| v.abs() > tol * scale).count()
    }
}

/// Connected components of the symmetric sparsity pattern.
fn components(m: &MomentMatrix) -> Vec<Vec<usize>> {
    let dim = m.dim();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (r, row) in m.rows().iter().enumerate() {
        for &(c, _) in row {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c as usize));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for i in 0..dim {
        let root = find(&mut parent, i);
        groups[root].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

fn block_eigenvalues(m: &MomentMatrix, block: &[usize], real: bool) -> Vec<f64> {
    let k = block.len();
    if k == 1 {
        return vec![m.entry(block[0] as u64, block[0] as u64).re];
    }
    let local = |g: usize| block.binary_search(&g).expect("component is closed");
    if real {
        let mut a = DMatrix::<f64>::zeros(k, k);
        for (i, &g) in block.iter().enumerate() {
            for &(c, v) in &m.rows()[g] {
                a[(i, local(c as usize))] = v.re;
            }
        }
        SymmetricEigen::new(a).eigenvalues.iter().copied().collect()
    } else {
        // M = A + iB is Hermitian iff [[A, −B], [B, A]] is symmetric; the
        // embedding carries every eigenvalue of M twice.
        let mut e = DMatrix::<f64>::zeros(2 * k, 2 * k);
        for (i, &g) in block.iter().enumerate() {
            for &(c, v) in &m.rows()[g] {
                let j = local(c as usize);
                e[(i, j)] = v.re;
                e[(i + k, j + k)] = v.re;
                e[(i, j + k)] = -v.im;
                e[(i + k, j)] = v.im;
            }
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(e).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev.into_iter().step_by(2).collect()
    }
}

/// Full real spectrum of a Hermitian matrix.
pub fn hermitian_spectrum(m: &MomentMatrix) -> Result<Spectrum> {
    if m.dim() > MAX_DENSE_DIM {
        return Err(Error::InstanceTooLarge(format!("spectrum of dimension {}", m.dim())));
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian(dev));
    }
    let real = m.is_real();
    let mut eigenvalues: Vec<f64> = components(m)
        .par_iter()
        .flat_map_iter(|b| block_eigenvalues(m, b, real))
        .collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(Spectrum { eigenvalues, dim: m.dim(), label: m.label() })
}

/// ½ Σ |λ_i(A − B)|.
pub fn trace_distance(a: &MomentMatrix, b: &MomentMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let s = hermitian_spectrum(&a.sub(b)?)?;
    Ok(0.5 * s.eigenvalues.iter().map(|v| v.abs()).sum::<f64>())
}

pub fn numeric_rank(m: &MomentMatrix, tol: f64) -> Result<usize> {
    Ok(hermitian_spectrum(m)?.rank(tol))
}

fn check_t_range(t: u32, n: u32) -> Result<()> {
    if t == 0 || n == 0 || (n < 64 && t as u64 >= 1u64 << n) {
        return Err(Error::InvalidParameters(format!("need 1 ≤ t ≤ 2^n − 1, got t = {t}, n = {n}")));
    }
    Ok(())
}

/// C(2^n + t − 1, t) − C(2^n, t).
pub fn rank_bound(t: u32, n: u32) -> Result<BigUint> {
    check_t_range(t, n)?;
    Ok(multichoose_count(t, n) - distinct_class_count(t, n))
}

/// −t!/2^(tn).
pub fn eigenvalue_floor(t: u32, n: u32) -> Result<f64> {
    check_t_range(t, n)?;
    let ln = (1..=t).map(|i| (i as f64).ln()).sum::<f64>() - (t as f64 * n as f64) * std::f64::consts::LN_2;
    Ok(-ln.exp())
}

fn product(t: u32, f: impl Fn(f64) -> f64) -> f64 {
    (1..t).map(|i| f(i as f64)).product()
}

/// Π_{i<t}(1 + i/2^n) − Π_{i<t}(1 − i/2^n).
pub fn th1_bound(t: u32, n: u32) -> Result<f64> {
    check_t_range(t, n)?;
    let d = (n as f64).exp2();
    Ok(product(t, |i| 1.0 + i / d) - product(t, |i| 1.0 - i / d))
}

/// Π_{i<t}(1 − i/2^n) − Π_{i<t}(1 − 2i/(2^n + i)): the exact trace distance
/// between the complex-phase and Haar t-th moments.
pub fn jls_closed_form(t: u32, n: u32) -> Result<f64> {
    check_t_range(t, n)?;
    let d = (n as f64).exp2();
    Ok(product(t, |i| 1.0 - i / d) - product(t, |i| 1.0 - 2.0 * i / (d + i)))
}

/// 4t²/2^n.
pub fn main_bound(t: u32, n: u32) -> f64 {
    4.0 * (t as f64).powi(2) / (n as f64).exp2()
}

/// A real number as sign × exp(ln_abs), so long products neither overflow
/// nor underflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignedLog {
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog { sign: 1.0, ln_abs: 0.0 };

    pub fn times(self, v: f64) -> SignedLog {
        if v == 0.0 {
            return SignedLog { sign: 0.0, ln_abs: f64::NEG_INFINITY };
        }
        SignedLog { sign: self.sign * v.signum(), ln_abs: self.ln_abs + v.abs().ln() }
    }

    pub fn powi(self, v: f64, k: u64) -> SignedLog {
        if k == 0 {
            return self;
        }
        if v == 0.0 {
            return SignedLog { sign: 0.0, ln_abs: f64::NEG_INFINITY };
        }
        let sign = if v < 0.0 && k % 2 == 1 { -self.sign } else { self.sign };
        SignedLog { sign, ln_abs: self.ln_abs + k as f64 * v.abs().ln() }
    }

    pub fn value(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    /// |a/b − 1|, or infinity when the signs differ.
    pub fn relative_error(self, other: SignedLog) -> f64 {
        if self.sign != other.sign {
            return f64::INFINITY;
        }
        if self.sign == 0.0 {
            return 0.0;
        }
        (self.ln_abs - other.ln_abs).exp_m1().abs()
    }
}

fn singular_set(s: &ClassStructure) -> Vec<f64> {
    let unit = (0.5f64).powi((s.t() * s.n()) as i32);
    let mut a: Vec<f64> = s.perm_classes().iter().map(|p| -(p.size() as f64) * unit).collect();
    a.push(0.0);
    a.sort_by(f64::total_cmp);
    a.dedup();
    a
}

/// Diagonal entry of the stabilization-class sentinel row after the
/// triangularization, for every non-trivial class.
pub fn sentinel_terms(s: &ClassStructure, lambda: f64) -> Vec<f64> {
    let unit = (0.5f64).powi((s.t() * s.n()) as i32);
    (0..s.stab_classes().len())
        .filter(|&sid| !s.stab_classes()[sid].is_trivial())
        .map(|sid| {
            let base = s.base_perm_class(sid);
            let base_weight = s.perm_classes()[base].size() as f64 * unit;
            let sum: f64 = s.stab_classes()[sid]
                .perms
                .iter()
                .filter(|&&p| p != base)
                .map(|&p| {
                    let w = s.perm_classes()[p].size() as f64 * unit;
                    w / (lambda + w)
                })
                .sum();
            -lambda + (lambda + base_weight) * sum
        })
        .collect()
}

/// det(ρ_diff − λI) from the product of the diagonal of the triangularized
/// matrix: trivial classes contribute (−λ)^|S|; each non-trivial class S
/// contributes (−λ) per non-sentinel row, (−λ − |P|/2^tn) per permutation
/// class other than the one holding the class sentinel, and the sentinel
/// term of [`sentinel_terms`].
pub fn det_product_formula_for(s: &ClassStructure, lambda: f64) -> Result<SignedLog> {
    if singular_set(s).iter().any(|a| (lambda - a).abs() <= 1e-12) {
        return Err(Error::SingularShift(lambda));
    }
    let unit = (0.5f64).powi((s.t() * s.n()) as i32);
    let mut det = SignedLog::ONE;
    let mut sentinels = sentinel_terms(s, lambda).into_iter();
    for (sid, class) in s.stab_classes().iter().enumerate() {
        if class.is_trivial() {
            det = det.powi(-lambda, class.size);
            continue;
        }
        let k = class.perms.len() as u64;
        det = det.powi(-lambda, class.size - k);
        let base = s.base_perm_class(sid);
        for &p in class.perms.iter().filter(|&&p| p != base) {
            det = det.times(-lambda - s.perm_classes()[p].size() as f64 * unit);
        }
        det = det.times(sentinels.next().expect("one sentinel term per non-trivial class"));
    }
    Ok(det)
}

pub fn det_product_formula(t: u32, n: u32, lambda: f64) -> Result<SignedLog> {
    check_t_range(t, n)?;
    det_product_formula_for(&ClassStructure::build(t, n)?, lambda)
}

/// Π (λ_i − λ) over a spectrum.
pub fn det_from_spectrum(s: &Spectrum, lambda: f64) -> SignedLog {
    s.eigenvalues.iter().fold(SignedLog::ONE, |acc, &l| acc.times(l - lambda))
}

/// Tolerances used by [`verify_all`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative threshold for counting an eigenvalue as nonzero.
    pub rank: f64,
    /// Slack on the eigenvalue floor.
    pub eig: f64,
    /// Slack on trace-distance comparisons.
    pub distance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rank: 1e-9, eig: 1e-10, distance: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, observed: f64, bound: f64, slack: f64) -> Self {
        Self { name: name.into(), observed, bound, pass: observed <= bound + slack }
    }

    fn at_least(name: &str, observed: f64, bound: f64, slack: f64) -> Self {
        Self { name: name.into(), observed, bound, pass: observed >= bound - slack }
    }

    fn equal(name: &str, observed: f64, expected: f64, tol: f64) -> Self {
        Self { name: name.into(), observed, bound: expected, pass: (observed - expected).abs() <= tol }
    }
}

/// Observed quantities for one (t, n) next to every bound they must satisfy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub t: u32,
    pub n: u32,
    pub dim: usize,
    pub observed_rank: usize,
    pub rank_bound: u64,
    pub observed_lambda_min: f64,
    pub eigenvalue_floor: f64,
    pub td_binary_complex: f64,
    pub td_complex_haar: f64,
    pub td_binary_haar: f64,
    pub th1_bound: f64,
    pub jls_closed_form: f64,
    pub main_bound: f64,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl BoundsReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub const CSV_HEADER: &'static str = "t,n,dim,rank,rank_bound,lambda_min,eigenvalue_floor,\
td_binary_complex,th1_bound,td_complex_haar,jls_closed_form,td_binary_haar,main_bound,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            self.t,
            self.n,
            self.dim,
            self.observed_rank,
            self.rank_bound,
            self.observed_lambda_min,
            self.eigenvalue_floor,
            self.td_binary_complex,
            self.th1_bound,
            self.td_complex_haar,
            self.jls_closed_form,
            self.td_binary_haar,
            self.main_bound,
            self.pass
        )
    }
}

/// Builds all four moment matrices for (t, n) and checks every bound.
pub fn verify_all(t: u32, n: u32, tol: &Tolerances) -> Result<BoundsReport> {
    check_t_range(t, n)?;
    if t as u64 * n as u64 > VERIFY_MAX_BITS as u64 {
        return Err(Error::InstanceTooLarge(format!("t·n = {} exceeds {VERIFY_MAX_BITS}", t * n)));
    }
    let s = ClassStructure::build(t, n)?;
    let binary = rho_binary_from(&s)?;
    let complex = rho_complex_from(&s)?;
    let diff = rho_diff_from(&s)?;
    let haar = rho_haar(t, n)?;

    let diff_spectrum = hermitian_spectrum(&diff)?;
    let observed_rank = diff_spectrum.rank(tol.rank);
    let observed_lambda_min = diff_spectrum.min();
    let td_binary_complex = 0.5 * diff_spectrum.eigenvalues.iter().map(|v| v.abs()).sum::<f64>();
    let td_complex_haar = trace_distance(&complex, &haar)?;
    let td_binary_haar = trace_distance(&binary, &haar)?;

    let rank_bound = rank_bound(t, n)?.to_u64().expect("rank bound fits at verification scale");
    let floor = eigenvalue_floor(t, n)?;
    let th1 = th1_bound(t, n)?;
    let jls = jls_closed_form(t, n)?;
    let main = main_bound(t, n);

    let checks = vec![
        Check::at_most("rank_bound", observed_rank as f64, rank_bound as f64, 0.0),
        Check::at_least("eigenvalue_floor", observed_lambda_min, floor, tol.eig),
        Check::equal("trace_diff_zero", diff_spectrum.sum(), 0.0, tol.distance),
        Check::equal("negative_mass", diff_spectrum.negative_mass(), td_binary_complex, tol.distance),
        Check::at_most("th1_bound", td_binary_complex, th1, tol.distance),
        Check::equal("jls_closed_form", td_complex_haar, jls, tol.distance),
        Check::at_most("triangle", td_binary_haar, td_binary_complex + td_complex_haar, tol.distance),
        Check::at_most("design_bound", td_binary_haar, main.min(th1 + jls), tol.distance),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(BoundsReport {
        t,
        n,
        dim: binary.dim(),
        observed_rank,
        rank_bound,
        observed_lambda_min,
        eigenvalue_floor: floor,
        td_binary_complex,
        td_complex_haar,
        td_binary_haar,
        th1_bound: th1,
        jls_closed_form: jls,
        main_bound: main,
        tolerances: *tol,
        checks,
        pass,
    })
}
