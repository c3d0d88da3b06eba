//! Classical circuit evaluating Σ c_i·x^i over GF(2^n).
//!
//! Input layout: x on wires 0..n (bit b on wire b), then coefficient c_i on
//! wires n + i·n .. n + (i+1)·n. Outputs are the n bits of the value.
//!
//! Each field multiplication fans its operands out by doubling CX trees,
//! forms all n² bit products in one AND layer, groups them by degree with
//! XOR trees, then reduces modulo the field polynomial with one XOR tree per
//! output bit, for depth O(log n). Power x^e with 2^(j−1) < e ≤ 2^j is the
//! product of x^(2^(j−1)) and x^(e−2^(j−1)), both available after level
//! j − 1, so the powers take ⌈log₂(k−1)⌉ multiplication levels. The k terms
//! are summed bitwise by XOR trees of depth ⌈log₂ k⌉.

use super::classical::{CircuitBuilder, ClassicalCircuit};
use crate::error::{Error, Result};
use crate::gf2n::{find_modulus, FieldModulus};

pub const MAX_CIRCUIT_N: u32 = 16;
pub const MAX_CIRCUIT_K: usize = 64;

fn field_mul(b: &mut CircuitBuilder, m: &FieldModulus, x: &[u32], y: &[u32]) -> Vec<u32> {
    let n = x.len();
    let xs: Vec<Vec<u32>> = x.iter().map(|&w| b.fan_out(w, n)).collect();
    let ys: Vec<Vec<u32>> = y.iter().map(|&w| b.fan_out(w, n)).collect();
    let mut by_degree: Vec<Vec<u32>> = vec![Vec::new(); 2 * n - 1];
    for i in 0..n {
        for j in 0..n {
            let p = b.and(xs[i][j], ys[j][i]);
            by_degree[i + j].push(p);
        }
    }
    let mut per_bit: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (d, ps) in by_degree.into_iter().enumerate() {
        let q = b.xor_tree(ps);
        let reduced = m.reduce(1u128 << d);
        let bits: Vec<usize> = (0..n).filter(|r| reduced >> r & 1 == 1).collect();
        for (r, copy) in bits.iter().zip(b.fan_out(q, bits.len())) {
            per_bit[*r].push(copy);
        }
    }
    per_bit.into_iter().map(|ws| b.xor_tree(ws)).collect()
}

/// Splits `count` copies of every bit of `elem` into `count` elements.
fn fan_out_element(b: &mut CircuitBuilder, elem: &[u32], count: usize) -> Vec<Vec<u32>> {
    let per_bit: Vec<Vec<u32>> = elem.iter().map(|&w| b.fan_out(w, count)).collect();
    (0..count).map(|u| per_bit.iter().map(|c| c[u]).collect()).collect()
}

/// Split point of exponent e ≥ 2: the largest power of two below e.
fn high_part(e: usize) -> usize {
    1 << (usize::BITS - 1 - (e - 1).leading_zeros())
}

pub fn build_kwise_circuit(n: u32, k: usize) -> Result<ClassicalCircuit> {
    if n == 0 || n > MAX_CIRCUIT_N || k == 0 || k > MAX_CIRCUIT_K {
        return Err(Error::InvalidParameters(format!(
            "k-wise circuit needs 1 ≤ n ≤ {MAX_CIRCUIT_N} and 1 ≤ k ≤ {MAX_CIRCUIT_K}, got n = {n}, k = {k}"
        )));
    }
    let m = find_modulus(n)?;
    let nu = n as usize;
    let mut b = CircuitBuilder::new(n * (k as u32 + 1));
    let x: Vec<u32> = (0..n).collect();
    let coeff = |i: usize| -> Vec<u32> { (0..n).map(|r| n + i as u32 * n + r).collect() };
    if k == 1 {
        return b.finish(coeff(0));
    }

    let mut uses = vec![0usize; k];
    for e in 2..k {
        let h = high_part(e);
        uses[h] += 1;
        uses[e - h] += 1;
    }
    for u in uses.iter_mut().skip(1) {
        *u += 1;
    }

    let mut copies: Vec<Vec<Vec<u32>>> = vec![Vec::new(); k];
    copies[1] = fan_out_element(&mut b, &x, uses[1]);
    for e in 2..k {
        let h = high_part(e);
        let hi = copies[h].pop().expect("use counted");
        let lo = copies[e - h].pop().expect("use counted");
        let p = field_mul(&mut b, &m, &hi, &lo);
        copies[e] = fan_out_element(&mut b, &p, uses[e]);
    }

    let mut terms: Vec<Vec<u32>> = vec![coeff(0).iter().map(|&w| b.copy(w)).collect()];
    for (i, c) in copies.iter_mut().enumerate().skip(1) {
        let pw = c.pop().expect("use counted");
        debug_assert!(c.is_empty());
        terms.push(field_mul(&mut b, &m, &coeff(i), &pw));
    }
    let outputs = (0..nu).map(|r| b.xor_tree(terms.iter().map(|t| t[r]).collect())).collect();
    b.finish(outputs)
}

/// Input bits for [`build_kwise_circuit`]: x, then the coefficients.
pub fn kwise_circuit_input(n: u32, x: u64, coeffs: &[u64]) -> Vec<u8> {
    std::iter::once(x)
        .chain(coeffs.iter().copied())
        .flat_map(|v| (0..n).map(move |r| ((v >> r) & 1) as u8))
        .collect()
}
