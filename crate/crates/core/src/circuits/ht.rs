//! Hadamard-Toffoli circuits: one Hadamard layer followed by Toffoli gates.
//!
//! The Hadamard targets live in their own field, separate from the Toffoli
//! body, so a Hadamard after a Toffoli is unrepresentable.

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;

use super::classical::{layered_depth, ClassicalCircuit, Metrics};
use crate::error::{Error, Result};
use crate::phase_states::StateVector;

/// Largest number of Hadamard qubits [`simulate_ht`] expands.
pub const MAX_SIM_HADAMARDS: u32 = 20;

/// Tolerance for the kickback-qubit factorization check.
pub const KICKBACK_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Toffoli {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl Toffoli {
    pub fn wires(&self) -> Vec<u32> {
        vec![self.a, self.b, self.c]
    }
}

/// Qubits `0..data` form the data register and `kick` is the phase-kickback
/// qubit. Before the Hadamard layer every qubit is |0⟩ except `kick` and the
/// `const_one` qubits, which are |1⟩.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HTCircuit {
    qubits: u32,
    data: u32,
    kick: u32,
    const_one: Vec<u32>,
    hadamards: Vec<u32>,
    body: Vec<Toffoli>,
}

impl HTCircuit {
    pub fn new(
        qubits: u32,
        data: u32,
        kick: u32,
        const_one: Vec<u32>,
        hadamards: Vec<u32>,
        body: Vec<Toffoli>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidCircuit(m));
        if data == 0 || kick < data || kick >= qubits {
            return bad(format!("need data 0..{data} and kick {kick} within {qubits} qubits, kick after data"));
        }
        let mut const_one = const_one;
        const_one.sort_unstable();
        const_one.dedup();
        if let Some(&w) = const_one.iter().find(|&&w| w < data || w == kick || w >= qubits) {
            return bad(format!("constant qubit {w} overlaps data, kick, or range"));
        }
        let mut hadamards = hadamards;
        hadamards.sort_unstable();
        if hadamards.windows(2).any(|w| w[0] == w[1]) {
            return bad("repeated Hadamard target".into());
        }
        if let Some(&q) = hadamards.iter().find(|&&q| q >= data && q != kick) {
            return bad(format!("Hadamard on qubit {q} outside the data and kick qubits"));
        }
        for (i, g) in body.iter().enumerate() {
            if let Some(w) = g.wires().into_iter().find(|&w| w >= qubits) {
                return bad(format!("Toffoli {i} uses qubit {w} out of range 0..{qubits}"));
            }
            if g.c == g.a || g.c == g.b {
                return bad(format!("Toffoli {i} targets one of its controls"));
            }
            if g.a == g.b && !const_one.contains(&g.a) {
                return bad(format!("Toffoli {i} repeats control {} that is not a constant-1 qubit", g.a));
            }
        }
        Ok(Self { qubits, data, kick, const_one, hadamards, body })
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn data(&self) -> u32 {
        self.data
    }

    pub fn kick(&self) -> u32 {
        self.kick
    }

    pub fn const_one(&self) -> &[u32] {
        &self.const_one
    }

    pub fn hadamards(&self) -> &[u32] {
        &self.hadamards
    }

    pub fn body(&self) -> &[Toffoli] {
        &self.body
    }

    fn initial_bit(&self, q: u32) -> u8 {
        (q == self.kick || self.const_one.contains(&q)) as u8
    }

    /// Layered depth of the Toffoli body alone.
    pub fn body_depth(&self) -> usize {
        let targets: BTreeSet<u32> = self.body.iter().map(|g| g.c).collect();
        let had: BTreeSet<u32> = self.hadamards.iter().copied().collect();
        let ignore = |q: u32| q >= self.data && !had.contains(&q) && !targets.contains(&q);
        layered_depth(self.body.iter().map(Toffoli::wires), self.qubits, &ignore)
    }

    /// Size counts Hadamards and Toffolis; depth is the body depth plus one
    /// layer for the Hadamards.
    pub fn metrics(&self) -> Metrics {
        Metrics {
            size: self.hadamards.len() + self.body.len(),
            depth: self.body_depth() + (!self.hadamards.is_empty()) as usize,
        }
    }
}

/// Phase-kickback circuit for a single-output classical circuit `fc` on n
/// inputs. Qubit layout: data 0..n, kick n, then the ancillas of the
/// compiled `fc` shifted up by one. The body computes f, XORs it into the
/// kick qubit with a Toffoli controlled by the constant-1 qubit, then runs
/// the compiled gates in reverse so every ancilla returns to its constant.
pub fn build_gbin_circuit(fc: &ClassicalCircuit) -> Result<HTCircuit> {
    if fc.outputs().len() != 1 {
        return Err(Error::InvalidCircuit(format!("f must have one output bit, got {}", fc.outputs().len())));
    }
    let n = fc.inputs();
    if n == 0 {
        return Err(Error::InvalidCircuit("f must have at least one input".into()));
    }
    let compiled = fc.compile_to_toffoli();
    let shift = |w: u32| if w < n { w } else { w + 1 };
    let one = shift(compiled.one_wire().expect("compiled circuits carry a constant-1 wire"));
    let out = shift(compiled.outputs()[0]);
    let forward: Vec<Toffoli> = compiled
        .gates()
        .iter()
        .map(|g| {
            let w = g.wires();
            Toffoli { a: shift(w[0]), b: shift(w[1]), c: shift(w[2]) }
        })
        .collect();
    let mut body = forward.clone();
    body.push(Toffoli { a: one, b: out, c: n });
    body.extend(forward.iter().rev());
    let const_one = compiled.const_one().iter().map(|&w| shift(w)).collect();
    let hadamards = (0..=n).collect();
    HTCircuit::new(compiled.wires() + 1, n, n, const_one, hadamards, body)
}

/// Simulates the circuit over the 2^h basis states reached from the
/// Hadamard layer and returns the data-register state.
///
/// Every qubit outside the data register and the kick qubit must end in its
/// initial value; when the kick qubit is Hadamarded it must factor out as
/// |−⟩, i.e. a(x, 0) = −a(x, 1). Either failure is an
/// [`Error::EntangledAncilla`].
pub fn simulate_ht(c: &HTCircuit) -> Result<StateVector> {
    let h = c.hadamards.len() as u32;
    if h > MAX_SIM_HADAMARDS {
        return Err(Error::InstanceTooLarge(format!("{h} Hadamard qubits exceed {MAX_SIM_HADAMARDS}")));
    }
    let words = (c.qubits as usize).div_ceil(64);
    let mut init = vec![0u64; words];
    for q in 0..c.qubits {
        init[q as usize / 64] |= (c.initial_bit(q) as u64) << (q % 64);
    }
    let get = |s: &[u64], q: u32| (s[q as usize / 64] >> (q % 64)) & 1;
    let amp = (0.5f64).powf(h as f64 / 2.0);
    let kick_hadamard = c.hadamards.contains(&c.kick);

    let mut out: HashMap<(u64, u64), f64> = HashMap::new();
    let mut s = init.clone();
    for mask in 0..1u64 << h {
        s.copy_from_slice(&init);
        let mut sign = 1.0;
        for (i, &q) in c.hadamards.iter().enumerate() {
            if mask >> i & 1 == 1 {
                if get(&s, q) == 1 {
                    sign = -sign;
                }
                s[q as usize / 64] |= 1 << (q % 64);
            } else {
                s[q as usize / 64] &= !(1 << (q % 64));
            }
        }
        for g in &c.body {
            let bit = get(&s, g.a) & get(&s, g.b);
            s[g.c as usize / 64] ^= bit << (g.c % 64);
        }
        for q in c.data..c.qubits {
            if q == c.kick && kick_hadamard {
                continue;
            }
            if get(&s, q) != c.initial_bit(q) as u64 {
                return Err(Error::EntangledAncilla(format!("qubit {q} does not return to its initial value")));
            }
        }
        let x = (0..c.data).fold(0u64, |acc, q| acc | get(&s, q) << q);
        let k = if kick_hadamard { get(&s, c.kick) } else { 0 };
        *out.entry((x, k)).or_insert(0.0) += sign * amp;
    }

    let dim = 1usize << c.data;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for x in 0..dim as u64 {
        let a0 = out.get(&(x, 0)).copied().unwrap_or(0.0);
        if kick_hadamard {
            let a1 = out.get(&(x, 1)).copied().unwrap_or(0.0);
            if (a0 + a1).abs() > KICKBACK_TOLERANCE {
                return Err(Error::EntangledAncilla(format!(
                    "kick qubit is not |−⟩ on data basis state {x}: a(x,0) = {a0}, a(x,1) = {a1}"
                )));
            }
            psi[x as usize] = Complex64::new(a0 * std::f64::consts::SQRT_2, 0.0);
        } else {
            psi[x as usize] = Complex64::new(a0, 0.0);
        }
    }
    StateVector::new(psi)
}
