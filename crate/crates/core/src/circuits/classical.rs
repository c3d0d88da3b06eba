//! Classical reversible-friendly circuits over {NOT, CX, AND, TOF}.
//!
//! Wires `0..inputs` carry the input bits (bit i of the input word on wire i).
//! Every other wire is an ancilla that starts at 0, or at 1 when listed in
//! `const_one`. Ancillas that no gate ever targets are read-only constants;
//! they are excluded from depth layering because sharing a read-only wire
//! between gates of one layer does not serialize them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// One gate. Wire order is (controls..., target).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Not(u32),
    /// `Cx(a, b)`: b ^= a.
    Cx(u32, u32),
    /// `And(a, b, c)`: c = a ∧ b, where c is a fresh 0-ancilla.
    And(u32, u32, u32),
    /// `Tof(a, b, c)`: c ^= a ∧ b.
    Tof(u32, u32, u32),
}

impl Gate {
    pub fn target(&self) -> u32 {
        match *self {
            Gate::Not(w) => w,
            Gate::Cx(_, b) => b,
            Gate::And(_, _, c) | Gate::Tof(_, _, c) => c,
        }
    }

    pub fn controls(&self) -> Vec<u32> {
        match *self {
            Gate::Not(_) => vec![],
            Gate::Cx(a, _) => vec![a],
            Gate::And(a, b, _) | Gate::Tof(a, b, _) => vec![a, b],
        }
    }

    pub fn wires(&self) -> Vec<u32> {
        let mut w = self.controls();
        w.push(self.target());
        w
    }

    pub fn mnemonic(&self) -> &'static str {
        match self {
            Gate::Not(_) => "NOT",
            Gate::Cx(..) => "CX",
            Gate::And(..) => "AND",
            Gate::Tof(..) => "TOF",
        }
    }

    pub fn apply(&self, state: &mut [u8]) {
        match *self {
            Gate::Not(w) => state[w as usize] ^= 1,
            Gate::Cx(a, b) => state[b as usize] ^= state[a as usize],
            Gate::And(a, b, c) | Gate::Tof(a, b, c) => {
                state[c as usize] ^= state[a as usize] & state[b as usize]
            }
        }
    }

    pub fn remap(&self, f: impl Fn(u32) -> u32) -> Gate {
        match *self {
            Gate::Not(w) => Gate::Not(f(w)),
            Gate::Cx(a, b) => Gate::Cx(f(a), f(b)),
            Gate::And(a, b, c) => Gate::And(f(a), f(b), f(c)),
            Gate::Tof(a, b, c) => Gate::Tof(f(a), f(b), f(c)),
        }
    }
}

/// Size and layered depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Metrics {
    pub size: usize,
    pub depth: usize,
}

/// Greedy earliest-layer assignment. Wires in `ignore` never conflict.
pub fn layered_depth(
    wire_sets: impl IntoIterator<Item = Vec<u32>>,
    wires: u32,
    ignore: &dyn Fn(u32) -> bool,
) -> usize {
    let mut level = vec![0usize; wires as usize];
    let mut depth = 0;
    for ws in wire_sets {
        let active: Vec<u32> = ws.into_iter().filter(|&w| !ignore(w)).collect();
        let layer = 1 + active.iter().map(|&w| level[w as usize]).max().unwrap_or(0);
        for w in active {
            level[w as usize] = layer;
        }
        depth = depth.max(layer);
    }
    depth
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalCircuit {
    wires: u32,
    inputs: u32,
    const_one: Vec<u32>,
    outputs: Vec<u32>,
    gates: Vec<Gate>,
    declared: Option<Metrics>,
}

impl ClassicalCircuit {
    /// Checks wire ranges, AND freshness and, when given, the declared
    /// metrics against the measured ones.
    pub fn new(
        wires: u32,
        inputs: u32,
        const_one: Vec<u32>,
        outputs: Vec<u32>,
        gates: Vec<Gate>,
        declared: Option<Metrics>,
    ) -> Result<Self> {
        let mut const_one = const_one;
        const_one.sort_unstable();
        const_one.dedup();
        let c = Self { wires, inputs, const_one, outputs, gates, declared: None };
        c.validate()?;
        if let Some(d) = declared {
            let m = c.metrics();
            if m != d {
                return Err(Error::InvalidCircuit(format!(
                    "declared size {} depth {} but measured size {} depth {}",
                    d.size, d.depth, m.size, m.depth
                )));
            }
        }
        Ok(Self { declared, ..c })
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCircuit(msg));
        if self.inputs > self.wires {
            return bad(format!("{} inputs on {} wires", self.inputs, self.wires));
        }
        for &w in self.const_one.iter().chain(&self.outputs) {
            if w >= self.wires {
                return bad(format!("wire {w} out of range 0..{}", self.wires));
            }
        }
        if let Some(&w) = self.const_one.iter().find(|&&w| w < self.inputs) {
            return bad(format!("input wire {w} cannot be a constant"));
        }
        let targets: BTreeSet<u32> = self.gates.iter().map(Gate::target).collect();
        let mut touched = BTreeSet::new();
        for (i, g) in self.gates.iter().enumerate() {
            if let Some(&w) = g.wires().iter().find(|&&w| w >= self.wires) {
                return bad(format!("gate {i} uses wire {w} out of range 0..{}", self.wires));
            }
            if g.controls().contains(&g.target()) {
                return bad(format!("gate {i} ({}) targets one of its controls", g.mnemonic()));
            }
            if let Gate::Tof(a, b, _) = *g {
                if a == b && (!self.const_one.contains(&a) || targets.contains(&a)) {
                    return bad(format!("gate {i} (TOF) repeats control {a}, which is not a fixed constant-1 wire"));
                }
            }
            if let Gate::And(a, b, c) = *g {
                if a == b {
                    return bad(format!("gate {i} (AND) has equal controls"));
                }
                if c < self.inputs || self.const_one.contains(&c) || touched.contains(&c) {
                    return bad(format!("gate {i} (AND) target {c} is not a fresh 0-ancilla"));
                }
            }
            touched.extend(g.wires());
        }
        Ok(())
    }

    pub fn wires(&self) -> u32 {
        self.wires
    }

    pub fn inputs(&self) -> u32 {
        self.inputs
    }

    pub fn const_one(&self) -> &[u32] {
        &self.const_one
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn declared(&self) -> Option<Metrics> {
        self.declared
    }

    pub fn is_toffoli_only(&self) -> bool {
        self.gates.iter().all(|g| matches!(g, Gate::Tof(..)))
    }

    /// Ancilla wires that no gate targets.
    pub fn read_only_constants(&self) -> BTreeSet<u32> {
        let targets: BTreeSet<u32> = self.gates.iter().map(Gate::target).collect();
        (self.inputs..self.wires).filter(|w| !targets.contains(w)).collect()
    }

    pub fn metrics(&self) -> Metrics {
        let ro = self.read_only_constants();
        let ignore = |w: u32| ro.contains(&w);
        Metrics {
            size: self.gates.len(),
            depth: layered_depth(self.gates.iter().map(Gate::wires), self.wires, &ignore),
        }
    }

    /// Replaces the output designation.
    pub fn with_outputs(&self, outputs: Vec<u32>) -> Result<Self> {
        Self::new(self.wires, self.inputs, self.const_one.clone(), outputs, self.gates.clone(), None)
    }

    /// Initial wire values for the given input bits.
    pub fn initial_state(&self, input: &[u8]) -> Result<Vec<u8>> {
        if input.len() != self.inputs as usize {
            return Err(Error::InvalidParameters(format!(
                "circuit takes {} input bits, got {}",
                self.inputs,
                input.len()
            )));
        }
        let mut s = vec![0u8; self.wires as usize];
        for (w, &b) in input.iter().enumerate() {
            s[w] = b & 1;
        }
        for &w in &self.const_one {
            s[w as usize] = 1;
        }
        Ok(s)
    }

    /// Runs every gate and returns the final values of all wires.
    pub fn run(&self, input: &[u8]) -> Result<Vec<u8>> {
        let mut s = self.initial_state(input)?;
        for g in &self.gates {
            g.apply(&mut s);
        }
        Ok(s)
    }

    /// Output bits in designation order.
    pub fn evaluate_bits(&self, input: &[u8]) -> Result<Vec<u8>> {
        let s = self.run(input)?;
        Ok(self.outputs.iter().map(|&w| s[w as usize]).collect())
    }

    /// Word-level evaluation: input bit i is bit i of `x`, output j is bit j
    /// of the result.
    pub fn evaluate(&self, x: u64) -> Result<u64> {
        if self.inputs > 64 || self.outputs.len() > 64 {
            return Err(Error::InvalidParameters("word evaluation needs ≤ 64 inputs and outputs".into()));
        }
        if self.inputs < 64 && x >> self.inputs != 0 {
            return Err(Error::OutOfRange { value: x, width: self.inputs });
        }
        let bits: Vec<u8> = (0..self.inputs).map(|i| ((x >> i) & 1) as u8).collect();
        let out = self.evaluate_bits(&bits)?;
        Ok(out.iter().enumerate().fold(0, |acc, (j, &b)| acc | (b as u64) << j))
    }

    /// Truth table of a single-output circuit.
    pub fn truth_table(&self) -> Result<Vec<u64>> {
        if self.outputs.len() != 1 || self.inputs > 26 {
            return Err(Error::InvalidParameters("truth table needs one output and ≤ 26 inputs".into()));
        }
        (0..1u64 << self.inputs).map(|x| self.evaluate(x)).collect()
    }

    /// Turns the last `values.len()` inputs into constant ancillas holding
    /// the given bits.
    pub fn bind_trailing_inputs(&self, values: &[u8]) -> Result<Self> {
        let m = values.len() as u32;
        if m > self.inputs {
            return Err(Error::InvalidParameters(format!("cannot bind {m} of {} inputs", self.inputs)));
        }
        let first = self.inputs - m;
        let mut const_one = self.const_one.clone();
        const_one.extend(values.iter().enumerate().filter(|(_, &v)| v & 1 == 1).map(|(i, _)| first + i as u32));
        Self::new(self.wires, first, const_one, self.outputs.clone(), self.gates.clone(), None)
    }

    /// Equivalent Toffoli-only circuit: NOT w becomes TOF(one, one, w),
    /// CX a b becomes TOF(one, a, b), AND becomes TOF into the same fresh
    /// ancilla. A single shared constant-1 wire is appended when the circuit
    /// has no untargeted one.
    pub fn compile_to_toffoli(&self) -> Self {
        let (one, wires, mut const_one) = match self.one_wire() {
            Some(w) => (w, self.wires, self.const_one.clone()),
            None => (self.wires, self.wires + 1, vec![self.wires]),
        };
        const_one.sort_unstable();
        let gates = self
            .gates
            .iter()
            .map(|g| match *g {
                Gate::Not(w) => Gate::Tof(one, one, w),
                Gate::Cx(a, b) => Gate::Tof(one, a, b),
                Gate::And(a, b, c) | Gate::Tof(a, b, c) => Gate::Tof(a, b, c),
            })
            .collect();
        Self { wires, inputs: self.inputs, const_one, outputs: self.outputs.clone(), gates, declared: None }
    }

    /// First constant-1 wire that no gate targets.
    pub fn one_wire(&self) -> Option<u32> {
        self.const_one.iter().copied().find(|w| self.gates.iter().all(|g| g.target() != *w))
    }

    /// Single-output circuit for a truth table via its algebraic normal form.
    /// Each monomial of degree ≥ 3 accumulates through a chain of fresh AND
    /// ancillas and is XORed into the output wire (wire n) by a Toffoli.
    pub fn from_truth_table(n: u32, table: &[u64]) -> Result<Self> {
        if n > 20 || table.len() != 1usize << n {
            return Err(Error::InvalidParameters(format!(
                "truth table for n = {n} needs {} entries, got {}",
                1u64 << n.min(63),
                table.len()
            )));
        }
        if let Some(&v) = table.iter().find(|&&v| v > 1) {
            return Err(Error::OutOfRange { value: v, width: 1 });
        }
        let anf = anf_coefficients(table);
        let out = n;
        let mut b = CircuitBuilder::new(n);
        let out_wire = b.fresh();
        debug_assert_eq!(out_wire, out);
        for (mono, _) in anf.iter().enumerate().filter(|(_, &c)| c == 1) {
            let vars: Vec<u32> = (0..n).filter(|i| mono >> i & 1 == 1).collect();
            match vars.len() {
                0 => b.push(Gate::Not(out)),
                1 => b.push(Gate::Cx(vars[0], out)),
                _ => {
                    let mut acc = vars[0];
                    for &v in &vars[1..vars.len() - 1] {
                        acc = b.and(acc, v);
                    }
                    b.push(Gate::Tof(acc, vars[vars.len() - 1], out));
                }
            }
        }
        b.finish(vec![out])
    }
}

/// Möbius transform over GF(2): coefficient of monomial Π_{i∈S} x_i at index S.
pub fn anf_coefficients(table: &[u64]) -> Vec<u64> {
    let mut a: Vec<u64> = table.iter().map(|v| v & 1).collect();
    let mut step = 1;
    while step < a.len() {
        for i in 0..a.len() {
            if i & step != 0 {
                a[i] ^= a[i ^ step];
            }
        }
        step <<= 1;
    }
    a
}

/// Incremental construction with fresh-wire allocation.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    wires: u32,
    inputs: u32,
    const_one: Vec<u32>,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new(inputs: u32) -> Self {
        Self { wires: inputs, inputs, const_one: vec![], gates: vec![] }
    }

    pub fn fresh(&mut self) -> u32 {
        self.wires += 1;
        self.wires - 1
    }

    pub fn fresh_one(&mut self) -> u32 {
        let w = self.fresh();
        self.const_one.push(w);
        w
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    /// Fresh ancilla holding a ∧ b.
    pub fn and(&mut self, a: u32, b: u32) -> u32 {
        let c = self.fresh();
        self.push(Gate::And(a, b, c));
        c
    }

    /// Fresh ancilla holding a copy of `a`.
    pub fn copy(&mut self, a: u32) -> u32 {
        let c = self.fresh();
        self.push(Gate::Cx(a, c));
        c
    }

    /// `count` wires holding the value of `w` (including `w` itself), built
    /// by a doubling tree of depth ⌈log₂ count⌉.
    pub fn fan_out(&mut self, w: u32, count: usize) -> Vec<u32> {
        let mut copies = vec![w];
        while copies.len() < count {
            let have = copies.len();
            for i in 0..have.min(count - have) {
                let c = self.copy(copies[i]);
                copies.push(c);
            }
        }
        copies
    }

    /// XOR of the given owned wires, accumulated in place by a balanced tree.
    /// Returns a fresh 0 wire when the list is empty.
    pub fn xor_tree(&mut self, mut ws: Vec<u32>) -> u32 {
        if ws.is_empty() {
            return self.fresh();
        }
        while ws.len() > 1 {
            let mut next = Vec::with_capacity(ws.len().div_ceil(2));
            for pair in ws.chunks(2) {
                if let [a, b] = *pair {
                    self.push(Gate::Cx(b, a));
                }
                next.push(pair[0]);
            }
            ws = next;
        }
        ws[0]
    }

    pub fn finish(self, outputs: Vec<u32>) -> Result<ClassicalCircuit> {
        ClassicalCircuit::new(self.wires, self.inputs, self.const_one, outputs, self.gates, None)
    }
}
