//! Line-oriented text formats for HT and classical circuits.
//!
//! HT circuits:
//!
//! ```text
//! QUBITS 5; CONST1 3; DATA 0..1; KICK 2
//! H 0
//! TOF 3 0 2
//! ```
//!
//! Classical circuits:
//!
//! ```text
//! WIRES 4; INPUTS 0..1; CONST1 3; OUTPUT 2
//! SIZE 1; DEPTH 1
//! AND 0 1 2
//! ```
//!
//! Tokens are whitespace-delimited and `#` starts a comment. `CONST1` takes
//! a possibly empty list of wires. The `SIZE`/`DEPTH` line is optional and,
//! when present, must match the measured metrics. Hadamard lines may not
//! follow a Toffoli line.

use std::fmt::Write as _;

use super::classical::{ClassicalCircuit, Gate, Metrics};
use super::ht::{HTCircuit, Toffoli};
use crate::error::{Error, Result};

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_u32(line: usize, tok: &str) -> Result<u32> {
    tok.parse().map_err(|_| perr(line, format!("expected a non-negative integer, found `{tok}`")))
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| perr(line, format!("expected a non-negative integer, found `{tok}`")))
}

/// `0..k` (inclusive upper end) or an empty list; returns the count.
fn parse_prefix_range(line: usize, vals: &[&str]) -> Result<u32> {
    match vals {
        [] => Ok(0),
        [r] => {
            let (lo, hi) = r.split_once("..").ok_or_else(|| perr(line, format!("expected a range 0..k, found `{r}`")))?;
            if parse_u32(line, lo)? != 0 {
                return Err(perr(line, "ranges must start at 0"));
            }
            Ok(parse_u32(line, hi)? + 1)
        }
        _ => Err(perr(line, "expected a single range")),
    }
}

/// Header fields `KEY values...` separated by `;`.
fn header_fields<'a>(line: usize, text: &'a str, keys: &[&str], optional: &[&str]) -> Result<Vec<Option<Vec<&'a str>>>> {
    let mut out: Vec<Option<Vec<&str>>> = vec![None; keys.len()];
    for field in text.split(';') {
        let mut toks = field.split_whitespace();
        let Some(key) = toks.next() else {
            return Err(perr(line, "empty header field"));
        };
        let pos = keys.iter().position(|k| *k == key).ok_or_else(|| perr(line, format!("unknown header field `{key}`")))?;
        if out[pos].is_some() {
            return Err(perr(line, format!("repeated header field `{key}`")));
        }
        out[pos] = Some(toks.collect());
    }
    for (k, v) in keys.iter().zip(&out) {
        if v.is_none() && !optional.contains(k) {
            return Err(perr(line, format!("missing header field `{k}`")));
        }
    }
    Ok(out)
}

fn single(line: usize, key: &str, vals: &[&str]) -> Result<u32> {
    match vals {
        [v] => parse_u32(line, v),
        _ => Err(perr(line, format!("`{key}` takes exactly one value"))),
    }
}

fn list(line: usize, vals: &[&str]) -> Result<Vec<u32>> {
    vals.iter().map(|v| parse_u32(line, v)).collect()
}

fn operands<const N: usize>(line: usize, name: &str, toks: &[&str]) -> Result<[u32; N]> {
    if toks.len() != N {
        return Err(perr(line, format!("`{name}` takes {N} operand(s), found {}", toks.len())));
    }
    let mut out = [0u32; N];
    for (o, t) in out.iter_mut().zip(toks) {
        *o = parse_u32(line, t)?;
    }
    Ok(out)
}

fn with_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => perr(line, other.to_string()),
    })
}

fn join(ws: &[u32]) -> String {
    ws.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn field(key: &str, vals: &str) -> String {
    if vals.is_empty() {
        key.to_string()
    } else {
        format!("{key} {vals}")
    }
}

fn range(count: u32) -> String {
    if count == 0 {
        String::new()
    } else {
        format!("0..{}", count - 1)
    }
}

pub fn parse_ht(text: &str) -> Result<HTCircuit> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing header line"))?;
    let f = header_fields(hl, header, &["QUBITS", "CONST1", "DATA", "KICK"], &[])?;
    let qubits = single(hl, "QUBITS", f[0].as_ref().unwrap())?;
    let const_one = list(hl, f[1].as_ref().unwrap())?;
    let data = parse_prefix_range(hl, f[2].as_ref().unwrap())?;
    let kick = single(hl, "KICK", f[3].as_ref().unwrap())?;

    let mut hadamards = Vec::new();
    let mut body = Vec::new();
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks[0] {
            "H" => {
                if !body.is_empty() {
                    return Err(perr(ln, "Hadamard after a Toffoli is not an HT circuit"));
                }
                let [q] = operands::<1>(ln, "H", &toks[1..])?;
                hadamards.push(q);
            }
            "TOF" => {
                let [a, b, c] = operands::<3>(ln, "TOF", &toks[1..])?;
                body.push(Toffoli { a, b, c });
            }
            other => return Err(perr(ln, format!("unknown gate `{other}`"))),
        }
    }
    with_line(hl, HTCircuit::new(qubits, data, kick, const_one, hadamards, body))
}

pub fn print_ht(c: &HTCircuit) -> String {
    let mut s = format!(
        "QUBITS {}; {}; {}; KICK {}\n",
        c.qubits(),
        field("CONST1", &join(c.const_one())),
        field("DATA", &range(c.data())),
        c.kick()
    );
    for q in c.hadamards() {
        writeln!(s, "H {q}").unwrap();
    }
    for g in c.body() {
        writeln!(s, "TOF {} {} {}", g.a, g.b, g.c).unwrap();
    }
    s
}

pub fn parse_classical(text: &str) -> Result<ClassicalCircuit> {
    let mut lines = content_lines(text).peekable();
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing header line"))?;
    let f = header_fields(hl, header, &["WIRES", "INPUTS", "CONST1", "OUTPUT"], &["CONST1"])?;
    let wires = single(hl, "WIRES", f[0].as_ref().unwrap())?;
    let inputs = parse_prefix_range(hl, f[1].as_ref().unwrap())?;
    let const_one = list(hl, f[2].as_deref().unwrap_or(&[]))?;
    let outputs = list(hl, f[3].as_ref().unwrap())?;

    let mut declared = None;
    let mut declared_line = hl;
    if let Some(&(ml, m)) = lines.peek() {
        if m.starts_with("SIZE") || m.starts_with("DEPTH") {
            let f = header_fields(ml, m, &["SIZE", "DEPTH"], &[])?;
            let size = f[0].as_ref().unwrap();
            let depth = f[1].as_ref().unwrap();
            let one = |v: &[&str], key| match v {
                [x] => parse_usize(ml, x),
                _ => Err(perr(ml, format!("`{key}` takes exactly one value"))),
            };
            declared = Some(Metrics { size: one(size, "SIZE")?, depth: one(depth, "DEPTH")? });
            declared_line = ml;
            lines.next();
        }
    }

    let mut gates = Vec::new();
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let ops = &toks[1..];
        let g = match toks[0] {
            "NOT" => Gate::Not(operands::<1>(ln, "NOT", ops)?[0]),
            "CX" => {
                let [a, b] = operands::<2>(ln, "CX", ops)?;
                Gate::Cx(a, b)
            }
            "AND" => {
                let [a, b, c] = operands::<3>(ln, "AND", ops)?;
                Gate::And(a, b, c)
            }
            "TOF" => {
                let [a, b, c] = operands::<3>(ln, "TOF", ops)?;
                Gate::Tof(a, b, c)
            }
            other => return Err(perr(ln, format!("unknown gate `{other}`"))),
        };
        gates.push(g);
    }
    let structure = ClassicalCircuit::new(wires, inputs, const_one, outputs, gates, None);
    let c = with_line(hl, structure)?;
    match declared {
        Some(d) => with_line(
            declared_line,
            ClassicalCircuit::new(c.wires(), c.inputs(), c.const_one().to_vec(), c.outputs().to_vec(), c.gates().to_vec(), Some(d)),
        ),
        None => Ok(c),
    }
}

/// Prints the header, the measured `SIZE`/`DEPTH` line, and the gates.
pub fn print_classical(c: &ClassicalCircuit) -> String {
    let m = c.metrics();
    let mut s = format!(
        "WIRES {}; {}; {}; OUTPUT {}\nSIZE {}; DEPTH {}\n",
        c.wires(),
        field("INPUTS", &range(c.inputs())),
        field("CONST1", &join(c.const_one())),
        join(c.outputs()),
        m.size,
        m.depth
    );
    for g in c.gates() {
        writeln!(s, "{} {}", g.mnemonic(), join(&g.wires())).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::ht::build_gbin_circuit;

    #[test]
    fn ht_round_trip() {
        let fc = ClassicalCircuit::from_truth_table(2, &[0, 0, 0, 1]).unwrap();
        let ht = build_gbin_circuit(&fc).unwrap();
        let text = print_ht(&ht);
        assert!(text.starts_with("QUBITS 5; CONST1 4; DATA 0..1; KICK 2\nH 0\nH 1\nH 2\nTOF "));
        let back = parse_ht(&text).unwrap();
        assert_eq!(back, ht);
        assert_eq!(print_ht(&back), text);
    }

    #[test]
    fn ht_parse_tolerates_whitespace_and_comments() {
        let text = "# phase kickback\n  QUBITS 4 ;CONST1 3;DATA 0..1 ; KICK 2\n\nH 0 # data\nH   1\nH 2\nTOF 3 0 2\n";
        let c = parse_ht(text).unwrap();
        assert_eq!(c.hadamards(), &[0, 1, 2]);
        assert_eq!(print_ht(&c), "QUBITS 4; CONST1 3; DATA 0..1; KICK 2\nH 0\nH 1\nH 2\nTOF 3 0 2\n");
    }

    #[test]
    fn ht_parse_errors_carry_lines() {
        let late = "QUBITS 4; CONST1 3; DATA 0..1; KICK 2\nH 0\nTOF 3 0 2\nH 1\n";
        assert!(matches!(parse_ht(late), Err(Error::Parse { line: 4, .. })));
        let bad_gate = "QUBITS 4; CONST1 3; DATA 0..1; KICK 2\nCNOT 0 1\n";
        assert!(matches!(parse_ht(bad_gate), Err(Error::Parse { line: 2, .. })));
        let bad_arity = "QUBITS 4; CONST1 3; DATA 0..1; KICK 2\n\nTOF 3 0\n";
        assert!(matches!(parse_ht(bad_arity), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_ht("QUBITS 4; DATA 0..1; KICK 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_ht("QUBITS 4; CONST1; DATA 1..2; KICK 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_ht("QUBITS 3; CONST1; DATA 0..1; KICK 2\nTOF 0 1 7\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_ht(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn classical_round_trip() {
        let c = ClassicalCircuit::from_truth_table(3, &[0, 1, 1, 0, 1, 0, 0, 1]).unwrap();
        let text = print_classical(&c);
        let back = parse_classical(&text).unwrap();
        assert_eq!(back.gates(), c.gates());
        assert_eq!(print_classical(&back), text);
        let t = c.compile_to_toffoli();
        assert_eq!(print_classical(&parse_classical(&print_classical(&t)).unwrap()), print_classical(&t));
    }

    #[test]
    fn classical_parse_examples() {
        let text = "WIRES 4; INPUTS 0..1; CONST1 3; OUTPUT 2\nNOT 0\nAND 0 1 2\nNOT 0\n";
        let c = parse_classical(text).unwrap();
        assert_eq!(c.truth_table().unwrap(), vec![0, 0, 1, 0]);
        let declared = "WIRES 3; INPUTS 0..1; OUTPUT 2\nSIZE 1; DEPTH 1\nAND 0 1 2\n";
        assert!(parse_classical(declared).is_ok());
        let wrong = "WIRES 3; INPUTS 0..1; OUTPUT 2\nSIZE 1; DEPTH 2\nAND 0 1 2\n";
        assert!(matches!(parse_classical(wrong), Err(Error::Parse { line: 2, .. })));
        let stale = "WIRES 3; INPUTS 0..1; OUTPUT 2\nAND 0 1 2\nAND 0 1 2\n";
        assert!(matches!(parse_classical(stale), Err(Error::Parse { line: 1, .. })));
        let junk = "WIRES 3; INPUTS 0..1; OUTPUT 2\nAND 0 x 2\n";
        assert!(matches!(parse_classical(junk), Err(Error::Parse { line: 2, .. })));
    }
}
