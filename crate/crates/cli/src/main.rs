//! `binphase`: phase-state generation, moment-matrix verification, class
//! enumeration and circuit tooling.
//!
//! Exit codes: 0 on success, 1 when a verification assertion fails, 2 on
//! usage, parse, or input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use binphase::circuits::{
    build_gbin_circuit, build_kwise_circuit, parse_classical, parse_ht, print_classical, print_ht, simulate_ht,
    ClassicalCircuit,
};
use binphase::combinatorics::{
    distinct_class_count, multichoose_count, ClassDescriptor, ClassKind, ClassStructure, ZeroRows,
};
use binphase::kwise::{sample_key, KWiseKey};
use binphase::moment::{rho_binary, rho_complex, rho_diff, rho_haar};
use binphase::phase_states::{gen_binary_phase, gen_complex_phase, PhaseFunction};
use binphase::spectral::{verify_all, BoundsReport, Tolerances, VERIFY_MAX_BITS};
use binphase::Error;
use num_bigint::BigUint;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "binphase", version, about = "Binary phase states: generation, moment verification, circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a phase state vector as CSV (index,re,im).
    GenState(GenStateArgs),
    /// Build the moment matrices for each (t, n) and check every bound.
    Verify(VerifyArgs),
    /// Enumerate permutation or stabilization classes as JSON.
    Classes(ClassesArgs),
    /// Circuit compilation, phase-kickback synthesis, simulation and metrics.
    Circuit(CircuitArgs),
    /// Dump a moment matrix in coordinate CSV form.
    Matrix(MatrixArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Phase {
    Binary,
    Complex,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Permutation,
    Stabilization,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MatrixKind {
    Binary,
    Complex,
    Diff,
    Haar,
}

#[derive(Args, Debug)]
struct GenStateArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, value_enum, default_value = "binary")]
    phase: Phase,
    /// Phase table file: 2^n whitespace- or comma-separated integers, `#` comments.
    #[arg(long, conflicts_with_all = ["k", "key"])]
    table: Option<PathBuf>,
    /// Independence parameter of the sampled k-wise key.
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use this key (JSON) instead of sampling one.
    #[arg(long)]
    key: Option<PathBuf>,
    /// Also write the key that was used.
    #[arg(long)]
    key_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// One or more values, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u32>,
    /// One or more values, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<u32>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Relative eigenvalue threshold for the numeric rank.
    #[arg(long)]
    tol_rank: Option<f64>,
    /// Slack on the eigenvalue floor.
    #[arg(long)]
    tol_eig: Option<f64>,
    /// Slack on trace-distance comparisons. Negative values tighten checks.
    #[arg(long, allow_negative_numbers = true)]
    tol_td: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassesArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    t: u32,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CircuitArgs {
    #[command(subcommand)]
    action: CircuitAction,
}

#[derive(Subcommand, Debug)]
enum CircuitAction {
    /// Rewrite a classical circuit with Toffoli gates only.
    Compile {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase-kickback HT circuit for a single-output classical circuit or a truth table.
    Gbin {
        #[arg(long, conflicts_with = "table")]
        input: Option<PathBuf>,
        #[arg(long, requires = "n")]
        table: Option<PathBuf>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate an HT circuit and write the data-register state as CSV.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Circuit for Σ c_i·x^i over GF(2^n); prints metrics JSON.
    KwiseCircuit {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: usize,
        /// Fix the coefficients to this key (JSON) so x is the only input.
        #[arg(long)]
        key: Option<PathBuf>,
        /// Keep only the least significant output bit.
        #[arg(long)]
        bit: bool,
        /// Write the circuit text here.
        #[arg(long)]
        circuit_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size and depth of a classical or HT circuit file as JSON.
    Metrics {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    t: u32,
    #[arg(long, value_enum)]
    kind: MatrixKind,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn assertion(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EntangledAncilla(_) | Error::NotHermitian(_) => Failure::assertion(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::usage(e.to_string()))
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Integers separated by whitespace or commas; `#` starts a comment.
fn parse_table(text: &str) -> Result<Vec<u64>, Failure> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for tok in body.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v = tok.parse().map_err(|_| Failure::from(Error::Parse {
                line: i + 1,
                message: format!("expected a non-negative integer, found `{tok}`"),
            }))?;
            out.push(v);
        }
    }
    Ok(out)
}

fn check_table_len(n: u32, table: &[u64]) -> CliResult {
    if n == 0 || n > 26 || table.len() != 1usize << n {
        return Err(Failure::usage(format!("table has {} entries, expected 2^{n}", table.len())));
    }
    Ok(())
}

fn gen_state(a: &GenStateArgs) -> CliResult {
    let modulus = match a.phase {
        Phase::Binary => 2,
        Phase::Complex => {
            if a.n > 26 {
                return Err(Failure::usage(format!("n = {} is too large for a state vector", a.n)));
            }
            1u64 << a.n
        }
    };
    let table = if let Some(path) = &a.table {
        let t = parse_table(&read(path)?)?;
        check_table_len(a.n, &t)?;
        t
    } else {
        let key = match &a.key {
            Some(p) => KWiseKey::from_json(&read(p)?)?,
            None => sample_key(a.n, a.k, a.seed)?,
        };
        if key.n != a.n {
            return Err(Failure::usage(format!("key is for n = {}, not {}", key.n, a.n)));
        }
        if a.n > 26 {
            return Err(Failure::usage(format!("n = {} is too large for a state vector", a.n)));
        }
        if let Some(p) = &a.key_out {
            emit(Some(p), &(key.to_json() + "\n"))?;
        }
        let f = key.function()?;
        match a.phase {
            Phase::Binary => f.bit_table(),
            Phase::Complex => f.full_table(),
        }
    };
    let f = PhaseFunction::new(table, modulus)?;
    let state = match a.phase {
        Phase::Binary => gen_binary_phase(&f)?,
        Phase::Complex => gen_complex_phase(&f)?,
    };
    eprintln!("norm^2 = {:.17}, real = {}", state.norm_sqr(), state.is_real());
    emit(a.out.as_deref(), &state.to_csv())
}

fn verify(a: &VerifyArgs) -> CliResult {
    let mut tol = Tolerances::default();
    for (v, slot) in [(a.tol_rank, &mut tol.rank), (a.tol_eig, &mut tol.eig), (a.tol_td, &mut tol.distance)] {
        if let Some(v) = v {
            if !v.is_finite() {
                return Err(Failure::usage(format!("tolerance {v} must be finite")));
            }
            *slot = v;
        }
    }
    let mut pairs = Vec::new();
    for &t in &a.t {
        for &n in &a.n {
            if t == 0 || n == 0 || n >= 64 || t as u64 >= 1u64 << n {
                return Err(Failure::usage(format!("(t={t}, n={n}): need 1 ≤ t < 2^n")));
            }
            if t as u64 * n as u64 > VERIFY_MAX_BITS as u64 {
                return Err(Failure::usage(format!("(t={t}, n={n}): t·n must be at most {VERIFY_MAX_BITS}")));
            }
            pairs.push((t, n));
        }
    }
    let reports: Vec<BoundsReport> =
        pairs.par_iter().map(|&(t, n)| verify_all(t, n, &tol)).collect::<Result<_, _>>()?;
    let text = match a.format {
        Format::Json if reports.len() == 1 => to_json(&reports[0]),
        Format::Json => to_json(&reports),
        Format::Csv => {
            let mut s = String::from(BoundsReport::CSV_HEADER);
            s.push('\n');
            for r in &reports {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
    };
    emit(a.out.as_deref(), &text)?;
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failures().map(move |c| format!("(t={}, n={}) {}: observed {:e}, bound {:e}", r.t, r.n, c.name, c.observed, c.bound)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::assertion(format!("failed checks:\n  {}", failed.join("\n  "))))
    }
}

#[derive(Serialize)]
struct ClassesReport {
    t: u32,
    n: u32,
    kind: ClassKind,
    count: usize,
    total_size: u64,
    permutation_classes: String,
    all_distinct_classes: String,
    zero_rows: ZeroRows,
    extra_zero_rows: u64,
    classes: Vec<ClassDescriptor>,
}

fn classes(a: &ClassesArgs) -> CliResult {
    let s = ClassStructure::build(a.t, a.n)?;
    let (kind, classes) = match a.kind {
        Kind::Permutation => (ClassKind::Permutation, s.permutation_descriptors()),
        Kind::Stabilization => (ClassKind::Stabilization, s.stabilization_descriptors()),
    };
    let total_size: u64 = classes.iter().map(|c| c.size).sum();
    let multichoose = multichoose_count(a.t, a.n);
    let distinct = distinct_class_count(a.t, a.n);
    let zero_rows = s.zero_rows();
    let report = ClassesReport {
        t: a.t,
        n: a.n,
        kind,
        count: classes.len(),
        total_size,
        permutation_classes: multichoose.to_string(),
        all_distinct_classes: distinct.to_string(),
        zero_rows,
        extra_zero_rows: zero_rows.extra(),
        classes,
    };
    emit(a.out.as_deref(), &to_json(&report))?;
    let perm_count = s.perm_classes().len();
    let distinct_found = s.perm_classes().iter().filter(|p| p.is_all_distinct()).count();
    let mut problems = Vec::new();
    if total_size != 1u64 << (a.t * a.n) {
        problems.push(format!("class sizes sum to {total_size}, not 2^{}", a.t * a.n));
    }
    if multichoose != perm_count.into() {
        problems.push(format!("{perm_count} permutation classes, expected {multichoose}"));
    }
    if distinct != distinct_found.into() {
        problems.push(format!("{distinct_found} all-distinct classes, expected {distinct}"));
    }
    let guaranteed = &distinct * (1..=a.t as u64).product::<u64>();
    if BigUint::from(zero_rows.total) < guaranteed {
        problems.push(format!("{} zero rows of the difference, expected at least {guaranteed}", zero_rows.total));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::assertion(problems.join("; ")))
    }
}

#[derive(Serialize)]
struct KwiseCircuitReport {
    n: u32,
    k: usize,
    inputs: u32,
    outputs: usize,
    wires: u32,
    size: usize,
    depth: usize,
}

fn is_ht_text(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with("QUBITS"))
}

fn circuit(a: &CircuitAction) -> CliResult {
    match a {
        CircuitAction::Compile { input, out } => {
            let c = parse_classical(&read(input)?)?;
            emit(out.as_deref(), &print_classical(&c.compile_to_toffoli()))
        }
        CircuitAction::Gbin { input, table, n, out } => {
            let fc = match (input, table) {
                (Some(p), None) => parse_classical(&read(p)?)?,
                (None, Some(p)) => {
                    let n = n.expect("clap enforces --n with --table");
                    let t = parse_table(&read(p)?)?;
                    check_table_len(n, &t)?;
                    ClassicalCircuit::from_truth_table(n, &t)?
                }
                _ => return Err(Failure::usage("give either --input or --table")),
            };
            emit(out.as_deref(), &print_ht(&build_gbin_circuit(&fc)?))
        }
        CircuitAction::Simulate { input, out } => {
            let c = parse_ht(&read(input)?)?;
            emit(out.as_deref(), &simulate_ht(&c)?.to_csv())
        }
        CircuitAction::KwiseCircuit { n, k, key, bit, circuit_out, out } => {
            let mut c = build_kwise_circuit(*n, *k)?;
            if let Some(p) = key {
                let key = KWiseKey::from_json(&read(p)?)?;
                if key.n != *n || key.k != *k {
                    return Err(Failure::usage(format!("key has n = {}, k = {}", key.n, key.k)));
                }
                let bits: Vec<u8> =
                    key.coeffs.iter().flat_map(|&c| (0..*n).map(move |r| ((c >> r) & 1) as u8)).collect();
                c = c.bind_trailing_inputs(&bits)?;
            }
            if *bit {
                c = c.with_outputs(vec![c.outputs()[0]])?;
            }
            if let Some(p) = circuit_out {
                emit(Some(p), &print_classical(&c))?;
            }
            let m = c.metrics();
            let report = KwiseCircuitReport {
                n: *n,
                k: *k,
                inputs: c.inputs(),
                outputs: c.outputs().len(),
                wires: c.wires(),
                size: m.size,
                depth: m.depth,
            };
            emit(out.as_deref(), &to_json(&report))
        }
        CircuitAction::Metrics { input } => {
            let text = read(input)?;
            let m = if is_ht_text(&text) { parse_ht(&text)?.metrics() } else { parse_classical(&text)?.metrics() };
            emit(None, &to_json(&m))
        }
    }
}

fn matrix(a: &MatrixArgs) -> CliResult {
    let m = match a.kind {
        MatrixKind::Binary => rho_binary(a.t, a.n)?,
        MatrixKind::Complex => rho_complex(a.t, a.n)?,
        MatrixKind::Diff => rho_diff(a.t, a.n)?,
        MatrixKind::Haar => rho_haar(a.t, a.n)?,
    };
    emit(a.out.as_deref(), &m.to_coo_csv())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::GenState(a) => gen_state(a),
        Command::Verify(a) => verify(a),
        Command::Classes(a) => classes(a),
        Command::Circuit(a) => circuit(&a.action),
        Command::Matrix(a) => matrix(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
