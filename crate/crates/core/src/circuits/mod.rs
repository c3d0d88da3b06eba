//! Classical circuits, their Toffoli-only compilation, and HT circuits that
//! prepare binary phase states by phase kickback.

pub mod classical;
pub mod ht;
pub mod kwise_circuit;
pub mod text;

pub use classical::{anf_coefficients, layered_depth, CircuitBuilder, ClassicalCircuit, Gate, Metrics};
pub use ht::{build_gbin_circuit, simulate_ht, HTCircuit, Toffoli, MAX_SIM_HADAMARDS};
pub use kwise_circuit::{build_kwise_circuit, kwise_circuit_input};
pub use text::{parse_classical, parse_ht, print_classical, print_ht};

/// Size and depth of a circuit.
pub fn circuit_metrics_classical(c: &ClassicalCircuit) -> Metrics {
    c.metrics()
}

/// Size and depth of an HT circuit, counting the Hadamard layer.
pub fn circuit_metrics_ht(c: &HTCircuit) -> Metrics {
    c.metrics()
}
