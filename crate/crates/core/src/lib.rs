//! Binary phase states as approximate state designs: finite-field k-wise
//! independent functions, exact moment matrices of the binary-phase,
//! complex-phase and Haar ensembles, spectral checks of the bounds relating
//! them, and Hadamard-Toffoli circuits that prepare binary phase states.

pub mod circuits;
pub mod combinatorics;
pub mod error;
pub mod gf2n;
pub mod kwise;
pub mod moment;
pub mod phase_states;
pub mod spectral;

pub use circuits::{
    build_gbin_circuit, build_kwise_circuit, simulate_ht, ClassicalCircuit, Gate, HTCircuit, Metrics, Toffoli,
};
pub use combinatorics::{
    distinct_class_count, enumerate_permutation_classes, enumerate_stabilization_classes, is_permutation_pair,
    is_remote_stabilization_pair, is_stabilization_pair, multichoose_count, ClassDescriptor, ClassKind,
    ClassStructure, Histogram, OddSet, TupleIndex, ZeroRows,
};
pub use error::{Error, Result};
pub use gf2n::{find_modulus, gf_add, gf_mul, gf_pow, poly_eval, FieldElement, FieldModulus};
pub use kwise::{eval_bit, eval_full, sample_key, verify_kwise_exhaustive, KWiseFunction, KWiseKey, KWiseReport};
pub use moment::{
    entry_oracle, expectation_oracle, rho_binary, rho_complex, rho_diff, rho_haar, CyclotomicValue, MatrixLabel,
    MomentMatrix,
};
pub use phase_states::{gen_binary_phase, gen_complex_phase, PhaseFunction, StateVector};
pub use spectral::{
    det_from_spectrum, det_product_formula, eigenvalue_floor, hermitian_spectrum, jls_closed_form, main_bound,
    numeric_rank, rank_bound, th1_bound, trace_distance, verify_all, BoundsReport, SignedLog, Spectrum, Tolerances,
};
