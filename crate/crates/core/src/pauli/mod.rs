//! Small dense statevector oracle: Bell states, commuting Pauli tuples, their
//! measurement projectors, and an exact quantum run of the measurement phase
//! of the protocol. Everything here is exponential in the qubit count and is
//! meant for `n <= 6` (Bell states) or `n <= 4` (protocol runs).

mod identities;
mod oracle;
mod state;
mod tuple;

pub use identities::{
    accept_projection_weight, bell_action_deviation, check_bell_action, combination_deviation,
    max_entangled_deviation, partial_bell_sum_deviation, pauli_shift_deviation, random_full_rank,
    random_tuple, random_y_free_pauli,
};
pub use oracle::{oracle_protocol_run, RawRun, MAX_ORACLE_N};
pub use state::{basis_index, bell_state, BellIndex, StateVec, MAX_BELL_QUBITS};
pub use tuple::{
    apply_projector, generator_dense, measure_tuple, measure_tuple_on, outcome_distribution,
    pauli_dense, projector, projector_from_generators, Measurement, PauliTuple, Register,
};
