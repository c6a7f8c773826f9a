//! Hamiltonian flows, the phase of the conjugating Fourier integral operator and its
//! discrete application.

mod apply;
mod dual;
mod egorov;
mod flow;
mod phase;

pub use apply::{
    apply_multiplier, apply_w, apply_w_star, quasimode_pullback, quasimode_pushforward, HORIZON_MASS_TOL,
};
pub use egorov::{conjugated_symbol, ConjugatedSymbols};
pub use flow::{default_dt, integrate_flow, FlowKind, FlowState, HamiltonianFlow, MAX_DT};
pub use phase::{
    eikonal_residual, phase_table, phase_table_with, PhaseOptions, PhaseTable, BOUNDED_DOMAIN_CUT, CAUSTIC_THRESHOLD,
};
