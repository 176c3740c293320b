//! Simulator and pulse-optimization toolkit for a hybrid superconducting
//! architecture of alternating fluxonium and transmon qubits joined by
//! flux-tunable transmon couplers.
//!
//! The pipeline runs from a declarative circuit description to optimized
//! two-qubit gates:
//!
//! 1. [`circuit`] assembles the island-level capacitance matrix, reduces each
//!    coupler pair to one mode, and converts to charging energies.
//! 2. [`quantize`] builds truncated-oscillator operators, solves each node
//!    locally with exact cosine potentials, and tensors the full Hamiltonian
//!    with a static part plus flux-parameterized coupler terms.
//! 3. [`spectrum`] labels dressed states by bare-state overlap and computes
//!    ZZ/ZZZ crosstalk, flux sweeps, and fabrication-robustness maps.
//! 4. [`drive`] carries the analytic gate theory: Jacobi-Anger drive
//!    coefficients, the three-level model, rotated-frame effective
//!    Hamiltonians, and closed-form drive frequency and gate time.
//! 5. [`propagate`] evolves the driven system in the dressed interaction
//!    picture and extracts process matrices, leakage, and populations.
//! 6. [`optim`] optimizes one- and two-tone pulse parameters against
//!    closed-system CZ infidelity.
//! 7. [`metrics`] traces out spectator qubits and ranks Pauli error weights.
//!
//! Each major capability has a runnable demonstration under `examples/`
//! (`design_point`, `zz_flux_sweep`, `robustness_map`, `analytic_gate_theory`,
//! `single_tone_cz`, `spectator_chain`), and the `ftcsim` binary exposes the
//! same pipeline as subcommands over TOML run configurations.

pub mod circuit;
pub mod cmat;
pub mod config;
pub mod drive;
pub mod linalg;
pub mod metrics;
pub mod ode;
pub mod optim;
pub mod propagate;
pub mod pulse;
pub mod quantize;
pub mod report;
pub mod runner;
pub mod special;
pub mod spectrum;
