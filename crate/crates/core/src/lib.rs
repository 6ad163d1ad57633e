//! Simulation and verification of hidden optical-polarization states of
//! two-mode light driven through a degenerate parametric amplifier.
//!
//! The crate pairs closed-form results with a truncated two-mode Fock-space
//! oracle so that each analytic expression can be checked numerically.

pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod fock;
pub mod grid;
pub mod moments;
pub mod polarization;
pub mod sweep;
pub mod verify;

pub use dynamics::{bogoliubov, evolve_amplitudes, heisenberg_pair, ihop_evolve, BogoliubovCoeffs, EvolvedAmplitudes};
pub use ensembles::{
    classical_parameters, hidden_vs_stokes_demo, iop_ihop_in_basis, quantum_phase_averaged_state, EnsembleParameters,
    EnsembleSpec, Estimator, HopsEnsembleSpec, PolarizedFieldSpec,
};
pub use error::{HopsError, Result};
pub use fock::{
    coherent_state, commutator, evolve_oracle, expectation, make_fock_space, mode_operator, tail_mass, variance,
    FockSpace, Ladder, Mode, OperatorMatrix, PairPropagator, StateVector, C64,
};
pub use grid::Grid;
pub use moments::{
    critical_time, degree_hidden, hidden_moments, hidden_variances, onset_time_numeric, squeezing_function,
    squeezing_report, HiddenMoments, HiddenVariances, HopsInput, MomentOracle, SqueezingReport, VarianceSource,
};
pub use polarization::{
    glauber_gamma, hidden_operators, ihop_of, iop_of, stokes_operators, transform_basis, BasisVector, OperatorQuad,
    PolarizationIndices, UncertaintyBounds,
};
pub use sweep::{run_sweep, OutputKind, Preset, Range, SweepConfig, SweepRow};
pub use verify::{run_verification, Status, VerificationReport};
