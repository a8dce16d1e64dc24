//! Simulation of *when* a quantum measurement happens.
//!
//! A measurement of a system quantity `q` by an apparatus `O` is modelled as a
//! unitary premeasurement on the joint space `S ⊗ O`. The projector `M` onto
//! the span of perfectly correlated states `|a_i⟩ ⊗ |Oa_i⟩` answers the yes/no
//! question "has the measurement happened?", so `P(t) = ⟨Ψ(t)|M|Ψ(t)⟩` is the
//! probability that it has happened by time `t` and `p(t) = ⟨Ψ(t)|m|Ψ(t)⟩`,
//! with `m = i[H, M]`, is the probability density of the event in time.
//!
//! Conventions used throughout the crate:
//!
//! * `ħ = 1`.
//! * In tensor products the first factor's index varies slowest, so
//!   `(a ⊗ b)[i * dim_b + j] = a[i] * b[j]`.
//! * Every numerical tolerance lives in [`tolerance`].

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod measurement;
pub mod operational;
pub mod random;
pub mod scenario;
pub mod tolerance;

pub use dynamics::{evolve, trajectory, TimeGrid, TimingTrajectory};
pub use error::{Error, Result};
pub use hilbert::{
    commutator, expectation, projector_onto, spectral, tensor_operator, tensor_state,
    HermitianOperator, Operator, SpectralDecomposition, StateVector,
};
pub use measurement::{
    build_imperfect_model, build_rotation_model, happened_probability, m_projector,
    premeasurement_check, rate_operator, schmidt_decompose, MeasurementModel,
    PremeasurementReport, SchmidtDecomposition,
};
pub use operational::{
    joint_distribution, sample_trials, EstimateReport, JointOutcomeDistribution, PointerOutcome,
    SamplingRun, TrialRecord,
};

pub use num_complex::Complex64 as C64;
