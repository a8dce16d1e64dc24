//! Numerical tolerances shared by the library and its tests.

/// Max-abs entrywise deviation allowed between an operator and its adjoint.
pub const HERMITICITY: f64 = 1e-12;

/// Max-abs deviation of a Gram matrix from the identity.
pub const ORTHONORMALITY: f64 = 1e-10;

/// Deviation of a state's Euclidean norm from one.
pub const NORM: f64 = 1e-10;

/// Largest imaginary part tolerated in the expectation of a Hermitian operator.
pub const IMAGINARY_EXPECTATION: f64 = 1e-10;

/// Spectral reconstruction and eigenvector unitarity.
pub const SPECTRAL: f64 = 1e-10;

/// Norm drift allowed for states stored in a trajectory.
pub const TRAJECTORY_NORM: f64 = 1e-9;

/// Slack on `P(t)` leaving `[0, 1]` before a trajectory is rejected.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Probability mass of a joint outcome distribution must sum to one within this.
pub const DISTRIBUTION_SUM: f64 = 1e-10;

/// Scenario coefficients whose norm is within this of one are renormalized;
/// anything further off is rejected.
pub const COEFFICIENT_RENORMALIZE: f64 = 1e-3;

/// Floor of the finite-difference tolerance for `dP/dt` against `⟨m⟩`.
pub const EHRENFEST_FLOOR: f64 = 1e-4;

/// Premeasurement fidelities computed by simulation must match closed form within this.
pub const FIDELITY: f64 = 1e-10;

/// Iteration budget for the Hermitian eigensolver (0 means "until convergence" in nalgebra,
/// which we avoid so a pathological matrix surfaces as an error).
pub const EIGEN_MAX_ITERATIONS: usize = 10_000;
