//! System–apparatus measurement models and the operators that time them.
//!
//! A [`MeasurementModel`] couples a system with eigenstates `|a_i⟩` of the
//! measured quantity to an apparatus with ready state `|init⟩` and pointer
//! states `|Oa_i⟩`. Its interaction Hamiltonian carries `|a_i⟩ ⊗ |init⟩` to
//! `|a_i⟩ ⊗ |Oa_i⟩` in the nominal duration `T`.
//!
//! The projector `M = Σ_i |a_i, Oa_i⟩⟨a_i, Oa_i|` ([`m_projector`]) has
//! eigenvalue one exactly on the perfectly correlated states, and the rate
//! operator `m = i[H, M]` ([`rate_operator`]) gives `d⟨M⟩/dt = ⟨m⟩`.

mod premeasurement;
mod schmidt;

pub use premeasurement::{premeasurement_check, PremeasurementReport};
pub use schmidt::{
    dominant_angle, schmidt_decompose, schmidt_instability_demo, SchmidtDecomposition,
    SchmidtInstability,
};

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    commutator, expectation, gram_deviation, projector_onto, same_dims, tensor_state,
    HermitianOperator, StateVector,
};
use crate::tolerance;

/// A premeasurement interaction between a system and a pointer apparatus.
///
/// Construction validates the frames and dimensions but does not evolve
/// anything; [`premeasurement_check`] verifies the declared fidelity.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    labels: Vec<String>,
    system_eigenstates: Vec<StateVector>,
    pointer_ready: StateVector,
    pointer_states: Vec<StateVector>,
    interaction: HermitianOperator,
    nominal_duration: f64,
    declared_fidelity: f64,
}

impl MeasurementModel {
    /// Assembles a model from its parts.
    ///
    /// The system eigenstates must form an orthonormal basis of the whole
    /// system space, and `{|init⟩, |Oa_1⟩, …, |Oa_n⟩}` must be orthonormal in
    /// the apparatus space (which may be larger than `n + 1`).
    pub fn new(
        labels: Vec<String>,
        system_eigenstates: Vec<StateVector>,
        pointer_ready: StateVector,
        pointer_states: Vec<StateVector>,
        interaction: HermitianOperator,
        nominal_duration: f64,
        declared_fidelity: f64,
    ) -> Result<Self> {
        let n = system_eigenstates.len();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "a measurement needs at least 2 outcomes, got {n}"
            )));
        }
        if labels.len() != n || pointer_states.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{n} system eigenstates but {} labels and {} pointer states",
                labels.len(),
                pointer_states.len()
            )));
        }
        let system_dim = system_eigenstates[0].dim();
        if system_dim != n {
            return Err(Error::InvalidParameter(format!(
                "system eigenstates must span the system space ({n} states in dimension {system_dim})"
            )));
        }
        for s in &system_eigenstates {
            same_dims(&[system_dim], s.dims())?;
        }
        let apparatus_dim = pointer_ready.dim();
        same_dims(&[apparatus_dim], pointer_ready.dims())?;
        for s in &pointer_states {
            same_dims(&[apparatus_dim], s.dims())?;
        }
        if apparatus_dim < n + 1 {
            return Err(Error::InvalidParameter(format!(
                "apparatus dimension {apparatus_dim} cannot hold a ready state and {n} pointer states"
            )));
        }
        check_orthonormal(system_eigenstates.iter())?;
        check_orthonormal(std::iter::once(&pointer_ready).chain(&pointer_states))?;
        same_dims(&[system_dim, apparatus_dim], interaction.dims())?;
        if !(nominal_duration.is_finite() && nominal_duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nominal duration must be positive, got {nominal_duration}"
            )));
        }
        if !(0.0..=1.0).contains(&declared_fidelity) {
            return Err(Error::InvalidParameter(format!(
                "declared fidelity must lie in [0, 1], got {declared_fidelity}"
            )));
        }
        Ok(Self {
            labels,
            system_eigenstates,
            pointer_ready,
            pointer_states,
            interaction,
            nominal_duration,
            declared_fidelity,
        })
    }

    /// Rotation coupling in arbitrary orthonormal frames.
    ///
    /// `H_I = Σ_i g_i |a_i⟩⟨a_i| ⊗ h_i` with `h_i = i(|Oa_i⟩⟨init| - |init⟩⟨Oa_i|)`,
    /// under which `|a_i⟩ ⊗ |init⟩` evolves to
    /// `cos(g_i t) |a_i⟩ ⊗ |init⟩ + sin(g_i t) |a_i⟩ ⊗ |Oa_i⟩`.
    /// The nominal duration is `π / (2 max g_i)`.
    pub fn rotation_in_frames(
        system_eigenstates: Vec<StateVector>,
        pointer_ready: StateVector,
        pointer_states: Vec<StateVector>,
        couplings: &[f64],
    ) -> Result<Self> {
        let n = system_eigenstates.len();
        if couplings.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{n} outcomes but {} couplings",
                couplings.len()
            )));
        }
        if let Some(g) = couplings.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::InvalidParameter(format!("coupling must be positive, got {g}")));
        }
        let system_dim = system_eigenstates.first().map_or(0, StateVector::dim);
        let apparatus_dim = pointer_ready.dim();
        if pointer_states.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{n} outcomes but {} pointer states",
                pointer_states.len()
            )));
        }

        let ready = pointer_ready.amplitudes();
        let mut interaction = DMatrix::<C64>::zeros(system_dim * apparatus_dim, system_dim * apparatus_dim);
        for ((a, o), &g) in system_eigenstates.iter().zip(&pointer_states).zip(couplings) {
            let a = a.amplitudes();
            let o = o.amplitudes();
            let i = C64::i();
            let generator = (o * ready.adjoint() - ready * o.adjoint()) * i;
            interaction += (a * a.adjoint()).kronecker(&generator).scale(g);
        }
        let interaction = HermitianOperator::new(vec![system_dim, apparatus_dim], interaction)?;

        let g_max = couplings.iter().copied().fold(0.0, f64::max);
        let duration = FRAC_PI_2 / g_max;
        let declared_fidelity = couplings
            .iter()
            .map(|g| (g * duration).sin().powi(2))
            .fold(1.0, f64::min);
        let labels = (1..=n).map(|i| format!("a{i}")).collect();
        Self::new(
            labels,
            system_eigenstates,
            pointer_ready,
            pointer_states,
            interaction,
            duration,
            declared_fidelity,
        )
    }

    pub fn n_outcomes(&self) -> usize {
        self.system_eigenstates.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn system_dim(&self) -> usize {
        self.system_eigenstates[0].dim()
    }

    pub fn apparatus_dim(&self) -> usize {
        self.pointer_ready.dim()
    }

    /// Factor dimensions `[system, apparatus]` of the joint space.
    pub fn joint_dims(&self) -> Vec<usize> {
        vec![self.system_dim(), self.apparatus_dim()]
    }

    pub fn system_eigenstates(&self) -> &[StateVector] {
        &self.system_eigenstates
    }

    pub fn pointer_ready(&self) -> &StateVector {
        &self.pointer_ready
    }

    pub fn pointer_states(&self) -> &[StateVector] {
        &self.pointer_states
    }

    pub fn interaction_hamiltonian(&self) -> &HermitianOperator {
        &self.interaction
    }

    /// The total Hamiltonian of a bundled model, which is the interaction alone.
    pub fn total_hamiltonian(&self) -> &HermitianOperator {
        &self.interaction
    }

    /// `T`.
    pub fn nominal_duration(&self) -> f64 {
        self.nominal_duration
    }

    /// Minimum per-outcome premeasurement fidelity the model claims at `T`.
    pub fn declared_fidelity(&self) -> f64 {
        self.declared_fidelity
    }

    /// `|a_i⟩ ⊗ |Oa_i⟩`.
    pub fn correlated_product(&self, outcome: usize) -> StateVector {
        tensor_state(&self.system_eigenstates[outcome], &self.pointer_states[outcome])
    }

    /// `Σ_i c_i |a_i⟩`.
    pub fn system_state(&self, coefficients: &[C64]) -> Result<StateVector> {
        let dim = self.system_dim();
        let amplitudes = self.combine(coefficients, |i| self.system_eigenstates[i].amplitudes().clone())?;
        StateVector::new(vec![dim], amplitudes)
    }

    /// `(Σ_i c_i |a_i⟩) ⊗ |init⟩`: the apparatus is ready, nothing has happened yet.
    pub fn initial_state(&self, coefficients: &[C64]) -> Result<StateVector> {
        Ok(tensor_state(&self.system_state(coefficients)?, &self.pointer_ready))
    }

    /// `Σ_i c_i |a_i⟩ ⊗ |Oa_i⟩`: the ideal post-measurement state.
    pub fn correlated_state(&self, coefficients: &[C64]) -> Result<StateVector> {
        let amplitudes = self.combine(coefficients, |i| self.correlated_product(i).into_amplitudes())?;
        StateVector::new(self.joint_dims(), amplitudes)
    }

    fn combine(&self, coefficients: &[C64], vector: impl Fn(usize) -> DVector<C64>) -> Result<DVector<C64>> {
        if coefficients.len() != self.n_outcomes() {
            return Err(Error::DimensionMismatch {
                expected: vec![self.n_outcomes()],
                found: vec![coefficients.len()],
            });
        }
        Ok(coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| vector(i) * *c)
            .reduce(|acc, v| acc + v)
            .expect("at least two outcomes"))
    }
}

fn check_orthonormal<'a>(states: impl Iterator<Item = &'a StateVector>) -> Result<()> {
    let columns: Vec<DVector<C64>> = states.map(|s| s.amplitudes().clone()).collect();
    let deviation = gram_deviation(&DMatrix::from_columns(&columns));
    if deviation > tolerance::ORTHONORMALITY {
        return Err(Error::NonOrthonormalInput { deviation });
    }
    Ok(())
}

fn standard_frames(n: usize) -> Result<(Vec<StateVector>, StateVector, Vec<StateVector>)> {
    let system = (0..n)
        .map(|i| StateVector::basis(vec![n], i))
        .collect::<Result<Vec<_>>>()?;
    let ready = StateVector::basis(vec![n + 1], 0)?;
    let pointers = (1..=n)
        .map(|i| StateVector::basis(vec![n + 1], i))
        .collect::<Result<Vec<_>>>()?;
    Ok((system, ready, pointers))
}

fn check_outcomes_and_coupling(n: usize, g: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 outcomes, got {n}")));
    }
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidParameter(format!("coupling g must be positive, got {g}")));
    }
    Ok(())
}

/// The canonical `n`-outcome rotation model with coupling `g`.
///
/// System `C^n` with the standard basis as eigenstates, apparatus `C^{n+1}`
/// with `|init⟩ = e_0` and `|Oa_i⟩ = e_i`, and `T = π / (2g)`. Every branch
/// completes at `T`, so `P(t) = sin²(gt)` for any initial superposition.
pub fn build_rotation_model(n: usize, g: f64) -> Result<MeasurementModel> {
    check_outcomes_and_coupling(n, g)?;
    let (system, ready, pointers) = standard_frames(n)?;
    MeasurementModel::rotation_in_frames(system, ready, pointers, &vec![g; n])
}

/// Rotation model whose first branch couples at `g (1 - ε)`.
///
/// `T` stays `π / (2g)`, so the first branch reaches fidelity
/// `sin²((1 - ε) π / 2)` while the others complete.
pub fn build_imperfect_model(n: usize, g: f64, epsilon: f64) -> Result<MeasurementModel> {
    check_outcomes_and_coupling(n, g)?;
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    let (system, ready, pointers) = standard_frames(n)?;
    let mut couplings = vec![g; n];
    couplings[0] = g * (1.0 - epsilon);
    MeasurementModel::rotation_in_frames(system, ready, pointers, &couplings)
}

/// `M = Σ_i (|a_i⟩ ⊗ |Oa_i⟩)(⟨a_i| ⊗ ⟨Oa_i|)`.
pub fn m_projector(model: &MeasurementModel) -> Result<HermitianOperator> {
    let products: Vec<StateVector> = (0..model.n_outcomes())
        .map(|i| model.correlated_product(i))
        .collect();
    projector_onto(&products)
}

/// `m = i[H, M]` for the total Hamiltonian `hamiltonian`.
pub fn rate_operator(model: &MeasurementModel, hamiltonian: &HermitianOperator) -> Result<HermitianOperator> {
    same_dims(&model.joint_dims(), hamiltonian.dims())?;
    rate_from_projector(&m_projector(model)?, hamiltonian)
}

/// `i[H, M]` for an already-built projector.
pub fn rate_from_projector(projector: &HermitianOperator, hamiltonian: &HermitianOperator) -> Result<HermitianOperator> {
    commutator(hamiltonian, projector)?
        .scale(C64::i())
        .into_hermitian()
}

/// `⟨ψ|M|ψ⟩`: the probability that the measurement has happened in state `psi`.
pub fn happened_probability(model: &MeasurementModel, psi: &StateVector) -> Result<f64> {
    same_dims(&model.joint_dims(), psi.dims())?;
    expectation(&m_projector(model)?, psi)
}
