//! Schrödinger evolution under a time-independent Hamiltonian.
//!
//! Evolution uses the exact spectral propagator `V exp(-iλt) V†`, so there is
//! no integrator error and a whole trajectory shares one diagonalization.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{expectation, same_dims, spectral, HermitianOperator, SpectralDecomposition, StateVector};
use crate::tolerance;

/// Uniform grid on `[t_start, t_end]`, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) || t_end <= t_start {
            return Err(Error::InvalidParameter(format!(
                "time grid needs finite t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs at least 2 points, got {n_points}"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            n_points,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    /// The k-th grid time. The last point is exactly `t_end`.
    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            self.t_end
        } else {
            self.t_start + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.time(k))
    }
}

/// Cached spectral propagator for one Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    dims: Vec<usize>,
    spectrum: SpectralDecomposition,
}

impl Propagator {
    pub fn new(hamiltonian: &HermitianOperator) -> Result<Self> {
        Ok(Self {
            dims: hamiltonian.dims().to_vec(),
            spectrum: spectral(hamiltonian)?,
        })
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// Expands `psi0` in the eigenbasis once, for repeated evolution.
    pub fn prepare(&self, psi0: &StateVector) -> Result<PreparedState<'_>> {
        same_dims(&self.dims, psi0.dims())?;
        Ok(PreparedState {
            propagator: self,
            coefficients: self.spectrum.eigenvectors.ad_mul(psi0.amplitudes()),
        })
    }

    pub fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        self.prepare(psi0)?.at(t)
    }
}

/// An initial state expanded in a propagator's eigenbasis.
pub struct PreparedState<'a> {
    propagator: &'a Propagator,
    coefficients: DVector<C64>,
}

impl PreparedState<'_> {
    pub fn at(&self, t: f64) -> Result<StateVector> {
        let spectrum = &self.propagator.spectrum;
        let phased = DVector::from_iterator(
            self.coefficients.len(),
            self.coefficients
                .iter()
                .zip(spectrum.eigenvalues.iter())
                .map(|(c, &l)| c * C64::from_polar(1.0, -l * t)),
        );
        let amplitudes = &spectrum.eigenvectors * phased;
        StateVector::new(self.propagator.dims.clone(), amplitudes)
            .map_err(|e| Error::InvariantViolation(format!("evolution lost normalization: {e}")))
    }
}

/// Worst-case error of the central difference `(P(t+h) - P(t-h)) / 2h` for
/// `P(t) = ⟨exp(-iHt)ψ|A|exp(-iHt)ψ⟩` with `‖A‖ <= 1`. It is `h² max|P'''| / 6`,
/// and `|P'''| <= spread³` where `spread` is the width of the spectrum of `H`.
pub fn central_difference_bound(spread: f64, h: f64) -> f64 {
    spread.powi(3) * h * h / 6.0
}

/// `exp(-iHt) ψ0`.
pub fn evolve(hamiltonian: &HermitianOperator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Propagator::new(hamiltonian)?.evolve(psi0, t)
}

/// States, `P(t)` and `p(t)` sampled on a time grid.
#[derive(Debug, Clone)]
pub struct TimingTrajectory {
    grid: TimeGrid,
    states: Vec<StateVector>,
    probability: Vec<f64>,
    density: Vec<f64>,
}

impl TimingTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// `P(t_k)`.
    pub fn probability(&self) -> &[f64] {
        &self.probability
    }

    /// `p(t_k)`.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Grid time and value of the largest `p`.
    pub fn peak_density(&self) -> (f64, f64) {
        let (k, &value) = self
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("trajectory has at least two points");
        (self.grid.time(k), value)
    }

    /// Central differences `(P[k+1] - P[k-1]) / 2h` at interior points, paired with `p[k]`.
    pub fn central_differences(&self) -> Vec<(f64, f64)> {
        let h = self.grid.step();
        (1..self.len().saturating_sub(1))
            .map(|k| {
                (
                    (self.probability[k + 1] - self.probability[k - 1]) / (2.0 * h),
                    self.density[k],
                )
            })
            .collect()
    }

    fn check_invariants(&self) -> Result<()> {
        for (k, (state, &p)) in self.states.iter().zip(&self.probability).enumerate() {
            if (state.norm() - 1.0).abs() > tolerance::TRAJECTORY_NORM {
                return Err(Error::InvariantViolation(format!(
                    "state {k} has norm {}",
                    state.norm()
                )));
            }
            if !(-tolerance::PROBABILITY_SLACK..=1.0 + tolerance::PROBABILITY_SLACK).contains(&p) {
                return Err(Error::InvariantViolation(format!(
                    "P(t_{k}) = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Evolves `psi0` over `grid`, recording `⟨M⟩` and `⟨m⟩` at each point.
pub fn trajectory(
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    grid: TimeGrid,
    projector: &HermitianOperator,
    rate: &HermitianOperator,
) -> Result<TimingTrajectory> {
    same_dims(hamiltonian.dims(), projector.dims())?;
    same_dims(hamiltonian.dims(), rate.dims())?;
    let propagator = Propagator::new(hamiltonian)?;
    let prepared = propagator.prepare(psi0)?;

    let mut states = Vec::with_capacity(grid.n_points());
    let mut probability = Vec::with_capacity(grid.n_points());
    let mut density = Vec::with_capacity(grid.n_points());
    for t in grid.times() {
        let state = prepared.at(t)?;
        probability.push(expectation(projector, &state)?);
        density.push(expectation(rate, &state)?);
        states.push(state);
    }

    let traj = TimingTrajectory {
        grid,
        states,
        probability,
        density,
    };
    traj.check_invariants()?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_validation_and_points() {
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, f64::NAN, 3).is_err());
        let g = TimeGrid::new(0.0, 2.0, 5).unwrap();
        let ts: Vec<f64> = g.times().collect();
        assert_eq!(ts, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = random::hermitian(&mut rng, vec![3, 4], 2.0);
        let psi = random::state(&mut rng, vec![3, 4]);
        let out = evolve(&h, &psi, 0.0).unwrap();
        assert!(out.distance(&psi).unwrap() < 1e-12);
    }

    #[test]
    fn eigenstate_acquires_phase() {
        let omega = 1.7;
        let h = HermitianOperator::from_real_diagonal(vec![2], &[0.0, omega]).unwrap();
        let psi = StateVector::basis(vec![2], 1).unwrap();
        for t in [0.3, 1.0, 5.5] {
            let out = evolve(&h, &psi, t).unwrap();
            assert_abs_diff_eq!(out.amplitudes()[0].norm(), 0.0, epsilon = 1e-14);
            let expected = C64::from_polar(1.0, -omega * t);
            assert!((out.amplitudes()[1] - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn group_property_and_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let dims = vec![rng.random_range(1..5), rng.random_range(1..5)];
            let h = random::hermitian(&mut rng, dims.clone(), 3.0);
            let psi = random::state(&mut rng, dims);
            let t = rng.random_range(0.0..10.0);
            let s = rng.random_range(0.0..10.0);
            let direct = evolve(&h, &psi, t + s).unwrap();
            let stepped = evolve(&h, &evolve(&h, &psi, s).unwrap(), t).unwrap();
            assert!(direct.distance(&stepped).unwrap() < 1e-10);
            assert!((direct.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_and_zero_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let dims = vec![2, 3];
        let h = random::hermitian(&mut rng, dims.clone(), 1.0);
        let psi = random::state(&mut rng, dims.clone());
        let grid = TimeGrid::new(0.0, 3.0, 17).unwrap();

        let id = HermitianOperator::identity(dims.clone());
        let zero = HermitianOperator::zeros(dims.clone());
        let traj = trajectory(&h, &psi, grid, &id, &zero).unwrap();
        assert_eq!(traj.len(), 17);
        for &p in traj.probability() {
            assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        }

        let traj = trajectory(&h, &psi, grid, &zero, &zero).unwrap();
        assert!(traj.probability().iter().all(|&p| p == 0.0));
        assert!(traj.density().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let h = HermitianOperator::identity(vec![2]);
        let psi = StateVector::basis(vec![3], 0).unwrap();
        assert!(matches!(evolve(&h, &psi, 1.0), Err(Error::DimensionMismatch { .. })));
    }
}
