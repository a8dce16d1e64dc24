use crate::dynamics::Propagator;
use crate::error::Result;
use crate::hilbert::tensor_state;
use crate::tolerance;

use super::MeasurementModel;

/// Per-outcome fidelities `|⟨a_i, Oa_i| exp(-iH_I T) |a_i, init⟩|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PremeasurementReport {
    pub fidelities: Vec<f64>,
    /// `max_i (1 - fidelity_i)`.
    pub max_deviation: f64,
    pub declared_fidelity: f64,
}

impl PremeasurementReport {
    /// True when every outcome reaches `threshold`.
    pub fn qualifies(&self, threshold: f64) -> bool {
        self.first_failure(threshold).is_none()
    }

    /// First outcome below `threshold`, with its fidelity.
    pub fn first_failure(&self, threshold: f64) -> Option<(usize, f64)> {
        self.fidelities
            .iter()
            .copied()
            .enumerate()
            .find(|&(_, f)| f < threshold)
    }

    /// Whether the simulated fidelities reach what the model declares.
    pub fn meets_declared(&self) -> bool {
        self.qualifies(self.declared_fidelity - tolerance::FIDELITY)
    }
}

/// Evolves each `|a_i⟩ ⊗ |init⟩` under the interaction for the nominal
/// duration and measures its overlap with `|a_i⟩ ⊗ |Oa_i⟩`.
pub fn premeasurement_check(model: &MeasurementModel) -> Result<PremeasurementReport> {
    let propagator = Propagator::new(model.interaction_hamiltonian())?;
    let fidelities = (0..model.n_outcomes())
        .map(|i| {
            let start = tensor_state(&model.system_eigenstates()[i], model.pointer_ready());
            let end = propagator.evolve(&start, model.nominal_duration())?;
            Ok(model.correlated_product(i).inner(&end)?.norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_deviation = fidelities.iter().map(|f| 1.0 - f).fold(f64::NEG_INFINITY, f64::max);
    Ok(PremeasurementReport {
        fidelities,
        max_deviation,
        declared_fidelity: model.declared_fidelity(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::HermitianOperator;
    use crate::measurement::{build_imperfect_model, build_rotation_model};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn rotation_model_is_perfect() {
        for n in [2, 3, 5] {
            let report = premeasurement_check(&build_rotation_model(n, 0.7).unwrap()).unwrap();
            assert_eq!(report.fidelities.len(), n);
            for f in &report.fidelities {
                assert_abs_diff_eq!(*f, 1.0, epsilon = 1e-10);
            }
            assert!(report.max_deviation < 1e-10);
            assert!(report.meets_declared());
        }
    }

    #[test]
    fn imperfect_model_first_branch_falls_short() {
        let report = premeasurement_check(&build_imperfect_model(3, 1.0, 0.1).unwrap()).unwrap();
        let expected = (0.45 * PI).sin().powi(2);
        assert_abs_diff_eq!(report.fidelities[0], expected, epsilon = 1e-10);
        assert!(report.fidelities[0] < 1.0);
        assert_abs_diff_eq!(report.fidelities[1], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.fidelities[2], 1.0, epsilon = 1e-10);
        assert!(report.meets_declared());
        assert_eq!(report.first_failure(0.99).map(|(i, _)| i), Some(0));
    }

    #[test]
    fn switched_off_interaction_never_measures() {
        let good = build_rotation_model(2, 1.0).unwrap();
        let corrupted = MeasurementModel::new(
            good.labels().to_vec(),
            good.system_eigenstates().to_vec(),
            good.pointer_ready().clone(),
            good.pointer_states().to_vec(),
            HermitianOperator::zeros(good.joint_dims()),
            good.nominal_duration(),
            good.declared_fidelity(),
        )
        .unwrap();
        let report = premeasurement_check(&corrupted).unwrap();
        assert!(report.fidelities.iter().all(|&f| f == 0.0));
        assert!(!report.meets_declared());
        assert!(!report.qualifies(0.5));
    }
}
