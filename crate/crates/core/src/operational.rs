//! Operational timing: a second, external apparatus reads both `q` and the pointer.
//!
//! At time `t` the external observer measures `q` in the eigenbasis `{|a_i⟩}`
//! and the pointer in `{|init⟩, |Oa_1⟩, …, |Oa_n⟩}` plus the orthogonal
//! remainder of the apparatus space. A trial is *Case 1* when the pointer sits
//! on the state matched to the observed `q`, and *Case 2* otherwise. The
//! Case-1 frequency over repeated trials estimates `P(t) = ⟨Ψ(t)|M|Ψ(t)⟩`.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::hilbert::{same_dims, HermitianOperator, StateVector};
use crate::measurement::{happened_probability, MeasurementModel};
use crate::tolerance;

/// Identifier of the generator and sampling scheme behind [`sample_trials`].
pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64 + WeightedIndex<f64>, single stream";

/// Where the external observer finds the pointer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointerOutcome {
    /// `|init⟩`.
    Ready,
    /// `|Oa_j⟩`, zero-based.
    Pointer(usize),
    /// Anywhere in the complement of `span{|init⟩, |Oa_j⟩}`.
    Residual,
}

impl PointerOutcome {
    /// Column index used in reports: 0 for ready, `j + 1` for `Oa_j`, `n + 1` for residual.
    pub fn index(self, n_outcomes: usize) -> usize {
        match self {
            PointerOutcome::Ready => 0,
            PointerOutcome::Pointer(j) => j + 1,
            PointerOutcome::Residual => n_outcomes + 1,
        }
    }
}

impl fmt::Display for PointerOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointerOutcome::Ready => write!(f, "init"),
            PointerOutcome::Pointer(j) => write!(f, "O{}", j + 1),
            PointerOutcome::Residual => write!(f, "residual"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOutcome {
    pub q_outcome: usize,
    pub pointer: PointerOutcome,
    pub probability: f64,
}

impl JointOutcome {
    pub fn is_matched(&self) -> bool {
        self.pointer == PointerOutcome::Pointer(self.q_outcome)
    }
}

/// Born-rule distribution of the joint `(q, pointer)` reading.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcomeDistribution {
    pub entries: Vec<JointOutcome>,
}

impl JointOutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// Total probability of Case 1.
    pub fn matched_mass(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.is_matched())
            .map(|e| e.probability)
            .sum()
    }

    pub fn probability(&self, q_outcome: usize, pointer: PointerOutcome) -> f64 {
        self.entries
            .iter()
            .find(|e| e.q_outcome == q_outcome && e.pointer == pointer)
            .map_or(0.0, |e| e.probability)
    }
}

pub fn joint_distribution(model: &MeasurementModel, psi: &StateVector) -> Result<JointOutcomeDistribution> {
    same_dims(&model.joint_dims(), psi.dims())?;
    let n = model.n_outcomes();
    let system_dim = model.system_dim();
    let apparatus_dim = model.apparatus_dim();
    let amplitudes = psi.amplitudes();

    let mut entries = Vec::with_capacity(n * (n + 2));
    for (i, a) in model.system_eigenstates().iter().enumerate() {
        // (⟨a_i| ⊗ 1) ψ
        let reduced = DVector::from_fn(apparatus_dim, |k, _| {
            (0..system_dim)
                .map(|s| a.amplitudes()[s].conj() * amplitudes[s * apparatus_dim + k])
                .sum::<C64>()
        });
        let branch = reduced.norm_squared();

        let mut named = 0.0;
        let mut push = |pointer, state: &StateVector| {
            let probability = state.amplitudes().dotc(&reduced).norm_sqr();
            named += probability;
            entries.push(JointOutcome {
                q_outcome: i,
                pointer,
                probability,
            });
        };
        push(PointerOutcome::Ready, model.pointer_ready());
        for (j, o) in model.pointer_states().iter().enumerate() {
            push(PointerOutcome::Pointer(j), o);
        }
        entries.push(JointOutcome {
            q_outcome: i,
            pointer: PointerOutcome::Residual,
            probability: (branch - named).max(0.0),
        });
    }

    let distribution = JointOutcomeDistribution { entries };
    let total = distribution.total();
    if (total - 1.0).abs() > tolerance::DISTRIBUTION_SUM {
        return Err(Error::InvariantViolation(format!(
            "joint outcome probabilities sum to {total}"
        )));
    }
    Ok(distribution)
}

/// One reading of the external apparatus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub t: f64,
    pub q_outcome: usize,
    pub pointer_outcome: PointerOutcome,
    pub case1: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub t: f64,
    pub n_trials: usize,
    pub case1_count: usize,
    /// `case1_count / n_trials`.
    pub estimate: f64,
    /// Binomial standard error `sqrt(estimate (1 - estimate) / n_trials)`.
    pub std_error: f64,
    /// `⟨Ψ(t)|M|Ψ(t)⟩`.
    pub exact_p: f64,
    pub rng_algorithm: &'static str,
    pub seed: u64,
}

impl EstimateReport {
    fn from_counts(t: f64, n_trials: usize, case1_count: usize, exact_p: f64, seed: u64) -> Self {
        let estimate = case1_count as f64 / n_trials as f64;
        Self {
            t,
            n_trials,
            case1_count,
            estimate,
            std_error: (estimate * (1.0 - estimate) / n_trials as f64).sqrt(),
            exact_p,
            rng_algorithm: RNG_ALGORITHM,
            seed,
        }
    }

    /// `|estimate - exact_p|` in units of the standard error at `exact_p`.
    pub fn deviation_sigmas(&self) -> f64 {
        let sigma = (self.exact_p * (1.0 - self.exact_p) / self.n_trials as f64).sqrt();
        let diff = (self.estimate - self.exact_p).abs();
        if sigma > 0.0 {
            diff / sigma
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingRun {
    pub records: Vec<TrialRecord>,
    pub report: EstimateReport,
}

/// Repeats the external reading `n_trials` times on `exp(-iHt) ψ0`.
///
/// The state is evolved once and the joint distribution sampled i.i.d.; the
/// same `seed` always yields the same records.
pub fn sample_trials(
    model: &MeasurementModel,
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    t: f64,
    n_trials: usize,
    seed: u64,
) -> Result<SamplingRun> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter("n_trials must be at least 1".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("sampling time must be finite, got {t}")));
    }
    let state = evolve(hamiltonian, psi0, t)?;
    let distribution = joint_distribution(model, &state)?;
    let exact_p = happened_probability(model, &state)?;

    let weights = distribution.entries.iter().map(|e| e.probability);
    let sampler = WeightedIndex::new(weights)
        .map_err(|e| Error::InvariantViolation(format!("joint distribution is not samplable: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let records: Vec<TrialRecord> = (0..n_trials)
        .map(|_| {
            let outcome = distribution.entries[sampler.sample(&mut rng)];
            TrialRecord {
                t,
                q_outcome: outcome.q_outcome,
                pointer_outcome: outcome.pointer,
                case1: outcome.is_matched(),
            }
        })
        .collect();
    let case1_count = records.iter().filter(|r| r.case1).count();
    Ok(SamplingRun {
        report: EstimateReport::from_counts(t, n_trials, case1_count, exact_p, seed),
        records,
    })
}
