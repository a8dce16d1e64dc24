//! Schmidt (biorthogonal) decomposition of bipartite pure states.

use std::cmp::Ordering;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{tensor_state, StateVector};

use super::build_rotation_model;

/// Singular values below this are treated as absent terms.
const NEGLIGIBLE_COEFFICIENT: f64 = 1e-13;

/// Coefficients closer than this count as degenerate when ordering terms.
const DEGENERACY: f64 = 1e-12;

/// `ψ = Σ_k λ_k |l_k⟩ ⊗ |r_k⟩` with `λ` descending and both families orthonormal.
///
/// Each left vector is phase-fixed so its largest-magnitude entry is real and
/// positive; degenerate coefficients are ordered by the left vectors' entries.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<StateVector>,
    pub right_vectors: Vec<StateVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self) -> DVector<C64> {
        self.coefficients
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
            .map(|((&c, l), r)| tensor_state(l, r).into_amplitudes() * C64::from(c))
            .reduce(|a, b| a + b)
            .expect("a normalized state has at least one Schmidt term")
    }
}

struct Term {
    coefficient: f64,
    left: DVector<C64>,
    right: DVector<C64>,
}

/// Splits `psi` into factors `dims[..split]` and `dims[split..]` and decomposes
/// across that cut.
pub fn schmidt_decompose(psi: &StateVector, split: usize) -> Result<SchmidtDecomposition> {
    let dims = psi.dims();
    if split == 0 || split >= dims.len() {
        return Err(Error::DimensionMismatch {
            expected: vec![2],
            found: vec![dims.len()],
        });
    }
    let left_dims = dims[..split].to_vec();
    let right_dims = dims[split..].to_vec();
    let rows: usize = left_dims.iter().product();
    let cols: usize = right_dims.iter().product();

    let amplitudes = psi.amplitudes();
    let matrix = DMatrix::from_fn(rows, cols, |i, j| amplitudes[i * cols + j]);
    let svd = matrix
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::SvdFailure)?;
    let u = svd.u.as_ref().ok_or(Error::SvdFailure)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::SvdFailure)?;

    let mut terms: Vec<Term> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > NEGLIGIBLE_COEFFICIENT)
        .map(|(k, &s)| {
            let mut left = u.column(k).into_owned();
            let mut right = v_t.row(k).transpose();
            let phase = dominant_phase(&left);
            left *= phase.conj();
            right *= phase;
            Term {
                coefficient: s,
                left,
                right,
            }
        })
        .collect();

    terms.sort_by(|a, b| b.coefficient.total_cmp(&a.coefficient));
    let mut start = 0;
    while start < terms.len() {
        let mut end = start + 1;
        while end < terms.len() && terms[end - 1].coefficient - terms[end].coefficient <= DEGENERACY {
            end += 1;
        }
        terms[start..end].sort_by(|a, b| lexicographic(&a.left, &b.left));
        start = end;
    }

    let mut decomposition = SchmidtDecomposition {
        coefficients: Vec::with_capacity(terms.len()),
        left_vectors: Vec::with_capacity(terms.len()),
        right_vectors: Vec::with_capacity(terms.len()),
    };
    for term in terms {
        decomposition.coefficients.push(term.coefficient);
        decomposition
            .left_vectors
            .push(StateVector::normalized(left_dims.clone(), term.left)?);
        decomposition
            .right_vectors
            .push(StateVector::normalized(right_dims.clone(), term.right)?);
    }
    Ok(decomposition)
}

fn dominant_phase(v: &DVector<C64>) -> C64 {
    let mut best = C64::new(1.0, 0.0);
    let mut best_norm = 0.0;
    for z in v.iter() {
        if z.norm() > best_norm + DEGENERACY {
            best_norm = z.norm();
            best = z / z.norm();
        }
    }
    best
}

fn lexicographic(a: &DVector<C64>, b: &DVector<C64>) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Angle `arccos |⟨l|l'⟩|` between the dominant left Schmidt vectors.
pub fn dominant_angle(a: &SchmidtDecomposition, b: &SchmidtDecomposition) -> Result<f64> {
    let overlap = a.left_vectors[0].inner(&b.left_vectors[0])?.norm();
    Ok(overlap.min(1.0).acos())
}

/// Two nearby states whose Schmidt bases point in very different directions.
#[derive(Debug, Clone)]
pub struct SchmidtInstability {
    pub first: StateVector,
    pub second: StateVector,
    /// `‖ψ₁ - ψ₂‖`.
    pub state_distance: f64,
    /// Angle between the dominant left Schmidt vectors.
    pub left_basis_angle: f64,
}

/// Perturbs the equal-weight correlated state `(|a,Oa⟩ + |b,Ob⟩)/√2` of the
/// two-outcome rotation model by `delta` along `|a,Oa⟩` and along `|+,O+⟩`.
///
/// The unperturbed Schmidt spectrum is degenerate, so the first perturbation
/// selects the `{|a⟩, |b⟩}` basis and the second the `{|+⟩, |−⟩}` basis even
/// though the two states differ by about `delta`.
pub fn schmidt_instability_demo(delta: f64) -> Result<SchmidtInstability> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let model = build_rotation_model(2, 1.0)?;
    let half = C64::from(FRAC_1_SQRT_2);
    let centre = model.correlated_state(&[half, half])?;

    let along_a = model.correlated_product(0);
    let plus = model.system_state(&[half, half])?;
    let pointer_plus = StateVector::normalized(
        vec![model.apparatus_dim()],
        model.pointer_states()[0].amplitudes() + model.pointer_states()[1].amplitudes(),
    )?;
    let along_plus = tensor_state(&plus, &pointer_plus);

    let perturb = |direction: &StateVector| {
        StateVector::normalized(
            centre.dims().to_vec(),
            centre.amplitudes() + direction.amplitudes() * C64::from(delta),
        )
    };
    let first = perturb(&along_a)?;
    let second = perturb(&along_plus)?;

    let angle = dominant_angle(&schmidt_decompose(&first, 1)?, &schmidt_decompose(&second, 1)?)?;
    Ok(SchmidtInstability {
        state_distance: first.distance(&second)?,
        left_basis_angle: angle,
        first,
        second,
    })
}
