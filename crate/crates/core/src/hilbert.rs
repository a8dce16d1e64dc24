//! Dense linear algebra on finite-dimensional tensor-product Hilbert spaces.
//!
//! Every state and operator carries the list of its factor dimensions. Tensor
//! products concatenate those lists with the first factor varying slowest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tolerance;

/// A normalized pure state over a tensor-product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Wraps `amplitudes`, which must already be normalized.
    pub fn new(dims: Vec<usize>, amplitudes: DVector<C64>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tolerance::NORM {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { dims, amplitudes })
    }

    /// Wraps `amplitudes` after dividing by their norm.
    pub fn normalized(dims: Vec<usize>, amplitudes: DVector<C64>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            dims,
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn from_slice(dims: Vec<usize>, amplitudes: &[C64]) -> Result<Self> {
        Self::new(dims, DVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|index⟩` of the full space.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let dim = total_dim(&dims);
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Self::new(dims, amplitudes)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        same_dims(&self.dims, &other.dims)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Euclidean distance between the amplitude vectors.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        same_dims(&self.dims, &other.dims)?;
        Ok((&self.amplitudes - &other.amplitudes).norm())
    }
}

/// A square operator on a tensor-product space, not necessarily Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        check_square(&dims, &matrix)?;
        Ok(Self { dims, matrix })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            dims: self.dims.clone(),
            matrix: &self.matrix * factor,
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Checks Hermiticity and converts.
    pub fn into_hermitian(self) -> Result<HermitianOperator> {
        HermitianOperator::new(self.dims, self.matrix)
    }
}

/// A self-adjoint operator (within [`tolerance::HERMITICITY`]).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl HermitianOperator {
    pub fn new(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        check_square(&dims, &matrix)?;
        let deviation = hermiticity_deviation(&matrix);
        if deviation.is_nan() || deviation > tolerance::HERMITICITY {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { dims, matrix })
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let dim = total_dim(&dims);
        Self {
            dims,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let dim = total_dim(&dims);
        Self {
            dims,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_real_diagonal(dims: Vec<usize>, diagonal: &[f64]) -> Result<Self> {
        check_dims(&dims, diagonal.len())?;
        let diag = DVector::from_iterator(diagonal.len(), diagonal.iter().map(|&d| C64::from(d)));
        Ok(Self {
            dims,
            matrix: DMatrix::from_diagonal(&diag),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn as_operator(&self) -> Operator {
        Operator {
            dims: self.dims.clone(),
            matrix: self.matrix.clone(),
        }
    }

    /// `A|ψ⟩` as a raw amplitude vector; the result is generally not normalized.
    pub fn apply(&self, psi: &StateVector) -> Result<DVector<C64>> {
        same_dims(&self.dims, &psi.dims)?;
        Ok(&self.matrix * &psi.amplitudes)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `max |A - A†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    /// `max |A² - A|`; zero for a projector.
    pub fn idempotence_deviation(&self) -> f64 {
        max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }
}

/// Eigen-decomposition `A = V diag(λ) V†` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let diag = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| C64::from(l)),
        );
        &self.eigenvectors * DMatrix::from_diagonal(&diag) * self.eigenvectors.adjoint()
    }

    /// `max |V†V - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.eigenvectors.ncols();
        max_abs(&(self.eigenvectors.adjoint() * &self.eigenvectors - DMatrix::identity(n, n)))
    }

    /// `λ_max - λ_min`.
    pub fn spread(&self) -> f64 {
        match (self.eigenvalues.iter().next(), self.eigenvalues.iter().next_back()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

/// Kronecker product of two states.
pub fn tensor_state(a: &StateVector, b: &StateVector) -> StateVector {
    StateVector {
        dims: concat_dims(&a.dims, &b.dims),
        amplitudes: a.amplitudes.kronecker(&b.amplitudes),
    }
}

/// Kronecker product of two Hermitian operators, with the same index order as [`tensor_state`].
pub fn tensor_operator(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator {
        dims: concat_dims(&a.dims, &b.dims),
        matrix: a.matrix.kronecker(&b.matrix),
    }
}

/// `Σ_k |ψ_k⟩⟨ψ_k|` for mutually orthonormal `states`.
pub fn projector_onto(states: &[StateVector]) -> Result<HermitianOperator> {
    let first = states.first().ok_or_else(|| {
        Error::InvalidParameter("projector_onto needs at least one state".into())
    })?;
    for s in &states[1..] {
        same_dims(&first.dims, &s.dims)?;
    }
    let columns: Vec<DVector<C64>> = states.iter().map(|s| s.amplitudes.clone()).collect();
    let basis = DMatrix::from_columns(&columns);
    let deviation = gram_deviation(&basis);
    if deviation > tolerance::ORTHONORMALITY {
        return Err(Error::NonOrthonormalInput { deviation });
    }
    let matrix = &basis * basis.adjoint();
    HermitianOperator::new(first.dims.clone(), matrix)
}

/// `Re ⟨ψ|A|ψ⟩`; fails if the imaginary part is not negligible.
pub fn expectation(a: &HermitianOperator, psi: &StateVector) -> Result<f64> {
    let value = psi.amplitudes.dotc(&a.apply(psi)?);
    if value.im.abs() >= tolerance::IMAGINARY_EXPECTATION {
        return Err(Error::NonRealExpectation {
            imaginary: value.im,
        });
    }
    Ok(value.re)
}

/// `AB - BA`.
pub fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<Operator> {
    same_dims(&a.dims, &b.dims)?;
    Ok(Operator {
        dims: a.dims.clone(),
        matrix: &a.matrix * &b.matrix - &b.matrix * &a.matrix,
    })
}

pub fn spectral(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    let dim = a.dim();
    let eigen = a
        .matrix
        .clone()
        .try_symmetric_eigen(f64::EPSILON, tolerance::EIGEN_MAX_ITERATIONS)
        .ok_or(Error::EigensolverFailure { dim })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eigen.eigenvalues[i].total_cmp(&eigen.eigenvalues[j]));

    let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&i| eigen.eigenvalues[i]));
    let columns: Vec<_> = order
        .iter()
        .map(|&i| eigen.eigenvectors.column(i).into_owned())
        .collect();
    let eigenvectors = if columns.is_empty() {
        DMatrix::zeros(0, 0)
    } else {
        DMatrix::from_columns(&columns)
    };
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::EigensolverFailure { dim });
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

pub(crate) fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |B†B - I|` for a matrix whose columns should be orthonormal.
pub(crate) fn gram_deviation(columns: &DMatrix<C64>) -> f64 {
    let k = columns.ncols();
    max_abs(&(columns.adjoint() * columns - DMatrix::identity(k, k)))
}

pub(crate) fn same_dims(expected: &[usize], found: &[usize]) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            expected: expected.to_vec(),
            found: found.to_vec(),
        });
    }
    Ok(())
}

fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn concat_dims(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "factor dimensions must be positive, got {dims:?}"
        )));
    }
    if total_dim(dims) != len {
        return Err(Error::DimensionMismatch {
            expected: dims.to_vec(),
            found: vec![len],
        });
    }
    Ok(())
}

fn check_square(dims: &[usize], matrix: &DMatrix<C64>) -> Result<()> {
    check_dims(dims, matrix.nrows())?;
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::DimensionMismatch {
            expected: vec![matrix.nrows(), matrix.nrows()],
            found: vec![matrix.nrows(), matrix.ncols()],
        });
    }
    Ok(())
}
