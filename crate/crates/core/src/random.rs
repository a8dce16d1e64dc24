//! Random states, operators and measurement models for property checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{HermitianOperator, StateVector};
use crate::measurement::MeasurementModel;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn state<R: Rng + ?Sized>(rng: &mut R, dims: Vec<usize>) -> StateVector {
    let dim = dims.iter().product();
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    StateVector::normalized(dims, v).expect("gaussian vector is nonzero")
}

/// Random Hermitian operator `(G + G†) / 2` with entries of `G` scaled by `scale / sqrt(dim)`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dims: Vec<usize>, scale: f64) -> HermitianOperator {
    let dim: usize = dims.iter().product();
    let factor = scale / (dim as f64).sqrt();
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng) * factor);
    let h = (&g + g.adjoint()).unscale(2.0);
    HermitianOperator::new(dims, h).expect("symmetrized matrix is Hermitian")
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// A measurement model with Haar-random system and apparatus frames.
///
/// The number of outcomes is drawn from `2..=max_outcomes`, the apparatus gets
/// up to `max_extra_apparatus` levels beyond `|init⟩, |Oa_1..n⟩`, and couplings
/// are drawn from `[0.5, 2)`.
pub fn model<R: Rng + ?Sized>(
    rng: &mut R,
    max_outcomes: usize,
    max_extra_apparatus: usize,
) -> MeasurementModel {
    let n = rng.random_range(2..=max_outcomes.max(2));
    let extra = rng.random_range(0..=max_extra_apparatus);
    let system_frame = unitary(rng, n);
    let apparatus_frame = unitary(rng, n + 1 + extra);

    let system: Vec<StateVector> = (0..n)
        .map(|i| column_state(&system_frame, i))
        .collect();
    let ready = column_state(&apparatus_frame, 0);
    let pointers: Vec<StateVector> = (1..=n)
        .map(|i| column_state(&apparatus_frame, i))
        .collect();
    let couplings: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    MeasurementModel::rotation_in_frames(system, ready, pointers, &couplings)
        .expect("Haar frames are orthonormal")
}

fn column_state(frame: &DMatrix<C64>, k: usize) -> StateVector {
    StateVector::normalized(vec![frame.nrows()], frame.column(k).into_owned())
        .expect("unitary column is nonzero")
}
