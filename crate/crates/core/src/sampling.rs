//! Seeded random matrices shared by the instance generator and the tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::hermitian::{CMatrix, HermitianOperator};

/// Standard complex Gaussian entry: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    // Column-major fill order keeps the stream layout fixed.
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianOperator {
    let g = random_matrix(rng, n, n);
    HermitianOperator::hermitian_part(g)
}

pub fn random_real_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianOperator {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    HermitianOperator::from_real(&m).expect("symmetric by construction")
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = random_matrix(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}
