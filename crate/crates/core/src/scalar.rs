//! Floating-point abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use faer::{Mat, Side};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Real scalar type the workbench is generic over (`f32` or `f64`).
///
/// Besides the usual float arithmetic it carries the dense Hermitian
/// eigensolver and the FFT, which are only available for concrete machine
/// types.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Eigenvalues of a Hermitian matrix in ascending order. Only the lower
    /// triangle is read.
    fn hermitian_eigenvalues(matrix: &CMatrix<Self>) -> Result<Vec<Self>>;

    /// Eigenvalues (ascending) and unit eigenvectors (as columns) of a
    /// Hermitian matrix.
    fn hermitian_eigen(matrix: &CMatrix<Self>) -> Result<(Vec<Self>, CMatrix<Self>)>;

    /// Unnormalized in-place 1-D FFT of every contiguous chunk of `len`
    /// values in `buffer` (`exp(-i k x)` forward, `exp(+i k x)` inverse).
    fn fft_chunks(buffer: &mut [Complex<Self>], len: usize, inverse: bool);
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn hermitian_eigenvalues(matrix: &CMatrix<$t>) -> Result<Vec<$t>> {
                let n = matrix.rows();
                let mut values = if n == 1 {
                    vec![matrix[(0, 0)].re]
                } else if matrix.is_real() {
                    let m = Mat::<$t>::from_fn(n, n, |i, j| matrix[(i, j)].re);
                    m.self_adjoint_eigenvalues(Side::Lower)
                        .map_err(|e| Error::EigenSolver(format!("{e:?}")))?
                } else {
                    let m = Mat::<Complex<$t>>::from_fn(n, n, |i, j| matrix[(i, j)]);
                    m.self_adjoint_eigenvalues(Side::Lower)
                        .map_err(|e| Error::EigenSolver(format!("{e:?}")))?
                };
                values.sort_by(|a, b| a.total_cmp(b));
                Ok(values)
            }

            fn hermitian_eigen(matrix: &CMatrix<$t>) -> Result<(Vec<$t>, CMatrix<$t>)> {
                let n = matrix.rows();
                let m = Mat::<Complex<$t>>::from_fn(n, n, |i, j| matrix[(i, j)]);
                let evd = m
                    .self_adjoint_eigen(Side::Lower)
                    .map_err(|e| Error::EigenSolver(format!("{e:?}")))?;
                let s = evd.S().column_vector();
                let u = evd.U();
                let values = (0..n).map(|i| s[i].re).collect();
                let vectors = CMatrix::from_fn(n, n, |i, j| u[(i, j)]);
                Ok((values, vectors))
            }

            fn fft_chunks(buffer: &mut [Complex<$t>], len: usize, inverse: bool) {
                let mut planner = FftPlanner::<$t>::new();
                let fft = if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                };
                fft.process(buffer);
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts an index or count into the working scalar type.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Lossy conversion used for error payloads and logging.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Tolerance floor: `tol` or a small multiple of machine epsilon,
/// whichever is larger, so f32 runs get a meaningful bound.
#[inline]
pub fn tol_floor<T: Real>(tol: f64) -> T {
    let eps_tol = T::epsilon() * lit(64.0);
    lit::<T>(tol).max(eps_tol)
}
