//! Largest generalized eigenpair of a Hermitian pencil `(B, C)`.

use crate::error::{Error, Result};
use crate::{CMat, CVec, Cplx, Real};
use nalgebra::{Cholesky, SymmetricEigen};
use num_traits::Float;

/// Returns `(lambda_max, v)` with `B v = lambda_max C v` and `||v|| = 1`,
/// for Hermitian positive semidefinite `B` and Hermitian positive definite
/// `C`.
///
/// Both inputs are Hermitian-symmetrized to scrub round-off asymmetry, `C`
/// is Cholesky-factored as `L L^H`, and the Hermitian eigenproblem of
/// `L^-1 B L^-H` is solved.
/// Cholesky of a Hermitian matrix with an explicit positivity check:
/// complex square roots never fail, so nalgebra's factorization succeeds
/// even on indefinite input and the pivots must be validated.
pub(crate) fn cholesky_pd<T: Real>(m: CMat<T>) -> Result<Cholesky<Cplx<T>, nalgebra::Dyn>> {
    let n = m.nrows();
    let chol = Cholesky::new(m)
        .ok_or_else(|| Error::NumericalDomain("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    for i in 0..n {
        let d = l[(i, i)];
        if !(d.re > T::zero()) || Float::abs(d.im) > crate::conv::<T>(1e-6) * d.re {
            return Err(Error::NumericalDomain(
                "matrix is not positive definite".into(),
            ));
        }
    }
    Ok(chol)
}

pub fn max_generalized_eigenpair<T: Real>(b: &CMat<T>, c: &CMat<T>) -> Result<(T, CVec<T>)> {
    let n = b.nrows();
    if b.ncols() != n || c.nrows() != n || c.ncols() != n || n == 0 {
        return Err(Error::InvalidArgument(
            "generalized eigenpair needs square matrices of equal nonzero size".into(),
        ));
    }
    let half = Cplx::new(crate::conv::<T>(0.5), T::zero());
    let b_h = (b + b.adjoint()) * half;
    let c_h = (c + c.adjoint()) * half;

    let chol = cholesky_pd(c_h)
        .map_err(|_| Error::NumericalDomain("matrix C is not positive definite".into()))?;
    let l = chol.l();

    // m = L^-1 B L^-H, via two triangular solves
    let x = l
        .solve_lower_triangular(&b_h)
        .ok_or_else(|| Error::NumericalDomain("singular Cholesky factor".into()))?;
    let m = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::NumericalDomain("singular Cholesky factor".into()))?
        .adjoint();
    let m = (&m + m.adjoint()) * half;

    let eig = SymmetricEigen::new(m);
    let mut best = 0usize;
    for i in 1..n {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let lambda = eig.eigenvalues[best];
    let y = eig.eigenvectors.column(best).into_owned();

    // v = L^-H y, then normalize
    let v = l
        .adjoint()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::NumericalDomain("singular Cholesky factor".into()))?;
    let norm = v.norm();
    if !(norm > T::zero()) {
        return Err(Error::NumericalDomain(
            "degenerate eigenvector of zero norm".into(),
        ));
    }
    Ok((lambda, v / Cplx::new(norm, T::zero())))
}
