//! Complex-to-real lifting for cone-program construction.
//!
//! A complex vector `w` maps to `x = [Re(w); Im(w)]`. A complex linear
//! functional `a^H w` maps to two real rows so that squared magnitudes, and
//! hence quadratic-form values, are preserved.

use crate::{CVec, RVec, Real};

/// Stacks `[Re(w); Im(w)]`.
pub fn lift_vector<T: Real>(w: &CVec<T>) -> RVec<T> {
    let n = w.len();
    RVec::from_fn(2 * n, |i, _| if i < n { w[i].re } else { w[i - n].im })
}

/// Inverse of [`lift_vector`].
pub fn unlift_vector<T: Real>(x: &RVec<T>) -> CVec<T> {
    let n = x.len() / 2;
    assert_eq!(x.len(), 2 * n, "lifted vector must have even length");
    CVec::from_fn(n, |i, _| crate::Cplx::new(x[i], x[i + n]))
}

/// Real rows `(re_row, im_row)` of the functional `w -> a^H w` over the
/// lifted variable: `re_row . x = Re(a^H w)` and `im_row . x = Im(a^H w)`.
pub fn lift_functional<T: Real>(a: &CVec<T>) -> (RVec<T>, RVec<T>) {
    let n = a.len();
    let re = RVec::from_fn(2 * n, |i, _| if i < n { a[i].re } else { a[i - n].im });
    let im = RVec::from_fn(2 * n, |i, _| if i < n { -a[i].im } else { a[i - n].re });
    (re, im)
}
