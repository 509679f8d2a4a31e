//! Cooperative cell-free ISAC network simulator.
//!
//! A network of `J` multi-antenna base stations jointly serves single-antenna
//! communication users and detects point targets from reflected echoes. Each
//! BS is assigned a transmitter or receiver role by a binary mode vector; the
//! library provides
//!
//! - reproducible random scenario generation ([`scenario`]),
//! - the network model: mode vectors, beamformers, receive filters, stacked
//!   sensing matrices and both SINR metrics ([`model`]),
//! - numerical kernels: a second-order cone solver and a largest generalized
//!   eigenpair solver ([`conic`]),
//! - the alternating fractional-programming / majorization-minimization
//!   beamforming optimizer ([`fpmm`]),
//! - heuristic and exhaustive BS mode selection ([`selection`]),
//! - a Monte Carlo sweep harness with CSV/JSON output ([`harness`]).
//!
//! All core math is generic over the scalar type through the [`Real`] trait
//! (`f32` or `f64`); the harness and CLI work at `f64`.

pub mod conic;
pub mod error;
pub mod fpmm;
pub mod harness;
pub mod model;
pub mod scenario;
pub mod selection;
pub mod units;

pub use error::{Error, Result};
pub use model::{Beamformer, FilterBank, ModeVector, SensingMatrices};
pub use scenario::{NetworkConfig, Scenario};

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{Float, FromPrimitive};

/// Scalar types the core math is generic over: `f32` and `f64`.
pub trait Real:
    RealField + Float + FromPrimitive + Default + Copy + Send + Sync + std::iter::Sum
{
}
impl<T> Real for T where
    T: RealField + Float + FromPrimitive + Default + Copy + Send + Sync + std::iter::Sum
{
}

/// Complex scalar over the generic real type.
pub type Cplx<T> = Complex<T>;
/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVec<T> = DVector<Complex<T>>;
/// Dense real matrix.
pub type RMat<T> = DMatrix<T>;
/// Dense real column vector.
pub type RVec<T> = DVector<T>;

/// Default-precision aliases used by the harness and CLI.
pub type Config64 = NetworkConfig<f64>;
pub type Scenario64 = Scenario<f64>;
pub type Beamformer64 = Beamformer<f64>;
pub type FilterBank64 = FilterBank<f64>;

/// Converts an `f64` literal into the generic scalar.
pub(crate) fn conv<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 must convert to the scalar type")
}
