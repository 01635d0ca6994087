//! Quasi-stationary distributions of time-changed symmetric α-stable
//! processes killed at the origin.
//!
//! The crate has three numerical layers:
//!
//! * [`stable_kernels`] and [`model_measure`]: closed-form Green kernels of the
//!   driving stable process, the speed measure `σ^{-α} dx` and the
//!   entrance-from-infinity functionals built from them.
//! * [`spectral`]: a symmetric Nyström discretization of the killed Green
//!   operator, its eigenpairs, the quasi-stationary law `ν ∝ ψ₀ dμ` and the
//!   quasi-ergodic law `m = ψ₀² dμ`.
//! * [`simulation`]: Euler Monte Carlo for `dY = σ(Y-) dX` with killing near
//!   zero, plus the estimators that are compared against the spectral side.
//!
//! [`config`] and [`commands`] wire these into the `qsdlab` binary.
//!
//! ```
//! use qsdlab::model_measure::{entrance_integral, SigmaProfile};
//! use qsdlab::stable_kernels::Alpha;
//!
//! let profile = SigmaProfile::polynomial(Alpha::new(1.5).unwrap(), 2.0).unwrap();
//! let i = entrance_integral(&profile).unwrap().finite().unwrap();
//! assert!((i - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
//! ```

pub mod commands;
pub mod config;
pub mod error;
pub mod model_measure;
pub mod output;
pub mod quadrature;
pub mod simulation;
pub mod special;
pub mod spectral;
pub mod stable_kernels;
pub mod stats;

pub use error::{Error, Result};
