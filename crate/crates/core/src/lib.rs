//! Fractional-order cancellation of non-minimum phase zeros and unstable poles.
//!
//! The crate is `no_std` (with `alloc`). It provides:
//!
//! * [`tf`]: commensurate fractional-order transfer functions over
//!   `w = s^(1/v)`, loop algebra, and the cancellers `Q_{lambda,v}(s)`;
//! * [`poly`]: polynomials in `w` and their roots;
//! * [`analysis`]: Bode data, gain/phase margins, Matignon's sector test and
//!   internal stability of a unity-feedback loop;
//! * [`approx`]: integer-order rational fits of fractional responses;
//! * [`timedomain`]: state-space realization, exact step simulation and
//!   undershoot/settling metrics.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod approx;
mod error;
mod linalg;
pub mod poly;
pub mod tf;
pub mod timedomain;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use poly::{wplane_roots, FractionalPoly};
pub use tf::{combine, make_canceller, make_ratio_canceller, CancellerSpec, Combine, CommensurateTf};
