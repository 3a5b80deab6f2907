//! Fat slits in the upper half plane: their conformal maps, harmonic
//! moments, Laplacian growth and the dispersionless KP flows they carry.
//!
//! The canonical state is a [`CutDensity`]: the height `h(p) = Im z(p + i0)`
//! of the boundary over the cut `[p_-, p_+]` of the inverse map `z(p)`.
//! Everything else (Laurent coefficients, moments, Green's functions,
//! velocities, the tau-functional) is derived from it by quadrature.

pub mod error;
pub mod growth;
pub mod io;
pub mod kernel;
pub mod quadrature;
pub mod series;
pub mod slit;
pub mod suites;
pub mod tau;

pub use error::{Error, Result};
pub use growth::{FlowState, IntegratorConfig, Method};
pub use kernel::DeformationProfile;
pub use series::{FaberPolynomial, TruncatedLaurent};
pub use tau::TauReport;
pub use slit::{BoundaryCurve, CutDensity, MomentSet, Side};

pub use num_complex::Complex64 as C64;
