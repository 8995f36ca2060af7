//! Orlicz-Legendre ellipsoids of star bodies.
//!
//! The crate computes the minimum-volume origin-symmetric ellipsoid `L_φ K`
//! whose Orlicz norm constraint `O_φ(K, E) ≤ 1` is active, the normalized
//! variant, the classical Legendre ellipsoid (`φ(t) = t²`) in closed form and
//! the minimum-volume origin-symmetric ellipsoid containing `K`.
//!
//! All integrals over the unit sphere are replaced by sums over a fixed
//! [`SphericalGrid`]; every functional of a single solve is evaluated on the
//! same grid.
//!
//! ```
//! use olex::{orlicz_legendre, OrliczFunction, Scheme, SolveOptions, SphericalGrid, StarBody};
//!
//! let grid = SphericalGrid::build(2, 256, Scheme::UniformCircle).unwrap();
//! let square = StarBody::cuboid(vec![1.0, 1.0]).unwrap();
//! let (legendre, _) =
//!     orlicz_legendre(&square, &OrliczFunction::power(2.0).unwrap(), &grid, &SolveOptions::default())
//!         .unwrap();
//! assert!((legendre.max_principal_radius() - (4.0f64 / 3.0).sqrt()).abs() < 1e-4);
//! ```

pub mod cli;
pub mod dual_volume;
pub mod ellipsoid;
pub mod error;
mod hull;
pub mod linalg;
pub mod orlicz;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod star_body;

pub use dual_volume::{measured_quadrature_tolerance, FunctionalContext, RadialFunction};
pub use ellipsoid::Ellipsoid;
pub use error::{OlexError, Result};
pub use orlicz::{orlicz_norm, phi_mean, OrliczFunction, PhiSpec, WeightedSamples};
pub use quadrature::{Scheme, SphericalGrid};
pub use solver::{
    isotropic_position, isotropy_residual, legendre_closed_form, limit_sweep, loewner, mu_phi,
    orlicz_legendre, p1_gradient, solve_p1, solve_p2, Algorithm, Certificate, IsotropicPosition,
    MuPhiMeasure, SolveOptions, SolveReport, SweepEntry, Termination, WarmStart,
};
pub use star_body::{BodySpec, DualConicalMeasure, StarBody};

/// Matrices are dynamically sized; dimensions are small (n ≤ 4 in practice).
pub type Matrix = nalgebra::DMatrix<f64>;
