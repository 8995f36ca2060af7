//! Orlicz-Legendre ellipsoid solvers and their oracles.
//!
//! The volume-normalized problem is solved over `SL(n)` in the factorization
//! `E = A·B` with `A = exp(S)`, `S` symmetric and trace-free. Optimality is
//! certified by isotropy of the measure `φ′(ρ)ρ^{n+1} dS` of `A⁻¹K`.

mod measure;
mod oracles;
mod p1;
mod p2;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::ellipsoid::Ellipsoid;
use crate::error::{OlexError, Result};

pub use measure::{isotropy_residual, mu_phi, p1_gradient, MuPhiMeasure};
pub use oracles::{legendre_closed_form, loewner, LOEWNER_TOL};
pub use p1::solve_p1;
pub use p2::{isotropic_position, orlicz_legendre, solve_p2, IsotropicPosition};
pub use sweep::{limit_sweep, SweepEntry, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Second-order descent along the variational gradient; needs φ ∈ C¹.
    Gradient,
    /// Nelder–Mead on the coordinates of `S`; no optimality certificate.
    DerivativeFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    UnitBall,
    /// Start from the normalized Legendre ellipsoid.
    Legendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iterations: usize,
    pub isotropy_tol: f64,
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub outer_tol: f64,
    pub algorithm: Algorithm,
    pub warm_start: WarmStart,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 500,
            isotropy_tol: 1e-8,
            step_init: 0.25,
            backtrack_factor: 0.5,
            outer_tol: 1e-10,
            algorithm: Algorithm::Gradient,
            warm_start: WarmStart::UnitBall,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(OlexError::Config(format!("invalid solve option: {what}")));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.isotropy_tol > 0.0) || !(self.outer_tol > 0.0) || !(self.step_init > 0.0) {
            return bad("tolerances and step_init must be > 0");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    LineSearchStall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Final isotropy residual of the optimality measure.
    Isotropic { residual: f64 },
    /// Derivative-free runs stop on objective stagnation only.
    Unavailable,
}

/// Iteration trace of a solve.
///
/// For P1 the objective is Ṽ_φ and is nonincreasing up to rounding. For P2
/// and the Orlicz-Legendre ellipsoid the traces of the inner P1 solves are
/// concatenated; `inner_starts` marks where each begins.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub isotropy_residual_trace: Vec<f64>,
    pub step_trace: Vec<f64>,
    pub outer_lambda_trace: Vec<f64>,
    pub inner_starts: Vec<usize>,
    pub terminated: Termination,
    pub certificate: Certificate,
    pub final_ellipsoid: Ellipsoid,
    pub notes: Vec<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.terminated == Termination::Converged
    }

    /// Final isotropy residual, when a certificate exists.
    pub fn final_residual(&self) -> Option<f64> {
        match self.certificate {
            Certificate::Isotropic { residual } => Some(residual),
            Certificate::Unavailable => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn option_validation() {
        assert!(SolveOptions::default().validate().is_ok());
        let o = SolveOptions { backtrack_factor: 1.0, ..Default::default() };
        assert!(o.validate().is_err());
        let o = SolveOptions { isotropy_tol: 0.0, ..Default::default() };
        assert!(o.validate().is_err());
        let o = SolveOptions { max_iterations: 0, ..Default::default() };
        assert!(o.validate().is_err());
    }
}
