use crate::dual_volume::FunctionalContext;
use crate::ellipsoid::Ellipsoid;
use crate::error::{OlexError, Result};
use crate::linalg::{ball_volume, checked_inverse};
use crate::orlicz::OrliczFunction;
use crate::quadrature::SphericalGrid;
use crate::star_body::StarBody;
use crate::Matrix;

use super::p1::solve_scaled;
use super::{Certificate, SolveOptions, SolveReport, Termination};

/// Solves P2: minimizes O_φ(K, E) over origin-symmetric ellipsoids of volume
/// ω_n, by the fixed point λ ↦ O_φ(K, P1(K/λ)).
///
/// The traces of the inner P1 solves are concatenated in the report.
pub fn solve_p2(
    body: &StarBody,
    phi: &OrliczFunction,
    grid: &SphericalGrid,
    opts: &SolveOptions,
) -> Result<(Ellipsoid, SolveReport)> {
    let (_, report) = fixed_point(body, phi, grid, opts)?;
    Ok((report.final_ellipsoid.clone(), report))
}

fn fixed_point(
    body: &StarBody,
    phi: &OrliczFunction,
    grid: &SphericalGrid,
    opts: &SolveOptions,
) -> Result<(Matrix, SolveReport)> {
    opts.validate()?;
    let ctx = FunctionalContext::new(body.clone(), grid.clone(), phi.clone())?;
    let n = body.dim();
    // Start at the radius of the ball with the volume of K.
    let mut lambda = (ctx.volume() / ball_volume(n)).powf(1.0 / n as f64);
    let mut lambdas = vec![lambda];
    let mut a: Option<Matrix> = None;
    let mut merged: Option<SolveReport> = None;
    let mut last_delta = 0.0f64;
    let mut damped = false;
    let mut outer_converged = false;
    for _ in 0..opts.max_iterations {
        let (a_k, rep) = solve_scaled(body, phi, grid, opts, lambda, a.as_ref())?;
        let e = Ellipsoid::from_factor(&a_k)?;
        let mut next = ctx.o_phi(&e)?;
        let delta = next - lambda;
        merged = Some(match merged {
            None => rep,
            Some(mut m) => {
                m.inner_starts.push(m.objective_trace.len());
                m.iterations += rep.iterations;
                m.objective_trace.extend(rep.objective_trace);
                m.isotropy_residual_trace.extend(rep.isotropy_residual_trace);
                m.step_trace.extend(rep.step_trace);
                m.terminated = rep.terminated;
                m.certificate = rep.certificate;
                m.final_ellipsoid = rep.final_ellipsoid;
                for note in rep.notes {
                    if !m.notes.contains(&note) {
                        m.notes.push(note);
                    }
                }
                m
            }
        });
        a = Some(a_k);
        if delta.abs() <= opts.outer_tol * lambda {
            lambdas.push(next);
            outer_converged = true;
            break;
        }
        if delta * last_delta < 0.0 {
            next = lambda + 0.5 * delta;
            damped = true;
        }
        last_delta = delta;
        lambda = next;
        lambdas.push(lambda);
    }
    let mut report = merged.ok_or_else(|| OlexError::Internal("outer loop ran no inner solve".into()))?;
    if !outer_converged {
        report.terminated = Termination::MaxIters;
    }
    if damped {
        report.notes.push("outer λ iteration oscillated; damping 0.5 applied".into());
    }
    report.outer_lambda_trace = lambdas;
    let a = a.ok_or_else(|| OlexError::Internal("outer loop ran no inner solve".into()))?;
    Ok((a, report))
}

/// The Orlicz-Legendre ellipsoid L_φK = O_φ(K, L̄_φK)·L̄_φK, where L̄_φK
/// solves P2.
pub fn orlicz_legendre(
    body: &StarBody,
    phi: &OrliczFunction,
    grid: &SphericalGrid,
    opts: &SolveOptions,
) -> Result<(Ellipsoid, SolveReport)> {
    let (normalized, mut report) = solve_p2(body, phi, grid, opts)?;
    let ctx = FunctionalContext::new(body.clone(), grid.clone(), phi.clone())?;
    let lambda = ctx.o_phi(&normalized)?;
    report.final_ellipsoid = normalized.scaled(lambda);
    Ok((report.final_ellipsoid.clone(), report))
}

/// T ∈ SL(n) putting K in the position where φ′(ρ)ρ^{n+1} dS is isotropic.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicPosition {
    /// Inverse of the SPD optimal factor of P1 for K.
    pub t: Matrix,
    /// Isotropy residual of the optimality measure of T·K.
    pub residual: f64,
    pub report: SolveReport,
}

pub fn isotropic_position(
    body: &StarBody,
    phi: &OrliczFunction,
    grid: &SphericalGrid,
    opts: &SolveOptions,
) -> Result<IsotropicPosition> {
    let (a, report) = solve_scaled(body, phi, grid, opts, 1.0, None)?;
    let residual = match report.certificate {
        Certificate::Isotropic { residual } => residual,
        Certificate::Unavailable => {
            return Err(OlexError::Capability("isotropic position needs the gradient algorithm".into()))
        }
    };
    let t = checked_inverse(&a, "P1 factor")?;
    Ok(IsotropicPosition { t, residual, report })
}
