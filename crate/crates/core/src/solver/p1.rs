use crate::ellipsoid::Ellipsoid;
use crate::error::{OlexError, Result};
use crate::linalg::{checked_inverse, combine, det_normalize, expm_sym, frobenius_inner, sym_apply, symmetrize, trace_free_basis};
use crate::orlicz::OrliczFunction;
use crate::quadrature::SphericalGrid;
use crate::star_body::StarBody;
use crate::Matrix;

use super::measure::{P1Problem, Stats};
use super::oracles::legendre_closed_form;
use super::{Algorithm, Certificate, SolveOptions, SolveReport, Termination, WarmStart};

const MIN_STEP: f64 = 1e-14;
const ARMIJO: f64 = 1e-4;
const HESSIAN_STEP: f64 = 1e-4;
/// Relative objective change treated as rounding noise.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Solves P1: minimizes Ṽ_φ(K, E) over origin-symmetric ellipsoids of
/// volume ω_n. Returns the SPD-canonical minimizer.
pub fn solve_p1(
    body: &StarBody,
    phi: &OrliczFunction,
    grid: &SphericalGrid,
    opts: &SolveOptions,
) -> Result<(Ellipsoid, SolveReport)> {
    let (_, report) = solve_scaled(body, phi, grid, opts, 1.0, None)?;
    Ok((report.final_ellipsoid.clone(), report))
}

/// P1 for `K / scale`, optionally started from the SPD factor `start`.
/// Returns the final factor A with det A = 1 alongside the report.
pub(crate) fn solve_scaled(
    body: &StarBody,
    phi: &OrliczFunction,
    grid: &SphericalGrid,
    opts: &SolveOptions,
    scale: f64,
    start: Option<&Matrix>,
) -> Result<(Matrix, SolveReport)> {
    opts.validate()?;
    phi.validate()?;
    if body.dim() != grid.dim() {
        return Err(OlexError::Config(format!(
            "dimension mismatch: body is {}-dimensional, grid is {}-dimensional",
            body.dim(),
            grid.dim()
        )));
    }
    let n = body.dim();
    let problem = P1Problem::new(body, grid, phi, scale)?;
    let a0 = match start {
        Some(a) => canonical(a)?,
        None => match opts.warm_start {
            WarmStart::UnitBall => Matrix::identity(n, n),
            WarmStart::Legendre => {
                let leg = legendre_closed_form(&body.scaled(1.0 / scale)?, grid)?;
                canonical(&leg.canonical_spd_factor())?
            }
        },
    };
    match opts.algorithm {
        Algorithm::Gradient => {
            if !phi.is_c1() {
                return Err(OlexError::Capability(
                    "φ has no continuous derivative; use the derivative_free algorithm".into(),
                ));
            }
            newton(&problem, opts, a0)
        }
        Algorithm::DerivativeFree => nelder_mead(&problem, opts, a0),
    }
}

/// SPD representative (A·Aᵗ)^{1/2} with unit determinant.
fn canonical(a: &Matrix) -> Result<Matrix> {
    let p = symmetrize(&(a * a.transpose()));
    det_normalize(&sym_apply(&p, f64::sqrt))
}

fn checked_stats(problem: &P1Problem, a: &Matrix) -> Result<Stats> {
    let s = problem.stats(&checked_inverse(a, "P1 iterate")?);
    if !s.objective.is_finite() || !s.total.is_finite() {
        return Err(OlexError::Numeric("P1 objective overflowed; rescale the body".into()));
    }
    if !(s.total > 0.0) {
        return Err(OlexError::DegenerateInput("optimality measure has zero mass".into()));
    }
    Ok(s)
}

struct Trace {
    objective: Vec<f64>,
    residual: Vec<f64>,
    step: Vec<f64>,
}

fn finish(a: Matrix, trace: Trace, terminated: Termination, certificate: Certificate, flushed: usize) -> Result<(Matrix, SolveReport)> {
    let mut notes = Vec::new();
    if flushed > 0 {
        notes.push(format!("{flushed} optimality masses below 1e-300 flushed to zero"));
    }
    let final_ellipsoid = Ellipsoid::from_factor(&a)?;
    let report = SolveReport {
        iterations: trace.step.len(),
        objective_trace: trace.objective,
        isotropy_residual_trace: trace.residual,
        step_trace: trace.step,
        outer_lambda_trace: Vec::new(),
        inner_starts: vec![0],
        terminated,
        certificate,
        final_ellipsoid,
        notes,
    };
    Ok((a, report))
}

/// Gradient in the local chart y ↦ A·exp(−Σ y_j E_j).
fn local_gradient(stats: &Stats, basis: &[Matrix]) -> Vec<f64> {
    let d = stats.gradient();
    basis.iter().map(|e| frobenius_inner(&d, e)).collect()
}

fn chart(a: &Matrix, basis: &[Matrix], y: &[f64]) -> Matrix {
    a * expm_sym(&(-combine(basis, y)))
}

/// Central finite-difference Hessian of the analytic local gradient.
fn local_hessian(problem: &P1Problem, a: &Matrix, basis: &[Matrix]) -> Result<Matrix> {
    let k = basis.len();
    let mut h = Matrix::zeros(k, k);
    let mut y = vec![0.0; k];
    for j in 0..k {
        y[j] = HESSIAN_STEP;
        let gp = local_gradient(&checked_stats(problem, &chart(a, basis, &y))?, basis);
        y[j] = -HESSIAN_STEP;
        let gm = local_gradient(&checked_stats(problem, &chart(a, basis, &y))?, basis);
        y[j] = 0.0;
        for i in 0..k {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * HESSIAN_STEP);
        }
    }
    Ok(symmetrize(&h))
}

/// Newton direction when the Hessian is positive definite, otherwise the
/// normalized negative gradient of length `step_init`.
fn direction(h: &Matrix, g: &[f64], step_init: f64) -> Vec<f64> {
    let k = g.len();
    let gv = nalgebra::DVector::from_column_slice(g);
    if let Some(chol) = nalgebra::linalg::Cholesky::new(h.clone()) {
        let d = -chol.solve(&gv);
        if d.iter().all(|v| v.is_finite()) && d.dot(&gv) < 0.0 {
            return d.iter().copied().collect();
        }
    }
    let gn = gv.norm();
    (0..k).map(|i| -step_init * g[i] / gn).collect()
}

fn newton(problem: &P1Problem, opts: &SolveOptions, a0: Matrix) -> Result<(Matrix, SolveReport)> {
    let basis = trace_free_basis(problem.dim);
    let mut a = a0;
    let mut stats = checked_stats(problem, &a)?;
    let mut trace = Trace { objective: vec![stats.objective], residual: vec![stats.residual()], step: Vec::new() };
    let mut terminated = Termination::MaxIters;
    loop {
        let residual = stats.residual();
        if residual < opts.isotropy_tol {
            terminated = Termination::Converged;
            break;
        }
        if trace.step.len() >= opts.max_iterations {
            break;
        }
        let g = local_gradient(&stats, &basis);
        let h = local_hessian(problem, &a, &basis)?;
        let d = direction(&h, &g, opts.step_init);
        let slope: f64 = g.iter().zip(&d).map(|(x, y)| x * y).sum();
        let mut t = 1.0;
        let accepted = loop {
            let y: Vec<f64> = d.iter().map(|v| v * t).collect();
            let cand = canonical(&chart(&a, &basis, &y))?;
            let cs = checked_stats(problem, &cand)?;
            let armijo = cs.objective <= stats.objective + ARMIJO * t * slope;
            // Near the optimum the decrease drops below rounding; accept when
            // the certificate halves and the change is within rounding.
            let noise = ROUNDOFF * stats.objective.abs();
            let roundoff = (cs.objective - stats.objective).abs() <= noise && cs.residual() <= 0.5 * residual;
            if armijo || roundoff {
                break Some((cand, cs, t * d.iter().map(|v| v * v).sum::<f64>().sqrt()));
            }
            t *= opts.backtrack_factor;
            if t < MIN_STEP {
                break None;
            }
        };
        match accepted {
            Some((cand, cs, len)) => {
                a = cand;
                stats = cs;
                trace.objective.push(stats.objective);
                trace.residual.push(stats.residual());
                trace.step.push(len);
            }
            None => {
                terminated = Termination::LineSearchStall;
                break;
            }
        }
    }
    let certificate = Certificate::Isotropic { residual: stats.residual() };
    finish(a, trace, terminated, certificate, stats.flushed)
}

/// Nelder–Mead over S in A = exp(S), started at the chart of `a0`.
fn nelder_mead(problem: &P1Problem, opts: &SolveOptions, a0: Matrix) -> Result<(Matrix, SolveReport)> {
    let basis = trace_free_basis(problem.dim);
    let k = basis.len();
    let s0 = sym_apply(&a0, f64::ln);
    let y0: Vec<f64> = basis.iter().map(|e| frobenius_inner(&s0, e)).collect();
    let eval = |y: &[f64]| -> Result<f64> {
        let a = expm_sym(&combine(&basis, y));
        let v = problem.objective(&checked_inverse(&a, "P1 iterate")?);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(OlexError::Numeric("P1 objective overflowed; rescale the body".into()))
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
    simplex.push((y0.clone(), eval(&y0)?));
    for j in 0..k {
        let mut y = y0.clone();
        y[j] += opts.step_init;
        let f = eval(&y)?;
        simplex.push((y, f));
    }
    let sort = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    sort(&mut simplex);
    let mut trace = Trace { objective: vec![simplex[0].1], residual: Vec::new(), step: Vec::new() };
    let mut terminated = Termination::MaxIters;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    while trace.step.len() < opts.max_iterations {
        let best = simplex[0].1;
        let worst = simplex[k].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(y, _)| y.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if worst - best <= 1e-15 * best.abs() && diameter < 1e-9 {
            terminated = Termination::Converged;
            break;
        }
        let mut centroid = vec![0.0; k];
        for (y, _) in &simplex[..k] {
            for (c, v) in centroid.iter_mut().zip(y) {
                *c += v / k as f64;
            }
        }
        let xw = simplex[k].0.clone();
        let xr = lerp(&centroid, &xw, -1.0);
        let fr = eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = lerp(&centroid, &xw, -2.0);
            let fe = eval(&xe)?;
            simplex[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[k - 1].1 {
            simplex[k] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = lerp(&centroid, &xr, 0.5);
                let fc = eval(&xc)?;
                (xc, fc)
            } else {
                let xc = lerp(&centroid, &xw, 0.5);
                let fc = eval(&xc)?;
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[k] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let y = lerp(&x0, &item.0, 0.5);
                    let f = eval(&y)?;
                    *item = (y, f);
                }
            }
        }
        let prev = simplex[0].0.clone();
        sort(&mut simplex);
        let moved = simplex[0].0.iter().zip(&prev).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        trace.objective.push(simplex[0].1);
        trace.step.push(moved);
    }
    let a = canonical(&expm_sym(&combine(&basis, &simplex[0].0)))?;
    finish(a, trace, terminated, Certificate::Unavailable, 0)
}
