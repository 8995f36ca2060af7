//! JSON run reports (schema `olex/1`) and CSV traces.
//!
//! Reports contain no timestamps or timings unless requested, so identical
//! runs produce byte-identical output.

use std::io::Write;

use serde::Serialize;

use crate::dual_volume::FunctionalContext;
use crate::ellipsoid::{Ellipsoid, EllipsoidSpec};
use crate::error::Result;
use crate::linalg::ball_volume;
use crate::orlicz::PhiSpec;
use crate::quadrature::SphericalGrid;
use crate::solver::{Certificate, SolveOptions, SolveReport, SweepEntry, Termination};
use crate::star_body::BodySpec;

pub const SCHEMA: &str = "olex/1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub input: InputEcho,
    pub grid: GridInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ellipsoid: Option<EllipsoidInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functionals: Option<Functionals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isotropy_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volumes: Option<VolumeDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<Check>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub body: BodySpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub options: Option<SolveOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub scheme: &'static str,
    pub resolution: usize,
    pub nodes: usize,
    pub seed: Option<u64>,
}

impl GridInfo {
    pub fn of(grid: &SphericalGrid) -> Self {
        GridInfo {
            scheme: grid.scheme().name(),
            resolution: grid.resolution(),
            nodes: grid.len(),
            seed: grid.scheme().seed(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipsoidInfo {
    #[serde(flatten)]
    pub shape: EllipsoidSpec,
    pub semi_axes: Vec<f64>,
    pub axes: Vec<Vec<f64>>,
    pub volume: f64,
}

impl EllipsoidInfo {
    pub fn of(e: &Ellipsoid) -> Self {
        let (semi_axes, axes) = e.principal_axes();
        // adding 0.0 turns −0.0 into 0.0
        let clean = |rows: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            rows.into_iter().map(|r| r.into_iter().map(|x| x + 0.0).collect()).collect()
        };
        let shape = EllipsoidSpec { q: clean(e.to_spec().q) };
        EllipsoidInfo { shape, semi_axes, axes: clean(axes), volume: e.volume() }
    }
}

/// Ṽ_φ, V̄_φ and O_φ of the body against the reported ellipsoid.
#[derive(Debug, Clone, Serialize)]
pub struct Functionals {
    pub dual_mixed_volume: f64,
    pub normalized_dual_volume: f64,
    pub o_phi: f64,
}

impl Functionals {
    pub fn of(ctx: &FunctionalContext, e: &Ellipsoid) -> Result<Self> {
        Ok(Functionals {
            dual_mixed_volume: ctx.dual_orlicz_mixed_volume(e)?,
            normalized_dual_volume: ctx.normalized_dual_volume(e)?,
            o_phi: ctx.o_phi(e)?,
        })
    }
}

/// Volume ratio of the result against K and the reference volumes around it.
#[derive(Debug, Clone, Serialize)]
pub struct VolumeDiagnostics {
    pub body_volume: f64,
    pub ellipsoid_volume: f64,
    /// V(E)/V(K); at least 1 up to quadrature tolerance.
    pub ratio: f64,
    pub quadrature_tolerance: f64,
    /// V(L₁K), the lower end of the volume chain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_volume: Option<f64>,
    /// Volume of the minimum-volume ellipsoid containing K.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loewner_volume: Option<f64>,
    /// 2ⁿ/(n!·ω_n), a lower bound for V(K)/V(E) when K is convex and
    /// origin-symmetric.
    pub inverse_ratio_bound: f64,
    pub inverse_ratio_bound_applies: bool,
}

/// 2ⁿ/(n!·ω_n).
pub fn inverse_ratio_bound(n: usize) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    2f64.powi(n as i32) / (fact * ball_volume(n))
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverInfo {
    pub iterations: usize,
    pub terminated: Termination,
    pub certificate: Certificate,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outer_lambda_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SolverInfo {
    pub fn of(r: &SolveReport) -> Self {
        SolverInfo {
            iterations: r.iterations,
            terminated: r.terminated,
            certificate: r.certificate,
            outer_lambda_trace: r.outer_lambda_trace.clone(),
            notes: r.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepInfo {
    pub loewner: EllipsoidInfo,
    pub entries: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(flatten)]
    pub entry: SweepEntry,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ellipsoid: Option<EllipsoidInfo>,
}

/// One verification check: `value` compared against `bound`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value ≥ bound − tolerance`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, bound, tolerance, passed: value >= bound - tolerance }
    }

    /// Passes when `value ≤ bound + tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, bound, tolerance, passed: value <= bound + tolerance }
    }
}

pub fn write_json(report: &Report, out: &mut impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// `iter,objective,isotropy_residual,step`; the step cell is empty on rows
/// that start an inner solve.
pub fn write_trace_csv(report: &SolveReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "objective", "isotropy_residual", "step"])?;
    let mut step = report.step_trace.iter();
    for (i, obj) in report.objective_trace.iter().enumerate() {
        let res = report.isotropy_residual_trace.get(i).map(|r| r.to_string()).unwrap_or_default();
        let s = if report.inner_starts.contains(&i) { String::new() } else { step.next().map(|s| s.to_string()).unwrap_or_default() };
        w.write_record([i.to_string(), obj.to_string(), res, s])?;
    }
    w.flush()?;
    Ok(())
}

/// `p,volume,dist_to_loewner`; failed entries leave the value cells empty.
pub fn write_sweep_csv(entries: &[SweepEntry], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "volume", "dist_to_loewner"])?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for e in entries {
        w.write_record([e.p.to_string(), cell(e.volume), cell(e.dist_to_loewner)])?;
    }
    w.flush()?;
    Ok(())
}
