use rayon::prelude::*;
use serde::Serialize;

use crate::ellipsoid::Ellipsoid;
use crate::error::{OlexError, Result};
use crate::orlicz::OrliczFunction;
use crate::quadrature::SphericalGrid;
use crate::star_body::StarBody;

use super::oracles::loewner;
use super::p2::orlicz_legendre;
use super::{SolveOptions, Termination};

/// One exponent of a sweep. On failure only `p` and `error` are set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub p: f64,
    #[serde(skip)]
    pub ellipsoid: Option<Ellipsoid>,
    pub volume: Option<f64>,
    pub dist_to_loewner: Option<f64>,
    pub terminated: Option<Termination>,
    pub iterations: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub loewner: Ellipsoid,
    pub entries: Vec<SweepEntry>,
}

/// Worker count from `OLEX_THREADS`, if set to a positive integer.
pub(crate) fn thread_cap() -> Option<usize> {
    std::env::var("OLEX_THREADS").ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// L_{φ^p}K for each p, with volume and Frobenius distance of the shape
/// matrix to that of the Löwner ellipsoid. Entries are solved concurrently
/// and returned in input order.
pub fn limit_sweep(
    body: &StarBody,
    phi: &OrliczFunction,
    p_list: &[f64],
    grid: &SphericalGrid,
    opts: &SolveOptions,
) -> Result<SweepResult> {
    opts.validate()?;
    if p_list.is_empty() {
        return Err(OlexError::Config("p list is empty".into()));
    }
    if p_list.iter().any(|p| !(*p >= 1.0) || !p.is_finite()) {
        return Err(OlexError::Config("every p must be a finite number ≥ 1".into()));
    }
    if p_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OlexError::Config("p list must be strictly increasing".into()));
    }
    let outer = loewner(body, grid)?;
    let run = |p: &f64| -> SweepEntry {
        let outcome = OrliczFunction::power_of(phi.clone(), *p)
            .and_then(|phi_p| orlicz_legendre(body, &phi_p, grid, opts));
        match outcome {
            Ok((e, rep)) => SweepEntry {
                p: *p,
                volume: Some(e.volume()),
                dist_to_loewner: Some((e.shape_matrix() - outer.shape_matrix()).norm()),
                terminated: Some(rep.terminated),
                iterations: Some(rep.iterations),
                ellipsoid: Some(e),
                error: None,
            },
            Err(err) => SweepEntry {
                p: *p,
                ellipsoid: None,
                volume: None,
                dist_to_loewner: None,
                terminated: None,
                iterations: None,
                error: Some(err.to_string()),
            },
        }
    };
    let entries = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| OlexError::Internal(format!("thread pool: {e}")))?
            .install(|| p_list.par_iter().map(run).collect()),
        None => p_list.par_iter().map(run).collect(),
    };
    Ok(SweepResult { loewner: outer, entries })
}
