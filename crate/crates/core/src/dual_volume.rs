//! Dual Orlicz mixed volume Ṽ_φ(K, L), its normalization and O_φ(K, L).

use crate::ellipsoid::Ellipsoid;
use crate::error::{OlexError, Result};
use crate::orlicz::{orlicz_norm, phi_mean, OrliczFunction, WeightedSamples};
use crate::quadrature::SphericalGrid;
use crate::star_body::{DualConicalMeasure, StarBody};

/// Anything with a radial function: star bodies and ellipsoids.
pub trait RadialFunction {
    fn dim(&self) -> usize;
    /// ρ(x) for nonzero x.
    fn radial_at(&self, x: &[f64]) -> f64;
}

impl RadialFunction for StarBody {
    fn dim(&self) -> usize {
        StarBody::dim(self)
    }

    fn radial_at(&self, x: &[f64]) -> f64 {
        self.rho(x)
    }
}

impl RadialFunction for Ellipsoid {
    fn dim(&self) -> usize {
        Ellipsoid::dim(self)
    }

    fn radial_at(&self, x: &[f64]) -> f64 {
        self.radial(x)
    }
}

/// A body K, a grid and φ, with the dual conical measure of K cached.
#[derive(Debug, Clone)]
pub struct FunctionalContext {
    body: StarBody,
    grid: SphericalGrid,
    measure: DualConicalMeasure,
    phi: OrliczFunction,
}

impl FunctionalContext {
    pub fn new(body: StarBody, grid: SphericalGrid, phi: OrliczFunction) -> Result<Self> {
        let measure = body.dual_conical(&grid)?;
        if !(measure.total > 0.0) {
            return Err(OlexError::DegenerateInput("body has zero volume on this grid".into()));
        }
        Ok(FunctionalContext { body, grid, measure, phi })
    }

    pub fn body(&self) -> &StarBody {
        &self.body
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    pub fn phi(&self) -> &OrliczFunction {
        &self.phi
    }

    pub fn measure(&self) -> &DualConicalMeasure {
        &self.measure
    }

    /// Quadrature volume of K (total dual conical mass).
    pub fn volume(&self) -> f64 {
        self.measure.total
    }

    /// Same body and grid with a different φ; reuses the cached measure.
    pub fn with_phi(&self, phi: OrliczFunction) -> Self {
        FunctionalContext { phi, ..self.clone() }
    }

    /// Ratios ρ_K/ρ_L at the nodes, weighted by the dual conical masses of K.
    pub fn ratio_samples(&self, other: &impl RadialFunction) -> Result<WeightedSamples> {
        if other.dim() != self.body.dim() {
            return Err(OlexError::Config(format!(
                "dimension mismatch: K is {}-dimensional, L is {}-dimensional",
                self.body.dim(),
                other.dim()
            )));
        }
        let values: Vec<f64> =
            self.grid.nodes().zip(&self.measure.rho).map(|(u, rk)| rk / other.radial_at(u)).collect();
        WeightedSamples::new(values, self.measure.masses.clone())
    }

    /// Ṽ_φ(K, L) = Σ m_i φ(ρ_K(u_i)/ρ_L(u_i)).
    pub fn dual_orlicz_mixed_volume(&self, other: &impl RadialFunction) -> Result<f64> {
        let s = self.ratio_samples(other)?;
        let v = s.mean_of(|r| self.phi.value(r)) * s.total();
        if !v.is_finite() {
            return Err(OlexError::Numeric(format!(
                "φ overflows on ratios up to {}; rescale the bodies",
                s.max_value()
            )));
        }
        Ok(v)
    }

    /// φ⁻¹(Ṽ_φ(K, L)/V(K)).
    pub fn normalized_dual_volume(&self, other: &impl RadialFunction) -> Result<f64> {
        phi_mean(&self.ratio_samples(other)?, &self.phi)
    }

    /// O_φ(K, L): the Orlicz norm of ρ_K/ρ_L under the dual conical measure.
    pub fn o_phi(&self, other: &impl RadialFunction) -> Result<f64> {
        orlicz_norm(&self.ratio_samples(other)?, &self.phi)
    }
}

/// Relative quadrature tolerance for `body` on `grid`: five times the change
/// in quadrature volume under resolution doubling, floored at 1e−12.
pub fn measured_quadrature_tolerance(body: &StarBody, grid: &SphericalGrid) -> Result<f64> {
    let v = body.quadrature_volume(grid)?;
    let v2 = body.quadrature_volume(&grid.refined()?)?;
    Ok((5.0 * (v - v2).abs() / v2).max(1e-12))
}
