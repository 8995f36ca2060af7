//! Star bodies about the origin, represented by their radial functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{OlexError, Result};
use crate::hull::SphereTriangulation;
use crate::linalg::{self, ball_volume, checked_inverse, mat_vec, norm, quad_form};
use crate::quadrature::SphericalGrid;
use crate::Matrix;

/// Bodies whose sampled radial function has min/max below this are rejected.
pub const MIN_RADIAL_RATIO: f64 = 1e-9;

/// JSON description of a star body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BodySpec {
    Ball {
        r: f64,
    },
    Ellipsoid {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
    Cuboid {
        a: Vec<f64>,
    },
    LpBall {
        q: f64,
        radii: Vec<f64>,
    },
    RadialGrid {
        nodes: Vec<Vec<f64>>,
        rho: Vec<f64>,
    },
    LinearImage {
        #[serde(rename = "T")]
        t: Vec<Vec<f64>>,
        base: Box<BodySpec>,
    },
}

/// Radial samples with an interpolation rule chosen by dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSamples {
    nodes: Vec<Vec<f64>>,
    rho: Vec<f64>,
    interp: Interp,
}

#[derive(Debug, Clone, PartialEq)]
enum Interp {
    /// Nodes sorted by angle in [0, 2π); periodic linear interpolation.
    Circle { angles: Vec<f64>, order: Vec<usize> },
    /// Barycentric interpolation on the hull triangulation of the nodes.
    Sphere(SphereTriangulation),
    /// Value of the nearest node. Discontinuous between nodes.
    Nearest,
}

impl RadialSamples {
    fn new(nodes: Vec<Vec<f64>>, rho: Vec<f64>) -> Result<Self> {
        if nodes.len() != rho.len() {
            return Err(OlexError::Config(format!(
                "radial grid has {} nodes but {} values",
                nodes.len(),
                rho.len()
            )));
        }
        let dim = nodes.first().map(Vec::len).unwrap_or(0);
        if dim < 2 || nodes.iter().any(|u| u.len() != dim) {
            return Err(OlexError::Config("radial grid nodes must share a dimension ≥ 2".into()));
        }
        let nodes: Vec<Vec<f64>> = nodes
            .into_iter()
            .map(|u| {
                let r = norm(&u);
                if !(r > 0.0) || !r.is_finite() {
                    Err(OlexError::Config("radial grid node is zero or not finite".into()))
                } else {
                    Ok(u.iter().map(|x| x / r).collect())
                }
            })
            .collect::<Result<_>>()?;
        let interp = match dim {
            2 => {
                if nodes.len() < 3 {
                    return Err(OlexError::Config("a planar radial grid needs at least 3 nodes".into()));
                }
                let mut order: Vec<usize> = (0..nodes.len()).collect();
                let ang = |u: &[f64]| u[1].atan2(u[0]).rem_euclid(2.0 * PI);
                order.sort_by(|&a, &b| ang(&nodes[a]).total_cmp(&ang(&nodes[b])));
                let angles: Vec<f64> = order.iter().map(|&i| ang(&nodes[i])).collect();
                for k in 0..angles.len() {
                    let next = if k + 1 < angles.len() { angles[k + 1] } else { angles[0] + 2.0 * PI };
                    if next - angles[k] >= PI {
                        return Err(OlexError::Config(
                            "radial grid leaves a half-plane of directions uncovered".into(),
                        ));
                    }
                    if next - angles[k] <= 0.0 {
                        return Err(OlexError::Config("radial grid has repeated directions".into()));
                    }
                }
                Interp::Circle { angles, order }
            }
            3 => Interp::Sphere(SphereTriangulation::new(
                nodes.iter().map(|u| [u[0], u[1], u[2]]).collect(),
            )?),
            _ => Interp::Nearest,
        };
        Ok(RadialSamples { nodes, rho, interp })
    }

    fn dim(&self) -> usize {
        self.nodes[0].len()
    }

    /// Interpolated ρ at the unit vector `u`.
    fn at_unit(&self, u: &[f64]) -> f64 {
        match &self.interp {
            Interp::Circle { angles, order } => {
                let t = u[1].atan2(u[0]).rem_euclid(2.0 * PI);
                let m = angles.len();
                let k = angles.partition_point(|&a| a <= t);
                let (i0, i1, a0, a1) = if k == 0 {
                    (m - 1, 0, angles[m - 1] - 2.0 * PI, angles[0])
                } else if k == m {
                    (m - 1, 0, angles[m - 1], angles[0] + 2.0 * PI)
                } else {
                    (k - 1, k, angles[k - 1], angles[k])
                };
                let s = (t - a0) / (a1 - a0);
                (1.0 - s) * self.rho[order[i0]] + s * self.rho[order[i1]]
            }
            Interp::Sphere(tri) => {
                let (f, w) = tri.locate([u[0], u[1], u[2]]);
                w[0] * self.rho[f[0]] + w[1] * self.rho[f[1]] + w[2] * self.rho[f[2]]
            }
            Interp::Nearest => {
                let best = self
                    .nodes
                    .iter()
                    .enumerate()
                    .max_by(|a, b| linalg::dot(a.1, u).total_cmp(&linalg::dot(b.1, u)))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                self.rho[best]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball { r: f64 },
    /// `{x : x·Qx ≤ 1}`.
    Ellipsoid { q: Matrix },
    Cuboid { half_widths: Vec<f64> },
    /// `{x : Σ |x_i / r_i|^q ≤ 1}`.
    LpBall { q: f64, radii: Vec<f64> },
    RadialGrid(RadialSamples),
    /// `T·base`, evaluated lazily through `ρ_{TK}(x) = ρ_K(T⁻¹x)`.
    LinearImage { t: Matrix, t_inv: Matrix, base: Box<StarBody> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarBody {
    dim: usize,
    shape: Shape,
}

impl StarBody {
    pub fn ball(dim: usize, r: f64) -> Result<Self> {
        if dim < 2 {
            return Err(OlexError::Config(format!("dimension must be ≥ 2, got {dim}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(OlexError::Config(format!("ball radius must be positive, got {r}")));
        }
        Ok(StarBody { dim, shape: Shape::Ball { r } })
    }

    pub fn ellipsoid(q: Matrix) -> Result<Self> {
        let dim = q.nrows();
        if dim < 2 || q.ncols() != dim {
            return Err(OlexError::Config("ellipsoid shape matrix must be square, n ≥ 2".into()));
        }
        let asym = (&q - q.transpose()).norm();
        if asym > 1e-12 * q.norm() || !linalg::is_spd(&q) {
            return Err(OlexError::Config("ellipsoid shape matrix must be symmetric positive definite".into()));
        }
        Ok(StarBody { dim, shape: Shape::Ellipsoid { q: linalg::symmetrize(&q) } })
    }

    pub fn cuboid(half_widths: Vec<f64>) -> Result<Self> {
        check_radii(&half_widths, "cuboid half-width")?;
        Ok(StarBody { dim: half_widths.len(), shape: Shape::Cuboid { half_widths } })
    }

    pub fn lp_ball(q: f64, radii: Vec<f64>) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(OlexError::Config(format!("lp ball needs finite q ≥ 1, got {q}")));
        }
        check_radii(&radii, "lp ball radius")?;
        Ok(StarBody { dim: radii.len(), shape: Shape::LpBall { q, radii } })
    }

    /// Body from radial samples at the given directions (normalized on load).
    pub fn radial_grid(nodes: Vec<Vec<f64>>, rho: Vec<f64>) -> Result<Self> {
        let max = rho.iter().copied().fold(0.0, f64::max);
        let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
        if rho.iter().any(|r| !r.is_finite()) || !(min > 0.0) || min < MIN_RADIAL_RATIO * max {
            return Err(OlexError::Config(format!(
                "radial samples must be positive and well conditioned (min {min:e}, max {max:e})"
            )));
        }
        let samples = RadialSamples::new(nodes, rho)?;
        Ok(StarBody { dim: samples.dim(), shape: Shape::RadialGrid(samples) })
    }

    /// Samples `body` at the nodes of `grid` and returns the interpolated body.
    pub fn sampled(body: &StarBody, grid: &SphericalGrid) -> Result<Self> {
        let nodes: Vec<Vec<f64>> = grid.nodes().map(<[f64]>::to_vec).collect();
        let rho = nodes.iter().map(|u| body.rho(u)).collect();
        Self::radial_grid(nodes, rho)
    }

    pub fn from_spec(spec: &BodySpec, dim: Option<usize>) -> Result<Self> {
        let body = match spec {
            BodySpec::Ball { r } => {
                let d = dim.ok_or_else(|| OlexError::Config("a ball body needs an explicit dimension".into()))?;
                Self::ball(d, *r)?
            }
            BodySpec::Ellipsoid { q } => Self::ellipsoid(linalg::from_rows(q)?)?,
            BodySpec::Cuboid { a } => Self::cuboid(a.clone())?,
            BodySpec::LpBall { q, radii } => Self::lp_ball(*q, radii.clone())?,
            BodySpec::RadialGrid { nodes, rho } => Self::radial_grid(nodes.clone(), rho.clone())?,
            BodySpec::LinearImage { t, base } => {
                let t = linalg::from_rows(t)?;
                let base = Self::from_spec(base, dim.or(Some(t.nrows())))?;
                base.transform(&t).map_err(|e| match e {
                    OlexError::Domain(m) => OlexError::Config(m),
                    e => e,
                })?
            }
        };
        if let Some(d) = dim {
            if d != body.dim {
                return Err(OlexError::Config(format!(
                    "body has dimension {} but {d} was requested",
                    body.dim
                )));
            }
        }
        Ok(body)
    }

    pub fn to_spec(&self) -> BodySpec {
        match &self.shape {
            Shape::Ball { r } => BodySpec::Ball { r: *r },
            Shape::Ellipsoid { q } => BodySpec::Ellipsoid { q: linalg::to_rows(q) },
            Shape::Cuboid { half_widths } => BodySpec::Cuboid { a: half_widths.clone() },
            Shape::LpBall { q, radii } => BodySpec::LpBall { q: *q, radii: radii.clone() },
            Shape::RadialGrid(s) => BodySpec::RadialGrid { nodes: s.nodes.clone(), rho: s.rho.clone() },
            Shape::LinearImage { t, base, .. } => {
                BodySpec::LinearImage { t: linalg::to_rows(t), base: Box::new(base.to_spec()) }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// ρ_K(x) for x ≠ 0.
    pub fn radial(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(OlexError::Domain(format!(
                "vector of length {} for a body of dimension {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().all(|v| *v == 0.0) {
            return Err(OlexError::Domain("radial function is undefined at the origin".into()));
        }
        Ok(self.rho(x))
    }

    /// Unchecked radial function; `x` must be nonzero with matching length.
    pub(crate) fn rho(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { r } => r / norm(x),
            Shape::Ellipsoid { q } => quad_form(q, x).powf(-0.5),
            Shape::Cuboid { half_widths } => {
                1.0 / x.iter().zip(half_widths).map(|(xi, a)| xi.abs() / a).fold(0.0, f64::max)
            }
            Shape::LpBall { q, radii } => {
                // scale first to keep |x_i/r_i|^q in range
                let m = x.iter().zip(radii).map(|(xi, r)| (xi / r).abs()).fold(0.0, f64::max);
                let s: f64 = x.iter().zip(radii).map(|(xi, r)| ((xi / r).abs() / m).powf(*q)).sum();
                1.0 / (m * s.powf(1.0 / q))
            }
            Shape::RadialGrid(samples) => {
                let r = norm(x);
                let u: Vec<f64> = x.iter().map(|v| v / r).collect();
                samples.at_unit(&u) / r
            }
            Shape::LinearImage { t_inv, base, .. } => base.rho(&mat_vec(t_inv, x)),
        }
    }

    /// Radial values at every grid node.
    pub fn sample(&self, grid: &SphericalGrid) -> Result<Vec<f64>> {
        if grid.dim() != self.dim {
            return Err(OlexError::Config(format!(
                "grid dimension {} does not match body dimension {}",
                grid.dim(),
                self.dim
            )));
        }
        let rho: Vec<f64> = grid.nodes().map(|u| self.rho(u)).collect();
        if let Some(i) = rho.iter().position(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(OlexError::Numeric(format!("ρ = {} at node {i}", rho[i])));
        }
        Ok(rho)
    }

    /// Closed-form volume when the shape admits one.
    pub fn exact_volume(&self) -> Option<f64> {
        match &self.shape {
            Shape::Ball { r } => Some(ball_volume(self.dim) * r.powi(self.dim as i32)),
            Shape::Ellipsoid { q } => Some(ball_volume(self.dim) / q.determinant().sqrt()),
            Shape::LinearImage { t, base, .. } => base.exact_volume().map(|v| v * t.determinant().abs()),
            _ => None,
        }
    }

    /// (1/n)·Σ w_i ρ(u_i)^n.
    pub fn quadrature_volume(&self, grid: &SphericalGrid) -> Result<f64> {
        let n = self.dim as i32;
        let rho = self.sample(grid)?;
        let vals: Vec<f64> = rho.iter().map(|r| r.powi(n) / n as f64).collect();
        grid.integrate_values(&vals)
    }

    /// Volume: closed form for balls and ellipsoids (and their linear images),
    /// quadrature otherwise.
    pub fn volume(&self, grid: &SphericalGrid) -> Result<f64> {
        match self.exact_volume() {
            Some(v) => Ok(v),
            None => self.quadrature_volume(grid),
        }
    }

    pub fn dual_conical(&self, grid: &SphericalGrid) -> Result<DualConicalMeasure> {
        let rho = self.sample(grid)?;
        let n = self.dim as i32;
        let masses: Vec<f64> =
            rho.iter().zip(grid.weights()).map(|(r, w)| w * r.powi(n) / n as f64).collect();
        let total = crate::quadrature::pairwise_sum(&vec![1.0; masses.len()], &masses);
        Ok(DualConicalMeasure { masses, rho, total })
    }

    /// `T·K`. Nested images are flattened into one matrix.
    pub fn transform(&self, t: &Matrix) -> Result<StarBody> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(OlexError::Domain(format!(
                "{}×{} matrix for a body of dimension {}",
                t.nrows(),
                t.ncols(),
                self.dim
            )));
        }
        let t_inv = checked_inverse(t, "transform")?;
        Ok(match &self.shape {
            Shape::LinearImage { t: t1, t_inv: t1_inv, base } => StarBody {
                dim: self.dim,
                shape: Shape::LinearImage { t: t * t1, t_inv: t1_inv * &t_inv, base: base.clone() },
            },
            _ => StarBody {
                dim: self.dim,
                shape: Shape::LinearImage { t: t.clone(), t_inv, base: Box::new(self.clone()) },
            },
        })
    }

    /// `s·K` for s > 0.
    pub fn scaled(&self, s: f64) -> Result<StarBody> {
        self.transform(&(Matrix::identity(self.dim, self.dim) * s))
    }

    /// Support function of conv K at `v`, estimated as max_i ρ(u_i)(u_i·v).
    pub fn hull_support(&self, v: &[f64], grid: &SphericalGrid) -> Result<f64> {
        let rho = self.sample(grid)?;
        Ok(grid
            .nodes()
            .zip(&rho)
            .map(|(u, r)| r * linalg::dot(u, v))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Whether the shape is known to be convex and origin-symmetric.
    pub fn is_symmetric_convex(&self) -> bool {
        match &self.shape {
            Shape::Ball { .. } | Shape::Ellipsoid { .. } | Shape::Cuboid { .. } | Shape::LpBall { .. } => true,
            Shape::RadialGrid(_) => false,
            Shape::LinearImage { base, .. } => base.is_symmetric_convex(),
        }
    }
}

fn check_radii(r: &[f64], what: &str) -> Result<()> {
    if r.len() < 2 {
        return Err(OlexError::Config(format!("{what}s must span at least 2 dimensions")));
    }
    if let Some(x) = r.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(OlexError::Config(format!("{what} must be positive, got {x}")));
    }
    Ok(())
}

/// Dual conical measure of a body on a grid: masses w_i ρ(u_i)^n / n.
#[derive(Debug, Clone, PartialEq)]
pub struct DualConicalMeasure {
    pub masses: Vec<f64>,
    /// ρ_K at the grid nodes.
    pub rho: Vec<f64>,
    /// Σ masses, the quadrature volume of the body.
    pub total: f64,
}
