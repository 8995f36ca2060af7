//! Deterministic node/weight rules on the unit sphere S^{n−1}.
//!
//! Nodes are stored in antipodal pairs: node `2k + 1` is the negative of node
//! `2k` and carries the same weight. [`SphericalGrid::integrate`] sums each
//! pair before accumulating, so `∫ f(u)` and `∫ f(−u)` are bit-identical.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{OlexError, Result};
use crate::linalg::{norm, sphere_area};

/// Smallest accepted resolution.
pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Scheme {
    /// Equispaced angles; n = 2 only.
    UniformCircle,
    /// Golden-angle spiral; n = 3 only.
    FibonacciSphere,
    /// Seeded Gaussian directions; any n ≥ 2.
    MonteCarloSeeded { seed: u64 },
}

impl Scheme {
    /// The scheme used when the caller names none.
    pub fn default_for(dim: usize, seed: u64) -> Scheme {
        match dim {
            2 => Scheme::UniformCircle,
            3 => Scheme::FibonacciSphere,
            _ => Scheme::MonteCarloSeeded { seed },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::UniformCircle => "uniform_circle",
            Scheme::FibonacciSphere => "fibonacci_sphere",
            Scheme::MonteCarloSeeded { .. } => "monte_carlo_seeded",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Scheme::MonteCarloSeeded { seed } => Some(*seed),
            _ => None,
        }
    }
}

/// Default base resolution (number of antipodal pairs) per dimension.
pub fn default_resolution(dim: usize) -> usize {
    match dim {
        2 => 1024,
        3 => 2048,
        _ => 10_000,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    dim: usize,
    resolution: usize,
    scheme: Scheme,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphericalGrid {
    /// Builds a centrally symmetric rule from `resolution` base directions,
    /// each mirrored through the origin. Weights are equal and sum to the
    /// area of S^{n−1}.
    pub fn build(dim: usize, resolution: usize, scheme: Scheme) -> Result<Self> {
        if dim < 2 {
            return Err(OlexError::Config(format!("sphere grids need dim ≥ 2, got {dim}")));
        }
        if resolution < MIN_RESOLUTION {
            return Err(OlexError::Config(format!(
                "resolution {resolution} is below the minimum {MIN_RESOLUTION}"
            )));
        }
        let base: Vec<Vec<f64>> = match (dim, scheme) {
            (2, Scheme::UniformCircle) => (0..resolution)
                .map(|k| {
                    // half circle, so the mirrored copies interleave without duplicates
                    let t = PI * k as f64 / resolution as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect(),
            (3, Scheme::FibonacciSphere) => {
                // lattice of ⌈res/2⌉ points plus their mirrors in z = 0; the
                // mirrors cancel the odd moments that antipodes alone leave
                let golden = PI * (3.0 - 5f64.sqrt());
                let m = resolution.div_ceil(2);
                (0..m)
                    .flat_map(|i| {
                        let s = i as f64 + 0.5;
                        let z = 1.0 - 2.0 * s / m as f64;
                        let r = (1.0 - z * z).max(0.0).sqrt();
                        let a = golden * s;
                        [vec![r * a.cos(), r * a.sin(), z], vec![r * a.cos(), r * a.sin(), -z]]
                    })
                    .take(resolution)
                    .collect()
            }
            (_, Scheme::MonteCarloSeeded { seed }) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out = Vec::with_capacity(resolution);
                while out.len() < resolution {
                    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let r = norm(&v);
                    if r > 1e-8 {
                        out.push(v.into_iter().map(|x| x / r).collect());
                    }
                }
                out
            }
            (d, s) => {
                return Err(OlexError::Config(format!(
                    "scheme {} is not available in dimension {d}",
                    s.name()
                )))
            }
        };

        let mut nodes = Vec::with_capacity(2 * dim * base.len());
        let mut seen = BTreeSet::new();
        let mut kept = 0usize;
        for u in &base {
            let r = norm(u);
            let u: Vec<f64> = u.iter().map(|x| x / r).collect();
            // drop directions that coincide with an existing node or its mirror
            if !seen.insert(antipodal_key(&u)) {
                continue;
            }
            nodes.extend_from_slice(&u);
            nodes.extend(u.iter().map(|x| -x));
            kept += 1;
        }
        if kept < MIN_RESOLUTION / 2 {
            return Err(OlexError::Config(format!(
                "only {kept} distinct antipodal pairs; resolution too small to symmetrize"
            )));
        }
        let total = sphere_area(dim);
        let w = total / (2 * kept) as f64;
        let mut weights = vec![w; 2 * kept];
        if !matches!(scheme, Scheme::UniformCircle) {
            weights = isotropic_weights(dim, &nodes, &weights)?;
        }
        Ok(SphericalGrid { dim, resolution, scheme, nodes, weights })
    }

    /// Grid with the default scheme and resolution for `dim`.
    pub fn default_for(dim: usize, seed: u64) -> Result<Self> {
        Self::build(dim, default_resolution(dim), Scheme::default_for(dim, seed))
    }

    /// Same scheme with twice the resolution, for convergence estimates.
    pub fn refined(&self) -> Result<Self> {
        Self::build(self.dim, 2 * self.resolution, self.scheme)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Σ w_i f(u_i), summed pairwise over antipodes.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
        let values: Vec<f64> = self.nodes().map(f).collect();
        self.integrate_values(&values)
    }

    /// Quadrature sum of precomputed node values.
    pub fn integrate_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(OlexError::Internal(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                self.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(OlexError::Numeric(format!(
                "integrand is {} at node {i} ({:?})",
                values[i],
                self.node(i)
            )));
        }
        Ok(pairwise_sum(&self.weights, values))
    }
}

/// Quantized representative shared by `u` and `−u`.
fn antipodal_key(u: &[f64]) -> Vec<i64> {
    let flip = u.iter().find(|x| x.abs() > 1e-9).is_some_and(|x| *x < 0.0);
    u.iter()
        .map(|x| {
            let x = if flip { -x } else { *x };
            (x * 1e11).round() as i64
        })
        .collect()
}

/// Σ w_i v_i with antipodal pairs added first.
/// Smallest relative change of `w0` (weights w0·(1 + Σλ_k g_k)) after which
/// the rule integrates 1 and every u_a·u_b exactly.
fn isotropic_weights(dim: usize, nodes: &[f64], w0: &[f64]) -> Result<Vec<f64>> {
    let area = sphere_area(dim);
    // None is the constant; u_n² is left out since Σ u_a² = 1
    let mut funcs: Vec<Option<(usize, usize)>> = vec![None];
    for a in 0..dim {
        for b in a..dim {
            if (a, b) != (dim - 1, dim - 1) {
                funcs.push(Some((a, b)));
            }
        }
    }
    let g = |k: usize, u: &[f64]| funcs[k].map_or(1.0, |(a, b)| u[a] * u[b]);
    let target = |k: usize| match funcs[k] {
        None => area,
        Some((a, b)) if a == b => area / dim as f64,
        Some(_) => 0.0,
    };
    let m = funcs.len();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(m, m);
    let mut rhs = nalgebra::DVector::<f64>::zeros(m);
    for (i, u) in nodes.chunks_exact(dim).enumerate() {
        let vals: Vec<f64> = (0..m).map(|k| g(k, u)).collect();
        for k in 0..m {
            rhs[k] -= w0[i] * vals[k];
            for l in 0..m {
                gram[(k, l)] += w0[i] * vals[k] * vals[l];
            }
        }
    }
    for k in 0..m {
        rhs[k] += target(k);
    }
    let lambda = gram
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .map_err(|e| OlexError::Internal(format!("weight correction: {e}")))?;
    let weights: Vec<f64> = nodes
        .chunks_exact(dim)
        .zip(w0)
        .map(|(u, w)| w * (1.0 + (0..m).map(|k| lambda[k] * g(k, u)).sum::<f64>()))
        .collect();
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(OlexError::Config("resolution too small for positive isotropic weights".into()));
    }
    Ok(weights)
}

pub(crate) fn pairwise_sum(weights: &[f64], values: &[f64]) -> f64 {
    weights
        .chunks_exact(2)
        .zip(values.chunks_exact(2))
        .map(|(w, v)| w[0] * v[0] + w[1] * v[1])
        .sum()
}
