use crate::error::{OlexError, Result};
use crate::linalg::{checked_inverse, mat_vec_into, norm};
use crate::orlicz::OrliczFunction;
use crate::quadrature::SphericalGrid;
use crate::star_body::StarBody;
use crate::Matrix;

/// Masses below this are flushed to zero.
pub(crate) const MASS_FLUSH: f64 = 1e-300;

/// The volume-normalized objective A ↦ Ṽ_φ(K/λ, A·B) discretized on a grid.
///
/// Evaluations at a factor A use the transported nodes x̂_i = A⁻¹u_i/|A⁻¹u_i|
/// with the dual conical masses of K at u_i, so the measure returned by
/// [`P1Problem::stats`] is the exact gradient of the discrete objective.
pub(crate) struct P1Problem<'a> {
    pub dim: usize,
    pub grid: &'a SphericalGrid,
    pub phi: &'a OrliczFunction,
    rho: Vec<f64>,
    masses: Vec<f64>,
}

pub(crate) struct Stats {
    pub objective: f64,
    pub second_moment: Matrix,
    pub total: f64,
    pub masses: Vec<f64>,
    pub flushed: usize,
}

impl Stats {
    /// (1/n)(M̂ − tr(M̂)/n · I).
    pub fn gradient(&self) -> Matrix {
        let n = self.second_moment.nrows();
        let nf = n as f64;
        (&self.second_moment - Matrix::identity(n, n) * (self.total / nf)) / nf
    }

    pub fn residual(&self) -> f64 {
        residual_of(&self.second_moment, self.total)
    }
}

fn residual_of(m: &Matrix, total: f64) -> f64 {
    let n = m.nrows();
    (m * (n as f64 / total) - Matrix::identity(n, n)).norm()
}

impl<'a> P1Problem<'a> {
    /// Problem for the body `K / scale`.
    pub fn new(body: &StarBody, grid: &'a SphericalGrid, phi: &'a OrliczFunction, scale: f64) -> Result<Self> {
        let n = body.dim();
        let rho: Vec<f64> = body.sample(grid)?.into_iter().map(|r| r / scale).collect();
        let masses = rho.iter().zip(grid.weights()).map(|(r, w)| w * r.powi(n as i32) / n as f64).collect();
        Ok(P1Problem { dim: n, grid, phi, rho, masses })
    }

    fn for_each_node(&self, a_inv: &Matrix, mut f: impl FnMut(usize, &[f64], f64)) {
        let mut x = vec![0.0; self.dim];
        for (i, u) in self.grid.nodes().enumerate() {
            mat_vec_into(a_inv, u, &mut x);
            let s = norm(&x);
            for v in x.iter_mut() {
                *v /= s;
            }
            f(i, &x, self.rho[i] * s);
        }
    }

    pub fn objective(&self, a_inv: &Matrix) -> f64 {
        let mut vals = vec![0.0; self.masses.len()];
        self.for_each_node(a_inv, |i, _, r| vals[i] = self.masses[i] * self.phi.value(r));
        crate::quadrature::pairwise_sum(&vec![1.0; vals.len()], &vals)
    }

    pub fn stats(&self, a_inv: &Matrix) -> Stats {
        let n = self.dim;
        let nf = n as f64;
        let mut m = Matrix::zeros(n, n);
        let mut obj = vec![0.0; self.masses.len()];
        let mut masses = vec![0.0; self.masses.len()];
        let mut flushed = 0;
        self.for_each_node(a_inv, |i, xh, r| {
            obj[i] = self.masses[i] * self.phi.value(r);
            let mut nu = nf * self.phi.derivative(r) * r * self.masses[i];
            if nu > 0.0 && nu < MASS_FLUSH {
                nu = 0.0;
                flushed += 1;
            }
            masses[i] = nu;
            if nu != 0.0 {
                for a in 0..n {
                    for b in a..n {
                        m[(a, b)] += nu * xh[a] * xh[b];
                    }
                }
            }
        });
        for a in 0..n {
            for b in 0..a {
                m[(a, b)] = m[(b, a)];
            }
        }
        let objective = crate::quadrature::pairwise_sum(&vec![1.0; obj.len()], &obj);
        let total = m.trace();
        Stats { objective, second_moment: m, total, masses, flushed }
    }
}

/// The measure φ′(ρ_K)ρ_K^{n+1} dS on the grid nodes with its second moment.
#[derive(Debug, Clone, PartialEq)]
pub struct MuPhiMeasure {
    /// ν_i = w_i φ′(ρ_K(u_i)) ρ_K(u_i)^{n+1}
    pub masses: Vec<f64>,
    /// Σ ν_i, equal to the trace of `second_moment`.
    pub total: f64,
    /// M = Σ ν_i u_i ⊗ u_i.
    pub second_moment: Matrix,
    /// Count of masses below 1e−300 flushed to zero.
    pub flushed: usize,
}

fn require_c1(phi: &OrliczFunction) -> Result<()> {
    if phi.is_c1() {
        Ok(())
    } else {
        Err(OlexError::Capability(
            "φ has no continuous derivative; use the derivative_free algorithm".into(),
        ))
    }
}

pub fn mu_phi(body: &StarBody, phi: &OrliczFunction, grid: &SphericalGrid) -> Result<MuPhiMeasure> {
    require_c1(phi)?;
    let problem = P1Problem::new(body, grid, phi, 1.0)?;
    let n = body.dim();
    let stats = problem.stats(&Matrix::identity(n, n));
    Ok(MuPhiMeasure {
        masses: stats.masses,
        total: stats.total,
        second_moment: stats.second_moment,
        flushed: stats.flushed,
    })
}

/// ‖(n/total)·M − I‖_F.
pub fn isotropy_residual(m: &MuPhiMeasure) -> f64 {
    residual_of(&m.second_moment, m.total)
}

/// Variational gradient of A ↦ Ṽ_φ(K, A·B) at `t ∈ SL(n)`: the symmetric
/// trace-free D with ⟨D, L⟩ = d/dε Ṽ_φ(K, t·L_ε⁻¹·B) at ε = 0, where
/// L_ε = (I + εL)/det(I + εL)^{1/n}.
pub fn p1_gradient(body: &StarBody, phi: &OrliczFunction, grid: &SphericalGrid, t: &Matrix) -> Result<Matrix> {
    require_c1(phi)?;
    let det = t.determinant();
    if (det - 1.0).abs() > 1e-10 {
        return Err(OlexError::Domain(format!("expected det T = 1, got {det}")));
    }
    let t_inv = checked_inverse(t, "p1_gradient")?;
    let problem = P1Problem::new(body, grid, phi, 1.0)?;
    Ok(problem.stats(&t_inv).gradient())
}
