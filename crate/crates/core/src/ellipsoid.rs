//! Origin-symmetric ellipsoids `E = {x : x·Qx ≤ 1}` with SPD shape matrix Q.

use serde::{Deserialize, Serialize};

use crate::error::{OlexError, Result};
use crate::linalg::{self, ball_volume, checked_inverse, quad_form, sym_apply, sym_eigen};
use crate::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    q: Matrix,
    q_inv: Matrix,
}

/// JSON form: the shape matrix only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidSpec {
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
}

impl Ellipsoid {
    /// Validates symmetry (relative 1e−12) and positive definiteness, then
    /// symmetrizes.
    pub fn new(q: Matrix) -> Result<Self> {
        let n = q.nrows();
        if n < 2 || q.ncols() != n {
            return Err(OlexError::Domain(format!("shape matrix must be square with n ≥ 2, got {}×{}", n, q.ncols())));
        }
        let asym = (&q - q.transpose()).norm();
        if asym > 1e-12 * q.norm() {
            return Err(OlexError::Domain(format!("shape matrix is not symmetric (‖Q − Qᵗ‖ = {asym:e})")));
        }
        Self::from_spd(linalg::symmetrize(&q))
    }

    fn from_spd(q: Matrix) -> Result<Self> {
        if !linalg::is_spd(&q) {
            return Err(OlexError::Domain("shape matrix is not positive definite".into()));
        }
        let q_inv = linalg::symmetrize(&checked_inverse(&q, "shape matrix")?);
        Ok(Ellipsoid { q, q_inv })
    }

    pub fn unit_ball(n: usize) -> Self {
        Ellipsoid { q: Matrix::identity(n, n), q_inv: Matrix::identity(n, n) }
    }

    /// `A·B` for an invertible factor A: Q = A⁻ᵗA⁻¹.
    pub fn from_factor(a: &Matrix) -> Result<Self> {
        let a_inv = checked_inverse(a, "ellipsoid factor")?;
        Self::from_spd(linalg::symmetrize(&(a_inv.transpose() * &a_inv)))
    }

    pub fn from_spec(spec: &EllipsoidSpec) -> Result<Self> {
        Self::new(linalg::from_rows(&spec.q)?)
    }

    pub fn to_spec(&self) -> EllipsoidSpec {
        EllipsoidSpec { q: linalg::to_rows(&self.q) }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn shape_matrix(&self) -> &Matrix {
        &self.q
    }

    pub fn inverse_shape_matrix(&self) -> &Matrix {
        &self.q_inv
    }

    /// ρ_E(x) = (x·Qx)^{−1/2}.
    pub fn radial(&self, x: &[f64]) -> f64 {
        quad_form(&self.q, x).powf(-0.5)
    }

    /// h_E(x) = (x·Q⁻¹x)^{1/2}.
    pub fn support(&self, x: &[f64]) -> f64 {
        quad_form(&self.q_inv, x).sqrt()
    }

    /// ω_n det(Q)^{−1/2}.
    pub fn volume(&self) -> f64 {
        ball_volume(self.dim()) / self.q.determinant().sqrt()
    }

    /// The polar body, with shape matrix Q⁻¹.
    pub fn polar(&self) -> Ellipsoid {
        Ellipsoid { q: self.q_inv.clone(), q_inv: self.q.clone() }
    }

    /// `T·E`, with shape matrix T⁻ᵗ Q T⁻¹.
    pub fn apply_linear(&self, t: &Matrix) -> Result<Ellipsoid> {
        if t.nrows() != self.dim() || t.ncols() != self.dim() {
            return Err(OlexError::Domain("matrix and ellipsoid dimensions differ".into()));
        }
        let t_inv = checked_inverse(t, "apply_linear")?;
        Self::from_spd(linalg::symmetrize(&(t_inv.transpose() * &self.q * &t_inv)))
    }

    /// `s·E` for s > 0.
    pub fn scaled(&self, s: f64) -> Ellipsoid {
        Ellipsoid { q: &self.q / (s * s), q_inv: &self.q_inv * (s * s) }
    }

    /// Rescaled to volume ω_n.
    pub fn det_normalized(&self) -> Ellipsoid {
        let n = self.dim() as f64;
        self.scaled(self.q.determinant().powf(0.5 / n))
    }

    /// The SPD matrix A = Q^{−1/2} with A·B = E.
    pub fn canonical_spd_factor(&self) -> Matrix {
        sym_apply(&self.q, |l| l.powf(-0.5))
    }

    /// λ_min(Q)^{−1/2}.
    pub fn max_principal_radius(&self) -> f64 {
        let (vals, _) = sym_eigen(&self.q);
        vals[0].powf(-0.5)
    }

    /// Semi-axis lengths (descending) with unit principal directions.
    pub fn principal_axes(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let (vals, vecs) = sym_eigen(&self.q);
        let radii = vals.iter().map(|l| l.powf(-0.5)).collect();
        let dirs = (0..self.dim()).map(|k| vecs.column(k).iter().copied().collect()).collect();
        (radii, dirs)
    }

    /// Relative Frobenius distance between shape matrices.
    pub fn shape_distance(&self, other: &Ellipsoid) -> f64 {
        linalg::rel_frobenius(&self.q, &other.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn diag(d: &[f64]) -> Matrix {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(d))
    }

    fn arb_spd(n: usize) -> impl Strategy<Value = Matrix> {
        (prop::collection::vec(-1.0f64..1.0, n * n), prop::collection::vec(0.2f64..3.0, n)).prop_map(
            move |(g, ev)| {
                let m = DMatrix::from_row_slice(n, n, &g) + DMatrix::identity(n, n) * 0.1;
                let qr = m.qr();
                let o = qr.q();
                linalg::symmetrize(&(&o * diag(&ev) * o.transpose()))
            },
        )
    }

    #[test]
    fn polar_examples() {
        assert_eq!(Ellipsoid::unit_ball(3).polar(), Ellipsoid::unit_ball(3));
        let e = Ellipsoid::new(diag(&[4.0, 1.0])).unwrap();
        assert_eq!(e.polar().shape_matrix(), &diag(&[0.25, 1.0]));
    }

    #[test]
    fn apply_linear_examples() {
        let b = Ellipsoid::unit_ball(2);
        let th: f64 = 0.7;
        let rot = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!(b.apply_linear(&rot).unwrap().shape_distance(&b) < 1e-15);
        let e = b.apply_linear(&diag(&[2.0, 1.0])).unwrap();
        assert!((e.shape_matrix() - diag(&[0.25, 1.0])).norm() < 1e-15);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, 1.0]);
        assert!(matches!(b.apply_linear(&singular), Err(OlexError::Domain(_))));
    }

    #[test]
    fn canonical_factor_examples() {
        assert!((Ellipsoid::unit_ball(2).canonical_spd_factor() - DMatrix::identity(2, 2)).norm() < 1e-15);
        let e = Ellipsoid::new(diag(&[0.25, 1.0])).unwrap();
        assert!((e.canonical_spd_factor() - diag(&[2.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn max_principal_radius_examples() {
        assert!((Ellipsoid::unit_ball(3).max_principal_radius() - 1.0).abs() < 1e-15);
        let e = Ellipsoid::new(diag(&[1.0 / 9.0, 1.0])).unwrap();
        assert!((e.max_principal_radius() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn volume_and_axes() {
        let e = Ellipsoid::new(diag(&[0.25, 1.0, 4.0])).unwrap();
        assert!((e.volume() - 4.0 * PI / 3.0).abs() < 1e-13);
        let (radii, dirs) = e.principal_axes();
        assert!((radii[0] - 2.0).abs() < 1e-14 && (radii[2] - 0.5).abs() < 1e-14);
        assert!((dirs[0][0].abs() - 1.0).abs() < 1e-14);
        assert!((e.det_normalized().volume() - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn invalid_shape_matrices() {
        assert!(Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err());
        assert!(Ellipsoid::new(diag(&[1.0, -1.0])).is_err());
        assert!(Ellipsoid::new(diag(&[1.0, 1e-14])).is_err());
    }

    proptest! {
        #[test]
        fn polar_volume_product(q in arb_spd(3)) {
            let e = Ellipsoid::new(q).unwrap();
            let w = ball_volume(3);
            prop_assert!((e.volume() * e.polar().volume() - w * w).abs() < 1e-10 * w * w);
        }

        #[test]
        fn radial_times_polar_support_is_one(q in arb_spd(2), t in 0.0f64..6.3) {
            let e = Ellipsoid::new(q).unwrap();
            let u = [t.cos(), t.sin()];
            prop_assert!((e.radial(&u) * e.polar().support(&u) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn linear_action_composes(q in arb_spd(2), a in arb_spd(2), b in arb_spd(2)) {
            let e = Ellipsoid::new(q).unwrap();
            let one = e.apply_linear(&a).unwrap().apply_linear(&b).unwrap();
            let two = e.apply_linear(&(&b * &a)).unwrap();
            prop_assert!(one.shape_distance(&two) < 1e-10);
            let back = e.apply_linear(&a).unwrap().apply_linear(&a.clone().try_inverse().unwrap()).unwrap();
            prop_assert!(back.shape_distance(&e) < 1e-10);
            // (TE)* = T⁻ᵗ E*
            let lhs = e.apply_linear(&a).unwrap().polar();
            let rhs = e.polar().apply_linear(&a.clone().try_inverse().unwrap().transpose()).unwrap();
            prop_assert!(lhs.shape_distance(&rhs) < 1e-10);
            let vol = e.apply_linear(&a).unwrap().volume();
            prop_assert!((vol - a.determinant().abs() * e.volume()).abs() < 1e-10 * vol);
        }

        #[test]
        fn canonical_factor_is_orthogonally_invariant(q in arb_spd(3), g in prop::collection::vec(-1.0f64..1.0, 9)) {
            let e = Ellipsoid::new(q).unwrap();
            let o = (DMatrix::from_row_slice(3, 3, &g) + DMatrix::identity(3, 3) * 0.1).qr().q();
            let a = e.canonical_spd_factor();
            // A·O·B = A·B
            let f = Ellipsoid::from_factor(&(&a * &o)).unwrap();
            prop_assert!((f.canonical_spd_factor() - &a).norm() < 1e-10 * a.norm());
            let round_trip = Ellipsoid::unit_ball(3).apply_linear(&a).unwrap();
            prop_assert!(round_trip.shape_distance(&e) < 1e-12);
            prop_assert!((e.apply_linear(&o).unwrap().max_principal_radius() - e.max_principal_radius()).abs() < 1e-10);
        }
    }
}
