use crate::ellipsoid::Ellipsoid;
use crate::error::{OlexError, Result};
use crate::linalg::{checked_inverse, quad_form, symmetrize};
use crate::quadrature::SphericalGrid;
use crate::star_body::StarBody;
use crate::Matrix;
use nalgebra::DVector;

/// Containment slack allowed when verifying the Löwner ellipsoid.
pub const LOEWNER_TOL: f64 = 1e-8;

const MVEE_EPS: f64 = 1e-12;
const TY_EPS: f64 = 1e-3;
const TY_MAX_ITERS: usize = 50_000;
const MVEE_MAX_ITERS: usize = 200_000;
const POLISH_MAX_SUPPORT: usize = 200;
const ACTIVE_MAX_ROUNDS: usize = 500;
const NEWTON_MAX_ITERS: usize = 100;
const NEWTON_EPS: f64 = 1e-14;
const BOUND_FLOOR: f64 = 1e-9;

/// The Legendre ellipsoid: Q⁻¹ = ((n+2)/V(K))·∫_K x⊗x dx, both integrals in
/// polar form on `grid`.
pub fn legendre_closed_form(body: &StarBody, grid: &SphericalGrid) -> Result<Ellipsoid> {
    let n = body.dim();
    let rho = body.sample(grid)?;
    let mut j = Matrix::zeros(n, n);
    let mut vol = Vec::with_capacity(rho.len());
    for ((u, w), r) in grid.nodes().zip(grid.weights()).zip(&rho) {
        let c = w * r.powi(n as i32 + 2);
        for a in 0..n {
            for b in a..n {
                j[(a, b)] += c * u[a] * u[b];
            }
        }
        vol.push(w * r.powi(n as i32) / n as f64);
    }
    for a in 0..n {
        for b in 0..a {
            j[(a, b)] = j[(b, a)];
        }
    }
    let v: f64 = crate::quadrature::pairwise_sum(&vec![1.0; vol.len()], &vol);
    let q_inv = symmetrize(&(j / v));
    Ellipsoid::new(checked_inverse(&q_inv, "second-moment matrix")?)
}

/// Minimum-volume origin-symmetric ellipsoid containing the points
/// {±ρ_K(u_i)u_i}.
///
/// Works on the dual weights π: a Todd–Yildirim phase with away steps finds
/// the rough support, then an active-set Newton method polishes the weights.
pub fn loewner(body: &StarBody, grid: &SphericalGrid) -> Result<Ellipsoid> {
    let n = body.dim();
    let nf = n as f64;
    let rho = body.sample(grid)?;
    let pts: Vec<DVector<f64>> =
        grid.nodes().zip(&rho).map(|(u, r)| DVector::from_iterator(n, u.iter().map(|x| x * r))).collect();
    let mut pi = vec![1.0 / pts.len() as f64; pts.len()];
    let mut m_inv = todd_yildirim(&pts, &mut pi, n, TY_EPS, TY_MAX_ITERS)?;
    let support = pi.iter().filter(|&&w| w > 0.0).count();
    if support > POLISH_MAX_SUPPORT {
        m_inv = todd_yildirim(&pts, &mut pi, n, MVEE_EPS, MVEE_MAX_ITERS)?;
    }
    let mut kappa = leverages(&pts, &m_inv);
    let mut active: Vec<usize> = (0..pts.len()).filter(|&i| pi[i] > 0.0).collect();
    let mut weights: Vec<f64> = active.iter().map(|&i| pi[i]).collect();
    for _ in 0..if support > POLISH_MAX_SUPPORT { 0 } else { ACTIVE_MAX_ROUNDS } {
        polish(&pts, &mut active, &mut weights, n)?;
        let pi_s: Vec<f64> = weights.clone();
        let sub: Vec<DVector<f64>> = active.iter().map(|&i| pts[i].clone()).collect();
        m_inv = checked_inverse(&moment(&sub, &pi_s, n), "point cloud moment")?;
        kappa = leverages(&pts, &m_inv);
        let (j, kmax) = argmax(kappa.iter().copied().enumerate());
        if kmax <= nf * (1.0 + MVEE_EPS) {
            break;
        }
        let slot = match active.iter().position(|&i| i == j) {
            Some(slot) => slot,
            None => {
                active.push(j);
                weights.push(0.0);
                active.len() - 1
            }
        };
        let alpha = (kmax - nf) / (nf * (kmax - 1.0));
        weights.iter_mut().for_each(|w| *w *= 1.0 - alpha);
        weights[slot] += alpha;
    }
    let kmax = kappa.iter().copied().fold(f64::MIN, f64::max);
    let e = Ellipsoid::new(symmetrize(&(m_inv / kmax)))?;
    let worst = pts.iter().map(|p| quad_form(e.shape_matrix(), p.as_slice()).sqrt()).fold(0.0, f64::max);
    if worst > 1.0 + LOEWNER_TOL {
        return Err(OlexError::Internal(format!("Löwner ellipsoid fails containment: ratio {worst}")));
    }
    Ok(e)
}

/// Todd–Yildirim iterations with away steps until every leverage is within
/// a factor 1 ± eps of n on the support. Returns the inverse moment.
fn todd_yildirim(pts: &[DVector<f64>], pi: &mut [f64], n: usize, eps: f64, max_iters: usize) -> Result<Matrix> {
    let nf = n as f64;
    let mut m_inv = checked_inverse(&moment(pts, pi, n), "point cloud moment")?;
    for it in 0..max_iters {
        let kappa = leverages(pts, &m_inv);
        let (j, kmax) = argmax(kappa.iter().copied().enumerate());
        let (l, kmin) = argmax(kappa.iter().enumerate().filter(|(i, _)| pi[*i] > 0.0).map(|(i, k)| (i, -k)));
        let kmin = -kmin;
        let up = kmax / nf - 1.0;
        let down = 1.0 - kmin / nf;
        if up.max(down) <= eps {
            break;
        }
        if up >= down {
            let alpha = (kmax - nf) / (nf * (kmax - 1.0));
            pi.iter_mut().for_each(|w| *w *= 1.0 - alpha);
            pi[j] += alpha;
        } else {
            let full = pi[l] / (1.0 - pi[l]);
            let beta = if kmin > 1.0 { ((nf - kmin) / (nf * (kmin - 1.0))).min(full) } else { full };
            pi.iter_mut().for_each(|w| *w *= 1.0 + beta);
            pi[l] -= beta;
            if pi[l] < 0.0 || beta == full {
                pi[l] = 0.0;
            }
        }
        if it % 64 == 63 {
            let s: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|w| *w /= s);
        }
        m_inv = checked_inverse(&moment(pts, pi, n), "point cloud moment")?;
    }
    Ok(m_inv)
}

/// Newton direction for the weights indexed by `free`, others held fixed.
fn kkt_step(sub: &[DVector<f64>], v: &[DVector<f64>], kappa: &[f64], free: &[usize]) -> Result<Vec<f64>> {
    let f = free.len();
    let mut kkt = Matrix::zeros(f + 1, f + 1);
    let mut rhs = DVector::zeros(f + 1);
    for (r, &a) in free.iter().enumerate() {
        for (c, &b) in free.iter().enumerate() {
            kkt[(r, c)] = sub[a].dot(&v[b]).powi(2);
        }
        kkt[(r, f)] = 1.0;
        kkt[(f, r)] = 1.0;
        rhs[r] = kappa[a];
    }
    let y = kkt.svd(true, true).solve(&rhs, 1e-14).map_err(|e| OlexError::Internal(e.to_string()))?;
    let mut d = vec![0.0; sub.len()];
    for (r, &a) in free.iter().enumerate() {
        d[a] = y[r];
    }
    Ok(d)
}

fn argmax(it: impl Iterator<Item = (usize, f64)>) -> (usize, f64) {
    it.fold((0, f64::MIN), |b, (i, k)| if k > b.1 { (i, k) } else { b })
}

fn moment(pts: &[DVector<f64>], pi: &[f64], n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for (p, &w) in pts.iter().zip(pi) {
        if w > 0.0 {
            m.ger(w, p, p, 1.0);
        }
    }
    m
}

fn leverages(pts: &[DVector<f64>], m_inv: &Matrix) -> Vec<f64> {
    pts.iter().map(|p| quad_form(m_inv, p.as_slice())).collect()
}

/// Newton's method for max log det Σπ_i p_i p_iᵗ over the simplex restricted
/// to `active`. Points whose weight reaches zero with κ ≤ n leave the set.
fn polish(pts: &[DVector<f64>], active: &mut Vec<usize>, pi: &mut Vec<f64>, n: usize) -> Result<()> {
    let nf = n as f64;
    for _ in 0..NEWTON_MAX_ITERS {
        let sub: Vec<DVector<f64>> = active.iter().map(|&i| pts[i].clone()).collect();
        let m = moment(&sub, pi, n);
        let m_inv = checked_inverse(&m, "point cloud moment")?;
        let v: Vec<DVector<f64>> = sub.iter().map(|p| &m_inv * p).collect();
        let kappa: Vec<f64> = sub.iter().zip(&v).map(|(p, v)| p.dot(v)).collect();
        let keep: Vec<bool> = pi.iter().zip(&kappa).map(|(&w, &k)| w > 0.0 || k > nf).collect();
        if keep.iter().any(|k| !k) {
            let mut it = keep.iter();
            active.retain(|_| *it.next().unwrap());
            let mut it = keep.iter();
            pi.retain(|_| *it.next().unwrap());
            continue;
        }
        // Tiny weights that Newton wants to shrink further are pinned at zero.
        let s = sub.len();
        let mut free: Vec<usize> = (0..s).collect();
        let floor = BOUND_FLOOR * pi.iter().copied().fold(0.0, f64::max);
        let d = loop {
            let d = kkt_step(&sub, &v, &kappa, &free)?;
            let pinned: Vec<usize> = free.iter().copied().filter(|&a| pi[a] <= floor && d[a] < 0.0).collect();
            if pinned.is_empty() {
                break d;
            }
            free.retain(|a| !pinned.contains(a));
            pinned.iter().for_each(|&a| pi[a] = 0.0);
        };
        let gap = free
            .iter()
            .map(|&a| if pi[a] > 0.0 { (kappa[a] - nf).abs() } else { kappa[a] - nf })
            .fold(0.0, f64::max);
        if gap <= NEWTON_EPS * nf {
            return Ok(());
        }
        let mut t = 1.0f64;
        for &a in &free {
            if pi[a] > 0.0 && d[a] < 0.0 {
                t = t.min(pi[a] / -d[a]);
            }
        }
        let logdet = m.determinant().ln();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = pi.iter().enumerate().map(|(a, &w)| (w + t * d[a]).max(0.0)).collect();
            let total: f64 = trial.iter().sum();
            let trial: Vec<f64> = trial.iter().map(|w| w / total).collect();
            let det = moment(&sub, &trial, n).determinant();
            if det > 0.0 && det.ln() >= logdet {
                *pi = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Ok(());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rel_frobenius;
    use crate::quadrature::Scheme;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn circle() -> SphericalGrid {
        SphericalGrid::build(2, 1024, Scheme::UniformCircle).unwrap()
    }

    #[test]
    fn legendre_of_ball_and_boxes() {
        let g = circle();
        let e = legendre_closed_form(&StarBody::ball(2, 1.7).unwrap(), &g).unwrap();
        assert!(rel_frobenius(e.shape_matrix(), &(DMatrix::identity(2, 2) / (1.7 * 1.7))) < 1e-12);
        let e = legendre_closed_form(&StarBody::cuboid(vec![1.0, 1.0]).unwrap(), &g).unwrap();
        assert!((e.max_principal_radius() - (4.0f64 / 3.0).sqrt()).abs() < 1e-4);
        let g3 = SphericalGrid::build(3, 2048, Scheme::FibonacciSphere).unwrap();
        let e = legendre_closed_form(&StarBody::cuboid(vec![1.0; 3]).unwrap(), &g3).unwrap();
        let (axes, _) = e.principal_axes();
        for a in axes {
            assert!((a - (5.0f64 / 3.0).sqrt()).abs() < 1e-2, "{a}");
        }
    }

    #[test]
    fn loewner_of_square_and_ball() {
        let g = circle();
        let e = loewner(&StarBody::cuboid(vec![1.0, 1.0]).unwrap(), &g).unwrap();
        assert!(rel_frobenius(e.shape_matrix(), &(DMatrix::identity(2, 2) * 0.5)) < 1e-6);
        assert!((e.volume() - 2.0 * PI).abs() < 1e-6);
        let e = loewner(&StarBody::ball(2, 0.8).unwrap(), &g).unwrap();
        assert!(rel_frobenius(e.shape_matrix(), &(DMatrix::identity(2, 2) / 0.64)) < 1e-9);
    }

    #[test]
    fn loewner_of_rectangle_and_ellipse() {
        let g = circle();
        // the Löwner ellipse of [−a,a]×[−b,b] has semi-axes √2·a, √2·b
        let e = loewner(&StarBody::cuboid(vec![2.0, 1.0]).unwrap(), &g).unwrap();
        let (axes, _) = e.principal_axes();
        let mut axes = axes;
        axes.sort_by(f64::total_cmp);
        // corners fall between nodes, so the sampled hull is slightly smaller
        assert!((axes[0] - 2f64.sqrt()).abs() < 3e-3 && (axes[1] - 2.0 * 2f64.sqrt()).abs() < 3e-3, "{axes:?}");
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.4]);
        let e = loewner(&StarBody::ellipsoid(q.clone()).unwrap(), &g).unwrap();
        assert!(rel_frobenius(e.shape_matrix(), &q) < 1e-8);
    }
}
