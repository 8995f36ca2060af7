//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use olex::linalg::{combine, expm_sym, rel_frobenius, trace_free_basis};
use olex::{
    isotropic_position, legendre_closed_form, limit_sweep, loewner, measured_quadrature_tolerance, orlicz_legendre,
    orlicz_norm, p1_gradient, solve_p1, Ellipsoid, FunctionalContext, Matrix, OrliczFunction, Scheme, SolveOptions,
    SphericalGrid, StarBody, WeightedSamples,
};

/// ‖Q₆₄ − Q_∞‖_F for the square with φ = t on the default circle grid. The
/// L_{t^p} ellipsoid of the square is the disk whose radius is the L_p mean
/// of ρ under the dual conical measure, so the value is closed form.
const SQUARE_SWEEP_FINAL_DIST: f64 = 0.08077565556967574;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn circle() -> SphericalGrid {
    SphericalGrid::default_for(2, 0).unwrap()
}

fn sphere() -> SphericalGrid {
    SphericalGrid::default_for(3, 0).unwrap()
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn square() -> StarBody {
    StarBody::cuboid(vec![1.0, 1.0]).unwrap()
}

fn rectangle() -> StarBody {
    StarBody::cuboid(vec![2.0, 1.0]).unwrap()
}

fn l1_ball() -> StarBody {
    StarBody::lp_ball(1.0, vec![1.0, 1.0]).unwrap()
}

fn cube() -> StarBody {
    StarBody::cuboid(vec![1.0; 3]).unwrap()
}

/// Regular hexagon with circumradius 1, sampled densely.
fn hexagon() -> StarBody {
    let m = 1440;
    let step = PI / 3.0;
    let (nodes, rho): (Vec<Vec<f64>>, Vec<f64>) = (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            let local = t.rem_euclid(step) - step / 2.0;
            (vec![t.cos(), t.sin()], (step / 2.0).cos() / local.cos())
        })
        .unzip();
    StarBody::radial_grid(nodes, rho).unwrap()
}

/// Star body with radial values uniform in [0.7, 1.3] at 48 directions.
fn random_star(seed: u64) -> StarBody {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 48;
    let (nodes, rho): (Vec<Vec<f64>>, Vec<f64>) = (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            (vec![t.cos(), t.sin()], rng.random_range(0.7..1.3))
        })
        .unzip();
    StarBody::radial_grid(nodes, rho).unwrap()
}

fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

/// SPD matrix with eigenvalues log-uniform in [1/spread, spread].
fn random_spd(n: usize, spread: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let r = random_rotation(n, rng);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        spread.powf(rng.random_range(-1.0..1.0))
    }));
    &r * d * r.transpose()
}

/// Invertible matrix with singular values log-uniform in [1/spread, spread].
fn random_invertible(n: usize, spread: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let u = random_rotation(n, rng);
    let v = random_rotation(n, rng);
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        spread.powf(rng.random_range(-1.0..1.0))
    }));
    u * s * v.transpose()
}

fn phis() -> Vec<(&'static str, OrliczFunction)> {
    vec![
        ("t", OrliczFunction::Power(1.0)),
        ("t^2", OrliczFunction::Power(2.0)),
        ("t^4", OrliczFunction::Power(4.0)),
        ("e^t-1", OrliczFunction::ExpMinusOne),
    ]
}

fn ellipsoid_fixed_point() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g2 = circle();
    // the n = 3 cases use a finer grid; the default one resolves axis ratios
    // near 2 only to about 3e-5
    let g3 = SphericalGrid::build(3, 4096, Scheme::FibonacciSphere).unwrap();
    let mut cases: Vec<(Matrix, &SphericalGrid)> = (0..20).map(|_| (random_spd(2, 4.0, &mut rng), &g2)).collect();
    cases.extend((0..5).map(|_| (random_spd(3, 2.0, &mut rng), &g3)));
    let worst = cases
        .par_iter()
        .map(|(q, g)| {
            let k = StarBody::ellipsoid(q.clone()).unwrap();
            phis()
                .iter()
                .map(|(_, phi)| {
                    let (l, _) = orlicz_legendre(&k, phi, g, &opts()).unwrap();
                    rel_frobenius(l.shape_matrix(), q)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst <= 1e-5, format!("25 ellipsoids x 4 phi, max rel err {worst:.2e} (tol 1e-5)"))
}

fn legendre_oracle() -> Outcome {
    let g2 = circle();
    let g3 = sphere();
    let bodies = [
        ("square", square(), &g2),
        ("rectangle", rectangle(), &g2),
        ("l1-ball", l1_ball(), &g2),
        ("random", random_star(7), &g2),
        ("cube", cube(), &g3),
    ];
    let mut worst = 0.0f64;
    let mut radius_sq = 0.0;
    for (name, k, g) in &bodies {
        let (l, _) = orlicz_legendre(k, &OrliczFunction::Power(2.0), g, &opts()).unwrap();
        let c = legendre_closed_form(k, g).unwrap();
        worst = worst.max(rel_frobenius(l.shape_matrix(), c.shape_matrix()));
        if *name == "square" {
            radius_sq = l.max_principal_radius();
        }
    }
    let target = (4.0f64 / 3.0).sqrt();
    let ok = worst <= 1e-5 && (radius_sq - target).abs() <= 1e-4;
    outcome(ok, format!("5 bodies, max rel err {worst:.2e} (tol 1e-5); square radius {radius_sq:.6} vs {target:.6}"))
}

fn all_test_bodies() -> Vec<(&'static str, StarBody, SphericalGrid)> {
    vec![
        ("square", square(), circle()),
        ("rectangle", rectangle(), circle()),
        ("l1-ball", l1_ball(), circle()),
        ("hexagon", hexagon(), circle()),
        ("l3-ball", StarBody::lp_ball(3.0, vec![1.2, 0.9]).unwrap(), circle()),
        ("random", random_star(7), circle()),
        ("random-b", random_star(8), circle()),
        ("ellipse", StarBody::ellipsoid(DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5])).unwrap(), circle()),
        ("cube", cube(), sphere()),
        ("octahedron", StarBody::lp_ball(1.0, vec![1.0; 3]).unwrap(), sphere()),
    ]
}

fn loewner_oracle() -> Outcome {
    let e = loewner(&square(), &circle()).unwrap();
    let q_err = rel_frobenius(e.shape_matrix(), &(DMatrix::identity(2, 2) * 0.5));
    let v_err = (e.volume() - 2.0 * PI).abs();
    let mut worst_ratio = 0.0f64;
    for (_, k, g) in all_test_bodies() {
        let e = loewner(&k, &g).unwrap();
        let rho = k.sample(&g).unwrap();
        for (u, r) in g.nodes().zip(&rho) {
            worst_ratio = worst_ratio.max(r / e.radial(u));
        }
    }
    let ok = q_err <= 1e-6 && v_err <= 1e-6 && worst_ratio <= 1.0 + 1e-8;
    outcome(
        ok,
        format!("square Q err {q_err:.2e}, volume err {v_err:.2e}; max containment ratio {worst_ratio:.12} over 10 bodies"),
    )
}

fn limit_theorem() -> Outcome {
    let ps = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let res = limit_sweep(&square(), &OrliczFunction::Power(1.0), &ps, &circle(), &opts()).unwrap();
    let d: Vec<f64> = res.entries.iter().map(|e| e.dist_to_loewner.unwrap()).collect();
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    let last = *d.last().unwrap();
    let r2 = res.entries[0].ellipsoid.as_ref().unwrap().max_principal_radius();
    let ok = decreasing && (last - SQUARE_SWEEP_FINAL_DIST).abs() <= 1e-6 && (r2 - (4.0f64 / 3.0).sqrt()).abs() <= 1e-4;
    let trail: Vec<String> = d.iter().map(|x| format!("{x:.4}")).collect();
    outcome(
        ok,
        format!(
            "dist [{}] strictly decreasing={decreasing}; p=64 value {last:.6} vs closed form {SQUARE_SWEEP_FINAL_DIST:.6}; p=2 radius {r2:.6}",
            trail.join(", ")
        ),
    )
}

fn volume_chain() -> Outcome {
    let g = circle();
    let bodies = [("square", square()), ("l1-ball", l1_ball()), ("random", random_star(11))];
    let mut worst_gap = f64::INFINITY;
    for (_, k) in &bodies {
        let tol = measured_quadrature_tolerance(k, &g).unwrap();
        for phi in [OrliczFunction::Power(2.0), OrliczFunction::ExpMinusOne] {
            let mut vols = vec![orlicz_legendre(k, &OrliczFunction::Power(1.0), &g, &opts()).unwrap().0.volume()];
            for p in [1.0, 2.0, 4.0] {
                let phi_p = OrliczFunction::power_of(phi.clone(), p).unwrap();
                vols.push(orlicz_legendre(k, &phi_p, &g, &opts()).unwrap().0.volume());
            }
            vols.push(loewner(k, &g).unwrap().volume());
            for w in vols.windows(2) {
                // gap in units of the allowed slack 2·tol·V
                worst_gap = worst_gap.min((w[1] - w[0]) / (2.0 * tol * w[1]));
            }
        }
    }
    outcome(worst_gap >= -1.0, format!("3 bodies x 2 phi, min gap {worst_gap:.3e} in units of 2x quadrature tol (need >= -1)"))
}

fn volume_lower_bound() -> Outcome {
    let mut worst = f64::INFINITY;
    for (_, k, g) in all_test_bodies() {
        let vk = k.quadrature_volume(&g).unwrap();
        for (_, phi) in phis() {
            let (l, _) = orlicz_legendre(&k, &phi, &g, &opts()).unwrap();
            worst = worst.min(l.volume() / vk);
        }
    }
    let mut eq_err = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = circle();
    for _ in 0..5 {
        let q = random_spd(2, 3.0, &mut rng);
        let e = Ellipsoid::new(q.clone()).unwrap();
        let k = StarBody::ellipsoid(q).unwrap();
        for (_, phi) in phis() {
            let (l, _) = orlicz_legendre(&k, &phi, &g, &opts()).unwrap();
            eq_err = eq_err.max((l.volume() / e.volume() - 1.0).abs());
        }
    }
    let ok = worst >= 1.0 - 1e-4 && eq_err <= 1e-5;
    outcome(ok, format!("min V(L)/V(K) {worst:.6} over 10 bodies x 4 phi; ellipsoid equality err {eq_err:.2e}"))
}

fn inverse_ratio() -> Outcome {
    let mut worst = f64::INFINITY;
    for (_, k, g) in symmetric_convex_bodies() {
        let n = k.dim();
        let vk = k.quadrature_volume(&g).unwrap();
        let bound = olex::report::inverse_ratio_bound(n);
        for (_, phi) in phis() {
            let (l, _) = orlicz_legendre(&k, &phi, &g, &opts()).unwrap();
            worst = worst.min(vk / l.volume() - bound);
        }
    }
    outcome(worst >= -1e-3, format!("min V(K)/V(L) - 2^n/(n! w_n) = {worst:.4} (need >= -1e-3)"))
}

fn symmetric_convex_bodies() -> Vec<(&'static str, StarBody, SphericalGrid)> {
    all_test_bodies().into_iter().filter(|(name, k, _)| k.is_symmetric_convex() || *name == "hexagon").collect()
}

fn isotropy_certificate() -> Outcome {
    let bodies = [
        ("square", square(), circle()),
        ("l1-ball", l1_ball(), circle()),
        ("random", random_star(3), circle()),
        ("rectangle", rectangle(), circle()),
        ("cube", cube(), sphere()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut max_res = 0.0f64;
    let mut min_change = f64::INFINITY;
    let mut solves = 0;
    for (_, k, g) in &bodies {
        for phi in [OrliczFunction::Power(2.0), OrliczFunction::ExpMinusOne, OrliczFunction::Power(4.0)] {
            let (e, rep) = solve_p1(k, &phi, g, &opts()).unwrap();
            if !rep.converged() {
                return outcome(false, format!("solve did not converge: {:?}", rep.terminated));
            }
            solves += 1;
            max_res = max_res.max(rep.final_residual().unwrap());
            let ctx = FunctionalContext::new(k.clone(), g.clone(), phi.clone()).unwrap();
            let a = e.canonical_spd_factor();
            let f0 = ctx.dual_orlicz_mixed_volume(&e).unwrap();
            let basis = trace_free_basis(k.dim());
            for _ in 0..32 {
                let c: Vec<f64> = (0..basis.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
                let l = combine(&basis, &c);
                let l = &l / l.norm();
                let moved = Ellipsoid::from_factor(&(&a * expm_sym(&(l * 1e-3)))).unwrap();
                let f = ctx.dual_orlicz_mixed_volume(&moved).unwrap();
                min_change = min_change.min((f - f0) / f0);
            }
        }
    }
    let ok = max_res <= 1e-8 && min_change >= -1e-6;
    outcome(ok, format!("{solves} solves, max residual {max_res:.2e}; min relative change under 32 perturbations {min_change:.2e}"))
}

fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let g2 = circle();
    let g3 = sphere();
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..50 {
        let n = if i % 5 == 4 { 3 } else { 2 };
        let g = if n == 2 { &g2 } else { &g3 };
        let k = match (n, i % 3) {
            (3, _) => StarBody::lp_ball(3.0, vec![1.0, 0.8, 1.3]).unwrap(),
            (_, 0) => StarBody::lp_ball(rng.random_range(1.0..5.0), vec![1.0, rng.random_range(0.5..1.5)]).unwrap(),
            (_, 1) => StarBody::cuboid(vec![1.0, rng.random_range(0.5..1.5)]).unwrap(),
            _ => random_star(100 + i as u64),
        };
        let phi = match i % 4 {
            0 => OrliczFunction::Power(2.0),
            1 => OrliczFunction::ExpMinusOne,
            2 => OrliczFunction::Power(rng.random_range(1.0..6.0)),
            _ => OrliczFunction::power_of(OrliczFunction::ExpMinusOne, 2.0).unwrap(),
        };
        let t = random_invertible(n, 1.5, &mut rng);
        let t = &t / t.determinant().abs().powf(1.0 / n as f64);
        let t = if t.determinant() < 0.0 {
            let mut f = DMatrix::identity(n, n);
            f[(0, 0)] = -1.0;
            &t * f
        } else {
            t
        };
        let basis = trace_free_basis(n);
        let c: Vec<f64> = (0..basis.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let l = combine(&basis, &c);
        let d = p1_gradient(&k, &phi, g, &t).unwrap();
        let an: f64 = d.component_mul(&l).sum();
        let ctx = FunctionalContext::new(k.clone(), g.clone(), phi.clone()).unwrap();
        let at = |s: f64| {
            let e = Ellipsoid::from_factor(&(&t * expm_sym(&(&l * -s)))).unwrap();
            ctx.dual_orlicz_mixed_volume(&e).unwrap()
        };
        let fd = (at(eps) - at(-eps)) / (2.0 * eps);
        let scale = an.abs().max(d.norm() * l.norm());
        worst = worst.max((fd - an).abs() / scale);
    }
    outcome(worst <= 1e-5, format!("50 triples (10 in n=3), max rel err {worst:.2e} (tol 1e-5)"))
}

fn gl_covariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let g = circle();
    let bodies = [StarBody::lp_ball(4.0, vec![1.0, 0.7]).unwrap(), StarBody::lp_ball(3.0, vec![1.2, 0.9]).unwrap()];
    let phis = [OrliczFunction::ExpMinusOne, OrliczFunction::Power(3.0)];
    let ts: Vec<Matrix> = (0..20).map(|_| random_invertible(2, 1.6, &mut rng)).collect();
    let worst = ts
        .par_iter()
        .map(|t| {
            let mut w = 0.0f64;
            for k in &bodies {
                for phi in &phis {
                    let (l, _) = orlicz_legendre(k, phi, &g, &opts()).unwrap();
                    let (lt, _) = orlicz_legendre(&k.transform(t).unwrap(), phi, &g, &opts()).unwrap();
                    let expect = l.apply_linear(t).unwrap();
                    w = w.max(rel_frobenius(lt.shape_matrix(), expect.shape_matrix()));
                }
            }
            w
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst <= 1e-5, format!("20 T x 2 bodies x 2 phi, max rel err {worst:.2e} (tol 1e-5)"))
}

fn orlicz_norm_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut worst_lp = 0.0f64;
    let mut worst_id = 0.0f64;
    for _ in 0..200 {
        let m = rng.random_range(1..40);
        let values: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..3.0)).collect();
        let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..2.0)).collect();
        let s = WeightedSamples::new(values.clone(), weights.clone()).unwrap();
        let p = rng.random_range(1.0..8.0);
        let total: f64 = weights.iter().sum();
        let lp = (values.iter().zip(&weights).map(|(v, w)| w * v.powf(p)).sum::<f64>() / total).powf(1.0 / p);
        let got = orlicz_norm(&s, &OrliczFunction::Power(p)).unwrap();
        if lp > 0.0 {
            worst_lp = worst_lp.max((got - lp).abs() / lp);
        }
        let phi = OrliczFunction::ExpMinusOne;
        let lam = orlicz_norm(&s, &phi).unwrap();
        if lam > 0.0 {
            let mean = s.mean_of(|v| phi.value(v / lam));
            worst_id = worst_id.max((mean - phi.value(1.0)).abs());
        }
    }
    let ok = worst_lp <= 1e-10 && worst_id <= 1e-8;
    outcome(ok, format!("200 samples: power-norm rel err {worst_lp:.2e} (tol 1e-10), identity err {worst_id:.2e} (tol 1e-8)"))
}

/// Minimum of Ṽ_φ(K, E) over a rotation × log-aspect grid of area-π ellipses.
/// Grid search over det-normalized ellipses Q = R diag(e^-2a, e^2a) Rᵗ.
/// The bodies are origin-symmetric, so each antipodal pair of nodes is
/// folded into one node carrying both masses.
fn brute_force_min(ctx: &FunctionalContext) -> f64 {
    let (na, nr) = (720, 400);
    let m = ctx.measure();
    let half: Vec<(f64, f64, f64, f64)> = ctx
        .grid()
        .nodes()
        .zip(&m.rho)
        .zip(&m.masses)
        .filter(|((u, _), _)| u[1] > 0.0 || (u[1] == 0.0 && u[0] > 0.0))
        .map(|((u, &r), &w)| (u[0], u[1], r, 2.0 * w))
        .collect();
    let phi = ctx.phi();
    (0..na)
        .into_par_iter()
        .map(|i| {
            let th = PI * i as f64 / na as f64;
            let (c, s) = (th.cos(), th.sin());
            let rotated: Vec<(f64, f64, f64, f64)> =
                half.iter().map(|&(x, y, r, w)| ((c * x + s * y).powi(2), (c * y - s * x).powi(2), r, w)).collect();
            (0..nr)
                .map(|j| {
                    let la = -0.5 + j as f64 / (nr - 1) as f64;
                    let (d1, d2) = ((-2.0 * la).exp(), (2.0 * la).exp());
                    match phi {
                        OrliczFunction::Power(p) if *p == 2.0 => {
                            rotated.iter().map(|&(a, b, r, w)| w * r * r * (d1 * a + d2 * b)).sum::<f64>()
                        }
                        _ => rotated.iter().map(|&(a, b, r, w)| w * phi.value(r * (d1 * a + d2 * b).sqrt())).sum::<f64>(),
                    }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn brute_force_equivalence() -> Outcome {
    let g = circle();
    let mut worst = 0.0f64;
    for k in [square(), l1_ball()] {
        for phi in [OrliczFunction::Power(2.0), OrliczFunction::ExpMinusOne] {
            let (e, _) = solve_p1(&k, &phi, &g, &opts()).unwrap();
            let ctx = FunctionalContext::new(k.clone(), g.clone(), phi.clone()).unwrap();
            let solved = ctx.dual_orlicz_mixed_volume(&e).unwrap();
            let probe = Ellipsoid::from_factor(&DMatrix::from_row_slice(2, 2, &[1.2, 0.3, 0.3, 0.9])).unwrap();
            let q = probe.shape_matrix();
            let direct: f64 = ctx
                .grid()
                .nodes()
                .zip(&ctx.measure().rho)
                .zip(&ctx.measure().masses)
                .map(|((u, r), w)| {
                    let quad = q[(0, 0)] * u[0] * u[0] + 2.0 * q[(0, 1)] * u[0] * u[1] + q[(1, 1)] * u[1] * u[1];
                    w * phi.value(r * quad.sqrt())
                })
                .sum();
            let reference = ctx.dual_orlicz_mixed_volume(&probe).unwrap();
            if (direct - reference).abs() > 1e-12 * reference {
                return outcome(false, format!("fast evaluator disagrees: {direct} vs {reference}"));
            }
            let brute = brute_force_min(&ctx);
            worst = worst.max((solved - brute).abs() / brute);
            if solved > brute * (1.0 + 1e-12) {
                return outcome(false, format!("grid search beat the solver: {brute} < {solved}"));
            }
        }
    }
    outcome(worst <= 1e-4, format!("2 bodies x 2 phi, 720x400 grid, max rel diff {worst:.2e} (tol 1e-4)"))
}

fn isotropic_position_check() -> Outcome {
    let g = circle();
    let a = DMatrix::from_row_slice(2, 2, &[1.3, 0.4, -0.2, 0.8]);
    let k = StarBody::ball(2, 1.0).unwrap().transform(&a).unwrap();
    let pos = isotropic_position(&k, &OrliczFunction::ExpMinusOne, &g, &opts()).unwrap();
    let ta = &pos.t * &a;
    let sv = ta.singular_values();
    let spread = (sv.max() - sv.min()).abs();
    outcome(pos.residual < 1e-8 && spread < 1e-5, format!("ellipse: residual {:.2e}, singular value spread of T*A {spread:.2e}", pos.residual))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 ellipsoid fixed point", ellipsoid_fixed_point),
        ("2 Legendre oracle", legendre_oracle),
        ("3 Loewner oracle", loewner_oracle),
        ("4 limit p -> inf", limit_theorem),
        ("5 volume chain", volume_chain),
        ("6 volume lower bound", volume_lower_bound),
        ("7 inverse volume ratio bound", inverse_ratio),
        ("8 isotropy certificate", isotropy_certificate),
        ("9 gradient vs finite differences", gradient_correctness),
        ("10 GL covariance", gl_covariance),
        ("11 Orlicz norm", orlicz_norm_checks),
        ("12 brute-force equivalence", brute_force_equivalence),
        ("+ isotropic position", isotropic_position_check),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{name}] {} ({:.2}s)", o.detail, start.elapsed().as_secs_f64());
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
