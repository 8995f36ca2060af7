//! Convex hull of unit vectors in R³, used to triangulate sampled radial
//! functions on S².

use std::collections::HashSet;

use crate::error::{OlexError, Result};

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    dot(a, cross(b, c))
}

/// Outward-oriented triangles of the hull of a point set on S² that
/// contains the origin in its interior.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SphereTriangulation {
    points: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
}

impl SphereTriangulation {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        let n = points.len();
        if n < 4 {
            return Err(OlexError::Config(format!("need at least 4 nodes to triangulate S², got {n}")));
        }
        const EPS: f64 = 1e-12;

        // initial tetrahedron
        let i0 = 0;
        let i1 = (0..n)
            .max_by(|&a, &b| {
                let da = dot(sub(points[a], points[i0]), sub(points[a], points[i0]));
                let db = dot(sub(points[b], points[i0]), sub(points[b], points[i0]));
                da.total_cmp(&db)
            })
            .unwrap();
        let e01 = sub(points[i1], points[i0]);
        let i2 = (0..n)
            .max_by(|&a, &b| {
                let da = dot(cross(e01, sub(points[a], points[i0])), cross(e01, sub(points[a], points[i0])));
                let db = dot(cross(e01, sub(points[b], points[i0])), cross(e01, sub(points[b], points[i0])));
                da.total_cmp(&db)
            })
            .unwrap();
        let nrm = cross(e01, sub(points[i2], points[i0]));
        let i3 = (0..n)
            .max_by(|&a, &b| {
                let da = dot(nrm, sub(points[a], points[i0])).abs();
                let db = dot(nrm, sub(points[b], points[i0])).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        if dot(nrm, sub(points[i3], points[i0])).abs() < 1e-9 {
            return Err(OlexError::Config("radial grid nodes are coplanar".into()));
        }

        let mut faces: Vec<[usize; 3]> = Vec::new();
        let tetra = [i0, i1, i2, i3];
        let centroid = {
            let mut c = [0.0; 3];
            for &i in &tetra {
                for k in 0..3 {
                    c[k] += points[i][k] / 4.0;
                }
            }
            c
        };
        for (a, b, c) in [(i0, i1, i2), (i0, i1, i3), (i0, i2, i3), (i1, i2, i3)] {
            let nm = cross(sub(points[b], points[a]), sub(points[c], points[a]));
            if dot(nm, sub(points[a], centroid)) > 0.0 {
                faces.push([a, b, c]);
            } else {
                faces.push([a, c, b]);
            }
        }

        let normal = |f: &[usize; 3], pts: &[[f64; 3]]| {
            cross(sub(pts[f[1]], pts[f[0]]), sub(pts[f[2]], pts[f[0]]))
        };

        for p in 0..n {
            if tetra.contains(&p) {
                continue;
            }
            let visible: Vec<bool> = faces
                .iter()
                .map(|f| dot(normal(f, &points), sub(points[p], points[f[0]])) > EPS)
                .collect();
            if !visible.iter().any(|v| *v) {
                continue;
            }
            let mut vis_edges = HashSet::new();
            for (f, _) in faces.iter().zip(&visible).filter(|(_, v)| **v) {
                for k in 0..3 {
                    vis_edges.insert((f[k], f[(k + 1) % 3]));
                }
            }
            let mut next = Vec::with_capacity(faces.len() + 2);
            let mut horizon = Vec::new();
            for (f, v) in faces.iter().zip(&visible) {
                if *v {
                    for k in 0..3 {
                        let (a, b) = (f[k], f[(k + 1) % 3]);
                        if !vis_edges.contains(&(b, a)) {
                            horizon.push((a, b));
                        }
                    }
                } else {
                    next.push(*f);
                }
            }
            for (a, b) in horizon {
                next.push([a, b, p]);
            }
            faces = next;
        }

        for f in &faces {
            let nm = normal(f, &points);
            if dot(nm, points[f[0]]) <= 0.0 {
                return Err(OlexError::Config(
                    "radial grid nodes do not surround the origin".into(),
                ));
            }
        }
        Ok(SphereTriangulation { points, faces })
    }

    /// Face index and normalized barycentric weights of the ray through `u`.
    pub fn locate(&self, u: [f64; 3]) -> ([usize; 3], [f64; 3]) {
        let mut best = (0usize, f64::NEG_INFINITY, [0.0; 3]);
        for (fi, f) in self.faces.iter().enumerate() {
            let (a, b, c) = (self.points[f[0]], self.points[f[1]], self.points[f[2]]);
            let d = det3(a, b, c);
            let w = [det3(u, b, c) / d, det3(a, u, c) / d, det3(a, b, u) / d];
            let m = w[0].min(w[1]).min(w[2]);
            if m >= -1e-14 {
                return (*f, normalize(w));
            }
            if m > best.1 {
                best = (fi, m, w);
            }
        }
        // only reachable through rounding on an edge
        let w = [best.2[0].max(0.0), best.2[1].max(0.0), best.2[2].max(0.0)];
        (self.faces[best.0], normalize(w))
    }

    #[cfg(test)]
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }
}

fn normalize(w: [f64; 3]) -> [f64; 3] {
    let s = w[0] + w[1] + w[2];
    [w[0] / s, w[1] / s, w[2] / s]
}
