//! Structured triangulation of the unit disk.
//!
//! Vertices sit on concentric circles of radii k/R (k = 1..R) plus the
//! center, with a fixed angular count nθ = 4R on every ring. Between
//! consecutive rings each quad is split along the (k−1, j) → (k, j+1)
//! diagonal, and the innermost ring is a fan around the center. Triangles
//! near the center are needle-shaped, which is harmless for P1 convergence —
//! it is the maximal angle that must stay bounded away from π, and here it
//! does.
//!
//! The regular structure is what the spectral preconditioner exploits: the
//! vertex set and couplings are invariant under rotation by one angular step,
//! so ring-averaged operators become block circulants.

use num_complex::Complex64;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct DiskMesh {
    rings: usize,
    n_theta: usize,
    vertices: Vec<Complex64>,
    triangles: Vec<[usize; 3]>,
}

impl DiskMesh {
    /// Builds the mesh with `rings` concentric rings and 4·rings angular
    /// subdivisions.
    pub fn new(rings: usize) -> Self {
        assert!(rings >= 2, "at least two rings");
        let n_theta = 4 * rings;
        let mut vertices = Vec::with_capacity(1 + rings * n_theta);
        vertices.push(Complex64::new(0.0, 0.0));
        for k in 1..=rings {
            let r = k as f64 / rings as f64;
            for j in 0..n_theta {
                let theta = TWO_PI * j as f64 / n_theta as f64;
                vertices.push(Complex64::from_polar(r, theta));
            }
        }

        let mut triangles = Vec::with_capacity(n_theta * (2 * rings - 1));
        let vid = |k: usize, j: usize| 1 + (k - 1) * n_theta + (j % n_theta);
        for j in 0..n_theta {
            triangles.push([0, vid(1, j), vid(1, j + 1)]);
        }
        for k in 2..=rings {
            for j in 0..n_theta {
                triangles.push([vid(k - 1, j), vid(k, j), vid(k, j + 1)]);
                triangles.push([vid(k - 1, j), vid(k, j + 1), vid(k - 1, j + 1)]);
            }
        }
        Self { rings, n_theta, vertices, triangles }
    }

    pub fn rings(&self) -> usize {
        self.rings
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Index of the vertex on ring `k` (1-based) at angular slot `j`
    /// (wrapped). Ring 0 is the center.
    pub fn vertex_id(&self, k: usize, j: usize) -> usize {
        if k == 0 {
            0
        } else {
            1 + (k - 1) * self.n_theta + (j % self.n_theta)
        }
    }

    /// Signed area of a triangle (positive for the counterclockwise
    /// orientation the constructor produces).
    pub fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        let [a, b, c] = *t;
        let u = self.vertices[b] - self.vertices[a];
        let v = self.vertices[c] - self.vertices[a];
        0.5 * (u.re * v.im - u.im * v.re)
    }

    /// Total mesh area: the inscribed polygon of the unit circle,
    /// (nθ/2)·sin(2π/nθ).
    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| self.triangle_area(t)).sum()
    }

    /// Plain-text dump (`v x y` / `t i j k` lines) for external inspection.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("v {} {}\n", v.re, v.im));
        }
        for t in &self.triangles {
            out.push_str(&format!("t {} {} {}\n", t[0], t[1], t[2]));
        }
        out
    }
}
