//! P1 finite-element assembly on the disk mesh.
//!
//! The stiffness matrix uses exact barycentric gradients, so it annihilates
//! constants to rounding. The weighted mass matrix integrates the density at
//! the three edge midpoints of each triangle — the rule is exact for
//! quadratics, which keeps the mass consistent to the same order as the
//! stiffness. No lumping anywhere: the eigenvalue problem needs the
//! consistent pencil.

use num_complex::Complex64;

use crate::error::{Error, Result};
use super::mesh::DiskMesh;

/// Compressed sparse rows, with every structural entry stored (both
/// triangles of a quad touch the same edges, so rows stay short: at most 7
/// couplings plus the diagonal away from the center).
#[derive(Debug, Clone)]
pub struct Csr {
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self { row_ptr, col_idx, values }
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn multiply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n() {
            let mut acc = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[idx] * x[self.col_idx[idx]];
            }
            out[i] = acc;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.col_idx[idx] == j {
                return self.values[idx];
            }
        }
        0.0
    }

    /// a·X + b·Y entrywise, requiring identical sparsity patterns.
    pub fn linear_combination(a: f64, x: &Csr, b: f64, y: &Csr) -> Csr {
        assert_eq!(x.row_ptr, y.row_ptr);
        assert_eq!(x.col_idx, y.col_idx);
        Csr {
            row_ptr: x.row_ptr.clone(),
            col_idx: x.col_idx.clone(),
            values: x
                .values
                .iter()
                .zip(&y.values)
                .map(|(&p, &q)| a * p + b * q)
                .collect(),
        }
    }
}

/// Stiffness matrix ∫ ∇φ_i · ∇φ_j over the mesh.
pub fn stiffness(mesh: &DiskMesh) -> Csr {
    let n = mesh.vertex_count();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let vs = mesh.vertices();
    for t in mesh.triangles() {
        let [a, b, c] = *t;
        let area = mesh.triangle_area(t);
        // ∇λ_i = rot90(opposite edge) / (2·area); the rotation cancels in the
        // dot products, so the edge vectors are used directly.
        let e = [vs[c] - vs[b], vs[a] - vs[c], vs[b] - vs[a]];
        for (li, &vi) in t.iter().enumerate() {
            for (lj, &vj) in t.iter().enumerate() {
                let dot = e[li].re * e[lj].re + e[li].im * e[lj].im;
                rows[vi].push((vj, dot / (4.0 * area)));
            }
        }
    }
    Csr::from_rows(rows)
}

/// Weighted mass matrix ∫ w φ_i φ_j, with w sampled at edge midpoints.
///
/// The midpoint rule couples each edge's endpoint pair: locally
/// M_ij = area·w(m_ij)/12 for i ≠ j and M_ii = area·(w(m_ij) + w(m_ik))/12.
/// The same sparsity pattern as the stiffness keeps shifted combinations
/// cheap. Weights must be strictly positive.
pub fn weighted_mass<F>(mesh: &DiskMesh, weight: F) -> Result<Csr>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let n = mesh.vertex_count();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let vs = mesh.vertices();
    for t in mesh.triangles() {
        let [a, b, c] = *t;
        let area = mesh.triangle_area(t);
        let mut w = [0.0; 3];
        // w[l] belongs to the edge opposite local vertex l.
        for (l, (p, q)) in [(b, c), (c, a), (a, b)].into_iter().enumerate() {
            let mid = 0.5 * (vs[p] + vs[q]);
            let value = weight(mid)?;
            if !(value > 0.0) {
                return Err(Error::NonPositiveWeight { x: mid.re, y: mid.im });
            }
            w[l] = value;
        }
        let scale = area / 12.0;
        for (li, &vi) in t.iter().enumerate() {
            for (lj, &vj) in t.iter().enumerate() {
                if li == lj {
                    let (e1, e2) = ((li + 1) % 3, (li + 2) % 3);
                    rows[vi].push((vj, scale * (w[e1] + w[e2])));
                } else {
                    // The edge containing both vertices is opposite the third.
                    let opp = 3 - li - lj;
                    rows[vi].push((vj, scale * w[opp]));
                }
            }
        }
    }
    Ok(Csr::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let mesh = DiskMesh::new(8);
        let k = stiffness(&mesh);
        let mut out = vec![0.0; k.n()];
        k.multiply(&ones(k.n()), &mut out);
        let sup = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(sup < 1e-12, "K·1 sup = {sup}");
    }

    #[test]
    fn stiffness_is_symmetric() {
        let mesh = DiskMesh::new(5);
        let k = stiffness(&mesh);
        for i in 0..k.n() {
            for idx in k.row_ptr[i]..k.row_ptr[i + 1] {
                let j = k.col_idx[idx];
                assert!((k.values[idx] - k.get(j, i)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn stiffness_dirichlet_energy_of_linear_function() {
        // u = x has ∫|∇u|² = mesh area exactly for P1.
        let mesh = DiskMesh::new(12);
        let k = stiffness(&mesh);
        let u: Vec<f64> = mesh.vertices().iter().map(|v| v.re).collect();
        let mut ku = vec![0.0; k.n()];
        k.multiply(&u, &mut ku);
        let energy: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
        assert!((energy - mesh.area()).abs() < 1e-11);
    }

    #[test]
    fn unit_mass_totals_mesh_area() {
        let mesh = DiskMesh::new(9);
        let m = weighted_mass(&mesh, |_| Ok(1.0)).unwrap();
        let one = ones(m.n());
        let mut mu = vec![0.0; m.n()];
        m.multiply(&one, &mut mu);
        let total: f64 = mu.iter().sum();
        assert!((total - mesh.area()).abs() < 1e-12);
    }

    #[test]
    fn mass_integrates_linear_weight_exactly() {
        // ∫ x² over the mesh via weight w = 1 and u = x: midpoint rule is
        // exact for quadratics, so 1ᵀM[x·x] ... use u = x against w = 1.
        let mesh = DiskMesh::new(10);
        let m = weighted_mass(&mesh, |_| Ok(1.0)).unwrap();
        let u: Vec<f64> = mesh.vertices().iter().map(|v| v.re).collect();
        let mut mu = vec![0.0; m.n()];
        m.multiply(&u, &mut mu);
        let integral: f64 = u.iter().zip(&mu).map(|(a, b)| a * b).sum();
        // Exact ∫ x² over the inscribed polygon: split per triangle with the
        // midpoint rule (exact for quadratics) — recompute independently.
        let vs = mesh.vertices();
        let mut exact = 0.0;
        for t in mesh.triangles() {
            let [a, b, c] = *t;
            let area = mesh.triangle_area(t);
            for (p, q) in [(a, b), (b, c), (c, a)] {
                let mid = 0.5 * (vs[p] + vs[q]);
                exact += area / 3.0 * mid.re * mid.re;
            }
        }
        assert!((integral - exact).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let mesh = DiskMesh::new(4);
        let result = weighted_mass(&mesh, |z| Ok(0.5 - z.re.abs() - z.im.abs()));
        assert!(matches!(result, Err(Error::NonPositiveWeight { .. })));
    }

    #[test]
    fn mass_and_stiffness_share_a_sparsity_pattern() {
        let mesh = DiskMesh::new(6);
        let k = stiffness(&mesh);
        let m = weighted_mass(&mesh, |_| Ok(1.0)).unwrap();
        assert_eq!(k.row_ptr, m.row_ptr);
        assert_eq!(k.col_idx, m.col_idx);
    }
}
