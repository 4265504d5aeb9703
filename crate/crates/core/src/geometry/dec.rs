use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::mesh::TriangleMesh;
use crate::measure::{L2Space, Operator, SelfAdjointOperator, WeightedSpace};

/// Sparse signed incidence matrix with entries in `{-1, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incidence {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col, ±1)`, at most one entry per position.
    pub entries: Vec<(usize, usize, i8)>,
}

impl Incidence {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, s) in &self.entries {
            m[(r, c)] = s as f64;
        }
        m
    }

    /// Nonzero entries of `self · other`, in integer arithmetic.
    pub fn product_nonzeros(&self, other: &Incidence) -> Result<Vec<(usize, usize, i64)>> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut by_row: Vec<Vec<(usize, i64)>> = vec![Vec::new(); other.rows];
        for &(r, c, s) in &other.entries {
            by_row[r].push((c, s as i64));
        }
        let mut acc: HashMap<(usize, usize), i64> = HashMap::new();
        for &(r, k, s) in &self.entries {
            for &(c, t) in &by_row[k] {
                *acc.entry((r, c)).or_insert(0) += s as i64 * t;
            }
        }
        let mut out: Vec<_> = acc.into_iter().filter(|&(_, v)| v != 0).map(|((r, c), v)| (r, c, v)).collect();
        out.sort_unstable();
        Ok(out)
    }
}

/// Coboundaries and diagonal Hodge stars of a triangle mesh.
///
/// Stars are barycentric: `star0` is the vertex dual area, `star1` the ratio
/// of the dual edge (midpoint to the two face centroids) to the primal edge,
/// and `star2` the reciprocal face area. They are positive on every valid
/// mesh, with no Delaunay condition.
#[derive(Debug, Clone)]
pub struct DecOperators {
    /// Edge × vertex, `(d0 f)(i→j) = f(j) - f(i)`.
    pub d0: Incidence,
    /// Face × edge, the oriented boundary.
    pub d1: Incidence,
    pub star0: Vec<f64>,
    pub star1: Vec<f64>,
    pub star2: Vec<f64>,
}

pub fn build_dec(mesh: &TriangleMesh) -> Result<DecOperators> {
    let (nv, ne, nf) = (mesh.vertex_count(), mesh.edge_count(), mesh.face_count());
    let mut d0 = Vec::with_capacity(2 * ne);
    for (e, &[i, j]) in mesh.edges().iter().enumerate() {
        d0.push((e, i, -1));
        d0.push((e, j, 1));
    }
    let mut d1 = Vec::with_capacity(3 * nf);
    let mut dual_edge = vec![0.0; ne];
    let lengths = mesh.edge_lengths();
    for (f, fe) in mesh.face_edges().iter().enumerate() {
        let l = fe.map(|(e, _)| lengths[e]);
        for k in 0..3 {
            let (e, s) = fe[k];
            d1.push((f, e, s));
            let (a, b, c) = (l[(k + 1) % 3], l[(k + 2) % 3], l[k]);
            // Midpoint of side c to the centroid is a third of the median.
            let median = 0.5 * (2.0 * a * a + 2.0 * b * b - c * c).max(0.0).sqrt();
            dual_edge[e] += median / 3.0;
        }
    }
    d1.sort_unstable();
    let star0 = mesh.dual_areas().to_vec();
    let star1: Vec<f64> = dual_edge.iter().zip(lengths).map(|(d, l)| d / l).collect();
    let star2: Vec<f64> = mesh.face_areas().iter().map(|a| 1.0 / a).collect();
    for (name, star) in [("star0", &star0), ("star1", &star1), ("star2", &star2)] {
        if let Some(k) = star.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidMesh(format!("{name} entry {k} is {}", star[k])));
        }
    }
    Ok(DecOperators {
        d0: Incidence {
            rows: ne,
            cols: nv,
            entries: d0,
        },
        d1: Incidence {
            rows: nf,
            cols: ne,
            entries: d1,
        },
        star0,
        star1,
        star2,
    })
}

impl DecOperators {
    pub fn vertex_count(&self) -> usize {
        self.d0.cols
    }

    pub fn edge_count(&self) -> usize {
        self.d0.rows
    }

    /// `d1 · d0 = 0`, checked in integers.
    pub fn is_chain_complex(&self) -> bool {
        self.d1
            .product_nonzeros(&self.d0)
            .map(|nz| nz.is_empty())
            .unwrap_or(false)
    }

    /// Scalar functions on vertices with the `star0` weights.
    pub fn vertex_space(&self) -> L2Space {
        L2Space::scalar(Arc::new(WeightedSpace::new(self.star0.clone()).expect("stars are positive")))
    }

    /// 1-cochains with the `star1` weights.
    pub fn edge_space(&self) -> L2Space {
        L2Space::scalar(Arc::new(WeightedSpace::new(self.star1.clone()).expect("stars are positive")))
    }

    /// `Δ⁰ = star0⁻¹ d0ᵀ star1 d0`.
    pub fn laplacian0(&self) -> Operator {
        let nv = self.vertex_count();
        let mut l = DMatrix::zeros(nv, nv);
        for pair in self.d0.entries.chunks(2) {
            let (e, i, j) = (pair[0].0, pair[0].1, pair[1].1);
            let w = self.star1[e];
            l[(i, i)] += w;
            l[(j, j)] += w;
            l[(i, j)] -= w;
            l[(j, i)] -= w;
        }
        for (v, mut row) in l.row_iter_mut().enumerate() {
            row /= self.star0[v];
        }
        Operator::new(self.vertex_space(), l).expect("square of vertex size")
    }

    /// `Δ¹ = d0 star0⁻¹ d0ᵀ star1 + star1⁻¹ d1ᵀ star2 d1`.
    pub fn laplacian1(&self) -> Operator {
        let ne = self.edge_count();
        let mut l = DMatrix::zeros(ne, ne);
        let mut at_vertex: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.vertex_count()];
        for &(e, v, s) in &self.d0.entries {
            at_vertex[v].push((e, s as f64));
        }
        for (v, incident) in at_vertex.iter().enumerate() {
            for &(e, s) in incident {
                for &(e2, s2) in incident {
                    l[(e, e2)] += s * s2 * self.star1[e2] / self.star0[v];
                }
            }
        }
        for face in self.d1.entries.chunk_by(|a, b| a.0 == b.0) {
            let f = face[0].0;
            for &(_, e, s) in face {
                for &(_, e2, s2) in face {
                    l[(e, e2)] += (s as f64) * (s2 as f64) * self.star2[f] / self.star1[e];
                }
            }
        }
        Operator::new(self.edge_space(), l).expect("square of edge size")
    }
}

/// `H₀ = Δ⁰ + ρ` on vertex functions.
pub fn schrodinger_comparison(dec: &DecOperators, rho: &[f64]) -> Result<SelfAdjointOperator> {
    let nv = dec.vertex_count();
    if rho.len() != nv {
        return Err(Error::DimensionMismatch {
            expected: nv,
            actual: rho.len(),
        });
    }
    let mut m = dec.laplacian0().into_matrix();
    for (v, r) in rho.iter().enumerate() {
        m[(v, v)] += r;
    }
    SelfAdjointOperator::new(Operator::new(dec.vertex_space(), m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;
    use crate::measure::{self_adjoint_spectrum, zero_count};

    #[test]
    fn chain_complex_and_dense_forms() {
        let mesh = fixtures::icosphere(1.0, 1).unwrap();
        let dec = build_dec(&mesh).unwrap();
        assert!(dec.is_chain_complex());
        let (d0, d1) = (dec.d0.to_dense(), dec.d1.to_dense());
        assert_eq!((&d1 * &d0).amax(), 0.0);

        // Dense oracle for both Laplacians.
        let diag = |v: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v));
        let inv = |v: &[f64]| diag(&v.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
        let (s0, s1, s2) = (diag(&dec.star0), diag(&dec.star1), diag(&dec.star2));
        let l0 = inv(&dec.star0) * d0.transpose() * &s1 * &d0;
        let l1 = &d0 * inv(&dec.star0) * d0.transpose() * &s1 + inv(&dec.star1) * d1.transpose() * &s2 * &d1;
        assert!((dec.laplacian0().matrix() - l0).amax() < 1e-12);
        assert!((dec.laplacian1().matrix() - l1).amax() < 1e-12);
        let _ = s0;
    }

    #[test]
    fn broken_complex_is_detected() {
        let dec = build_dec(&fixtures::tetrahedron()).unwrap();
        let mut d1 = dec.d1.clone();
        d1.entries[0].2 = -d1.entries[0].2;
        assert!(!d1.product_nonzeros(&dec.d0).unwrap().is_empty());
    }

    #[test]
    fn constants_are_harmonic() {
        let mesh = fixtures::torus_of_revolution(2.0, 0.6, 10, 6).unwrap();
        let dec = build_dec(&mesh).unwrap();
        let l0 = dec.laplacian0();
        let scale = l0.matrix().amax();
        for row in l0.matrix().row_iter() {
            assert!(row.sum().abs() <= 8.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn stars_are_positive_and_laplacians_self_adjoint() {
        for mesh in [
            fixtures::genus2(0).unwrap(),
            fixtures::bumpy_sphere(0.3, 4, 1).unwrap(),
            fixtures::flat_torus(1.0, 3.0, 4, 9).unwrap(),
        ] {
            let dec = build_dec(&mesh).unwrap();
            assert!(dec.star1.iter().all(|&s| s > 0.0));
            assert!(dec.laplacian0().self_adjoint_defect() < 1e-12);
            assert!(dec.laplacian1().self_adjoint_defect() < 1e-12);
        }
    }

    #[test]
    fn hodge_kernels_of_small_meshes() {
        let tet = build_dec(&fixtures::tetrahedron()).unwrap();
        assert_eq!(zero_count(&self_adjoint_spectrum(&tet.laplacian1()).unwrap()), 0);
        assert_eq!(zero_count(&self_adjoint_spectrum(&tet.laplacian0()).unwrap()), 1);
        let torus = build_dec(&fixtures::flat_torus(1.0, 1.0, 8, 8).unwrap()).unwrap();
        let spectrum = self_adjoint_spectrum(&torus.laplacian1()).unwrap();
        assert_eq!(zero_count(&spectrum), 2);
        assert!(spectrum[0] >= -1e-9);
    }

    #[test]
    fn icosphere_level3_kernels() {
        let dec = build_dec(&fixtures::icosphere(1.0, 3).unwrap()).unwrap();
        assert_eq!(dec.edge_count(), 1920);
        assert_eq!(zero_count(&self_adjoint_spectrum(&dec.laplacian0()).unwrap()), 1);
        assert_eq!(zero_count(&self_adjoint_spectrum(&dec.laplacian1()).unwrap()), 0);
    }

    #[test]
    fn schrodinger_shift() {
        let mesh = fixtures::bumpy_sphere(0.2, 3, 1).unwrap();
        let dec = build_dec(&mesh).unwrap();
        let zero = schrodinger_comparison(&dec, &vec![0.0; dec.vertex_count()]).unwrap();
        assert_eq!(zero.matrix(), dec.laplacian0().matrix());
        let c = 0.7;
        let shifted = schrodinger_comparison(&dec, &vec![c; dec.vertex_count()]).unwrap();
        for (a, b) in shifted.eigenvalues().iter().zip(zero.eigenvalues().iter()) {
            assert!((a - b - c).abs() < 1e-10);
        }
        assert!(schrodinger_comparison(&dec, &[1.0]).is_err());
    }
}
