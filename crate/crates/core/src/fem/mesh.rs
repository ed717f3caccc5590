//! Uniform meshes of the unit interval and unit square.

use crate::error::{CimError, Result};
use crate::scalar::Real;

/// Cells of a uniform mesh.
#[derive(Clone, Debug, PartialEq)]
pub enum Elements {
    /// `[left, right]` vertex ids.
    Intervals(Vec<[usize; 2]>),
    /// Counter-clockwise vertex ids.
    Triangles(Vec<[usize; 3]>),
}

/// Uniform P1 mesh with `cells` subdivisions per axis.
///
/// In 2-D each square is split by the diagonal running from `(x, y)` to
/// `(x+h, y+h)`. Vertex ids are lexicographic with `x` fastest; interior
/// ids follow the same order restricted to interior vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T> {
    dim: usize,
    cells: usize,
    h: T,
    elements: Elements,
}

impl<T: Real> Mesh<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn elements(&self) -> &Elements {
        &self.elements
    }

    pub fn n_vertices(&self) -> usize {
        (self.cells + 1).pow(self.dim as u32)
    }

    /// Number of interior vertices, the dimension of the discrete space.
    pub fn n_interior(&self) -> usize {
        (self.cells - 1).pow(self.dim as u32)
    }

    /// Interior-space index of a vertex, `None` on the boundary.
    pub fn interior_index(&self, vertex: usize) -> Option<usize> {
        let n = self.cells;
        match self.dim {
            1 => (vertex > 0 && vertex < n).then(|| vertex - 1),
            _ => {
                let (i, j) = (vertex % (n + 1), vertex / (n + 1));
                (i > 0 && i < n && j > 0 && j < n).then(|| (j - 1) * (n - 1) + (i - 1))
            }
        }
    }

    pub fn vertex(&self, id: usize) -> [T; 2] {
        let n = self.cells;
        match self.dim {
            1 => [self.grid(id), T::zero()],
            _ => [self.grid(id % (n + 1)), self.grid(id / (n + 1))],
        }
    }

    /// Coordinates of interior vertex `k` (only the first `dim` are meaningful).
    pub fn interior_point(&self, k: usize) -> [T; 2] {
        let m = self.cells - 1;
        match self.dim {
            1 => [self.grid(k + 1), T::zero()],
            _ => [self.grid(k % m + 1), self.grid(k / m + 1)],
        }
    }

    fn grid(&self, i: usize) -> T {
        T::from_usize_lossy(i) / T::from_usize_lossy(self.cells)
    }

    /// Interpolates `f` at the interior vertices.
    pub fn nodal_interpolant(&self, f: impl Fn(&[T]) -> T) -> Vec<T> {
        (0..self.n_interior())
            .map(|k| f(&self.interior_point(k)[..self.dim]))
            .collect()
    }

    /// Evaluates the P1 function with interior coefficients `values`
    /// (zero on the boundary) at `x`.
    pub fn evaluate(&self, values: &[T], x: &[T]) -> T {
        let n = self.cells;
        let nf = T::from_usize_lossy(n);
        let locate = |s: T| -> (usize, T) {
            let scaled = (s * nf).max(T::zero());
            let i = scaled.floor().to_usize().unwrap_or(0).min(n - 1);
            (i, scaled - T::from_usize_lossy(i))
        };
        let coef = |vertex: usize| {
            self.interior_index(vertex)
                .map(|k| values[k])
                .unwrap_or_else(T::zero)
        };
        match self.dim {
            1 => {
                let (i, s) = locate(x[0]);
                coef(i) * (T::one() - s) + coef(i + 1) * s
            }
            _ => {
                let (i, s) = locate(x[0]);
                let (j, r) = locate(x[1]);
                let v = |a: usize, b: usize| coef(b * (n + 1) + a);
                if s >= r {
                    // lower triangle (i,j), (i+1,j), (i+1,j+1)
                    v(i, j) * (T::one() - s) + v(i + 1, j) * (s - r) + v(i + 1, j + 1) * r
                } else {
                    // upper triangle (i,j), (i+1,j+1), (i,j+1)
                    v(i, j) * (T::one() - r) + v(i + 1, j + 1) * s + v(i, j + 1) * (r - s)
                }
            }
        }
    }

    /// Interpolates a P1 function of this mesh onto the interior vertices of `fine`.
    pub fn interpolate_to(&self, values: &[T], fine: &Mesh<T>) -> Vec<T> {
        assert_eq!(self.dim, fine.dim, "meshes of different dimension");
        fine.nodal_interpolant(|x| self.evaluate(values, x))
    }
}

/// Builds the uniform mesh of `(0,1)^dim` with spacing `h`.
///
/// `1/h` must be an integer of at least 2 (up to rounding).
pub fn build_mesh<T: Real>(dim: usize, h: T) -> Result<Mesh<T>> {
    let inv = T::one() / h;
    let cells = inv.round();
    let valid = h > T::zero()
        && (cells - inv).abs() <= T::lit(1e3) * T::epsilon() * inv
        && cells >= T::lit(2.0);
    if !valid {
        return Err(CimError::BadMeshSize {
            h: h.to_f64_lossy(),
        });
    }
    let cells = cells.to_usize().ok_or(CimError::BadMeshSize {
        h: h.to_f64_lossy(),
    })?;
    uniform_mesh(dim, cells)
}

/// Builds the uniform mesh with `cells` subdivisions per axis.
pub fn uniform_mesh<T: Real>(dim: usize, cells: usize) -> Result<Mesh<T>> {
    if !(dim == 1 || dim == 2) {
        return Err(CimError::InvalidParameter(format!(
            "dimension {dim} is not 1 or 2"
        )));
    }
    if cells < 2 {
        return Err(CimError::BadMeshSize {
            h: 1.0 / cells.max(1) as f64,
        });
    }
    let n = cells;
    let elements = if dim == 1 {
        Elements::Intervals((0..n).map(|i| [i, i + 1]).collect())
    } else {
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut tris = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Elements::Triangles(tris)
    };
    Ok(Mesh {
        dim,
        cells,
        h: T::one() / T::from_usize_lossy(n),
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let m = build_mesh::<f64>(1, 0.25).unwrap();
        assert_eq!((m.n_vertices(), m.n_interior()), (5, 3));
        let m = build_mesh::<f64>(2, 0.25).unwrap();
        assert_eq!((m.n_vertices(), m.n_interior()), (25, 9));
        match m.elements() {
            Elements::Triangles(t) => assert_eq!(t.len(), 32),
            _ => unreachable!(),
        }
    }

    #[test]
    fn rejects_non_reciprocal_h() {
        assert!(matches!(
            build_mesh::<f64>(1, 0.3),
            Err(CimError::BadMeshSize { .. })
        ));
        assert!(build_mesh::<f64>(2, 1.0).is_err());
        assert!(build_mesh::<f64>(3, 0.5).is_err());
        assert!(build_mesh::<f64>(1, 1.0 / 3.0).is_ok());
    }

    #[test]
    fn interior_indexing_round_trip() {
        let m = build_mesh::<f64>(2, 0.125).unwrap();
        let mut seen = vec![false; m.n_interior()];
        for v in 0..m.n_vertices() {
            if let Some(k) = m.interior_index(v) {
                assert_eq!(m.vertex(v), m.interior_point(k));
                seen[k] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn evaluate_hat_function() {
        let m = build_mesh::<f64>(2, 0.25).unwrap();
        let mut v = vec![0.0; m.n_interior()];
        let centre = m.interior_index(2 * 5 + 2).unwrap();
        v[centre] = 1.0;
        assert_eq!(m.evaluate(&v, &[0.5, 0.5]), 1.0);
        assert!((m.evaluate(&v, &[0.625, 0.5]) - 0.5).abs() < 1e-15);
        assert!((m.evaluate(&v, &[0.375, 0.375]) - 0.5).abs() < 1e-15);
        assert_eq!(m.evaluate(&v, &[0.0, 0.3]), 0.0);
        // The upper triangle of cell (1,2) does not touch vertex (2,2).
        assert_eq!(m.evaluate(&v, &[0.3, 0.6]), 0.0);
        // Lower triangle of cell (1,2) has (2,2) as its middle corner.
        assert!(
            (m.evaluate(&v, &[0.45, 0.52]) - (0.45 * 4.0 - 1.0 - (0.52 * 4.0 - 2.0))).abs() < 1e-14
        );
    }

    #[test]
    fn interpolation_to_refined_mesh_is_exact_for_p1() {
        let coarse = build_mesh::<f64>(1, 0.25).unwrap();
        let fine = build_mesh::<f64>(1, 0.125).unwrap();
        let v = vec![1.0, 3.0, -2.0];
        let w = coarse.interpolate_to(&v, &fine);
        assert_eq!(w, vec![0.5, 1.0, 2.0, 3.0, 0.5, -2.0, -1.0]);
    }
}
