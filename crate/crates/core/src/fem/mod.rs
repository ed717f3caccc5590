//! Piecewise-linear finite elements with homogeneous Dirichlet conditions.
//!
//! A [`FemSystem`] holds the stiffness and mass matrices on the interior
//! vertices of a uniform mesh together with a reusable symbolic
//! factorization. Each contour node then needs one numeric factorization of
//! `z^β M + (1 + z^{−α}) K`.

pub mod mesh;
pub mod quadrature;
pub mod sparse;

use std::sync::Arc;

use num_complex::Complex;

use crate::contour::FractionalOrders;
use crate::error::{CimError, Result};
use crate::profile::SpatialFunction;
use crate::scalar::{Real, Scalar};

pub use mesh::{build_mesh, uniform_mesh, Elements, Mesh};
use quadrature::{interval_moments, triangle_moments};
pub use sparse::{
    nested_dissection_grid, CsrMatrix, CsrPattern, LdlFactor, LdlSymbolic, TridiagonalFactor,
    ZeroPivot,
};

#[derive(Clone, Debug)]
enum Backend {
    Tridiagonal,
    Sparse(Arc<LdlSymbolic>),
}

/// Interior-node stiffness and mass matrices on a common pattern.
#[derive(Clone, Debug)]
pub struct FemSystem<T: Real> {
    mesh: Option<Arc<Mesh<T>>>,
    stiffness: CsrMatrix<T>,
    mass: CsrMatrix<T>,
    backend: Backend,
}

/// Numeric factorization of a combination `a M + b K`.
#[derive(Clone, Debug)]
pub enum ShiftedFactor<S> {
    Tridiagonal(TridiagonalFactor<S>),
    Sparse(LdlFactor<S>),
}

impl<S: Scalar> ShiftedFactor<S> {
    pub fn solve(&self, rhs: &[S]) -> Vec<S> {
        match self {
            Self::Tridiagonal(f) => f.solve(rhs),
            Self::Sparse(f) => f.solve(rhs),
        }
    }
}

/// Exact P1 element matrices and Dirichlet elimination.
pub fn assemble<T: Real>(mesh: Arc<Mesh<T>>) -> FemSystem<T> {
    let n = mesh.n_interior();
    let mut k_trip: Vec<(usize, usize, T)> = Vec::new();
    let mut m_trip: Vec<(usize, usize, T)> = Vec::new();
    let mut push = |ids: &[usize], ke: &[T], me: &[T]| {
        let nl = ids.len();
        for a in 0..nl {
            let Some(i) = mesh.interior_index(ids[a]) else {
                continue;
            };
            for b in 0..nl {
                let Some(j) = mesh.interior_index(ids[b]) else {
                    continue;
                };
                k_trip.push((i, j, ke[a * nl + b]));
                m_trip.push((i, j, me[a * nl + b]));
            }
        }
    };
    match mesh.elements() {
        Elements::Intervals(cells) => {
            for &[a, b] in cells {
                let h = mesh.vertex(b)[0] - mesh.vertex(a)[0];
                let k = T::one() / h;
                let m = h / T::lit(6.0);
                let two = T::lit(2.0);
                push(&[a, b], &[k, -k, -k, k], &[two * m, m, m, two * m]);
            }
        }
        Elements::Triangles(tris) => {
            for tri in tris {
                let p = tri.map(|v| mesh.vertex(v));
                let (ke, me) = triangle_matrices(p);
                push(tri, &ke, &me);
            }
        }
    }
    let pattern = Arc::new(CsrPattern::from_entries(
        n,
        k_trip.iter().map(|&(i, j, _)| (i, j)),
    ));
    let stiffness = CsrMatrix::from_triplets(pattern.clone(), &k_trip);
    let mass = CsrMatrix::from_triplets(pattern.clone(), &m_trip);
    let backend = if mesh.dim() == 1 {
        Backend::Tridiagonal
    } else {
        let m = mesh.cells() - 1;
        Backend::Sparse(Arc::new(LdlSymbolic::analyze(
            &pattern,
            Some(nested_dissection_grid(m, m)),
        )))
    };
    FemSystem {
        mesh: Some(mesh),
        stiffness,
        mass,
        backend,
    }
}

fn triangle_matrices<T: Real>(p: [[T; 2]; 3]) -> ([T; 9], [T; 9]) {
    let two = T::lit(2.0);
    let area2 =
        (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let area = area2.abs() / two;
    // ∇λ_i = (y_{i+1} − y_{i+2}, x_{i+2} − x_{i+1}) / (2|T|), signed by orientation.
    let grad: [[T; 2]; 3] = std::array::from_fn(|i| {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        [(a[1] - b[1]) / area2, (b[0] - a[0]) / area2]
    });
    let mut ke = [T::zero(); 9];
    let mut me = [T::zero(); 9];
    for i in 0..3 {
        for j in 0..3 {
            ke[i * 3 + j] = area * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
            me[i * 3 + j] = area / T::lit(12.0) * if i == j { two } else { T::one() };
        }
    }
    (ke, me)
}

impl<T: Real> FemSystem<T> {
    /// System given directly by its matrices, e.g. a `1 × 1` oracle.
    pub fn from_matrices(stiffness: &[Vec<T>], mass: &[Vec<T>]) -> Result<Self> {
        let n = stiffness.len();
        if n == 0 || mass.len() != n || stiffness.iter().chain(mass).any(|r| r.len() != n) {
            return Err(CimError::InvalidParameter(
                "stiffness and mass must be square of equal size".into(),
            ));
        }
        let mut entries = Vec::new();
        let mut k_trip = Vec::new();
        let mut m_trip = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if stiffness[i][j] != T::zero() || mass[i][j] != T::zero() || i == j {
                    entries.push((i, j));
                    k_trip.push((i, j, stiffness[i][j]));
                    m_trip.push((i, j, mass[i][j]));
                }
            }
        }
        let pattern = Arc::new(CsrPattern::from_entries(n, entries));
        let backend = Backend::Sparse(Arc::new(LdlSymbolic::analyze(&pattern, None)));
        Ok(Self {
            mesh: None,
            stiffness: CsrMatrix::from_triplets(pattern.clone(), &k_trip),
            mass: CsrMatrix::from_triplets(pattern, &m_trip),
            backend,
        })
    }

    pub fn n(&self) -> usize {
        self.stiffness.n()
    }

    pub fn mesh(&self) -> Option<&Arc<Mesh<T>>> {
        self.mesh.as_ref()
    }

    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix<T> {
        &self.mass
    }

    /// Factors `a M + b K`.
    pub fn factor_combination<S: Scalar<Real = T>>(
        &self,
        a: S,
        b: S,
    ) -> std::result::Result<ShiftedFactor<S>, ZeroPivot> {
        let pattern = self.stiffness.pattern();
        let combined: Vec<S> = self
            .mass
            .values()
            .iter()
            .zip(self.stiffness.values())
            .map(|(&m, &k)| a.scale(m) + b.scale(k))
            .collect();
        match &self.backend {
            Backend::Tridiagonal => {
                let n = self.n();
                let diag: Vec<S> = (0..n)
                    .map(|i| combined[pattern.find(i, i).expect("diagonal present")])
                    .collect();
                let off: Vec<S> = (1..n)
                    .map(|i| {
                        pattern
                            .find(i - 1, i)
                            .map(|p| combined[p])
                            .unwrap_or_else(S::zero)
                    })
                    .collect();
                TridiagonalFactor::factor(&diag, &off).map(ShiftedFactor::Tridiagonal)
            }
            Backend::Sparse(sym) => {
                LdlFactor::factor(sym.clone(), pattern, &combined).map(ShiftedFactor::Sparse)
            }
        }
    }

    /// Factors `z^β M + (1 + z^{−α}) K`, the matrix of every contour node.
    pub fn factor_shifted(
        &self,
        z: Complex<T>,
        orders: &FractionalOrders<T>,
    ) -> Result<ShiftedFactor<Complex<T>>> {
        let a = z.powf(orders.beta);
        let b = Complex::new(T::one(), T::zero()) + z.powf(-orders.alpha);
        self.factor_combination(a, b)
            .map_err(|e| CimError::SolveFailure {
                node: 0,
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
                reason: format!("zero pivot at row {}", e.index),
            })
    }

    /// `z^{β−1} M u0 + M f̂`.
    pub fn shifted_rhs(
        &self,
        z: Complex<T>,
        orders: &FractionalOrders<T>,
        u0: &[T],
        f_hat: &[Complex<T>],
    ) -> Vec<Complex<T>> {
        let c = z.powf(orders.beta - T::one());
        let data: Vec<Complex<T>> = u0.iter().zip(f_hat).map(|(&u, &f)| c * u + f).collect();
        self.mass.mul_vec(&data)
    }

    /// Solves `(z^β M + (1+z^{−α}) K) û = z^{β−1} M u0 + M f̂`.
    pub fn shifted_solve(
        &self,
        z: Complex<T>,
        orders: &FractionalOrders<T>,
        u0: &[T],
        f_hat: &[Complex<T>],
    ) -> Result<Vec<Complex<T>>> {
        self.check_len(u0.len())?;
        self.check_len(f_hat.len())?;
        let factor = self.factor_shifted(z, orders)?;
        Ok(factor.solve(&self.shifted_rhs(z, orders, u0, f_hat)))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(CimError::InvalidParameter(format!(
                "vector of length {len} for a system of size {}",
                self.n()
            )));
        }
        Ok(())
    }

    /// `(f, φ_i)` for every interior hat, splitting elements at the
    /// profile's break lines.
    pub fn load_vector(&self, f: &dyn SpatialFunction<T>) -> Result<Vec<T>> {
        let mesh = self.mesh.as_ref().ok_or_else(|| {
            CimError::InvalidParameter("load vectors need a mesh-backed system".into())
        })?;
        let eval = |x: &[T]| f.value(x);
        let bx = f.breaks_x();
        let by = f.breaks_y();
        let mut b = vec![T::zero(); self.n()];
        match mesh.elements() {
            Elements::Intervals(cells) => {
                for &[v0, v1] in cells {
                    let m = interval_moments(mesh.vertex(v0)[0], mesh.vertex(v1)[0], &bx, &eval);
                    for (v, mi) in [v0, v1].into_iter().zip(m) {
                        if let Some(i) = mesh.interior_index(v) {
                            b[i] += mi;
                        }
                    }
                }
            }
            Elements::Triangles(tris) => {
                for tri in tris {
                    let m = triangle_moments(tri.map(|v| mesh.vertex(v)), &bx, &by, &eval);
                    for (&v, mi) in tri.iter().zip(m) {
                        if let Some(i) = mesh.interior_index(v) {
                            b[i] += mi;
                        }
                    }
                }
            }
        }
        Ok(b)
    }

    /// Solves `M p = b` for real `b`.
    pub fn solve_mass(&self, b: &[T]) -> Result<Vec<T>> {
        self.check_len(b.len())?;
        let f = self.factor_combination(T::one(), T::zero()).map_err(|e| {
            CimError::InvalidParameter(format!("singular mass matrix at row {}", e.index))
        })?;
        Ok(f.solve(b))
    }

    /// L² projection of `f` onto the interior P1 space.
    pub fn l2_project(&self, f: &dyn SpatialFunction<T>) -> Result<Vec<T>> {
        let b = self.load_vector(f)?;
        self.solve_mass(&b)
    }

    /// `sqrt(v̄ᵀ M v)`.
    pub fn l2_norm<S: Scalar<Real = T>>(&self, v: &[S]) -> T {
        let mv = self.mass.mul_vec(v);
        let s: S = v.iter().zip(&mv).map(|(&a, &b)| a.conj() * b).sum();
        s.real_part().max(T::zero()).sqrt()
    }
}
