//! Fixed-size complex matrices and a cyclic Jacobi eigensolver for Hermitian input.
//!
//! Everything in the crate lives in 2- or 4-dimensional spaces, so matrices are plain
//! stack arrays and products are written out as triple loops.

use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

/// Off-diagonal Frobenius norm (relative to the full norm) at which Jacobi sweeps stop.
pub const JACOBI_TOLERANCE: f64 = 1e-14;
/// Upper bound on cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix of order `N`, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMatrix<const N: usize>(pub [[Complex64; N]; N]);

pub type CMatrix2 = CMatrix<2>;
pub type CMatrix4 = CMatrix<4>;

impl<const N: usize> CMatrix<N> {
    pub const fn zeros() -> Self {
        CMatrix([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = Complex64::new(diag[i], 0.0);
        }
        m
    }

    /// Outer product `v v†`.
    pub fn outer(v: &[Complex64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= factor);
        m
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `max |A - A†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    /// `max |U†U - I|` over all entries.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Self::identity()).max_abs()
    }

    pub fn apply(&self, v: &[Complex64; N]) -> [Complex64; N] {
        let mut out = [ZERO; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let mut acc = ZERO;
        for i in 0..N {
            for k in 0..N {
                acc += self.0[i][k] * other.0[k][i];
            }
        }
        acc
    }

    /// Hermitian part `(A + A†)/2` with an exactly real diagonal.
    pub fn hermitian_part(&self) -> Self {
        let mut m = (*self + self.adjoint()).scale(0.5);
        for i in 0..N {
            m.0[i][i].im = 0.0;
        }
        m
    }
}

impl<const N: usize> Default for CMatrix<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Index<(usize, usize)> for CMatrix<N> {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.0[r][c]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMatrix<N> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.0[r][c]
    }
}

impl<const N: usize> Mul for CMatrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl<const N: usize> Add for CMatrix<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for CMatrix<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

/// Kronecker product of two 2×2 matrices, `a ⊗ b`, with `a` on the slow index.
pub fn kron2(a: &CMatrix2, b: &CMatrix2) -> CMatrix4 {
    let mut m = CMatrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    m
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// `values` are ascending; column `k` of `vectors` is the eigenvector for `values[k]`.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen<const N: usize> {
    pub values: [f64; N],
    pub vectors: CMatrix<N>,
    pub sweeps: usize,
}

impl<const N: usize> HermitianEigen<N> {
    /// Rebuilds `V f(Λ) V†` for a real function of the eigenvalues.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> CMatrix<N> {
        let mut m = CMatrix::<N>::zeros();
        for k in 0..N {
            let w = f(self.values[k]);
            if w == 0.0 {
                continue;
            }
            for i in 0..N {
                for j in 0..N {
                    m.0[i][j] += self.vectors.0[i][k] * self.vectors.0[j][k].conj() * w;
                }
            }
        }
        m
    }

    pub fn vector(&self, k: usize) -> [Complex64; N] {
        let mut v = [ZERO; N];
        for (i, x) in v.iter_mut().enumerate() {
            *x = self.vectors.0[i][k];
        }
        v
    }
}

fn off_diagonal_norm<const N: usize>(a: &CMatrix<N>) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                acc += a.0[i][j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi diagonalization of the Hermitian part of `input`.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies the real
/// symmetric Jacobi rotation that annihilates it.
pub fn hermitian_eigen<const N: usize>(input: &CMatrix<N>) -> HermitianEigen<N> {
    let mut a = input.hermitian_part();
    let mut v = CMatrix::<N>::identity();
    let scale = a.frobenius_norm();
    let mut sweeps = 0;

    while sweeps < JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off == 0.0 || off <= JACOBI_TOLERANCE * scale {
            break;
        }
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.0[p][q];
                let modulus = apq.norm();
                if modulus == 0.0 || modulus < f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / modulus;
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                let theta = (aqq - app) / (2.0 * modulus);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // J = D R with D = diag(.., 1, .., e^{-i arg a_pq}, ..)
                let mut j = CMatrix::<N>::identity();
                j.0[p][p] = Complex64::new(c, 0.0);
                j.0[p][q] = Complex64::new(s, 0.0);
                j.0[q][p] = -phase.conj() * s;
                j.0[q][q] = phase.conj() * c;

                a = j.adjoint() * a * j;
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
                for i in 0..N {
                    a.0[i][i].im = 0.0;
                }
                v = v * j;
            }
        }
    }

    let mut order = [0usize; N];
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&x, &y| a.0[x][x].re.total_cmp(&a.0[y][y].re));

    let mut values = [0.0; N];
    let mut vectors = CMatrix::<N>::zeros();
    for (k, &src) in order.iter().enumerate() {
        values[k] = a.0[src][src].re;
        for i in 0..N {
            vectors.0[i][k] = v.0[i][src];
        }
    }
    HermitianEigen {
        values,
        vectors,
        sweeps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let m = CMatrix4::from_diagonal(&[3.0, -1.0, 0.5, 2.0]);
        let e = hermitian_eigen(&m);
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values, [-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y_eigenpairs() {
        let y = CMatrix([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]);
        let e = hermitian_eigen(&y);
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
        for k in 0..2 {
            let v = e.vector(k);
            let yv = y.apply(&v);
            for i in 0..2 {
                assert!((yv[i] - v[i] * e.values[k]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn reconstructs_complex_hermitian_matrix() {
        let m = CMatrix([
            [c(2.0, 0.0), c(0.3, 0.4), c(-0.1, 0.2), c(0.0, -0.7)],
            [c(0.3, -0.4), c(1.0, 0.0), c(0.5, 0.5), c(0.2, 0.0)],
            [c(-0.1, -0.2), c(0.5, -0.5), c(-1.0, 0.0), c(0.1, 0.1)],
            [c(0.0, 0.7), c(0.2, 0.0), c(0.1, -0.1), c(0.25, 0.0)],
        ]);
        let e = hermitian_eigen(&m);
        let back = e.map_values(|x| x);
        assert!((back - m).max_abs() < 1e-13);
        assert!((e.vectors.adjoint() * e.vectors - CMatrix4::identity()).max_abs() < 1e-13);
        let sum: f64 = e.values.iter().sum();
        assert!((sum - m.trace().re).abs() < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn degenerate_spectrum() {
        let e = hermitian_eigen(&CMatrix4::identity().scale(0.25));
        assert!(e.values.iter().all(|&x| (x - 0.25).abs() < 1e-16));
    }

    #[test]
    fn kron_places_first_factor_on_slow_index() {
        let x = CMatrix([[ZERO, ONE], [ONE, ZERO]]);
        let k = kron2(&x, &CMatrix2::identity());
        assert_eq!(k.0[2][0], ONE);
        assert_eq!(k.0[3][1], ONE);
        assert_eq!(k.0[1][0], ZERO);
    }
}
