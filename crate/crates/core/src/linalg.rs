//! Small dense complex linear algebra: matrices, LU with partial pivoting,
//! Hermitian solves with a hard conditioning limit, and Jacobi eigenvalues.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{complex_to_f64, lit, to_f64, Real};

/// Condition number above which Hermitian solves refuse to proceed.
pub const MAX_CONDITION: f64 = 1e12;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = *d + a * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "vector length must match column count");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Sum of squared entry magnitudes.
    pub fn frobenius_sq(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| to_f64(self[(r, c)].norm())).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}

/// LU factorization `P A = L U` with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &CMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Shape {
                context: "LU factorization (square matrix)",
                expected: n,
                actual: a.cols(),
            });
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (piv, mag) = (col..n)
                .map(|r| (r, lu[(r, col)].norm()))
                .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if mag.is_zero() || !mag.is_finite() {
                return Err(Error::Singular {
                    context: format!("LU factorization, zero pivot in column {col}"),
                    condition: f64::INFINITY,
                });
            }
            if piv != col {
                for c in 0..n {
                    let tmp = lu[(col, c)];
                    lu[(col, c)] = lu[(piv, c)];
                    lu[(piv, c)] = tmp;
                }
                perm.swap(col, piv);
            }
            let pivot = lu[(col, col)];
            for r in col + 1..n {
                let f = lu[(r, col)] / pivot;
                lu[(r, col)] = f;
                if f.is_zero() {
                    continue;
                }
                for c in col + 1..n {
                    let u = lu[(col, c)];
                    lu[(r, c)] = lu[(r, c)] - f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.perm.len();
        assert_eq!(b.len(), n, "right-hand side length must match");
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc = acc - self.lu[(r, c)] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc = acc - self.lu[(r, c)] * x[c];
            }
            x[r] = acc / self.lu[(r, r)];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix<T> {
        let n = self.perm.len();
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![Complex::zero(); n];
        for c in 0..n {
            e[c] = Complex::one();
            let col = self.solve(&e);
            e[c] = Complex::zero();
            for (r, v) in col.into_iter().enumerate() {
                inv[(r, c)] = v;
            }
        }
        inv
    }

    /// 1-norm condition number `||A||_1 ||A^-1||_1` of the factored matrix.
    pub fn condition_1(&self, a: &CMatrix<T>) -> f64 {
        a.norm_1() * self.inverse().norm_1()
    }
}

/// Solves `A x = b` for Hermitian positive definite `A`.
///
/// The spectral condition number is estimated from the eigenvalues and the
/// solve fails with [`Error::Singular`] when it exceeds [`MAX_CONDITION`].
/// Returns the solution and the condition estimate.
pub fn solve_hermitian<T: Real>(
    a: &CMatrix<T>,
    b: &[Complex<T>],
    context: &str,
) -> Result<(Vec<Complex<T>>, f64)> {
    let n = a.rows();
    let eig = hermitian_eigenvalues(a);
    let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular {
            context: context.to_string(),
            condition,
        });
    }

    // Cholesky A = L L^H on the Hermitian part.
    let mut l = CMatrix::<T>::zeros(n, n);
    let half: T = lit(0.5);
    for j in 0..n {
        let mut d = ((a[(j, j)] + a[(j, j)].conj()) * half).re;
        for k in 0..j {
            d = d - l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return Err(Error::Singular {
                context: format!("{context}: Cholesky breakdown at column {j}"),
                condition,
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        for i in j + 1..n {
            let mut s = (a[(i, j)] + a[(j, i)].conj()) * half;
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let mut acc = y[i];
        for k in 0..i {
            acc = acc - l[(i, k)] * y[k];
        }
        y[i] = acc / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in i + 1..n {
            acc = acc - l[(k, i)].conj() * y[k];
        }
        y[i] = acc / l[(i, i)];
    }
    Ok((y, condition))
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
///
/// Uses the real symmetric embedding `[[Re, -Im], [Im, Re]]`, whose spectrum
/// is that of `a` with every eigenvalue doubled; one copy of each is kept.
pub fn hermitian_eigenvalues<T: Real>(a: &CMatrix<T>) -> Vec<f64> {
    let n = a.rows();
    let m = 2 * n;
    let mut emb = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let z = complex_to_f64((a[(r, c)] + a[(c, r)].conj()) * lit::<T>(0.5));
            emb[r * m + c] = z.re;
            emb[(r + n) * m + c + n] = z.re;
            emb[r * m + c + n] = -z.im;
            emb[(r + n) * m + c] = z.im;
        }
    }
    let (mut vals, _) = symmetric_eigen(emb, m, false);
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.into_iter().step_by(2).collect()
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric `n x n` matrix
/// stored row-major. Returns eigenvalues (unsorted) and, on request, the
/// eigenvectors as the columns of a row-major matrix.
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize, want_vectors: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    assert_eq!(a.len(), n * n);
    let mut v = want_vectors.then(|| {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        id
    });
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * total * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}
