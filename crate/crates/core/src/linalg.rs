//! Small dense linear algebra: SU(2) propagators, square matrices and a
//! Householder + implicit-QL symmetric eigensolver.

use std::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};
use crate::scalar::{cplx, Cplx, Real};

/// Element of SU(2) stored as `[[a, -conj(b)], [b, conj(a)]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2<T> {
    pub a: Cplx<T>,
    pub b: Cplx<T>,
}

impl<T: Real> Su2<T> {
    pub fn identity() -> Self {
        Self {
            a: cplx(T::one(), T::zero()),
            b: cplx(T::zero(), T::zero()),
        }
    }

    /// `exp(-i w.sigma)` for a real 3-vector `w`.
    pub fn exp_rotation(w: [T; 3]) -> Self {
        let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if norm == T::zero() {
            return Self::identity();
        }
        let (s, c) = norm.sin_cos();
        let (nx, ny, nz) = (w[0] / norm, w[1] / norm, w[2] / norm);
        Self {
            a: cplx(c, -s * nz),
            b: cplx(s * ny, -s * nx),
        }
    }

    pub fn dagger(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn matrix(&self) -> [[Cplx<T>; 2]; 2] {
        [[self.a, -self.b.conj()], [self.b, self.a.conj()]]
    }

    pub fn apply(&self, x: [Cplx<T>; 2]) -> [Cplx<T>; 2] {
        [
            self.a * x[0] - self.b.conj() * x[1],
            self.b * x[0] + self.a.conj() * x[1],
        ]
    }

    pub fn determinant(&self) -> Cplx<T> {
        cplx(self.a.norm_sqr() + self.b.norm_sqr(), T::zero())
    }

    /// Max-norm deviation of `U^dagger U` from the identity.
    pub fn unitarity_defect(&self) -> T {
        let m = self.matrix();
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = cplx(T::zero(), T::zero());
                for row in &m {
                    acc += row[i].conj() * row[j];
                }
                if i == j {
                    acc -= cplx(T::one(), T::zero());
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Rotation angle `phi in [0, pi]` and unit axis `n` with `U = exp(-i phi n.sigma)`.
    /// The axis is `None` when `U = +-1` to machine precision.
    pub fn axis_angle(&self) -> (T, Option<[T; 3]>) {
        let sx = -self.b.im;
        let sy = self.b.re;
        let sz = -self.a.im;
        let s = (sx * sx + sy * sy + sz * sz).sqrt();
        let phi = s.atan2(self.a.re);
        if s <= T::epsilon() * T::lit(8.0) {
            (phi, None)
        } else {
            (phi, Some([sx / s, sy / s, sz / s]))
        }
    }

    /// `U^n` by repeated multiplication for small `n` and through the axis-angle
    /// form otherwise.
    pub fn pow(&self, n: u64) -> Self {
        if n <= 32 {
            let mut out = Self::identity();
            for _ in 0..n {
                out = *self * out;
            }
            return out;
        }
        let (phi, axis) = self.axis_angle();
        let angle = phi * T::from_u64(n).expect("power");
        match axis {
            Some(ax) => Self::exp_rotation([ax[0] * angle, ax[1] * angle, ax[2] * angle]),
            None => {
                // U = +-1
                let c = angle.cos();
                Self {
                    a: cplx(c, T::zero()),
                    b: cplx(T::zero(), T::zero()),
                }
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let x = self.matrix();
        let y = other.matrix();
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((x[i][j] - y[i][j]).norm());
            }
        }
        worst
    }
}

impl<T: Real> Mul for Su2<T> {
    type Output = Su2<T>;

    fn mul(self, rhs: Self) -> Self {
        Su2 {
            a: self.a * rhs.a - self.b.conj() * rhs.b,
            b: self.b * rhs.a + self.a.conj() * rhs.b,
        }
    }
}

#[inline]
pub(crate) fn cross<T: Real>(x: [T; 3], y: [T; 3]) -> [T; 3] {
    [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ]
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::default(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Real> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Principal submatrix on the given (sorted or unsorted) index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }
}

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Column `j` is the eigenvector of `values[j]`, when requested.
    pub vectors: Option<Matrix<T>>,
}

/// Householder tridiagonalisation followed by the implicit QL algorithm
/// (the EISPACK `tred2`/`tql2` pair). Only the lower triangle is read.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>, want_vectors: bool) -> Result<SymmetricEigen<T>> {
    let n = a.dim();
    if n == 0 {
        return Ok(SymmetricEigen {
            values: vec![],
            vectors: want_vectors.then(|| Matrix::zeros(0)),
        });
    }
    let mut v = Matrix::from_fn(n, |i, j| if j <= i { a[(i, j)] } else { a[(j, i)] });
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e, want_vectors)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| Matrix::from_fn(n, |r, c| v[(r, order[c])]));
    Ok(SymmetricEigen { values, vectors })
}

fn tred2<T: Real>(v: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
                v[(j, i)] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[(k, j)] -= upd;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[(k, j)] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = T::zero();
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Real>(v: &mut Matrix<T>, d: &mut [T], e: &mut [T], want_vectors: bool) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if want_vectors {
                        for k in 0..n {
                            let vk1 = v[(k, i + 1)];
                            let vk = v[(k, i)];
                            v[(k, i + 1)] = s * vk + c * vk1;
                            v[(k, i)] = c * vk - s * vk1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of a Hermitian matrix.
fn hermitian_embedding<T: Real>(a: &Matrix<Cplx<T>>) -> Matrix<T> {
    let n = a.dim();
    Matrix::from_fn(2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let z = a[(ii, jj)];
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues<T: Real>(a: &Matrix<Cplx<T>>) -> Result<Vec<T>> {
    let eig = symmetric_eigen(&hermitian_embedding(a), false)?;
    // every eigenvalue of the embedding appears twice
    Ok(eig
        .values
        .chunks(2)
        .map(|p| (p[0] + p[1]) / T::lit(2.0))
        .collect())
}

/// `f(A)` for Hermitian `A`, evaluated on the spectral decomposition.
pub fn hermitian_function<T: Real>(
    a: &Matrix<Cplx<T>>,
    f: impl Fn(T) -> T,
) -> Result<Matrix<Cplx<T>>> {
    let n = a.dim();
    let eig = symmetric_eigen(&hermitian_embedding(a), true)?;
    let vecs = eig.vectors.expect("requested vectors");
    let fd: Vec<T> = eig.values.iter().map(|&x| f(x)).collect();
    let big = Matrix::from_fn(2 * n, |i, j| {
        let mut acc = T::zero();
        for (c, &w) in fd.iter().enumerate() {
            acc += vecs[(i, c)] * w * vecs[(j, c)];
        }
        acc
    });
    Ok(Matrix::from_fn(n, |i, j| {
        cplx(big[(i, j)], big[(n + i, j)])
    }))
}

pub fn cmatmul<T: Real>(x: &Matrix<Cplx<T>>, y: &Matrix<Cplx<T>>) -> Matrix<Cplx<T>> {
    let n = x.dim();
    Matrix::from_fn(n, |i, j| {
        let mut acc = cplx(T::zero(), T::zero());
        for k in 0..n {
            acc += x[(i, k)] * y[(k, j)];
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn su2_product_matches_matrix_product() {
        let u = Su2::exp_rotation([0.3, -0.2, 0.9]);
        let w = Su2::exp_rotation([-1.1, 0.4, 0.05]);
        let p = (u * w).matrix();
        let (a, b) = (u.matrix(), w.matrix());
        for i in 0..2 {
            for j in 0..2 {
                let z = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                assert_abs_diff_eq!((z - p[i][j]).norm(), 0.0, epsilon = 1e-14);
            }
        }
        assert!(u.unitarity_defect() < 1e-14);
    }

    #[test]
    fn su2_power_consistent_between_paths() {
        let u = Su2::exp_rotation([0.7, 0.1, -0.3]);
        let mut brute = Su2::identity();
        for _ in 0..40 {
            brute = u * brute;
        }
        assert!(brute.max_abs_diff(&u.pow(40)) < 1e-12);
    }

    #[test]
    fn axis_angle_roundtrip() {
        let w = [0.2, -0.5, 0.4];
        let u = Su2::exp_rotation(w);
        let (phi, axis) = u.axis_angle();
        let axis = axis.unwrap();
        let norm = (0.04f64 + 0.25 + 0.16).sqrt();
        assert_abs_diff_eq!(phi, norm, epsilon = 1e-14);
        for c in 0..3 {
            assert_abs_diff_eq!(axis[c] * norm, w[c], epsilon = 1e-14);
        }
    }

    #[test]
    fn symmetric_eigen_reconstructs() {
        let n = 9;
        let a = Matrix::from_fn(n, |i, j| {
            let (i, j) = (i.min(j) as f64, i.max(j) as f64);
            (i * 0.37 + j * 1.3).sin() + if i == j { i } else { 0.0 }
        });
        let eig = symmetric_eigen(&a, true).unwrap();
        let v = eig.vectors.unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += v[(i, c)] * eig.values[c] * v[(j, c)];
                }
                assert_abs_diff_eq!(acc, a[(i, j)], epsilon = 1e-12);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let plain = symmetric_eigen(&a, false).unwrap();
        for (x, y) in plain.values.iter().zip(&eig.values) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn hermitian_sqrt_squares_back() {
        let a = Matrix::from_fn(3, |i, j| {
            let re = [[2.0, 0.3, 0.1], [0.3, 1.5, -0.2], [0.1, -0.2, 1.0]][i][j];
            let im = [[0.0, 0.4, -0.1], [-0.4, 0.0, 0.25], [0.1, -0.25, 0.0]][i][j];
            cplx(re, im)
        });
        let s = hermitian_function(&a, |x: f64| x.max(0.0).sqrt()).unwrap();
        let back = cmatmul(&s, &s);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!((back[(i, j)] - a[(i, j)]).norm(), 0.0, epsilon = 1e-12);
            }
        }
        let ev = hermitian_eigenvalues(&a).unwrap();
        let tr: f64 = ev.iter().sum();
        assert_abs_diff_eq!(tr, 4.5, epsilon = 1e-12);
    }
}
