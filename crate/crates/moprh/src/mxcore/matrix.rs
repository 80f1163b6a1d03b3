//! Dense square complex matrices: the universal scalar of the library.

use crate::error::MoprhError;
use crate::scalar::{Cplx, Real};

/// Dense N×N complex matrix, row-major.
#[derive(Clone, Debug)]
pub struct CMatrix<R: Real> {
    pub dim: usize,
    data: Vec<Cplx<R>>,
}

impl<R: Real> CMatrix<R> {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Cplx::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Cplx::one();
        }
        m
    }

    pub fn scalar(dim: usize, c: Cplx<R>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c;
        }
        m
    }

    /// Build from row-major real/imag f64 pairs.
    pub fn from_rows_f64(rows: &[Vec<[f64; 2]>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "ragged matrix literal");
            for (j, &[re, im]) in row.iter().enumerate() {
                m[(i, j)] = Cplx::from_f64(re, im);
            }
        }
        m
    }

    pub fn from_diag_f64(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Cplx::from_f64(d, 0.0);
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn conj(&self) -> Self {
        let mut t = self.clone();
        for c in &mut t.data {
            *c = c.conj();
        }
        t
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let mut r = self.clone();
        for (a, b) in r.data.iter_mut().zip(&o.data) {
            *a = *a + *b;
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let mut r = self.clone();
        for (a, b) in r.data.iter_mut().zip(&o.data) {
            *a = *a - *b;
        }
        r
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        for a in &mut r.data {
            *a = -*a;
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut r = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                for j in 0..n {
                    r[(i, j)] = r[(i, j)] + aik * o[(k, j)];
                }
            }
        }
        r
    }

    pub fn scale(&self, c: Cplx<R>) -> Self {
        let mut r = self.clone();
        for a in &mut r.data {
            *a = *a * c;
        }
        r
    }

    /// Max entrywise modulus.
    pub fn norm_max(&self) -> R {
        let mut m = R::zero();
        for c in &self.data {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Max column sum of moduli.
    pub fn norm_one(&self) -> R {
        let n = self.dim;
        let mut best = R::zero();
        for j in 0..n {
            let mut s = R::zero();
            for i in 0..n {
                s = s + self[(i, j)].abs();
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn lu(&self) -> Result<Lu<R>, MoprhError> {
        Lu::new(self)
    }

    pub fn inverse(&self) -> Result<Self, MoprhError> {
        self.lu()?.inverse()
    }

    /// 1-norm condition estimate via explicit inverse (N ≤ 16 in practice).
    pub fn cond_one(&self) -> Result<f64, MoprhError> {
        let inv = self.inverse()?;
        Ok((self.norm_one() * inv.norm_one()).to_f64())
    }

    pub fn det(&self) -> Result<Cplx<R>, MoprhError> {
        Ok(self.lu()?.det())
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor core.
    pub fn expm(&self) -> Self {
        let n = self.dim;
        let nrm = self.norm_one().to_f64();
        let s = if nrm > 0.25 {
            (nrm / 0.25).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(Cplx::from_f64(0.5f64.powi(s as i32), 0.0));
        // Taylor to machine precision at argument norm ≤ 0.25.
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        let tol = R::epsilon();
        for k in 1..80 {
            term = term.mul(&scaled).scale(Cplx::from_f64(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
            if term.norm_max() < tol {
                break;
            }
        }
        for _ in 0..s {
            sum = sum.mul(&sum);
        }
        sum
    }

    /// Entrywise distance to another matrix in max norm.
    pub fn dist_max(&self, o: &Self) -> R {
        self.sub(o).norm_max()
    }

    pub fn entries(&self) -> &[Cplx<R>] {
        &self.data
    }

    pub fn map_entries<F: Fn(Cplx<R>) -> Cplx<R>>(&self, f: F) -> Self {
        let mut r = self.clone();
        for c in &mut r.data {
            *c = f(*c);
        }
        r
    }
}

impl<R: Real> std::ops::Index<(usize, usize)> for CMatrix<R> {
    type Output = Cplx<R>;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<R> {
        &self.data[i * self.dim + j]
    }
}

impl<R: Real> std::ops::IndexMut<(usize, usize)> for CMatrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<R> {
        &mut self.data[i * self.dim + j]
    }
}

/// Partially pivoted LU factorization.
pub struct Lu<R: Real> {
    dim: usize,
    lu: Vec<Cplx<R>>,
    piv: Vec<usize>,
    sign_flips: usize,
}

impl<R: Real> Lu<R> {
    fn new(a: &CMatrix<R>) -> Result<Self, MoprhError> {
        let n = a.dim;
        let mut lu: Vec<Cplx<R>> = a.data.clone();
        let mut piv = vec![0usize; n];
        let mut flips = 0usize;
        let scale = a.norm_max();
        let tiny = R::from_f64(1e3) * R::epsilon() * if scale > R::zero() { scale } else { R::one() };
        for k in 0..n {
            // pivot search on |.|^2 to avoid sqrt
            let mut best = k;
            let mut bestv = lu[k * n + k].norm_sqr();
            for i in (k + 1)..n {
                let v = lu[i * n + k].norm_sqr();
                if v > bestv {
                    best = i;
                    bestv = v;
                }
            }
            if bestv.sqrt() <= tiny {
                return Err(MoprhError::SingularMatrix { dim: n });
            }
            piv[k] = best;
            if best != k {
                for j in 0..n {
                    lu.swap(k * n + j, best * n + j);
                }
                flips += 1;
            }
            let pivot = lu[k * n + k];
            let pinv = pivot.inv();
            for i in (k + 1)..n {
                let m = lu[i * n + k] * pinv;
                lu[i * n + k] = m;
                for j in (k + 1)..n {
                    let s = lu[k * n + j];
                    lu[i * n + j] = lu[i * n + j] - m * s;
                }
            }
        }
        Ok(Lu {
            dim: n,
            lu,
            piv,
            sign_flips: flips,
        })
    }

    pub fn det(&self) -> Cplx<R> {
        let n = self.dim;
        let mut d = if self.sign_flips % 2 == 0 {
            Cplx::one()
        } else {
            -Cplx::one()
        };
        for k in 0..n {
            d = d * self.lu[k * n + k];
        }
        d
    }

    /// Solve A x = b for a single right-hand side (length n).
    pub fn solve_vec(&self, b: &[Cplx<R>]) -> Vec<Cplx<R>> {
        let n = self.dim;
        let mut x = b.to_vec();
        // row interchanges must all land before the triangular sweeps: the stored
        // multipliers are the ones of the fully permuted matrix
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let xk = x[k];
            for i in (k + 1)..n {
                x[i] = x[i] - self.lu[i * n + k] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in (k + 1)..n {
                s = s - self.lu[k * n + j] * x[j];
            }
            x[k] = s * self.lu[k * n + k].inv();
        }
        x
    }

    /// Solve A X = B (matrix right-hand side).
    pub fn solve_mat(&self, b: &CMatrix<R>) -> CMatrix<R> {
        let n = self.dim;
        assert_eq!(b.dim, n);
        let mut out = CMatrix::zeros(n);
        let mut col = vec![Cplx::zero(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> Result<CMatrix<R>, MoprhError> {
        let inv = self.solve_mat(&CMatrix::identity(self.dim));
        if !inv.is_finite() {
            return Err(MoprhError::SingularMatrix { dim: self.dim });
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> CMatrix<f64> {
        CMatrix::from_rows_f64(&[vec![[a, 0.0], [b, 0.0]], vec![[c, 0.0], [d, 0.0]]])
    }

    #[test]
    fn inverse_times_original_is_identity() {
        let a = CMatrix::<f64>::from_rows_f64(&[
            vec![[2.0, 1.0], [0.5, -0.3], [0.0, 0.1]],
            vec![[-1.0, 0.0], [3.0, 0.2], [0.7, 0.0]],
            vec![[0.2, 0.2], [0.0, -1.0], [1.5, 0.4]],
        ]);
        let inv = a.inverse().unwrap();
        let prod = inv.mul(&a);
        assert!(prod.dist_max(&CMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn singular_matrix_detected() {
        let a = m2(1.0, 2.0, 2.0, 4.0);
        assert!(a.inverse().is_err());
    }

    #[test]
    fn det_of_triangular() {
        let a = m2(2.0, 5.0, 0.0, 3.0);
        let d = a.det().unwrap();
        assert!((d.re - 6.0).abs() < 1e-14 && d.im.abs() < 1e-14);
    }

    #[test]
    fn expm_matches_scalar_exponential() {
        // diag(1, -2): expm must reproduce scalar exp on the diagonal.
        let a = CMatrix::<f64>::from_diag_f64(&[1.0, -2.0]);
        let e = a.expm();
        assert!((e[(0, 0)].re - 1f64.exp()).abs() < 1e-13);
        assert!((e[(1, 1)].re - (-2f64).exp()).abs() < 1e-14);
        assert!(e[(0, 1)].abs() < 1e-15 && e[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn expm_nilpotent_exact() {
        // exp([[0,a],[0,0]]) = I + the nilpotent part.
        let a = m2(0.0, 0.7, 0.0, 0.0);
        let e = a.expm();
        assert!((e[(0, 1)].re - 0.7).abs() < 1e-15);
        assert!((e[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expm_rotation_block() {
        // [[0,-t],[t,0]] exponentiates to a rotation by t.
        let t = 0.9f64;
        let a = m2(0.0, -t, t, 0.0);
        let e = a.expm();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-14);
    }
}
