//! Matrix polynomials in ascending powers of z, plus the Miura map h ↦ h′ + h².

use crate::mxcore::matrix::CMatrix;
use crate::scalar::{Cplx, Real};

#[derive(Clone, Debug)]
pub struct MatrixPoly<R: Real> {
    pub dim: usize,
    /// coeffs[k] multiplies z^k; trailing zero blocks are trimmed after construction.
    pub coeffs: Vec<CMatrix<R>>,
}

impl<R: Real> MatrixPoly<R> {
    pub fn zero(dim: usize) -> Self {
        MatrixPoly { dim, coeffs: vec![] }
    }

    pub fn constant(c: CMatrix<R>) -> Self {
        let dim = c.dim;
        MatrixPoly { dim, coeffs: vec![c] }.trimmed()
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<CMatrix<R>>) -> Self {
        for c in &coeffs {
            assert_eq!(c.dim, dim, "coefficient dim mismatch");
        }
        MatrixPoly { dim, coeffs }.trimmed()
    }

    /// Monomial c·z^k.
    pub fn monomial(c: CMatrix<R>, k: usize) -> Self {
        let dim = c.dim;
        let mut coeffs = vec![CMatrix::zeros(dim); k];
        coeffs.push(c);
        MatrixPoly { dim, coeffs }.trimmed()
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant(CMatrix::identity(dim))
    }

    fn trimmed(mut self) -> Self {
        let tiny = R::zero();
        while let Some(last) = self.coeffs.last() {
            if last.norm_max() > tiny {
                break;
            }
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, k: usize) -> CMatrix<R> {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.dim))
    }

    /// Horner evaluation in the declared coefficient order.
    pub fn eval(&self, z: Cplx<R>) -> CMatrix<R> {
        let mut acc = CMatrix::zeros(self.dim);
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(z).add(c);
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let len = self.coeffs.len().max(o.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for k in 0..len {
            coeffs.push(self.coeff(k).add(&o.coeff(k)));
        }
        MatrixPoly { dim: self.dim, coeffs }.trimmed()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        MatrixPoly {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.dim);
        }
        let mut coeffs =
            vec![CMatrix::zeros(self.dim); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        MatrixPoly { dim: self.dim, coeffs }.trimmed()
    }

    pub fn scale(&self, c: Cplx<R>) -> Self {
        MatrixPoly {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|m| m.scale(c)).collect(),
        }
        .trimmed()
    }

    pub fn mul_matrix_left(&self, m: &CMatrix<R>) -> Self {
        MatrixPoly {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| m.mul(c)).collect(),
        }
        .trimmed()
    }

    pub fn mul_matrix_right(&self, m: &CMatrix<R>) -> Self {
        MatrixPoly {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c.mul(m)).collect(),
        }
        .trimmed()
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero(self.dim);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(Cplx::from_f64(k as f64, 0.0)))
            .collect();
        MatrixPoly { dim: self.dim, coeffs }.trimmed()
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = vec![CMatrix::zeros(self.dim)];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.scale(Cplx::from_f64(1.0 / (k as f64 + 1.0), 0.0)));
        }
        MatrixPoly { dim: self.dim, coeffs }.trimmed()
    }

    pub fn transpose(&self) -> Self {
        MatrixPoly {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c.transpose()).collect(),
        }
    }

    /// Max coefficient norm; coefficientwise residual metric.
    pub fn norm_max(&self) -> R {
        let mut m = R::zero();
        for c in &self.coeffs {
            let v = c.norm_max();
            if v > m {
                m = v;
            }
        }
        m
    }

    pub fn dist_max(&self, o: &Self) -> R {
        self.sub(o).norm_max()
    }

    /// True when all coefficient blocks mutually commute (closed-form exponential applies).
    pub fn coefficients_commute(&self, tol: R) -> bool {
        for i in 0..self.coeffs.len() {
            for j in (i + 1)..self.coeffs.len() {
                let a = &self.coeffs[i];
                let b = &self.coeffs[j];
                if a.mul(b).dist_max(&b.mul(a)) > tol {
                    return false;
                }
            }
        }
        true
    }
}

pub fn commutator<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    assert_eq!(a.dim, b.dim, "commutator dimension mismatch");
    a.mul(b).sub(&b.mul(a))
}

pub fn anticommutator<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    assert_eq!(a.dim, b.dim, "anticommutator dimension mismatch");
    a.mul(b).add(&b.mul(a))
}

/// Miura map h ↦ h′ + h².
pub fn miura<R: Real>(h: &MatrixPoly<R>) -> MatrixPoly<R> {
    h.derivative().add(&h.mul(h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> CMatrix<f64> {
        CMatrix::from_rows_f64(&[vec![[v, 0.0]]])
    }

    #[test]
    fn commutator_cases() {
        let a = CMatrix::<f64>::from_rows_f64(&[vec![[0.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]]);
        let b = CMatrix::from_rows_f64(&[vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]]);
        // [A, A] = 0 and [I, B] = 0
        assert!(commutator(&a, &a).norm_max() == 0.0);
        assert!(commutator(&CMatrix::identity(2), &b).norm_max() == 0.0);
        let ab = commutator(&a, &b);
        assert!((ab[(0, 1)].re - (-1.0)).abs() < 1e-15);
        // anticommutator of the same pair
        let ac = anticommutator(&a, &b);
        assert!((ac[(0, 1)].re - 1.0).abs() < 1e-15);
        assert!(anticommutator(&a, &CMatrix::zeros(2)).norm_max() == 0.0);
        assert!(anticommutator(&CMatrix::identity(2), &b).dist_max(&b.scale(Cplx::from_f64(2.0, 0.0))) < 1e-15);
    }

    #[test]
    fn miura_of_linear() {
        // miura(Az + B) = A²z² + (AB+BA)z + (A + B²)
        let a = CMatrix::<f64>::from_rows_f64(&[vec![[0.0, 0.0], [1.0, 0.0]], vec![[2.0, 0.0], [0.0, 0.0]]]);
        let b = CMatrix::from_rows_f64(&[vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [-1.0, 0.0]]]);
        let h = MatrixPoly::from_coeffs(2, vec![b.clone(), a.clone()]);
        let m = miura(&h);
        assert!(m.coeff(2).dist_max(&a.mul(&a)) < 1e-15);
        assert!(m.coeff(1).dist_max(&anticommutator(&a, &b)) < 1e-15);
        assert!(m.coeff(0).dist_max(&a.add(&b.mul(&b))) < 1e-15);
        // trivial cases
        assert!(miura(&MatrixPoly::<f64>::zero(2)).is_zero());
        let cb = MatrixPoly::constant(b.clone());
        assert!(miura(&cb).dist_max(&MatrixPoly::constant(b.mul(&b))) < 1e-15);
    }

    #[test]
    fn horner_eval_matches_power_sum() {
        let p = MatrixPoly::from_coeffs(1, vec![c(1.0), c(-2.0), c(0.5)]);
        let z = Cplx::from_f64(1.5, -0.5);
        let direct = Cplx::from_f64(1.0, 0.0)
            + z.scale(-2.0)
            + z * z * Cplx::from_f64(0.5, 0.0);
        assert!((p.eval(z)[(0, 0)] - direct).abs() < 1e-14);
    }

    #[test]
    fn derivative_antiderivative_roundtrip() {
        let p = MatrixPoly::from_coeffs(1, vec![c(0.0), c(3.0), c(-1.0), c(2.0)]);
        let q = p.derivative().antiderivative();
        assert!(p.dist_max(&q) < 1e-14); // constant term of p is zero
    }
}
