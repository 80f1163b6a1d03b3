//! Truncated matrix Laurent series around z = ∞: polynomial part plus z^{-1}, z^{-2}, … blocks.

use crate::error::MoprhError;
use crate::mxcore::matrix::CMatrix;
use crate::mxcore::poly::MatrixPoly;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct LaurentBlock<R: Real> {
    pub dim: usize,
    pub pos: MatrixPoly<R>,
    /// neg[k] is the coefficient of z^{-(k+1)}.
    pub neg: Vec<CMatrix<R>>,
}

impl<R: Real> LaurentBlock<R> {
    pub fn from_parts(pos: MatrixPoly<R>, neg: Vec<CMatrix<R>>) -> Self {
        let dim = pos.dim;
        for c in &neg {
            assert_eq!(c.dim, dim);
        }
        LaurentBlock { dim, pos, neg }
    }

    pub fn from_poly(pos: MatrixPoly<R>) -> Self {
        let dim = pos.dim;
        LaurentBlock { dim, pos, neg: vec![] }
    }

    /// I + Σ neg[k] z^{-(k+1)}.
    pub fn one_plus_negatives(dim: usize, neg: Vec<CMatrix<R>>) -> Self {
        LaurentBlock::from_parts(MatrixPoly::identity(dim), neg)
    }

    pub fn trunc(&self) -> usize {
        self.neg.len()
    }

    /// Coefficient of z^p (any integer p; zero outside the stored window).
    pub fn coeff(&self, p: i64) -> CMatrix<R> {
        if p >= 0 {
            self.pos.coeff(p as usize)
        } else {
            let k = (-p - 1) as usize;
            self.neg
                .get(k)
                .cloned()
                .unwrap_or_else(|| CMatrix::zeros(self.dim))
        }
    }

    fn power_range(&self) -> (i64, i64) {
        let hi = self.pos.degree().map(|d| d as i64).unwrap_or(-1);
        let lo = -(self.neg.len() as i64);
        (lo, hi)
    }

    /// Full convolution over the stored coefficient windows of both factors.
    /// Positive powers of the result are exact whenever both truncation orders
    /// are at least the opposite factor's polynomial degree.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let (alo, ahi) = self.power_range();
        let (blo, bhi) = o.power_range();
        if ahi < alo || bhi < blo {
            return LaurentBlock::from_poly(MatrixPoly::zero(self.dim));
        }
        let lo = alo + blo;
        let hi = ahi + bhi;
        let mut acc: Vec<CMatrix<R>> =
            vec![CMatrix::zeros(self.dim); (hi - lo + 1) as usize];
        for pa in alo..=ahi {
            let ca = self.coeff(pa);
            if ca.norm_max() == R::zero() {
                continue;
            }
            for pb in blo..=bhi {
                let idx = (pa + pb - lo) as usize;
                acc[idx] = acc[idx].add(&ca.mul(&o.coeff(pb)));
            }
        }
        let pos_coeffs: Vec<CMatrix<R>> = (0..=hi.max(0))
            .map(|p| {
                if p >= lo {
                    acc[(p - lo) as usize].clone()
                } else {
                    CMatrix::zeros(self.dim)
                }
            })
            .collect();
        let neg: Vec<CMatrix<R>> = (1..=(-lo).max(0))
            .map(|k| acc[(-k - lo) as usize].clone())
            .collect();
        LaurentBlock::from_parts(MatrixPoly::from_coeffs(self.dim, pos_coeffs), neg)
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let n = self.neg.len().max(o.neg.len());
        let neg = (0..n)
            .map(|k| self.coeff(-(k as i64) - 1).add(&o.coeff(-(k as i64) - 1)))
            .collect();
        LaurentBlock::from_parts(self.pos.add(&o.pos), neg)
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let n = self.neg.len().max(o.neg.len());
        let neg = (0..n)
            .map(|k| self.coeff(-(k as i64) - 1).sub(&o.coeff(-(k as i64) - 1)))
            .collect();
        LaurentBlock::from_parts(self.pos.sub(&o.pos), neg)
    }

    pub fn truncate(&self, k: usize) -> Self {
        let mut t = self.clone();
        t.neg.truncate(k);
        t
    }

    /// Keep only nonnegative powers.
    pub fn positive_part(&self) -> MatrixPoly<R> {
        self.pos.clone()
    }

    pub fn norm_max(&self) -> R {
        let mut m = self.pos.norm_max();
        for c in &self.neg {
            let v = c.norm_max();
            if v > m {
                m = v;
            }
        }
        m
    }
}

/// Neumann inverse of s = I + O(z^{-1}), valid through order z^{-k}.
pub fn series_inverse<R: Real>(s: &LaurentBlock<R>, k: usize) -> Result<LaurentBlock<R>, MoprhError> {
    let dim = s.dim;
    let id = CMatrix::identity(dim);
    let lead_ok = s.pos.degree().map(|d| d == 0).unwrap_or(false)
        && s.pos.coeff(0).dist_max(&id) <= R::from_f64(1e-12);
    if !lead_ok {
        return Err(MoprhError::DimensionMismatch(
            "series inverse requires leading block I + O(1/z)".into(),
        ));
    }
    // B_j = −Σ_{i=1..j} A_i B_{j−i}, B_0 = I.
    let mut b: Vec<CMatrix<R>> = vec![id.clone()];
    for j in 1..=k {
        let mut acc = CMatrix::zeros(dim);
        for i in 1..=j {
            acc = acc.add(&s.coeff(-(i as i64)).mul(&b[j - i]));
        }
        b.push(acc.neg());
    }
    Ok(LaurentBlock::one_plus_negatives(dim, b[1..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Cplx;

    fn c1(v: f64) -> CMatrix<f64> {
        CMatrix::from_rows_f64(&[vec![[v, 0.0]]])
    }

    #[test]
    fn inverse_of_identity_is_identity() {
        let s = LaurentBlock::<f64>::one_plus_negatives(2, vec![]);
        let inv = series_inverse(&s, 4).unwrap();
        assert!(inv.pos.coeff(0).dist_max(&CMatrix::identity(2)) == 0.0);
        assert!(inv.neg.iter().all(|c| c.norm_max() == 0.0));
    }

    #[test]
    fn neumann_inverse_matches_geometric_series() {
        // (I + A/z)^{-1} = I − A/z + A²/z² − …
        let a = CMatrix::<f64>::from_rows_f64(&[
            vec![[0.5, 0.0], [0.2, 0.1]],
            vec![[-0.3, 0.0], [0.1, 0.0]],
        ]);
        let s = LaurentBlock::one_plus_negatives(2, vec![a.clone()]);
        let inv = series_inverse(&s, 5).unwrap();
        let mut pw = CMatrix::identity(2);
        for k in 1..=5 {
            pw = pw.mul(&a);
            let expect = if k % 2 == 0 { pw.clone() } else { pw.neg() };
            assert!(inv.coeff(-(k as i64)).dist_max(&expect) < 1e-14);
        }
        // product check through retained orders
        let prod = s.mul(&inv).truncate(5);
        assert!(prod.pos.coeff(0).dist_max(&CMatrix::identity(2)) < 1e-14);
        for k in 1..=5 {
            assert!(prod.coeff(-(k as i64)).norm_max() < 1e-14);
        }
    }

    #[test]
    fn product_matches_brute_force_convolution() {
        let a = LaurentBlock::from_parts(
            MatrixPoly::from_coeffs(1, vec![c1(2.0), c1(-1.0)]),
            vec![c1(0.5), c1(0.25)],
        );
        let b = LaurentBlock::from_parts(
            MatrixPoly::from_coeffs(1, vec![c1(1.0)]),
            vec![c1(-2.0), c1(3.0), c1(0.1)],
        );
        let p = a.mul(&b);
        // brute force over scalar coefficients
        for out_pow in -5i64..=1 {
            let mut want = 0.0;
            for pa in -2i64..=1 {
                let pb = out_pow - pa;
                if !(-3..=0).contains(&pb) {
                    continue;
                }
                want += a.coeff(pa)[(0, 0)].re * b.coeff(pb)[(0, 0)].re;
            }
            assert!(
                (p.coeff(out_pow)[(0, 0)].re - want).abs() < 1e-14,
                "power {out_pow}"
            );
        }
    }

    #[test]
    fn positive_part_drops_negatives() {
        let s = LaurentBlock::from_parts(
            MatrixPoly::from_coeffs(1, vec![c1(3.0), c1(1.0)]),
            vec![c1(9.0)],
        );
        let p = s.positive_part();
        assert_eq!(p.degree(), Some(1));
        assert!((p.eval(Cplx::from_f64(2.0, 0.0))[(0, 0)].re - 5.0).abs() < 1e-14);
        let neg_only = LaurentBlock::from_parts(MatrixPoly::zero(1), vec![c1(1.0)]);
        assert!(neg_only.positive_part().is_zero());
    }
}
