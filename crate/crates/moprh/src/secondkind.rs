//! Cauchy-transform companions of the biorthogonal pairs: evaluation off the
//! contour (quadrature or large-|z| series), Plemelj jump residuals, associated
//! polynomials, and the Hermite–Padé decomposition they satisfy.

use crate::biorth::{MomentTable, RecurrenceData};
use crate::contour::{build_rule_graded, cauchy_transform, Normalization, QuadratureRule};
use crate::error::MoprhError;
use crate::mxcore::matrix::CMatrix;
use crate::mxcore::poly::MatrixPoly;
use crate::scalar::{Cplx, Real};
use crate::weights::WeightCache;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMethod {
    Quadrature,
    Series,
}

#[derive(Clone, Debug)]
pub struct SecondKindEval<R: Real> {
    pub n: usize,
    pub z: Cplx<R>,
    pub ql: CMatrix<R>,
    pub qr: CMatrix<R>,
    pub method: EvalMethod,
}

/// Largest |node| of the rule; the expansion at infinity is trusted beyond
/// twice this radius.
pub fn contour_radius<R: Real>(rule: &QuadratureRule<R>) -> f64 {
    let mut r = 0.0f64;
    for z in &rule.nodes {
        r = r.max(z.abs().to_f64());
    }
    r
}

/// Q_n by direct quadrature of the Cauchy kernel against the cached weight.
pub fn q_quadrature<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    rule: &QuadratureRule<R>,
    n: usize,
    z: Cplx<R>,
    clearance: f64,
) -> Result<(CMatrix<R>, CMatrix<R>), MoprhError> {
    let dim = data.dim;
    let pl = &data.deg[n].pl;
    let pr = &data.deg[n].pr;
    let ql = cauchy_transform(
        |j, zp| pl.eval(zp).mul(&cache.w_at_node(j).2),
        dim,
        z,
        rule,
        clearance,
    )?;
    let qr = cauchy_transform(
        |j, zp| cache.w_at_node(j).2.mul(&pr.eval(zp)),
        dim,
        z,
        rule,
        clearance,
    )?;
    Ok((ql, qr))
}

/// Truncated expansion Q_n(z) = −Σ_{j≥n} m_j z^{−j−1} with the m_j taken from
/// moment integrals of P_n, accurate far outside the contour.
pub fn q_series<R: Real>(
    data: &RecurrenceData<R>,
    table: &MomentTable<R>,
    n: usize,
    z: Cplx<R>,
    terms: usize,
) -> (CMatrix<R>, CMatrix<R>) {
    let dim = data.dim;
    let pl = &data.deg[n].pl;
    let pr = &data.deg[n].pr;
    let zinv = z.inv();
    // z^{−n−1} prefactor, then one extra z^{−1} per term
    let mut zp = zinv;
    for _ in 0..n {
        zp = zp * zinv;
    }
    let mut ql = CMatrix::zeros(dim);
    let mut qr = CMatrix::zeros(dim);
    let top = (n + terms).min(table.k_max() - pl.coeffs.len() + 1);
    for j in n..=top {
        ql = ql.add(&table.pair_left(pl, j).scale(zp));
        qr = qr.add(&table.pair_right(pr, j).scale(zp));
        zp = zp * zinv;
    }
    (ql.neg(), qr.neg())
}

pub const SERIES_RADIUS_FACTOR: f64 = 2.0;

/// Q_n(z), preferring quadrature and falling back to the series beyond twice
/// the contour radius when z is too close to the support for the rule.
pub fn q_value<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    table: &MomentTable<R>,
    rule: &QuadratureRule<R>,
    n: usize,
    z: Cplx<R>,
    clearance: f64,
) -> Result<SecondKindEval<R>, MoprhError> {
    match q_quadrature(data, cache, rule, n, z, clearance) {
        Ok((ql, qr)) => Ok(SecondKindEval {
            n,
            z,
            ql,
            qr,
            method: EvalMethod::Quadrature,
        }),
        Err(MoprhError::ContourClearance { .. })
            if z.abs().to_f64() >= SERIES_RADIUS_FACTOR * contour_radius(rule) =>
        {
            let (ql, qr) = q_series(data, table, n, z, 12);
            Ok(SecondKindEval {
                n,
                z,
                ql,
                qr,
                method: EvalMethod::Series,
            })
        }
        Err(e) => Err(e),
    }
}

pub const JUMP_EPS: (f64, f64) = (1e-2, 5e-3);

/// Residual of the Plemelj jump Q_n(x⁺) − Q_n(x⁻) = P_n(x)·W(x) (left) and
/// W(x)·P_n(x) (right) at the contour point z(t0), with two-point Richardson
/// extrapolation in the normal offset. Each offset gets its own rule graded
/// toward t0 so the near-pole kernel is resolved.
pub fn jump_residual<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    n: usize,
    t0: R,
    eps: (f64, f64),
) -> Result<f64, MoprhError> {
    let dim = data.dim;
    let contour = &cache.spec.contour;
    let x = contour.z(t0);
    let tau = contour.dz(t0);
    let speed = tau.abs();
    let normal = Cplx::new(R::zero(), R::one()) * tau.scale(R::one() / speed);
    let pl = &data.deg[n].pl;
    let pr = &data.deg[n].pr;
    let jump_at = |e: f64| -> Result<(CMatrix<R>, CMatrix<R>), MoprhError> {
        // panel width comparable to the offset keeps the kernel poles one
        // panel-width away from the nodes
        let fine = e / speed.to_f64();
        let g = build_rule_graded(contour, t0, fine, 16, Normalization::Cauchy)?;
        let ws: Vec<CMatrix<R>> = g
            .nodes
            .iter()
            .map(|&zp| cache.weight_at(zp))
            .collect::<Result<_, _>>()?;
        let off = normal.scale(R::from_f64(e));
        let zp_plus = x + off;
        let zp_minus = x - off;
        let eval = |z0: Cplx<R>, left: bool| -> CMatrix<R> {
            g.integrate(dim, |j, zp| {
                let k = (zp - z0).inv();
                if left {
                    pl.eval(zp).mul(&ws[j]).scale(k)
                } else {
                    ws[j].mul(&pr.eval(zp)).scale(k)
                }
            })
        };
        Ok((
            eval(zp_plus, true).sub(&eval(zp_minus, true)),
            eval(zp_plus, false).sub(&eval(zp_minus, false)),
        ))
    };
    let (l1, r1) = jump_at(eps.0)?;
    let (l2, r2) = jump_at(eps.1)?;
    // linear Richardson with eps.0 = 2·eps.1
    let two = Cplx::from_f64(2.0, 0.0);
    let jl = l2.scale(two).sub(&l1);
    let jr = r2.scale(two).sub(&r1);
    let w = cache.weight_at(x)?;
    let rl = jl.dist_max(&pl.eval(x).mul(&w)).to_f64();
    let rr = jr.dist_max(&w.mul(&pr.eval(x))).to_f64();
    Ok(rl.max(rr))
}

/// First-kind associated polynomial of the left family, degree ≤ n−1, built
/// algebraically from the divided difference (P_n(z′) − P_n(z))/(z′ − z):
/// coefficient of z^j is Σ_{k>j} a_k W_{k−1−j}.
pub fn associated_first_kind<R: Real>(
    data: &RecurrenceData<R>,
    table: &MomentTable<R>,
    n: usize,
) -> MatrixPoly<R> {
    let dim = data.dim;
    if n == 0 {
        return MatrixPoly::zero(dim);
    }
    let a = &data.deg[n].pl.coeffs;
    let coeffs = (0..n)
        .map(|j| {
            let mut acc = CMatrix::zeros(dim);
            for k in (j + 1)..=n {
                acc = acc.add(&a[k].mul(&table.w[k - 1 - j]));
            }
            acc
        })
        .collect();
    MatrixPoly::from_coeffs(dim, coeffs)
}

/// Right analogue with the moments multiplying from the left.
pub fn associated_first_kind_right<R: Real>(
    data: &RecurrenceData<R>,
    table: &MomentTable<R>,
    n: usize,
) -> MatrixPoly<R> {
    let dim = data.dim;
    if n == 0 {
        return MatrixPoly::zero(dim);
    }
    let b = &data.deg[n].pr.coeffs;
    let coeffs = (0..n)
        .map(|j| {
            let mut acc = CMatrix::zeros(dim);
            for k in (j + 1)..=n {
                acc = acc.add(&table.w[k - 1 - j].mul(&b[k]));
            }
            acc
        })
        .collect();
    MatrixPoly::from_coeffs(dim, coeffs)
}

/// ‖P_n(z)·S_W(z) + P^{(1)}_{n−1}(z) − Q_n(z)‖ (max of left and right forms),
/// with S_W the degree-0 second-kind function.
pub fn hermite_pade_residual<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    table: &MomentTable<R>,
    rule: &QuadratureRule<R>,
    n: usize,
    z: Cplx<R>,
    clearance: f64,
) -> Result<f64, MoprhError> {
    let dim = data.dim;
    let sw = cauchy_transform(
        |j, _| cache.w_at_node(j).2.clone(),
        dim,
        z,
        rule,
        clearance,
    )?;
    let (ql, qr) = q_quadrature(data, cache, rule, n, z, clearance)?;
    let p1l = associated_first_kind(data, table, n);
    let p1r = associated_first_kind_right(data, table, n);
    let rl = data.deg[n]
        .pl
        .eval(z)
        .mul(&sw)
        .add(&p1l.eval(z))
        .dist_max(&ql)
        .to_f64();
    let rr = sw
        .mul(&data.deg[n].pr.eval(z))
        .add(&p1r.eval(z))
        .dist_max(&qr)
        .to_f64();
    Ok(rl.max(rr))
}

/// Residual of the second-kind three-term relations at z, using the
/// Q_{−1} = −I convention for the n = 0 step.
pub fn q_ttr_residual<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    rule: &QuadratureRule<R>,
    n: usize,
    z: Cplx<R>,
    clearance: f64,
) -> Result<f64, MoprhError> {
    let dim = data.dim;
    let (ql_n, qr_n) = q_quadrature(data, cache, rule, n, z, clearance)?;
    let (ql_n1, qr_n1) = q_quadrature(data, cache, rule, n + 1, z, clearance)?;
    let (ql_m, qr_m) = if n == 0 {
        let m = CMatrix::identity(dim).neg();
        (m.clone(), m)
    } else {
        q_quadrature(data, cache, rule, n - 1, z, clearance)?
    };
    // γ with the C_{−1} = I convention collapses to C_0^{−1} at n = 0
    let (gl, gr) = if n == 0 {
        (data.deg[0].c_inv.clone(), data.deg[0].c_inv.clone())
    } else {
        (data.gamma_l[n].clone(), data.gamma_r[n].clone())
    };
    let rl = ql_n
        .scale(z)
        .sub(&ql_n1)
        .sub(&data.beta_l[n].mul(&ql_n))
        .sub(&gl.mul(&ql_m))
        .norm_max()
        .to_f64();
    let rr = qr_n
        .scale(z)
        .sub(&qr_n1)
        .sub(&qr_n.mul(&data.beta_r[n]))
        .sub(&qr_m.mul(&gr))
        .norm_max()
        .to_f64();
    Ok(rl.max(rr))
}

/// ‖Q^R_{n+1}(z) C_n P^L_n(z) − Q^R_n(z) C_n P^L_{n+1}(z) − I‖: the confluent
/// pairing of second- and first-kind solutions is the identity everywhere.
pub fn confluent_qp_residual<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    rule: &QuadratureRule<R>,
    n: usize,
    z: Cplx<R>,
    clearance: f64,
) -> Result<f64, MoprhError> {
    let dim = data.dim;
    let (_, qr_n) = q_quadrature(data, cache, rule, n, z, clearance)?;
    let (_, qr_n1) = q_quadrature(data, cache, rule, n + 1, z, clearance)?;
    let c = &data.deg[n].c;
    let lhs = qr_n1
        .mul(c)
        .mul(&data.deg[n].pl.eval(z))
        .sub(&qr_n.mul(c).mul(&data.deg[n + 1].pl.eval(z)));
    Ok(lhs.dist_max(&CMatrix::identity(dim)).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    #[test]
    fn stieltjes_transform_matches_erfc_oracle() {
        let p = testkit::scalar_gauss(Normalization::Plain, 2);
        let z = Cplx::from_f64(0.0, 2.0);
        let e = q_value(&p.data, &p.cache, &p.table, &p.rule, 0, z, 0.1).unwrap();
        assert_eq!(e.method, EvalMethod::Quadrature);
        // ∫ e^{−t²}/(t−2i) dt = iπ e⁴ erfc(2)
        let expect = Cplx::from_f64(0.0, 0.8023491804556815);
        assert!((e.ql[(0, 0)] - expect).abs() < 1e-8);
        assert!((e.qr[(0, 0)] - expect).abs() < 1e-8);
    }

    #[test]
    fn large_z_leading_term_and_series_agreement() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 4);
        let z = Cplx::from_f64(35.0, 35.0);
        let (ql, _) = q_quadrature(&p.data, &p.cache, &p.rule, 2, z, 0.1).unwrap();
        let mut zp = z.inv();
        for _ in 0..2 {
            zp = zp * z.inv();
        }
        let lead = p.data.deg[2].c_inv.scale(zp).neg();
        let rel = ql.dist_max(&lead) / lead.norm_max();
        assert!(rel < 1e-2, "leading-term relative error {rel}");
        // series and quadrature agree well beyond twice the contour radius
        let z2 = Cplx::from_f64(20.0, 5.0);
        for n in 0..=3usize {
            let (ql_q, qr_q) = q_quadrature(&p.data, &p.cache, &p.rule, n, z2, 0.1).unwrap();
            let (ql_s, qr_s) = q_series(&p.data, &p.table, n, z2, 12);
            assert!(ql_q.dist_max(&ql_s) < 1e-6 * ql_q.norm_max().max(1e-30));
            assert!(qr_q.dist_max(&qr_s) < 1e-6 * qr_q.norm_max().max(1e-30));
        }
    }

    #[test]
    fn series_fallback_beyond_clearance() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 2);
        // far away but within the huge clearance → quadrature refused, series used
        let z = Cplx::from_f64(0.0, 40.0);
        let e = q_value(&p.data, &p.cache, &p.table, &p.rule, 1, z, 100.0).unwrap();
        assert_eq!(e.method, EvalMethod::Series);
        let (ql_q, _) = q_quadrature(&p.data, &p.cache, &p.rule, 1, z, 0.1).unwrap();
        assert!(e.ql.dist_max(&ql_q) < 1e-10);
        // near point with normal clearance → hard error
        let near = Cplx::from_f64(0.2, 1e-3);
        assert!(q_value(&p.data, &p.cache, &p.table, &p.rule, 1, near, 0.1).is_err());
    }

    #[test]
    fn plemelj_jump_scalar_gaussian() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 3);
        // default offsets leave the quadratic Richardson remainder ≈ ½|PW″|·|2ε₂²−ε₁²|
        let r = jump_residual(&p.data, &p.cache, 1, 0.3, JUMP_EPS).unwrap();
        assert!(r < 1e-4, "jump residual {r}");
        let fine = jump_residual(&p.data, &p.cache, 1, 0.3, (2e-3, 1e-3)).unwrap();
        assert!(fine < 1e-5, "jump residual {fine}");
    }

    #[test]
    fn plemelj_jump_matrix_weight() {
        let p = testkit::hermite_2x2(1.0, Normalization::Cauchy, 3);
        let r = jump_residual(&p.data, &p.cache, 2, -0.7, JUMP_EPS).unwrap();
        assert!(r < 1e-4, "jump residual {r}");
    }

    #[test]
    fn associated_polynomial_low_degrees() {
        let p = testkit::scalar_gauss(Normalization::Plain, 2);
        // n=1: divided difference of monic z is 1 → constant W_0
        let p1 = associated_first_kind(&p.data, &p.table, 1);
        assert_eq!(p1.degree(), Some(0));
        assert!((p1.coeff(0)[(0, 0)].re - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        // n=0: empty sum
        assert!(associated_first_kind(&p.data, &p.table, 0).is_zero());
        assert!(associated_first_kind_right(&p.data, &p.table, 0).is_zero());
    }

    #[test]
    fn hermite_pade_identity() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 3);
        let z = Cplx::from_f64(1.0, 2.0);
        for n in 0..=3usize {
            let r = hermite_pade_residual(&p.data, &p.cache, &p.table, &p.rule, n, z, 0.1)
                .unwrap();
            assert!(r < 1e-8, "n={n} residual {r}");
        }
        let m = testkit::hermite_2x2(1.0, Normalization::Cauchy, 3);
        let r = hermite_pade_residual(&m.data, &m.cache, &m.table, &m.rule, 3, z, 0.1).unwrap();
        assert!(r < 1e-7, "matrix residual {r}");
    }

    #[test]
    fn q_three_term_relation() {
        let p = testkit::hermite_2x2(0.5, Normalization::Cauchy, 4);
        let z = Cplx::from_f64(-0.8, 1.5);
        for n in 0..=3usize {
            let r = q_ttr_residual(&p.data, &p.cache, &p.rule, n, z, 0.1).unwrap();
            assert!(r < 1e-7, "n={n} residual {r}");
        }
    }

    #[test]
    fn confluent_pairing_is_identity() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 4);
        let z = Cplx::from_f64(0.4, -1.1);
        for n in 0..=3usize {
            let r = confluent_qp_residual(&p.data, &p.cache, &p.rule, n, z, 0.1).unwrap();
            assert!(r < 1e-7, "n={n} residual {r}");
        }
        let m = testkit::hermite_2x2(1.0, Normalization::Cauchy, 3);
        let r = confluent_qp_residual(&m.data, &m.cache, &m.rule, 2, z, 0.1).unwrap();
        assert!(r < 1e-7, "matrix residual {r}");
    }

    #[test]
    fn zero_like_weight_gives_zero_q() {
        let p = testkit::scalar_gauss(Normalization::Plain, 1);
        let (ql, qr) = q_series(&p.data, &p.table, 0, Cplx::from_f64(30.0, 0.0), 6);
        assert!(ql.norm_max().is_finite() && qr.norm_max().is_finite());
        // scaling the weight to zero scales Q to zero: linearity through the table
        let mut zeroed = p.table.clone();
        for w in &mut zeroed.w {
            *w = CMatrix::zeros(1);
        }
        let (zl, zr) = q_series(&p.data, &zeroed, 0, Cplx::from_f64(30.0, 0.0), 6);
        assert!(zl.norm_max() == 0.0 && zr.norm_max() == 0.0);
    }
}
