//! 2N×2N Riemann–Hilbert frames over the biorthogonal family: fundamental
//! matrices Y_n, weight-dressed Z_n with a constant jump on the support,
//! transfer matrices T_n, structure matrices M_n, and residual checks for the
//! identities linking them (inverse relation, Christoffel–Darboux, zero
//! curvature). Everything is assembled from [`RecurrenceData`] blocks; the
//! polynomial identities are verified coefficientwise.

use crate::biorth::{RecurrenceData, EXPANSION_ORDER};
use crate::contour::{build_rule_graded, Normalization, QuadratureRule};
use crate::error::MoprhError;
use crate::mxcore::{commutator, series_inverse, CMatrix, LaurentBlock, MatrixPoly};
use crate::scalar::{Cplx, Real};
use crate::secondkind::q_quadrature;
use crate::weights::{PearsonSpec, WeightCache};

/// [[a, b],[c, d]] flattened into one 2N×2N matrix.
pub fn assemble2<R: Real>(
    a: &CMatrix<R>,
    b: &CMatrix<R>,
    c: &CMatrix<R>,
    d: &CMatrix<R>,
) -> CMatrix<R> {
    let n = a.dim;
    assert!(b.dim == n && c.dim == n && d.dim == n);
    let mut m = CMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = a[(i, j)];
            m[(i, j + n)] = b[(i, j)];
            m[(i + n, j)] = c[(i, j)];
            m[(i + n, j + n)] = d[(i, j)];
        }
    }
    m
}

/// Block (bi, bj) of a 2N×2N matrix, bi, bj ∈ {0, 1}.
pub fn block<R: Real>(m: &CMatrix<R>, bi: usize, bj: usize) -> CMatrix<R> {
    let n = m.dim / 2;
    let mut b = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = m[(bi * n + i, bj * n + j)];
        }
    }
    b
}

/// Coefficientwise [`assemble2`] for polynomials.
pub fn assemble2_poly<R: Real>(
    a: &MatrixPoly<R>,
    b: &MatrixPoly<R>,
    c: &MatrixPoly<R>,
    d: &MatrixPoly<R>,
) -> MatrixPoly<R> {
    let len = a
        .coeffs
        .len()
        .max(b.coeffs.len())
        .max(c.coeffs.len())
        .max(d.coeffs.len());
    let coeffs = (0..len)
        .map(|k| assemble2(&a.coeff(k), &b.coeff(k), &c.coeff(k), &d.coeff(k)))
        .collect();
    MatrixPoly::from_coeffs(2 * a.dim, coeffs)
}

/// J·m·J⁻¹ with J = [[0, I],[−I, 0]]: swaps the diagonal blocks and negates
/// the off-diagonal ones.
pub fn j_conj<R: Real>(m: &CMatrix<R>) -> CMatrix<R> {
    assemble2(
        &block(m, 1, 1),
        &block(m, 1, 0).neg(),
        &block(m, 0, 1).neg(),
        &block(m, 0, 0),
    )
}

/// [`j_conj`] applied to every coefficient.
pub fn j_conj_poly<R: Real>(m: &MatrixPoly<R>) -> MatrixPoly<R> {
    MatrixPoly::from_coeffs(m.dim, m.coeffs.iter().map(j_conj).collect())
}

/// Q_n with the degree −1 convention Q_{−1} = −C_{−1}⁻¹ = −I.
fn q_at<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    rule: &QuadratureRule<R>,
    n: isize,
    z: Cplx<R>,
    clearance: f64,
) -> Result<(CMatrix<R>, CMatrix<R>), MoprhError> {
    if n < 0 {
        let m = CMatrix::identity(data.dim).neg();
        return Ok((m.clone(), m));
    }
    q_quadrature(data, cache, rule, n as usize, z, clearance)
}

#[derive(Clone, Debug)]
pub struct FrameEval<R: Real> {
    pub n: usize,
    pub z: Cplx<R>,
    pub yl: CMatrix<R>,
    pub yr: CMatrix<R>,
    pub zl: CMatrix<R>,
    pub zr: CMatrix<R>,
    pub det_yl: Cplx<R>,
}

/// Left and right fundamental matrices at z (off the contour), together with
/// their weight-dressed companions
/// Z_L = Y_L·diag(W_L, W_R⁻¹) and Z_R = diag(W_R, W_L⁻¹)·Y_R.
pub fn frame_eval<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    rule: &QuadratureRule<R>,
    n: usize,
    z: Cplx<R>,
    clearance: f64,
) -> Result<FrameEval<R>, MoprhError> {
    let dim = data.dim;
    let zero = CMatrix::zeros(dim);
    let (ql_n, qr_n) = q_at(data, cache, rule, n as isize, z, clearance)?;
    let (ql_m, qr_m) = q_at(data, cache, rule, n as isize - 1, z, clearance)?;
    let pl_n = data.deg[n].pl.eval(z);
    let pr_n = data.deg[n].pr.eval(z);
    let (pl_m, pr_m) = if n == 0 {
        (zero.clone(), zero.clone())
    } else {
        (data.deg[n - 1].pl.eval(z), data.deg[n - 1].pr.eval(z))
    };
    let cprev = data.c_prev(n);
    let yl = assemble2(
        &pl_n,
        &ql_n,
        &cprev.mul(&pl_m).neg(),
        &cprev.mul(&ql_m).neg(),
    );
    let yr = assemble2(
        &pr_n,
        &pr_m.mul(&cprev).neg(),
        &qr_n,
        &qr_m.mul(&cprev).neg(),
    );
    let (wl, wr, _) = cache.factors_at(z)?;
    let zl = yl.mul(&assemble2(&wl, &zero, &zero, &wr.inverse()?));
    let zr = assemble2(&wr, &zero, &zero, &wl.inverse()?).mul(&yr);
    let det_yl = yl.det()?;
    Ok(FrameEval {
        n,
        z,
        yl,
        yr,
        zl,
        zr,
        det_yl,
    })
}

/// Transfer matrices T_L = [[zI − β_L, C_n⁻¹],[−C_n, 0]] and
/// T_R = [[zI − β_R, −C_n],[C_n⁻¹, 0]]; Y_{L,n+1} = T_L·Y_{L,n} and
/// Y_{R,n+1} = Y_{R,n}·T_R, both with determinant 1.
pub fn transfer<R: Real>(data: &RecurrenceData<R>, n: usize) -> (MatrixPoly<R>, MatrixPoly<R>) {
    let dim = data.dim;
    let zero = CMatrix::zeros(dim);
    let id = CMatrix::identity(dim);
    let lead = assemble2(&id, &zero, &zero, &zero);
    let tl0 = assemble2(
        &data.beta_l[n].neg(),
        data.c_inv(n),
        &data.c(n).neg(),
        &zero,
    );
    let tr0 = assemble2(
        &data.beta_r[n].neg(),
        &data.c(n).neg(),
        data.c_inv(n),
        &zero,
    );
    (
        MatrixPoly::from_coeffs(2 * dim, vec![tl0, lead.clone()]),
        MatrixPoly::from_coeffs(2 * dim, vec![tr0, lead]),
    )
}

/// ‖Y_L⁻¹ − J·Y_R·J⁻¹‖ together with the pointwise pairing corollaries
/// Q_L,n·P_R,n−1 − P_L,n·Q_R,n−1 = C_{n−1}⁻¹ (and its two companions).
pub fn inverse_relation_residual<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    rule: &QuadratureRule<R>,
    n: usize,
    z: Cplx<R>,
    clearance: f64,
) -> Result<f64, MoprhError> {
    let f = frame_eval(data, cache, rule, n, z, clearance)?;
    let inv = f.yl.inverse()?;
    let r1 = inv.dist_max(&j_conj(&f.yr)).to_f64();
    let pl_n = block(&f.yl, 0, 0);
    let ql_n = block(&f.yl, 0, 1);
    let pr_n = block(&f.yr, 0, 0);
    let qr_n = block(&f.yr, 1, 0);
    let dim = data.dim;
    let (pl_m, ql_m, pr_m, qr_m) = if n == 0 {
        let zero = CMatrix::zeros(dim);
        let mid = CMatrix::identity(dim).neg();
        (zero.clone(), mid.clone(), zero, mid)
    } else {
        let (ql, qr) = q_at(data, cache, rule, n as isize - 1, z, clearance)?;
        (data.deg[n - 1].pl.eval(z), ql, data.deg[n - 1].pr.eval(z), qr)
    };
    let cprev_inv = if n == 0 {
        CMatrix::identity(dim)
    } else {
        data.deg[n - 1].c_inv.clone()
    };
    let r2 = ql_n
        .mul(&pr_m)
        .sub(&pl_n.mul(&qr_m))
        .dist_max(&cprev_inv)
        .to_f64();
    let r3 = pl_m
        .mul(&qr_n)
        .sub(&ql_m.mul(&pr_n))
        .dist_max(&cprev_inv)
        .to_f64();
    let r4 = ql_n.mul(&pr_n).sub(&pl_n.mul(&qr_n)).norm_max().to_f64();
    Ok(r1.max(r2).max(r3).max(r4))
}

/// Max residual over the four Christoffel–Darboux identities
/// (z−t)·Σ_{k≤n} X_R,k(t)·C_k·Y_L,k(z) = X_R,n C_n Y_L,n+1 − X_R,n+1 C_n Y_L,n + b,
/// with boundary term b = 0 (PP), S_W(z) − S_W(t) (QQ), I (QP), −I (PQ),
/// plus the four confluent forms at t = z.
pub fn cd_residual<R: Real>(
    data: &RecurrenceData<R>,
    cache: &WeightCache<R>,
    rule: &QuadratureRule<R>,
    n: usize,
    z: Cplx<R>,
    t: Cplx<R>,
    clearance: f64,
) -> Result<f64, MoprhError> {
    let dim = data.dim;
    let id = CMatrix::identity(dim);
    let mut plz = Vec::new();
    let mut prz = Vec::new();
    let mut prt = Vec::new();
    let mut qlz = Vec::new();
    let mut qrz = Vec::new();
    let mut qrt = Vec::new();
    for k in 0..=n + 1 {
        plz.push(data.deg[k].pl.eval(z));
        prz.push(data.deg[k].pr.eval(z));
        prt.push(data.deg[k].pr.eval(t));
        let (ql, qr) = q_quadrature(data, cache, rule, k, z, clearance)?;
        qlz.push(ql);
        qrz.push(qr);
        let (_, qr) = q_quadrature(data, cache, rule, k, t, clearance)?;
        qrt.push(qr);
    }
    let cn = data.c(n);
    let pair = |a: &[CMatrix<R>], b: &[CMatrix<R>]| -> CMatrix<R> {
        let mut s = CMatrix::zeros(dim);
        for k in 0..=n {
            s = s.add(&a[k].mul(data.c(k)).mul(&b[k]));
        }
        let wrap = a[n].mul(cn).mul(&b[n + 1]).sub(&a[n + 1].mul(cn).mul(&b[n]));
        s.scale(z - t).sub(&wrap)
    };
    let rpp = pair(&prt, &plz).norm_max().to_f64();
    let rqq = pair(&qrt, &qlz)
        .sub(&qlz[0])
        .add(&qrt[0])
        .norm_max()
        .to_f64();
    let rqp = pair(&qrt, &plz).sub(&id).norm_max().to_f64();
    let rpq = pair(&prt, &qlz).add(&id).norm_max().to_f64();
    // confluent forms at t = z
    let conf = |a: &[CMatrix<R>], b: &[CMatrix<R>]| -> CMatrix<R> {
        a[n].mul(cn).mul(&b[n + 1]).sub(&a[n + 1].mul(cn).mul(&b[n]))
    };
    let cpp = conf(&prz, &plz).norm_max().to_f64();
    let cqq = conf(&qrz, &qlz).norm_max().to_f64();
    let cqp = conf(&qrz, &plz).add(&id).norm_max().to_f64();
    let cpq = conf(&prz, &qlz).sub(&id).norm_max().to_f64();
    Ok(rpp
        .max(rqq)
        .max(rqp)
        .max(rpq)
        .max(cpp)
        .max(cqq)
        .max(cqp)
        .max(cpq))
}

/// Residual of the constant jump conditions on the support,
/// (Z_L)₊ = (Z_L)₋·[[I, I],[0, I]] and (Z_R)₊ = [[I, 0],[I, I]]·(Z_R)₋,
/// at the contour point z(t0), via ±ε normal offsets and two-point Richardson
/// extrapolation (eps.0 = 2·eps.1). The Cauchy columns are integrated on rules
/// graded toward t0 in the unit-prefactor normalization the jump is stated in.
pub fn constant_jump_residual<R: Real>(
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
    let zero = CMatrix::zeros(dim);
    let pl_n = &data.deg[n].pl;
    let pr_n = &data.deg[n].pr;
    let zero_poly = MatrixPoly::zero(dim);
    let (pl_m, pr_m) = if n == 0 {
        (&zero_poly, &zero_poly)
    } else {
        (&data.deg[n - 1].pl, &data.deg[n - 1].pr)
    };
    let cprev = data.c_prev(n);
    let frames_at = |e: f64| -> Result<[CMatrix<R>; 4], MoprhError> {
        let fine = e / speed.to_f64();
        let g = build_rule_graded(contour, t0, fine, 16, Normalization::Cauchy)?;
        let ws: Vec<CMatrix<R>> = g
            .nodes
            .iter()
            .map(|&zp| cache.weight_at(zp))
            .collect::<Result<_, _>>()?;
        let q = |z0: Cplx<R>, p: &MatrixPoly<R>, left: bool| -> CMatrix<R> {
            if p.is_zero() {
                // degree −1 companion: Q_{−1} = −I, no jump
                return CMatrix::identity(dim).neg();
            }
            g.integrate(dim, |j, zp| {
                let k = (zp - z0).inv();
                if left {
                    p.eval(zp).mul(&ws[j]).scale(k)
                } else {
                    ws[j].mul(&p.eval(zp)).scale(k)
                }
            })
        };
        let q_m = |z0: Cplx<R>, p: &MatrixPoly<R>, left: bool| -> CMatrix<R> {
            if n == 0 {
                CMatrix::identity(dim).neg()
            } else {
                q(z0, p, left)
            }
        };
        let mut out = Vec::with_capacity(4);
        for &sgn in &[1.0, -1.0] {
            let z0 = x + normal.scale(R::from_f64(sgn * e));
            let (wl, wr, _) = cache.factors_at(z0)?;
            let yl = assemble2(
                &pl_n.eval(z0),
                &q(z0, pl_n, true),
                &cprev.mul(&pl_m.eval(z0)).neg(),
                &cprev.mul(&q_m(z0, pl_m, true)).neg(),
            );
            let yr = assemble2(
                &pr_n.eval(z0),
                &pr_m.eval(z0).mul(&cprev).neg(),
                &q(z0, pr_n, false),
                &q_m(z0, pr_m, false).mul(&cprev).neg(),
            );
            out.push(yl.mul(&assemble2(&wl, &zero, &zero, &wr.inverse()?)));
            out.push(assemble2(&wr, &zero, &zero, &wl.inverse()?).mul(&yr));
        }
        Ok([
            out[0].clone(),
            out[1].clone(),
            out[2].clone(),
            out[3].clone(),
        ])
    };
    let id = CMatrix::identity(dim);
    let jump_l = assemble2(&id, &id, &zero, &id);
    let jump_r = assemble2(&id, &zero, &id, &id);
    let defect = |f: &[CMatrix<R>; 4]| -> (CMatrix<R>, CMatrix<R>) {
        (
            f[0].sub(&f[2].mul(&jump_l)),
            f[1].sub(&jump_r.mul(&f[3])),
        )
    };
    let f1 = frames_at(eps.0)?;
    let f2 = frames_at(eps.1)?;
    let (dl1, dr1) = defect(&f1);
    let (dl2, dr2) = defect(&f2);
    let two = Cplx::from_f64(2.0, 0.0);
    let rl = dl2.scale(two).sub(&dl1).norm_max().to_f64();
    let rr = dr2.scale(two).sub(&dr1).norm_max().to_f64();
    Ok(rl.max(rr))
}

/// Pearson shapes whose structure matrices have displayed closed forms.
#[derive(Clone, Debug)]
pub enum Family<R: Real> {
    /// h_L = A_L z + B_L, h_R = A_R z + B_R.
    Linear {
        al: CMatrix<R>,
        bl: CMatrix<R>,
        ar: CMatrix<R>,
        br: CMatrix<R>,
    },
    /// h_L = λ + μz + νz², h_R = 0.
    Quadratic {
        lam: CMatrix<R>,
        mu: CMatrix<R>,
        nu: CMatrix<R>,
    },
    /// h_L = μz + νz³ (odd, so the weight is even), h_R = 0.
    CubicOdd { mu: CMatrix<R>, nu: CMatrix<R> },
}

pub fn detect_family<R: Real>(spec: &PearsonSpec<R>) -> Option<Family<R>> {
    let dl = spec.h_left.degree().unwrap_or(0);
    let dr = spec.h_right.degree().unwrap_or(0);
    if dl <= 1 && dr <= 1 {
        return Some(Family::Linear {
            al: spec.h_left.coeff(1),
            bl: spec.h_left.coeff(0),
            ar: spec.h_right.coeff(1),
            br: spec.h_right.coeff(0),
        });
    }
    if !spec.h_right.is_zero() {
        return None;
    }
    if dl == 2 {
        return Some(Family::Quadratic {
            lam: spec.h_left.coeff(0),
            mu: spec.h_left.coeff(1),
            nu: spec.h_left.coeff(2),
        });
    }
    let zero = R::zero();
    if dl == 3
        && spec.h_left.coeff(0).norm_max() == zero
        && spec.h_left.coeff(2).norm_max() == zero
    {
        return Some(Family::CubicOdd {
            mu: spec.h_left.coeff(1),
            nu: spec.h_left.coeff(3),
        });
    }
    None
}

/// p^k of the monic left polynomial of degree n (p⁰ = I).
fn pk_l<R: Real>(data: &RecurrenceData<R>, n: usize, k: usize) -> CMatrix<R> {
    if k == 0 {
        CMatrix::identity(data.dim)
    } else {
        data.deg[n].p_l[k - 1].clone()
    }
}

fn pk_r<R: Real>(data: &RecurrenceData<R>, n: usize, k: usize) -> CMatrix<R> {
    if k == 0 {
        CMatrix::identity(data.dim)
    } else {
        data.deg[n].p_r[k - 1].clone()
    }
}

fn qk_l<R: Real>(data: &RecurrenceData<R>, n: usize, k: usize) -> CMatrix<R> {
    if k == 0 {
        CMatrix::identity(data.dim)
    } else {
        data.deg[n].q_l[k - 1].clone()
    }
}

fn qk_r<R: Real>(data: &RecurrenceData<R>, n: usize, k: usize) -> CMatrix<R> {
    if k == 0 {
        CMatrix::identity(data.dim)
    } else {
        data.deg[n].q_r[k - 1].clone()
    }
}

/// z^{−k} coefficient of the normalized left frame S_L,n = Y_L,n·diag(z^{−n}, z^n);
/// the bottom row vanishes at n = 0 because the degree −1 rows are constant.
fn s_coeff_left<R: Real>(data: &RecurrenceData<R>, n: usize, k: usize) -> CMatrix<R> {
    let dim = data.dim;
    let zero = CMatrix::zeros(dim);
    let tl = pk_l(data, n, k);
    let tr = data.c_inv(n).mul(&qk_l(data, n, k - 1)).neg();
    let (bl, br) = if n == 0 {
        (zero.clone(), zero)
    } else {
        (
            data.c(n - 1).mul(&pk_l(data, n - 1, k - 1)).neg(),
            qk_l(data, n - 1, k),
        )
    };
    assemble2(&tl, &tr, &bl, &br)
}

/// Right analogue for S_R,n = diag(z^{−n}, z^n)·Y_R,n.
fn s_coeff_right<R: Real>(data: &RecurrenceData<R>, n: usize, k: usize) -> CMatrix<R> {
    let dim = data.dim;
    let zero = CMatrix::zeros(dim);
    let tl = pk_r(data, n, k);
    let bl = qk_r(data, n, k - 1).mul(data.c_inv(n)).neg();
    let (tr, br) = if n == 0 {
        (zero.clone(), zero)
    } else {
        (
            pk_r(data, n - 1, k - 1).mul(data.c(n - 1)).neg(),
            qk_r(data, n - 1, k),
        )
    };
    assemble2(&tl, &tr, &bl, &br)
}

/// Closed-form M_L for the recognized families, n ≥ 1 (at n = 0 the frame rows
/// degenerate and the displayed blocks do not apply).
fn closed_form<R: Real>(
    data: &RecurrenceData<R>,
    fam: &Family<R>,
    n: usize,
) -> Option<MatrixPoly<R>> {
    if n == 0 {
        return None;
    }
    let dim = data.dim;
    let zero = CMatrix::zeros(dim);
    let ci = data.c_inv(n);
    let cprev = data.c_prev(n);
    let p1 = pk_l(data, n, 1);
    match fam {
        Family::Linear { al, bl, ar, br } => {
            let q1m = qk_l(data, n - 1, 1);
            let k11 = bl.add(&commutator(&p1, al));
            let k12 = ci.mul(ar).add(&al.mul(ci));
            let k21 = cprev.mul(al).add(&ar.mul(&cprev)).neg();
            let k22 = br.add(&commutator(&q1m, ar)).neg();
            let lead = assemble2(al, &zero, &zero, &ar.neg());
            Some(MatrixPoly::from_coeffs(
                2 * dim,
                vec![assemble2(&k11, &k12, &k21, &k22), lead],
            ))
        }
        Family::Quadratic { lam, mu, nu } => {
            let beta = data.beta_l.get(n)?;
            let p1m = pk_l(data, n - 1, 1);
            let p2 = pk_l(data, n, 2);
            let m2 = assemble2(nu, &zero, &zero, &zero);
            let m1 = assemble2(
                &mu.sub(&commutator(nu, &p1)),
                &nu.mul(ci),
                &cprev.mul(nu).neg(),
                &zero,
            );
            let m0_11 = lam
                .sub(&commutator(mu, &p1))
                .sub(&commutator(nu, &p2))
                .add(&nu.mul(&p1).mul(&p1))
                .sub(&p1.mul(nu).mul(&p1))
                .add(&nu.mul(ci).mul(&cprev));
            let m0_12 = mu
                .sub(&commutator(nu, &p1))
                .add(&nu.mul(beta))
                .mul(ci);
            let m0_21 = cprev
                .mul(&mu.add(&p1m.mul(nu)).sub(&nu.mul(&p1)))
                .neg();
            let m0_22 = cprev.mul(nu).mul(ci).neg();
            Some(MatrixPoly::from_coeffs(
                2 * dim,
                vec![assemble2(&m0_11, &m0_12, &m0_21, &m0_22), m1, m2],
            ))
        }
        Family::CubicOdd { mu, nu } => {
            if n + 1 >= data.deg.len() {
                return None;
            }
            let p2 = pk_l(data, n, 2);
            let p2m = pk_l(data, n - 1, 2);
            let xi = |p2x: &CMatrix<R>, gsum: CMatrix<R>| -> CMatrix<R> {
                mu.add(&commutator(p2x, nu)).add(&nu.mul(&gsum))
            };
            // γ_m with the γ_0 = 0 convention (the C-product form first holds at m = 1)
            let gamma = |m: usize| -> CMatrix<R> {
                if m == 0 {
                    CMatrix::zeros(dim)
                } else {
                    data.c_inv(m).mul(data.c(m - 1))
                }
            };
            let gn = gamma(n).add(&gamma(n + 1));
            let gm = gamma(n - 1).add(&gamma(n));
            let m3 = assemble2(nu, &zero, &zero, &zero);
            let m2c = assemble2(&zero, &nu.mul(ci), &cprev.mul(nu).neg(), &zero);
            let m1 = assemble2(
                &mu.add(&commutator(&p2, nu)).add(&nu.mul(ci).mul(&cprev)),
                &zero,
                &zero,
                &cprev.mul(nu).mul(ci).neg(),
            );
            let m0 = assemble2(
                &zero,
                &xi(&p2, gn).mul(ci),
                &cprev.mul(&xi(&p2m, gm)).neg(),
                &zero,
            );
            Some(MatrixPoly::from_coeffs(2 * dim, vec![m0, m1, m2c, m3]))
        }
    }
}

#[derive(Clone, Debug)]
pub struct StructureMatrix<R: Real> {
    pub n: usize,
    /// (S_L·diag(h_L, −h_R)·S_L⁻¹)₊ — polynomial of degree max(deg h_L, deg h_R).
    pub ml: MatrixPoly<R>,
    /// (S_R⁻¹·diag(h_R, −h_L)·S_R)₊ = −J·ml·J⁻¹.
    pub mr: MatrixPoly<R>,
    /// Closed-form ml when the Pearson shape is recognized (n ≥ 1), and its
    /// coefficientwise distance from the generic expansion.
    pub ml_closed: Option<MatrixPoly<R>>,
    pub closed_dist: Option<f64>,
}

/// Structure matrices from the positive part of the dressed S-expansion; the
/// carried expansion order suffices exactly for deg h ≤ 3.
pub fn structure_matrix<R: Real>(
    data: &RecurrenceData<R>,
    spec: &PearsonSpec<R>,
    n: usize,
) -> Result<StructureMatrix<R>, MoprhError> {
    let dim = data.dim;
    let degh = spec
        .h_left
        .degree()
        .unwrap_or(0)
        .max(spec.h_right.degree().unwrap_or(0));
    if degh > EXPANSION_ORDER {
        return Err(MoprhError::TruncationOrder {
            have: EXPANSION_ORDER,
            need: degh,
        });
    }
    let embed = |a: &MatrixPoly<R>, d: &MatrixPoly<R>| -> MatrixPoly<R> {
        let zero = MatrixPoly::zero(dim);
        assemble2_poly(a, &zero, &zero, &d.neg())
    };
    let sl = LaurentBlock::one_plus_negatives(
        2 * dim,
        (1..=EXPANSION_ORDER).map(|k| s_coeff_left(data, n, k)).collect(),
    );
    let sl_inv = series_inverse(&sl, EXPANSION_ORDER)?;
    let hl = LaurentBlock::from_poly(embed(&spec.h_left, &spec.h_right));
    let ml = sl.mul(&hl).mul(&sl_inv).positive_part();
    let sr = LaurentBlock::one_plus_negatives(
        2 * dim,
        (1..=EXPANSION_ORDER).map(|k| s_coeff_right(data, n, k)).collect(),
    );
    let sr_inv = series_inverse(&sr, EXPANSION_ORDER)?;
    let hr = LaurentBlock::from_poly(embed(&spec.h_right, &spec.h_left));
    let mr = sr_inv.mul(&hr).mul(&sr).positive_part();
    let ml_closed = detect_family(spec).and_then(|f| closed_form(data, &f, n));
    let closed_dist = ml_closed.as_ref().map(|m| m.dist_max(&ml).to_f64());
    Ok(StructureMatrix {
        n,
        ml,
        mr,
        ml_closed,
        closed_dist,
    })
}

/// Max coefficientwise residual over the zero curvature identities at n:
/// first order [[I,0],[0,0]] = M_{n+1}T_n − T_nM_n (left) and
/// T_nM_{n+1} − M_nT_n (right), the second-order squares, and the order-ℓ
/// products T_{n,ℓ} with (T_{n,ℓ})′ = M_{n+ℓ+1}T_{n,ℓ} − T_{n,ℓ}M_n.
pub fn zero_curvature_residual<R: Real>(
    data: &RecurrenceData<R>,
    spec: &PearsonSpec<R>,
    n: usize,
    ell: usize,
) -> Result<f64, MoprhError> {
    let dim = data.dim;
    let zero = CMatrix::zeros(dim);
    let id = CMatrix::identity(dim);
    let e = MatrixPoly::constant(assemble2(&id, &zero, &zero, &zero));
    let top = n + ell + 1;
    let mut ml = Vec::new();
    let mut mr = Vec::new();
    for m in n..=top {
        let s = structure_matrix(data, spec, m)?;
        ml.push(s.ml);
        mr.push(s.mr);
    }
    let ts: Vec<(MatrixPoly<R>, MatrixPoly<R>)> = (n..=n + ell).map(|m| transfer(data, m)).collect();
    let mut worst = 0.0f64;
    let mut push = |p: MatrixPoly<R>| {
        worst = worst.max(p.norm_max().to_f64());
    };
    let (tl, tr) = &ts[0];
    push(ml[1].mul(tl).sub(&tl.mul(&ml[0])).sub(&e));
    push(tr.mul(&mr[1]).sub(&mr[0].mul(tr)).sub(&e));
    // second order
    let ml1_sq = ml[1].mul(&ml[1]);
    let ml0_sq = ml[0].mul(&ml[0]);
    push(
        ml1_sq
            .mul(tl)
            .sub(&tl.mul(&ml0_sq))
            .sub(&e.mul(&ml[0]))
            .sub(&ml[1].mul(&e)),
    );
    let mr1_sq = mr[1].mul(&mr[1]);
    let mr0_sq = mr[0].mul(&mr[0]);
    push(
        tr.mul(&mr1_sq)
            .sub(&mr0_sq.mul(tr))
            .sub(&e.mul(&mr[1]))
            .sub(&mr[0].mul(&e)),
    );
    // order-ℓ products: T_{L,n,ℓ} = T_{n+ℓ}···T_n, T_{R,n,ℓ} = T_n···T_{n+ℓ}
    let mut tprod_l = ts[0].0.clone();
    let mut tprod_r = ts[0].1.clone();
    for t in &ts[1..] {
        tprod_l = t.0.mul(&tprod_l);
        tprod_r = tprod_r.mul(&t.1);
    }
    push(
        tprod_l
            .derivative()
            .sub(&ml[ell + 1].mul(&tprod_l))
            .add(&tprod_l.mul(&ml[0])),
    );
    push(
        tprod_r
            .derivative()
            .sub(&tprod_r.mul(&mr[ell + 1]))
            .add(&mr[0].mul(&tprod_r)),
    );
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secondkind::JUMP_EPS;
    use crate::testkit;

    fn z(re: f64, im: f64) -> Cplx<f64> {
        Cplx::from_f64(re, im)
    }

    #[test]
    fn initial_frame_and_determinant() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 5);
        let f = frame_eval(&p.data, &p.cache, &p.rule, 0, z(0.0, 2.0), 0.1).unwrap();
        // bottom row of Y_L,0 is (0, I); top row (I, S_W)
        assert!(block(&f.yl, 0, 0).dist_max(&CMatrix::identity(1)) < 1e-14);
        assert!(block(&f.yl, 1, 0).norm_max() < 1e-14);
        assert!(block(&f.yl, 1, 1).dist_max(&CMatrix::identity(1)) < 1e-14);
        assert!((f.det_yl - Cplx::from_f64(1.0, 0.0)).abs() < 1e-10);
        let f3 = frame_eval(&p.data, &p.cache, &p.rule, 3, z(2.0, 1.0), 0.1).unwrap();
        assert!((f3.det_yl - Cplx::from_f64(1.0, 0.0)).abs() < 1e-9);
    }

    #[test]
    fn transfer_consistency_and_determinant() {
        let p = testkit::hermite_2x2(0.8, Normalization::Cauchy, 5);
        let z0 = z(1.0, 2.0);
        for n in 0..4 {
            let f = frame_eval(&p.data, &p.cache, &p.rule, n, z0, 0.1).unwrap();
            let f1 = frame_eval(&p.data, &p.cache, &p.rule, n + 1, z0, 0.1).unwrap();
            let (tl, tr) = transfer(&p.data, n);
            assert!(tl.eval(z0).mul(&f.yl).dist_max(&f1.yl) < 1e-8, "left n={n}");
            assert!(f.yr.mul(&tr.eval(z0)).dist_max(&f1.yr) < 1e-8, "right n={n}");
            for &s in &[z(0.3, 0.0), z(-1.2, 0.4), z(0.0, 2.0), z(2.5, -1.0), z(0.7, 0.7)] {
                let d = tl.eval(s).det().unwrap();
                assert!((d - Cplx::from_f64(1.0, 0.0)).abs() < 1e-10);
            }
            // T_R = D·T_L·D⁻¹ with D = diag(C_n, −C_n⁻¹)
            let dmat = assemble2(
                p.data.c(n),
                &CMatrix::zeros(2),
                &CMatrix::zeros(2),
                &p.data.c_inv(n).neg(),
            );
            let dinv = dmat.inverse().unwrap();
            let sim = MatrixPoly::from_coeffs(
                4,
                tl.coeffs.iter().map(|c| dmat.mul(c).mul(&dinv)).collect(),
            );
            assert!(sim.dist_max(&tr) < 1e-10);
        }
    }

    #[test]
    fn scalar_transfer_entries() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 3);
        let (tl, _) = transfer(&p.data, 1);
        let c1 = p.data.c(1)[(0, 0)];
        let t0 = tl.coeff(0);
        assert!(t0[(0, 0)].abs() < 1e-10); // β_1 = 0
        assert!((t0[(0, 1)] - c1.inv()).abs() < 1e-12);
        assert!((t0[(1, 0)] + c1).abs() < 1e-12);
        assert!(t0[(1, 1)].abs() == 0.0);
    }

    #[test]
    fn inverse_relation_and_corollaries() {
        let p = testkit::scalar_gauss(Normalization::Plain, 5);
        assert!(
            inverse_relation_residual(&p.data, &p.cache, &p.rule, 0, z(0.0, 3.0), 0.1).unwrap()
                < 1e-10
        );
        assert!(
            inverse_relation_residual(&p.data, &p.cache, &p.rule, 4, z(0.0, 3.0), 0.1).unwrap()
                < 1e-8
        );
        let h = testkit::hermite_2x2(0.8, Normalization::Cauchy, 5);
        for n in [1usize, 3] {
            let r =
                inverse_relation_residual(&h.data, &h.cache, &h.rule, n, z(1.5, 1.0), 0.1).unwrap();
            assert!(r < 1e-7, "n={n}: {r:.3e}");
        }
    }

    #[test]
    fn christoffel_darboux_identities() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 5);
        let r = cd_residual(
            &p.data,
            &p.cache,
            &p.rule,
            3,
            z(0.5, 0.6),
            z(-0.2, -0.8),
            0.1,
        )
        .unwrap();
        assert!(r < 1e-8, "{r:.3e}");
        let h = testkit::hermite_2x2(0.6, Normalization::Plain, 4);
        let r = cd_residual(&h.data, &h.cache, &h.rule, 2, z(0.4, 1.0), z(-1.0, 0.7), 0.1).unwrap();
        assert!(r < 1e-7, "{r:.3e}");
        // n = 0 PP is a single-term telescoping
        let r = cd_residual(&p.data, &p.cache, &p.rule, 0, z(0.5, 0.9), z(-0.3, 1.1), 0.1).unwrap();
        assert!(r < 1e-9, "{r:.3e}");
    }

    #[test]
    fn constant_jump_on_support() {
        let p = testkit::scalar_gauss(Normalization::Plain, 3);
        let r = constant_jump_residual(&p.data, &p.cache, 2, 0.4, JUMP_EPS).unwrap();
        assert!(r < 1e-4, "{r:.3e}");
        // n = 0: only the S_W column jumps; tighter offsets reach the example contract
        let r0 = constant_jump_residual(&p.data, &p.cache, 0, 0.4, (2e-3, 1e-3)).unwrap();
        assert!(r0 < 1e-5, "{r0:.3e}");
    }

    #[test]
    fn structure_matrix_linear_family() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 5);
        for n in 1..=4 {
            let s = structure_matrix(&p.data, &p.spec, n).unwrap();
            assert!(s.closed_dist.unwrap() < 1e-10, "n={n}");
            assert_eq!(s.ml.degree(), Some(1));
            // scalar Gaussian: constant off-diagonal product is −4γ_n = −2n
            let prod = s.ml.coeff(0)[(0, 1)] * s.ml.coeff(0)[(1, 0)];
            assert!((prod.re + 2.0 * n as f64).abs() < 1e-8, "n={n}");
            assert!(prod.im.abs() < 1e-10);
            // right structure matrix is the negated J-conjugate of the left one
            assert!(j_conj_poly(&s.ml).neg().dist_max(&s.mr) < 1e-9);
        }
        let h = testkit::hermite_2x2(0.8, Normalization::Plain, 5);
        for n in 1..=4 {
            let s = structure_matrix(&h.data, &h.spec, n).unwrap();
            assert!(s.closed_dist.unwrap() < 1e-8, "n={n}: {:?}", s.closed_dist);
            assert!(j_conj_poly(&s.ml).neg().dist_max(&s.mr) < 1e-9);
        }
    }

    #[test]
    fn structure_matrix_quadratic_family() {
        let p = testkit::airy_scalar(0.5, Normalization::Cauchy, 5);
        for n in 1..=4 {
            let s = structure_matrix(&p.data, &p.spec, n).unwrap();
            assert!(
                s.closed_dist.unwrap() < 1e-8,
                "n={n}: {:?}",
                s.closed_dist
            );
            assert_eq!(s.ml.degree(), Some(2));
            assert!(j_conj_poly(&s.ml).neg().dist_max(&s.mr) < 1e-9);
        }
        let q = testkit::airy_2x2(0.4, 0.5, Normalization::Cauchy, 4);
        for n in 1..=3 {
            let s = structure_matrix(&q.data, &q.spec, n).unwrap();
            assert!(
                s.closed_dist.unwrap() < 1e-8,
                "2x2 n={n}: {:?}",
                s.closed_dist
            );
        }
    }

    #[test]
    fn structure_matrix_cubic_family() {
        let p = testkit::quartic_onesided_scalar(0.5, Normalization::Cauchy, 5);
        for n in 1..=4 {
            let s = structure_matrix(&p.data, &p.spec, n).unwrap();
            assert!(
                s.closed_dist.unwrap() < 1e-8,
                "n={n}: {:?}",
                s.closed_dist
            );
            assert_eq!(s.ml.degree(), Some(3));
            assert!(j_conj_poly(&s.ml).neg().dist_max(&s.mr) < 1e-9);
        }
        let q = testkit::quartic_onesided_2x2(0.4, 0.5, Normalization::Plain, 4);
        for n in 1..=3 {
            let s = structure_matrix(&q.data, &q.spec, n).unwrap();
            assert!(
                s.closed_dist.unwrap() < 1e-8,
                "2x2 n={n}: {:?}",
                s.closed_dist
            );
        }
    }

    #[test]
    fn expansion_coefficient_differences() {
        // the crossed relations: q¹ differences of one family give the other
        // family's recursion shift
        let h = testkit::hermite_2x2(0.8, Normalization::Cauchy, 5);
        let d = &h.data;
        for n in 1..=4 {
            let ql = qk_l(d, n, 1).sub(&qk_l(d, n - 1, 1));
            assert!(ql.dist_max(&d.beta_r[n]) < 1e-9, "left q¹ diff n={n}");
            let qr = qk_r(d, n, 1).sub(&qk_r(d, n - 1, 1));
            assert!(qr.dist_max(&d.beta_l[n]) < 1e-9, "right q¹ diff n={n}");
            let pl = pk_l(d, n, 1).sub(&pk_l(d, n + 1, 1));
            assert!(pl.dist_max(&d.beta_l[n]) < 1e-9, "left p¹ diff n={n}");
            let pr = pk_r(d, n, 1).sub(&pk_r(d, n + 1, 1));
            assert!(pr.dist_max(&d.beta_r[n]) < 1e-9, "right p¹ diff n={n}");
        }
    }

    #[test]
    fn zero_curvature_coefficientwise() {
        let p = testkit::scalar_gauss(Normalization::Cauchy, 6);
        assert!(zero_curvature_residual(&p.data, &p.spec, 2, 0).unwrap() < 1e-9);
        assert!(zero_curvature_residual(&p.data, &p.spec, 2, 2).unwrap() < 1e-8);
        let h = testkit::hermite_2x2(0.8, Normalization::Plain, 6);
        for n in 1..=3 {
            let r = zero_curvature_residual(&h.data, &h.spec, n, 2).unwrap();
            assert!(r < 1e-8, "hermite n={n}: {r:.3e}");
        }
        let q = testkit::quartic_onesided_scalar(0.5, Normalization::Cauchy, 6);
        let r = zero_curvature_residual(&q.data, &q.spec, 1, 3).unwrap();
        assert!(r < 1e-8, "quartic: {r:.3e}");
        let a = testkit::airy_scalar(0.5, Normalization::Cauchy, 6);
        let r = zero_curvature_residual(&a.data, &a.spec, 1, 2).unwrap();
        assert!(r < 1e-8, "airy: {r:.3e}");
    }

    #[test]
    fn zero_curvature_detects_perturbation() {
        let mut p = testkit::scalar_gauss(Normalization::Cauchy, 6);
        let scale = Cplx::from_f64(1.01, 0.0);
        p.data.deg[2].c = p.data.deg[2].c.scale(scale);
        p.data.deg[2].c_inv = p.data.deg[2].c.inverse().unwrap();
        let r = zero_curvature_residual(&p.data, &p.spec, 2, 0).unwrap();
        assert!(r > 1e-3, "{r:.3e}");
    }
}
