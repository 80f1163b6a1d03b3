//! Monic left/right biorthogonal pairs from the moment table, the
//! normalization blocks C_n, and the three-term recursion coefficients.
//!
//! All solves go through one dense block-Hankel system per degree; with
//! n ≤ 20 and N ≤ 8 transparency beats asymptotics.

use crate::contour::{decay_check, moment, Normalization, QuadratureRule};
use crate::error::MoprhError;
use crate::mxcore::matrix::CMatrix;
use crate::mxcore::poly::MatrixPoly;
use crate::mxcore::solve::{solve_block_col, solve_block_row};
use crate::scalar::{Cplx, Real};
use crate::weights::WeightCache;

#[derive(Clone, Debug)]
pub struct MomentTable<R: Real> {
    pub dim: usize,
    /// w[k] = moment of order k, single normalization throughout.
    pub w: Vec<CMatrix<R>>,
    pub normalization: Normalization,
}

impl<R: Real> MomentTable<R> {
    pub fn k_max(&self) -> usize {
        self.w.len() - 1
    }

    pub fn moment(&self, k: usize) -> &CMatrix<R> {
        &self.w[k]
    }

    /// ∫ P(z) W(z) z^j dz for a left polynomial (coefficients multiply W from the left).
    pub fn pair_left(&self, p: &MatrixPoly<R>, j: usize) -> CMatrix<R> {
        let mut acc = CMatrix::zeros(self.dim);
        for (k, c) in p.coeffs.iter().enumerate() {
            acc = acc.add(&c.mul(&self.w[k + j]));
        }
        acc
    }

    /// ∫ W(z) P(z) z^j dz for a right polynomial (coefficients multiply W from the right).
    pub fn pair_right(&self, p: &MatrixPoly<R>, j: usize) -> CMatrix<R> {
        let mut acc = CMatrix::zeros(self.dim);
        for (k, c) in p.coeffs.iter().enumerate() {
            acc = acc.add(&self.w[k + j].mul(c));
        }
        acc
    }

    /// ∫ P(z) W(z) Q(z) dz for a left/right pair.
    pub fn pair_both(&self, p: &MatrixPoly<R>, q: &MatrixPoly<R>) -> CMatrix<R> {
        let mut acc = CMatrix::zeros(self.dim);
        for (k, a) in p.coeffs.iter().enumerate() {
            for (j, b) in q.coeffs.iter().enumerate() {
                acc = acc.add(&a.mul(&self.w[k + j]).mul(b));
            }
        }
        acc
    }
}

/// Moments W_0..W_K of the cached weight; gated on endpoint decay.
pub fn build_moments<R: Real>(
    cache: &WeightCache<R>,
    rule: &QuadratureRule<R>,
    k_max: usize,
) -> Result<MomentTable<R>, MoprhError> {
    let decay = decay_check(
        |z| {
            cache
                .weight_at(z)
                .unwrap_or_else(|_| CMatrix::identity(cache.dim()))
        },
        rule,
        k_max.min(4),
    );
    if !decay.pass {
        return Err(MoprhError::DecayFailure {
            norm: decay.max_endpoint_norm,
        });
    }
    let dim = cache.dim();
    let w = (0..=k_max)
        .map(|k| moment(k, dim, |j, _| cache.w_at_node(j).2.clone(), rule))
        .collect();
    Ok(MomentTable {
        dim,
        w,
        normalization: rule.normalization,
    })
}

/// Monic left polynomial of degree n and C_n^{-1}; errors on numerical
/// regularity failure (block-Hankel condition estimate above threshold).
pub fn solve_left<R: Real>(
    table: &MomentTable<R>,
    n: usize,
) -> Result<(MatrixPoly<R>, CMatrix<R>, f64), MoprhError> {
    let dim = table.dim;
    if n == 0 {
        return Ok((MatrixPoly::identity(dim), table.w[0].clone(), 1.0));
    }
    // Σ_j a_j W_{j+k} = −W_{n+k}, k < n, then PL_n = z^n + Σ a_j z^j
    let h: Vec<Vec<CMatrix<R>>> = (0..n)
        .map(|j| (0..n).map(|k| table.w[j + k].clone()).collect())
        .collect();
    let rhs: Vec<CMatrix<R>> = (0..n).map(|k| table.w[n + k].neg()).collect();
    let (a, rep) = solve_block_row(&h, &rhs)?;
    if rep.cond_estimate > R::regularity_threshold() {
        return Err(MoprhError::RegularityFailure {
            n,
            cond: rep.cond_estimate,
        });
    }
    let mut coeffs = a;
    coeffs.push(CMatrix::identity(dim));
    let pl = MatrixPoly::from_coeffs(dim, coeffs);
    let c_inv = table.pair_left(&pl, n);
    Ok((pl, c_inv, rep.cond_estimate))
}

/// Mirror of [`solve_left`] with blocks multiplying on the other side.
pub fn solve_right<R: Real>(
    table: &MomentTable<R>,
    n: usize,
) -> Result<(MatrixPoly<R>, CMatrix<R>, f64), MoprhError> {
    let dim = table.dim;
    if n == 0 {
        return Ok((MatrixPoly::identity(dim), table.w[0].clone(), 1.0));
    }
    let h: Vec<Vec<CMatrix<R>>> = (0..n)
        .map(|k| (0..n).map(|j| table.w[k + j].clone()).collect())
        .collect();
    let rhs: Vec<CMatrix<R>> = (0..n).map(|k| table.w[n + k].neg()).collect();
    let (b, rep) = solve_block_col(&h, &rhs)?;
    if rep.cond_estimate > R::regularity_threshold() {
        return Err(MoprhError::RegularityFailure {
            n,
            cond: rep.cond_estimate,
        });
    }
    let mut coeffs = b;
    coeffs.push(CMatrix::identity(dim));
    let pr = MatrixPoly::from_coeffs(dim, coeffs);
    let c_inv = table.pair_right(&pr, n);
    Ok((pr, c_inv, rep.cond_estimate))
}

/// Number of large-|z| expansion coefficients p^k, q^k carried per degree.
pub const EXPANSION_ORDER: usize = 3;

/// Moments needed to build [`RecurrenceData`] through n_max.
pub fn moments_needed(n_max: usize) -> usize {
    2 * (n_max + 1) + EXPANSION_ORDER + 1
}

#[derive(Clone, Debug)]
pub struct DegreeData<R: Real> {
    pub pl: MatrixPoly<R>,
    pub pr: MatrixPoly<R>,
    /// C_n^{-1} (the biorthogonality normalization) and its inverse C_n.
    pub c_inv: CMatrix<R>,
    pub c: CMatrix<R>,
    pub cond: f64,
    /// p^k = coefficient of z^{n−k} in the monic polynomial, k = 1..=EXPANSION_ORDER.
    pub p_l: Vec<CMatrix<R>>,
    pub p_r: Vec<CMatrix<R>>,
    /// q^k from the second-kind expansion −C_n^{-1}(z^{−n−1} + q¹z^{−n−2} + …).
    pub q_l: Vec<CMatrix<R>>,
    pub q_r: Vec<CMatrix<R>>,
}

#[derive(Clone, Debug)]
pub struct RecurrenceData<R: Real> {
    pub dim: usize,
    /// β, γ are populated for n ≤ n_max; degree data runs through n_max+1.
    pub n_max: usize,
    pub deg: Vec<DegreeData<R>>,
    pub beta_l: Vec<CMatrix<R>>,
    pub beta_r: Vec<CMatrix<R>>,
    /// γ_0 = 0 by convention.
    pub gamma_l: Vec<CMatrix<R>>,
    pub gamma_r: Vec<CMatrix<R>>,
    /// Largest degree whose Hankel solve succeeded (data truncated there on failure).
    pub regular_through: usize,
    pub complete: bool,
}

impl<R: Real> RecurrenceData<R> {
    pub fn c(&self, n: usize) -> &CMatrix<R> {
        &self.deg[n].c
    }
    pub fn c_inv(&self, n: usize) -> &CMatrix<R> {
        &self.deg[n].c_inv
    }
    /// C_{n−1} with the C_{−1} = I convention.
    pub fn c_prev(&self, n: usize) -> CMatrix<R> {
        if n == 0 {
            CMatrix::identity(self.dim)
        } else {
            self.deg[n - 1].c.clone()
        }
    }
}

/// Solve every degree through n_max+1 and assemble recursion data.
/// On a regularity failure partial data is returned with `complete = false`.
pub fn recurrence<R: Real>(
    table: &MomentTable<R>,
    n_max: usize,
) -> Result<RecurrenceData<R>, MoprhError> {
    let dim = table.dim;
    let top = n_max + 1;
    if table.k_max() < 2 * top + EXPANSION_ORDER {
        return Err(MoprhError::TruncationOrder {
            have: table.k_max(),
            need: 2 * top + EXPANSION_ORDER,
        });
    }
    let mut deg: Vec<DegreeData<R>> = Vec::with_capacity(top + 1);
    let mut regular_through = 0usize;
    let mut complete = true;
    for n in 0..=top {
        let left = solve_left(table, n);
        let right = solve_right(table, n);
        let (pl, c_inv, cond) = match left {
            Ok(v) => v,
            Err(_) => {
                complete = false;
                break;
            }
        };
        let (pr, c_inv_r, _) = match right {
            Ok(v) => v,
            Err(_) => {
                complete = false;
                break;
            }
        };
        if c_inv.dist_max(&c_inv_r).to_f64() > 1e-9 * (1.0 + c_inv.norm_max().to_f64()) {
            return Err(MoprhError::Config(format!(
                "left/right normalization mismatch at degree {n}"
            )));
        }
        let c = match c_inv.inverse() {
            Ok(c) => c,
            Err(_) => {
                complete = false;
                break;
            }
        };
        let p_of = |p: &MatrixPoly<R>| -> Vec<CMatrix<R>> {
            (1..=EXPANSION_ORDER)
                .map(|k| {
                    if k <= n {
                        p.coeff(n - k)
                    } else {
                        CMatrix::zeros(dim)
                    }
                })
                .collect()
        };
        let p_l = p_of(&pl);
        let p_r = p_of(&pr);
        // q^k_{L,n} = C_n · ∫PL_n W z^{n+k}; q^k_{R,n} = (∫W PR z^{n+k}) · C_n
        let q_l = (1..=EXPANSION_ORDER)
            .map(|k| c.mul(&table.pair_left(&pl, n + k)))
            .collect();
        let q_r = (1..=EXPANSION_ORDER)
            .map(|k| table.pair_right(&pr, n + k).mul(&c))
            .collect();
        deg.push(DegreeData {
            pl,
            pr,
            c_inv,
            c,
            cond,
            p_l,
            p_r,
            q_l,
            q_r,
        });
        regular_through = n;
    }
    let avail = if deg.is_empty() { 0 } else { deg.len() - 1 };
    let bg_top = if complete { n_max } else { avail.saturating_sub(1) };
    let mut beta_l = Vec::new();
    let mut beta_r = Vec::new();
    let mut gamma_l = Vec::new();
    let mut gamma_r = Vec::new();
    for n in 0..=bg_top.min(avail.saturating_sub(1)) {
        // βL_n = p¹_n − p¹_{n+1}
        let bl = deg[n].p_l[0].sub(&deg[n + 1].p_l[0]);
        let br = deg[n].c.mul(&bl).mul(&deg[n].c_inv);
        beta_l.push(bl);
        beta_r.push(br);
        if n == 0 {
            gamma_l.push(CMatrix::zeros(dim));
            gamma_r.push(CMatrix::zeros(dim));
        } else {
            gamma_l.push(deg[n].c_inv.mul(&deg[n - 1].c));
            gamma_r.push(deg[n - 1].c.mul(&deg[n].c_inv));
        }
    }
    Ok(RecurrenceData {
        dim,
        n_max: bg_top.min(avail.saturating_sub(1)),
        deg,
        beta_l,
        beta_r,
        gamma_l,
        gamma_r,
        regular_through,
        complete,
    })
}

/// Max residual of the left and right three-term relations at the samples.
pub fn ttr_residual<R: Real>(data: &RecurrenceData<R>, n: usize, samples: &[Cplx<R>]) -> f64 {
    let dim = data.dim;
    let zero = MatrixPoly::zero(dim);
    let plm = if n == 0 { &zero } else { &data.deg[n - 1].pl };
    let prm = if n == 0 { &zero } else { &data.deg[n - 1].pr };
    let mut worst = 0.0f64;
    for &z in samples {
        // z·PL_n − PL_{n+1} − βL_n·PL_n − γL_n·PL_{n−1}
        let lhs_l = data.deg[n]
            .pl
            .eval(z)
            .scale(z)
            .sub(&data.deg[n + 1].pl.eval(z))
            .sub(&data.beta_l[n].mul(&data.deg[n].pl.eval(z)))
            .sub(&data.gamma_l[n].mul(&plm.eval(z)));
        // right version multiplies the coefficients from the right
        let lhs_r = data.deg[n]
            .pr
            .eval(z)
            .scale(z)
            .sub(&data.deg[n + 1].pr.eval(z))
            .sub(&data.deg[n].pr.eval(z).mul(&data.beta_r[n]))
            .sub(&prm.eval(z).mul(&data.gamma_r[n]));
        worst = worst
            .max(lhs_l.norm_max().to_f64())
            .max(lhs_r.norm_max().to_f64());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{build_rule, ContourSpec, Normalization};
    use crate::mxcore::poly::MatrixPoly;
    use crate::weights::PearsonSpec;

    fn gauss_pipeline(norm: Normalization) -> (MomentTable<f64>, RecurrenceData<f64>) {
        let h = MatrixPoly::from_coeffs(
            1,
            vec![CMatrix::zeros(1), CMatrix::from_diag_f64(&[-1.0])],
        );
        let spec = PearsonSpec::new(h.clone(), h, ContourSpec::real_line(8.0));
        let rule = build_rule(&spec.contour, 24, 12, norm).unwrap();
        let cache = WeightCache::build(&spec, &rule).unwrap();
        let table = build_moments(&cache, &rule, moments_needed(9)).unwrap();
        let data = recurrence(&table, 9).unwrap();
        (table, data)
    }

    #[test]
    fn scalar_hermite_moments_match_gamma_oracle() {
        let (table, _) = gauss_pipeline(Normalization::Plain);
        let sp = std::f64::consts::PI.sqrt();
        assert!((table.w[0][(0, 0)].re - sp).abs() < 1e-12);
        assert!(table.w[1][(0, 0)].abs() < 1e-13);
        assert!((table.w[2][(0, 0)].re - sp / 2.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_hermite_monic_polynomials() {
        let (table, _) = gauss_pipeline(Normalization::Plain);
        let (p2, _, _) = solve_left(&table, 2).unwrap();
        // classical monic Hermite: z² − 1/2
        assert!((p2.coeff(0)[(0, 0)].re + 0.5).abs() < 1e-10);
        assert!(p2.coeff(1).norm_max() < 1e-12);
        let (p0, c0inv, _) = solve_left(&table, 0).unwrap();
        assert!(p0.degree() == Some(0));
        assert!((c0inv[(0, 0)].re - table.w[0][(0, 0)].re).abs() == 0.0);
    }

    #[test]
    fn scalar_hermite_recursion_coefficients() {
        let (_, data) = gauss_pipeline(Normalization::Plain);
        for n in 0..=8usize {
            assert!(
                data.beta_l[n].norm_max() < 1e-10,
                "beta_{n} = {:?}",
                data.beta_l[n][(0, 0)]
            );
            let g = data.gamma_l[n][(0, 0)].re;
            assert!((g - n as f64 / 2.0).abs() < 1e-8, "gamma_{n} = {g}");
        }
    }

    #[test]
    fn normalization_invariance_of_beta_gamma() {
        let (_, plain) = gauss_pipeline(Normalization::Plain);
        let (_, cauchy) = gauss_pipeline(Normalization::Cauchy);
        for n in 0..=8usize {
            assert!(plain.beta_l[n].dist_max(&cauchy.beta_l[n]) < 1e-12);
            assert!(plain.gamma_l[n].dist_max(&cauchy.gamma_l[n]) < 1e-12);
        }
    }

    #[test]
    fn biorthogonality_gram_matrix() {
        let (table, data) = gauss_pipeline(Normalization::Plain);
        for n in 0..=5usize {
            for m in 0..=5usize {
                let g = table.pair_both(&data.deg[n].pl, &data.deg[m].pr);
                let expect = if n == m {
                    data.deg[n].c_inv.clone()
                } else {
                    CMatrix::zeros(1)
                };
                assert!(
                    g.dist_max(&expect) < 1e-8,
                    "gram ({n},{m}) off by {:?}",
                    g.dist_max(&expect)
                );
            }
        }
    }

    #[test]
    fn ttr_residual_small_and_detector_fires() {
        let (_, data) = gauss_pipeline(Normalization::Plain);
        let samples: Vec<Cplx<f64>> = vec![
            Cplx::from_f64(0.3, 0.0),
            Cplx::from_f64(-1.2, 0.5),
            Cplx::from_f64(2.0, -1.0),
        ];
        for n in 0..=6usize {
            let r = ttr_residual(&data, n, &samples);
            assert!(r < 1e-7, "ttr residual at n={n}: {r}");
        }
        // perturb γ_3 by 1%
        let mut bad = data.clone();
        bad.gamma_l[3] = bad.gamma_l[3].scale(Cplx::from_f64(1.01, 0.0));
        assert!(ttr_residual(&bad, 3, &samples) > 1e-3);
    }

    #[test]
    fn freud_quartic_gamma_one() {
        // w = e^{−z⁴/4}: h = −z³ on the left-split convention h_L = h_R = −z³/2
        let mut coeffs: Vec<CMatrix<f64>> = vec![CMatrix::zeros(1); 4];
        coeffs[3] = CMatrix::from_diag_f64(&[-0.5]);
        let h = MatrixPoly::from_coeffs(1, coeffs);
        let spec = PearsonSpec::new(h.clone(), h, ContourSpec::real_line(6.0));
        let rule = build_rule(&spec.contour, 32, 16, Normalization::Plain).unwrap();
        let cache = WeightCache::build(&spec, &rule).unwrap();
        let table = build_moments(&cache, &rule, moments_needed(3)).unwrap();
        let data = recurrence(&table, 3).unwrap();
        // γ_1 = 2Γ(3/4)/Γ(1/4) = 2Γ(3/4)²/(π√2)
        let expect = 0.675978240067285;
        assert!(
            (data.gamma_l[1][(0, 0)].re - expect).abs() < 1e-11,
            "gamma_1 = {}",
            data.gamma_l[1][(0, 0)].re
        );
        assert!(data.beta_l[1].norm_max() < 1e-10);
    }

    #[test]
    fn diagonal_weight_decouples() {
        let hl = MatrixPoly::<f64>::from_coeffs(
            2,
            vec![CMatrix::zeros(2), CMatrix::from_diag_f64(&[-1.0, -2.0])],
        );
        let spec = PearsonSpec::new(hl.clone(), hl, ContourSpec::real_line(8.0));
        let rule = build_rule(&spec.contour, 24, 12, Normalization::Plain).unwrap();
        let cache = WeightCache::build(&spec, &rule).unwrap();
        let table = build_moments(&cache, &rule, moments_needed(4)).unwrap();
        // PL_1 = Iz for even weights
        let (p1, _, _) = solve_left(&table, 1).unwrap();
        assert!(p1.coeff(0).norm_max() < 1e-12);
        let data = recurrence(&table, 4).unwrap();
        // blockwise scalar Hermite recurrences with halved/quartered variance
        for n in 1..=4usize {
            let g = &data.gamma_l[n];
            assert!((g[(0, 0)].re - n as f64 / 2.0).abs() < 1e-8);
            assert!((g[(1, 1)].re - n as f64 / 4.0).abs() < 1e-8);
            assert!(g[(0, 1)].abs() < 1e-10 && g[(1, 0)].abs() < 1e-10);
        }
    }

    #[test]
    fn zero_weight_regularity_fails() {
        let table = MomentTable::<f64> {
            dim: 1,
            w: vec![CMatrix::zeros(1); 12],
            normalization: Normalization::Plain,
        };
        assert!(solve_left(&table, 1).is_err());
    }
}
