//! Shared end-to-end pipelines for unit tests: weight spec → rule → cache →
//! moments → recurrence data, for a few standard families.

use crate::biorth::{build_moments, moments_needed, recurrence, MomentTable, RecurrenceData};
use crate::contour::{build_rule, ContourSpec, Normalization, QuadratureRule};
use crate::mxcore::matrix::CMatrix;
use crate::mxcore::poly::MatrixPoly;
use crate::weights::{PearsonSpec, WeightCache};

pub struct Pipeline {
    pub spec: PearsonSpec<f64>,
    pub rule: QuadratureRule<f64>,
    pub cache: WeightCache<f64>,
    pub table: MomentTable<f64>,
    pub data: RecurrenceData<f64>,
}

pub fn run_pipeline(spec: PearsonSpec<f64>, norm: Normalization, n_max: usize) -> Pipeline {
    let rule = build_rule(&spec.contour, 28, 14, norm).unwrap();
    let cache = WeightCache::build(&spec, &rule).unwrap();
    let table = build_moments(&cache, &rule, moments_needed(n_max)).unwrap();
    let data = recurrence(&table, n_max).unwrap();
    Pipeline {
        spec,
        rule,
        cache,
        table,
        data,
    }
}

/// w(x) = e^{−x²} on the real line.
pub fn scalar_gauss(norm: Normalization, n_max: usize) -> Pipeline {
    let h = MatrixPoly::<f64>::from_coeffs(
        1,
        vec![CMatrix::zeros(1), CMatrix::from_diag_f64(&[-1.0])],
    );
    let spec = PearsonSpec::new(h.clone(), h, ContourSpec::real_line(8.0));
    run_pipeline(spec, norm, n_max)
}

/// W(x) = e^{−x²}·[[1+a²x², ax],[ax, 1]] from h_L = A − zI with nilpotent A.
pub fn hermite_2x2(a: f64, norm: Normalization, n_max: usize) -> Pipeline {
    let nil = CMatrix::from_rows_f64(&[vec![[0.0, 0.0], [a, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]]);
    let hl = MatrixPoly::from_coeffs(2, vec![nil.clone(), CMatrix::from_diag_f64(&[-1.0, -1.0])]);
    let hr = MatrixPoly::from_coeffs(
        2,
        vec![nil.transpose(), CMatrix::from_diag_f64(&[-1.0, -1.0])],
    );
    let spec = PearsonSpec::new(hl, hr, ContourSpec::real_line(8.0));
    run_pipeline(spec, norm, n_max)
}

/// W(x) = diag(e^{−x²}, e^{−2x²}) from h_L = h_R = diag(−1,−2)·z; everything
/// decouples into two scalar Gaussian channels.
pub fn hermite_2x2_diag(norm: Normalization, n_max: usize) -> Pipeline {
    let h = MatrixPoly::from_coeffs(
        2,
        vec![CMatrix::zeros(2), CMatrix::from_diag_f64(&[-1.0, -2.0])],
    );
    let spec = PearsonSpec::new(h.clone(), h, ContourSpec::real_line(8.0));
    run_pipeline(spec, norm, n_max)
}

/// w(x) = e^{−x⁴/4} on the real line (quartic Freud).
pub fn freud_scalar(norm: Normalization, n_max: usize) -> Pipeline {
    let mut coeffs: Vec<CMatrix<f64>> = vec![CMatrix::zeros(1); 4];
    coeffs[3] = CMatrix::from_diag_f64(&[-0.5]);
    let h = MatrixPoly::from_coeffs(1, coeffs);
    let spec = PearsonSpec::new(h.clone(), h, ContourSpec::real_line(6.0));
    run_pipeline(spec, norm, n_max)
}

/// w(z) = e^{z³/3 + tz} on the decaying hyperbola branch: h_L = z² + t, h_R = 0.
pub fn airy_scalar(t: f64, norm: Normalization, n_max: usize) -> Pipeline {
    let h = MatrixPoly::<f64>::from_coeffs(
        1,
        vec![
            CMatrix::from_diag_f64(&[t]),
            CMatrix::zeros(1),
            CMatrix::from_diag_f64(&[1.0]),
        ],
    );
    let spec = PearsonSpec::new(
        h,
        MatrixPoly::zero(1),
        ContourSpec::hyperbola(2.5, false, 1),
    );
    run_pipeline(spec, norm, n_max)
}

/// 2×2 upper-triangular variant of [`airy_scalar`]: h_L = tI + νz² with
/// ν = I + a·E₁₂ (coefficients commute, so the weight stays in closed form).
pub fn airy_2x2(a: f64, t: f64, norm: Normalization, n_max: usize) -> Pipeline {
    let nu = CMatrix::from_rows_f64(&[vec![[1.0, 0.0], [a, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]]);
    let h = MatrixPoly::from_coeffs(
        2,
        vec![CMatrix::from_diag_f64(&[t, t]), CMatrix::zeros(2), nu],
    );
    let spec = PearsonSpec::new(
        h,
        MatrixPoly::zero(2),
        ContourSpec::hyperbola(2.5, false, 1),
    );
    run_pipeline(spec, norm, n_max)
}

/// w(x) = e^{−x⁴/4 − tx²} with the whole Pearson datum on the left:
/// h_L = −z³ − 2tz, h_R = 0.
pub fn quartic_onesided_scalar(t: f64, norm: Normalization, n_max: usize) -> Pipeline {
    let h = MatrixPoly::<f64>::from_coeffs(
        1,
        vec![
            CMatrix::zeros(1),
            CMatrix::from_diag_f64(&[-2.0 * t]),
            CMatrix::zeros(1),
            CMatrix::from_diag_f64(&[-1.0]),
        ],
    );
    let spec = PearsonSpec::new(h, MatrixPoly::zero(1), ContourSpec::real_line(6.0));
    run_pipeline(spec, norm, n_max)
}

/// 2×2 upper-triangular variant of [`quartic_onesided_scalar`] with
/// ν = −I + a·E₁₂.
pub fn quartic_onesided_2x2(a: f64, t: f64, norm: Normalization, n_max: usize) -> Pipeline {
    let nu = CMatrix::from_rows_f64(&[
        vec![[-1.0, 0.0], [a, 0.0]],
        vec![[0.0, 0.0], [-1.0, 0.0]],
    ]);
    let h = MatrixPoly::from_coeffs(
        2,
        vec![
            CMatrix::zeros(2),
            CMatrix::from_diag_f64(&[-2.0 * t, -2.0 * t]),
            CMatrix::zeros(2),
            nu,
        ],
    );
    let spec = PearsonSpec::new(h, MatrixPoly::zero(2), ContourSpec::real_line(6.0));
    run_pipeline(spec, norm, n_max)
}
