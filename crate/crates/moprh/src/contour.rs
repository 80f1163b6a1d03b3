//! Support curves, composite Gauss–Legendre rules on them, matrix moments and
//! Cauchy transforms with the (2πi)⁻¹ normalization used throughout.

use std::sync::Arc;

use crate::error::MoprhError;
use crate::mxcore::matrix::CMatrix;
use crate::scalar::{Cplx, Real};

/// Parameterized support curve z(t), t ∈ [−T, T].
#[derive(Clone)]
pub enum ContourKind<R: Real> {
    RealLine,
    /// Branch of 3x² − y² = 3: z(t) = ±cosh t + i√3 sinh t.
    Hyperbola { reflected: bool },
    Custom {
        z: Arc<dyn Fn(R) -> Cplx<R> + Send + Sync>,
        dz: Arc<dyn Fn(R) -> Cplx<R> + Send + Sync>,
    },
}

impl<R: Real> std::fmt::Debug for ContourKind<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ContourKind::RealLine => write!(f, "RealLine"),
            ContourKind::Hyperbola { reflected } => {
                write!(f, "Hyperbola {{ reflected: {reflected} }}")
            }
            ContourKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ContourSpec<R: Real> {
    pub kind: ContourKind<R>,
    /// Parameter cutoff: the rule covers t ∈ [−T, T].
    pub t_max: R,
    /// +1 for increasing parameter, −1 to traverse backwards.
    pub orientation: i8,
}

impl<R: Real> ContourSpec<R> {
    pub fn real_line(t_max: f64) -> Self {
        ContourSpec {
            kind: ContourKind::RealLine,
            t_max: R::from_f64(t_max),
            orientation: 1,
        }
    }

    pub fn hyperbola(t_max: f64, reflected: bool, orientation: i8) -> Self {
        ContourSpec {
            kind: ContourKind::Hyperbola { reflected },
            t_max: R::from_f64(t_max),
            orientation,
        }
    }

    fn z_raw(&self, t: R) -> Cplx<R> {
        match &self.kind {
            ContourKind::RealLine => Cplx::real(t),
            ContourKind::Hyperbola { reflected } => {
                let s3 = R::from_f64(3.0).sqrt();
                let x = if *reflected { -t.cosh() } else { t.cosh() };
                Cplx::new(x, s3 * t.sinh())
            }
            ContourKind::Custom { z, .. } => z(t),
        }
    }

    fn dz_raw(&self, t: R) -> Cplx<R> {
        match &self.kind {
            ContourKind::RealLine => Cplx::one(),
            ContourKind::Hyperbola { reflected } => {
                let s3 = R::from_f64(3.0).sqrt();
                let dx = if *reflected { -t.sinh() } else { t.sinh() };
                Cplx::new(dx, s3 * t.cosh())
            }
            ContourKind::Custom { dz, .. } => dz(t),
        }
    }

    /// Point at oriented parameter s ∈ [−T, T].
    pub fn z(&self, s: R) -> Cplx<R> {
        let t = if self.orientation >= 0 { s } else { -s };
        self.z_raw(t)
    }

    /// d z / d s including orientation.
    pub fn dz(&self, s: R) -> Cplx<R> {
        if self.orientation >= 0 {
            self.dz_raw(s)
        } else {
            -self.dz_raw(-s)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Weights include the (2πi)⁻¹ prefactor.
    Cauchy,
    Plain,
}

#[derive(Clone, Debug)]
pub struct QuadratureRule<R: Real> {
    pub nodes: Vec<Cplx<R>>,
    pub weights: Vec<Cplx<R>>,
    /// Oriented parameter value of each node, increasing.
    pub tvals: Vec<R>,
    pub normalization: Normalization,
    /// Curve points at s = −T and s = +T.
    pub endpoints: (Cplx<R>, Cplx<R>),
}

/// Gauss–Legendre nodes/weights on [−1, 1], Newton-refined in the working precision.
pub fn gauss_legendre<R: Real>(order: usize) -> (Vec<R>, Vec<R>) {
    assert!(order >= 1);
    let mut xs = Vec::with_capacity(order);
    let mut ws = Vec::with_capacity(order);
    let tol = R::epsilon() * R::from_f64(64.0);
    for i in 1..=order {
        let guess = (std::f64::consts::PI * (i as f64 - 0.25) / (order as f64 + 0.5)).cos();
        let mut x = R::from_f64(guess);
        let mut dp = R::one();
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_n'(x)
            let mut p0 = R::one();
            let mut p1 = x;
            for k in 2..=order {
                let kf = R::from_f64(k as f64);
                let p2 = ((R::from_f64(2.0 * k as f64 - 1.0) * x * p1)
                    - (kf - R::one()) * p0)
                    / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if order == 1 { x } else { p1 };
            let pn1 = if order == 1 { R::one() } else { p0 };
            dp = R::from_f64(order as f64) * (pn1 - x * pn) / (R::one() - x * x);
            let dx = pn / dp;
            x = x - dx;
            if dx.abs() < tol {
                break;
            }
        }
        xs.push(x);
        ws.push(R::from_f64(2.0) / ((R::one() - x * x) * dp * dp));
    }
    xs.reverse();
    ws.reverse();
    (xs, ws)
}

/// Composite Gauss–Legendre rule over the contour parameter.
pub fn build_rule<R: Real>(
    spec: &ContourSpec<R>,
    panels: usize,
    order: usize,
    normalization: Normalization,
) -> Result<QuadratureRule<R>, MoprhError> {
    if panels == 0 || order == 0 || !(spec.t_max > R::zero()) {
        return Err(MoprhError::Config(
            "quadrature rule needs positive T, panels, order".into(),
        ));
    }
    let t = spec.t_max;
    let width = (t + t) / R::from_f64(panels as f64);
    let mut breaks = Vec::with_capacity(panels + 1);
    for p in 0..=panels {
        breaks.push(-t + width * R::from_f64(p as f64));
    }
    rule_from_breakpoints(spec, &breaks, order, normalization)
}

/// Composite rule with panels refined geometrically toward parameter t0;
/// the finest panel has width ~`fine` on each side of t0. Used for Cauchy
/// evaluations at points much closer to the contour than a uniform rule resolves.
pub fn build_rule_graded<R: Real>(
    spec: &ContourSpec<R>,
    t0: R,
    fine: f64,
    order: usize,
    normalization: Normalization,
) -> Result<QuadratureRule<R>, MoprhError> {
    let t = spec.t_max;
    if !(t0.abs() < t) || !(fine > 0.0) {
        return Err(MoprhError::Config(
            "graded rule needs interior focus and positive fine width".into(),
        ));
    }
    let mut breaks = vec![t0];
    // geometric widths t0 ± fine·2^k out to both cutoffs
    let mut w = R::from_f64(fine);
    let mut up = t0;
    let mut down = t0;
    while up < t || down > -t {
        up = if up + w < t { up + w } else { t };
        down = if down - w > -t { down - w } else { -t };
        breaks.push(up);
        breaks.push(down);
        w = w + w;
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < R::from_f64(1e-300));
    rule_from_breakpoints(spec, &breaks, order, normalization)
}

fn rule_from_breakpoints<R: Real>(
    spec: &ContourSpec<R>,
    breaks: &[R],
    order: usize,
    normalization: Normalization,
) -> Result<QuadratureRule<R>, MoprhError> {
    let (xs, ws) = gauss_legendre::<R>(order);
    // plain weights carry z'(s) ds; cauchy mode folds in 1/(2πi) = −i/(2π)
    let prefactor = match normalization {
        Normalization::Plain => Cplx::one(),
        Normalization::Cauchy => {
            let two_pi = R::from_f64(2.0) * R::pi();
            Cplx::new(R::zero(), -(R::one() / two_pi))
        }
    };
    let panels = breaks.len() - 1;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    let mut tvals = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let half = (breaks[p + 1] - breaks[p]) / R::from_f64(2.0);
        let mid = (breaks[p + 1] + breaks[p]) / R::from_f64(2.0);
        for (x, w) in xs.iter().zip(&ws) {
            let s = mid + half * *x;
            let z = spec.z(s);
            if !z.is_finite() {
                return Err(MoprhError::Config("non-finite contour point".into()));
            }
            nodes.push(z);
            weights.push(prefactor * spec.dz(s).scale(half * *w));
            tvals.push(s);
        }
    }
    // sampled non-self-intersection check
    let min_sep = R::from_f64(1e-9);
    for i in 0..nodes.len() {
        for j in (i + 2)..nodes.len() {
            if (nodes[i] - nodes[j]).abs() < min_sep {
                return Err(MoprhError::Config(format!(
                    "contour self-intersects near node {i}"
                )));
            }
        }
    }
    let t = spec.t_max;
    Ok(QuadratureRule {
        nodes,
        weights,
        tvals,
        normalization,
        endpoints: (spec.z(-t), spec.z(t)),
    })
}

impl<R: Real> QuadratureRule<R> {
    /// Fixed-order quadrature sum of a matrix-valued integrand.
    pub fn integrate<F: Fn(usize, Cplx<R>) -> CMatrix<R>>(&self, dim: usize, f: F) -> CMatrix<R> {
        let mut acc = CMatrix::zeros(dim);
        for (j, (&z, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            acc = acc.add(&f(j, z).scale(w));
        }
        acc
    }

    pub fn min_distance_to(&self, z0: Cplx<R>) -> R {
        let mut best = R::from_f64(f64::MAX);
        for &z in &self.nodes {
            let d = (z - z0).abs();
            if d < best {
                best = d;
            }
        }
        best
    }
}

/// Moment of order k of a weight evaluated at the rule nodes (by node index).
pub fn moment<R: Real, F: Fn(usize, Cplx<R>) -> CMatrix<R>>(
    k: usize,
    dim: usize,
    weight_at: F,
    rule: &QuadratureRule<R>,
) -> CMatrix<R> {
    rule.integrate(dim, |j, z| {
        let mut zp = Cplx::one();
        for _ in 0..k {
            zp = zp * z;
        }
        weight_at(j, z).scale(zp)
    })
}

pub const DEFAULT_CLEARANCE: f64 = 0.1;

/// (2πi)⁻¹ ∫ f(z′)/(z′ − z0) dz′ for z0 off the contour (cauchy-normalized rule).
pub fn cauchy_transform<R: Real, F: Fn(usize, Cplx<R>) -> CMatrix<R>>(
    f: F,
    dim: usize,
    z0: Cplx<R>,
    rule: &QuadratureRule<R>,
    clearance: f64,
) -> Result<CMatrix<R>, MoprhError> {
    let dist = rule.min_distance_to(z0).to_f64();
    if dist < clearance {
        return Err(MoprhError::ContourClearance { dist, clearance });
    }
    Ok(rule.integrate(dim, |j, z| f(j, z).scale((z - z0).inv())))
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DecayReport {
    /// max over endpoints and tested powers of ‖z^k W(z)‖
    pub max_endpoint_norm: f64,
    pub per_endpoint: [f64; 2],
    pub pass: bool,
}

pub const DECAY_TOLERANCE: f64 = 1e-8;

/// Endpoint decay of z^k·W(z) for k = 0..=kmax; gate for moment integrals.
pub fn decay_check<R: Real, F: Fn(Cplx<R>) -> CMatrix<R>>(
    weight_eval: F,
    rule: &QuadratureRule<R>,
    kmax: usize,
) -> DecayReport {
    let mut per = [0.0f64; 2];
    for (slot, &z) in [rule.endpoints.0, rule.endpoints.1].iter().enumerate() {
        let w = weight_eval(z);
        let mut zp = Cplx::<R>::one();
        let mut worst = 0.0f64;
        for _ in 0..=kmax {
            let nrm = w.scale(zp).norm_max().to_f64();
            if nrm > worst {
                worst = nrm;
            }
            zp = zp * z;
        }
        per[slot] = worst;
    }
    let max = per[0].max(per[1]);
    DecayReport {
        max_endpoint_norm: max,
        per_endpoint: per,
        pass: max < DECAY_TOLERANCE,
    }
}
