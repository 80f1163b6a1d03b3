//! Nonlinear difference systems satisfied by the recursion coefficients:
//! the linear-Pearson (Hermite-class) system, the quadratic-weight alt-dPI
//! lattice and the cubic-weight dPI lattice, each as a residual checker
//! against quadrature data, plus a forward dPI iterator with oracle
//! comparison.

use crate::biorth::{MomentTable, RecurrenceData};
use crate::error::MoprhError;
use crate::mxcore::matrix::CMatrix;
use crate::mxcore::poly::commutator;
use crate::scalar::{Cplx, Real};

fn real_scalar<R: Real>(x: f64) -> Cplx<R> {
    Cplx::from_f64(x, 0.0)
}

/// Rolling state for the lattice iterations: full β/γ histories plus prefix
/// sums Σ_{k<j}β_k, Σ_{k<j}γ_k and the ordered double sum Σ_{0≤k<m<j}β_mβ_k.
/// Prefix sums are maintained incrementally and re-verified against direct
/// summation every five pushes.
#[derive(Clone, Debug)]
pub struct LatticeState<R: Real> {
    pub dim: usize,
    pub lam: CMatrix<R>,
    pub mu: CMatrix<R>,
    pub nu: CMatrix<R>,
    beta: Vec<CMatrix<R>>,
    gamma: Vec<CMatrix<R>>,
    beta_prefix: Vec<CMatrix<R>>,
    gamma_prefix: Vec<CMatrix<R>>,
    betabeta_prefix: Vec<CMatrix<R>>,
}

impl<R: Real> LatticeState<R> {
    pub fn new(dim: usize, lam: CMatrix<R>, mu: CMatrix<R>, nu: CMatrix<R>) -> Self {
        LatticeState {
            dim,
            lam,
            mu,
            nu,
            beta: Vec::new(),
            gamma: Vec::new(),
            beta_prefix: vec![CMatrix::zeros(dim)],
            gamma_prefix: vec![CMatrix::zeros(dim)],
            betabeta_prefix: vec![CMatrix::zeros(dim)],
        }
    }

    /// Seed a dPI run: γ_0 = 0 and γ_1 from the moments of the weight
    /// (γ_1 = (m_2 − m_1 m_0^{-1} m_1) m_0^{-1}, the degree-1 normalization
    /// ratio written without solving any Hankel system beyond m_0).
    pub fn dpi_start(
        table: &MomentTable<R>,
        mu: CMatrix<R>,
        nu: CMatrix<R>,
    ) -> Result<Self, MoprhError> {
        let dim = table.dim;
        let m0_inv = table.moment(0).inverse()?;
        let m1 = table.moment(1);
        let g1 = table
            .moment(2)
            .sub(&m1.mul(&m0_inv).mul(m1))
            .mul(&m0_inv);
        let mut st = LatticeState::new(dim, CMatrix::zeros(dim), mu, nu);
        st.push_gamma(CMatrix::zeros(dim))?;
        st.push_gamma(g1)?;
        Ok(st)
    }

    /// Load β_0..β_top and γ_0..γ_top from quadrature-derived recursion data
    /// (left-family coefficients).
    pub fn from_oracle(
        data: &RecurrenceData<R>,
        lam: CMatrix<R>,
        mu: CMatrix<R>,
        nu: CMatrix<R>,
        top: usize,
    ) -> Result<Self, MoprhError> {
        if top > data.n_max {
            return Err(MoprhError::Config(format!(
                "lattice state wants coefficients through {top}, data has {}",
                data.n_max
            )));
        }
        let mut st = LatticeState::new(data.dim, lam, mu, nu);
        for k in 0..=top {
            st.push_beta(data.beta_l[k].clone())?;
            st.push_gamma(data.gamma_l[k].clone())?;
        }
        Ok(st)
    }

    pub fn beta_len(&self) -> usize {
        self.beta.len()
    }
    pub fn gamma_len(&self) -> usize {
        self.gamma.len()
    }
    pub fn beta(&self, k: usize) -> &CMatrix<R> {
        &self.beta[k]
    }
    pub fn gamma(&self, k: usize) -> &CMatrix<R> {
        &self.gamma[k]
    }
    /// Σ_{k=0}^{n−1} β_k.
    pub fn s_beta(&self, n: usize) -> &CMatrix<R> {
        &self.beta_prefix[n]
    }
    /// Σ_{k=0}^{n−1} γ_k.
    pub fn s_gamma(&self, n: usize) -> &CMatrix<R> {
        &self.gamma_prefix[n]
    }
    /// Σ_{0≤k<m≤n−1} β_m β_k.
    pub fn s_betabeta(&self, n: usize) -> &CMatrix<R> {
        &self.betabeta_prefix[n]
    }

    pub fn push_beta(&mut self, b: CMatrix<R>) -> Result<(), MoprhError> {
        let last = self.beta_prefix.last().unwrap();
        self.betabeta_prefix
            .push(self.betabeta_prefix.last().unwrap().add(&b.mul(last)));
        self.beta_prefix.push(last.add(&b));
        self.beta.push(b);
        if self.beta.len() % 5 == 0 {
            self.verify_sums()?;
        }
        Ok(())
    }

    pub fn push_gamma(&mut self, g: CMatrix<R>) -> Result<(), MoprhError> {
        self.gamma_prefix
            .push(self.gamma_prefix.last().unwrap().add(&g));
        self.gamma.push(g);
        if self.gamma.len() % 5 == 0 {
            self.verify_sums()?;
        }
        Ok(())
    }

    /// Incremental sums against direct summation.
    fn verify_sums(&self) -> Result<(), MoprhError> {
        let dim = self.dim;
        let mut sb = CMatrix::zeros(dim);
        let mut sbb = CMatrix::zeros(dim);
        for (m, b) in self.beta.iter().enumerate() {
            sbb = sbb.add(&b.mul(&sb));
            sb = sb.add(b);
            let scale = 1.0 + sb.norm_max().to_f64();
            if sb.dist_max(&self.beta_prefix[m + 1]).to_f64() > 1e-12 * scale
                || sbb.dist_max(&self.betabeta_prefix[m + 1]).to_f64() > 1e-12 * scale * scale
            {
                return Err(MoprhError::StepControl(format!(
                    "incremental beta sums drifted from direct summation at index {m}"
                )));
            }
        }
        let mut sg = CMatrix::zeros(dim);
        for (m, g) in self.gamma.iter().enumerate() {
            sg = sg.add(g);
            if sg.dist_max(&self.gamma_prefix[m + 1]).to_f64()
                > 1e-12 * (1.0 + sg.norm_max().to_f64())
            {
                return Err(MoprhError::StepControl(format!(
                    "incremental gamma sums drifted from direct summation at index {m}"
                )));
            }
        }
        Ok(())
    }
}

/// Residual of the two cleaned difference equations tying β^L, C_n to the
/// linear weight datum (h^L = A^L z + B^L, h^R = A^R z + B^R):
///   (i)  I − [β^L_n, B^L − [Σ_{k≤n−1}β^L_k, A^L] + A^L β^L_n]
///          = C_n^{-1}C_{n−1}A^L − C_{n+1}^{-1}A^R C_n − A^L C_{n+1}^{-1}C_n
///            + C_n^{-1}A^R C_{n−1},
///   (ii) C_{n−1}B^L + B^R C_{n−1} − C_{n−1}[Σ_{k≤n−2}β^L_k, A^L]
///          = −(C_{n−1}A^L + A^R C_{n−1})β^L_{n−1} − [Σ_{k≤n−1}β^R_k, A^R]C_{n−1}.
/// The second equation is measured after multiplying through by C_{n−1}^{-1}
/// on the left; that keeps the residual invariant under constant-factor
/// changes of the weight without moving its roots.
/// At n = 0 every C_{n−1} term descends from C_{n−1}P_{n−1} with P_{−1} = 0,
/// so those terms read as zero (not the frame-level C_{−1} = I).
pub fn hermite_system_residual<R: Real>(
    data: &RecurrenceData<R>,
    al: &CMatrix<R>,
    bl: &CMatrix<R>,
    ar: &CMatrix<R>,
    br: &CMatrix<R>,
    n: usize,
) -> Result<f64, MoprhError> {
    if n > data.n_max || n + 1 >= data.deg.len() {
        return Err(MoprhError::Config(format!(
            "hermite system residual at n = {n} needs recurrence data through degree {}",
            n + 1
        )));
    }
    let dim = data.dim;
    let id = CMatrix::identity(dim);
    let mut s_beta = CMatrix::zeros(dim);
    for k in 0..n {
        s_beta = s_beta.add(&data.beta_l[k]);
    }
    let beta_n = &data.beta_l[n];
    let cn_inv = data.c_inv(n);
    let cn = data.c(n);
    let cnp_inv = data.c_inv(n + 1);
    let cm = if n == 0 {
        CMatrix::zeros(dim)
    } else {
        data.c(n - 1).clone()
    };

    let inner = bl.sub(&commutator(&s_beta, al)).add(&al.mul(beta_n));
    let rhs1 = cn_inv
        .mul(&cm)
        .mul(al)
        .sub(&cnp_inv.mul(ar).mul(cn))
        .sub(&al.mul(cnp_inv).mul(cn))
        .add(&cn_inv.mul(ar).mul(&cm));
    let r1 = id.sub(&commutator(beta_n, &inner)).sub(&rhs1);

    let r2 = if n == 0 {
        // every term carries C_{−1}, β_{−1} or an empty sum
        CMatrix::zeros(dim)
    } else {
        let mut s_beta_short = CMatrix::zeros(dim);
        for k in 0..n.saturating_sub(1) {
            s_beta_short = s_beta_short.add(&data.beta_l[k]);
        }
        // Σ C_k β^L_k C_k^{-1} is exactly Σ β^R_k
        let mut s_beta_conj = CMatrix::zeros(dim);
        for k in 0..n {
            s_beta_conj = s_beta_conj.add(&data.beta_r[k]);
        }
        let beta_prev = &data.beta_l[n - 1];
        let cm_inv = data.c_inv(n - 1);
        let ar_conj = cm_inv.mul(ar).mul(&cm);
        bl.add(&cm_inv.mul(br).mul(&cm))
            .sub(&commutator(&s_beta_short, al))
            .add(&al.add(&ar_conj).mul(beta_prev))
            .add(&cm_inv.mul(&commutator(&s_beta_conj, ar)).mul(&cm))
    };
    Ok(r1.norm_max().to_f64().max(r2.norm_max().to_f64()))
}

/// Residual of the alt-dPI pair for the quadratic left weight datum
/// h^L = λ + μz + νz², h^R = 0:
///   (1) (μ + [ν, Σ_{k≤n−1}β_k] + ν(β_n+β_{n+1}))γ_{n+1} + (n+1)I,
///   (2) λ + ν(γ_n+γ_{n+1}+β_n²) − μβ_n + [μ, Σβ_k](I+β_n)
///       + [ν, Σ_{m≤n−1}γ_m − Σ_{0≤k<m≤n−1}β_mβ_k] + [ν, Σβ_k]·Σβ_k.
/// Scalar case collapses to γ_{n+1}(β_n+β_{n+1}) = −(n+1) and
/// γ_n+γ_{n+1}+β_n²+λ = 0 (μ = 0, ν = 1).
pub fn altdpi_residual<R: Real>(
    data: &RecurrenceData<R>,
    lam: &CMatrix<R>,
    mu: &CMatrix<R>,
    nu: &CMatrix<R>,
    n: usize,
) -> Result<f64, MoprhError> {
    if n + 1 > data.n_max {
        return Err(MoprhError::Config(format!(
            "alt-dPI residual at n = {n} needs recursion coefficients through {}",
            n + 1
        )));
    }
    let dim = data.dim;
    let id = CMatrix::identity(dim);
    let mut s_beta = CMatrix::zeros(dim);
    let mut s_betabeta = CMatrix::zeros(dim);
    for k in 0..n {
        s_betabeta = s_betabeta.add(&data.beta_l[k].mul(&s_beta));
        // note the double sum orders the factors as β_m β_k with m > k, so the
        // running prefix multiplies on the right of the new entry
        s_beta = s_beta.add(&data.beta_l[k]);
    }
    // γ_0 = 0, so starting this sum at m = 1 or m = 0 is the same matrix
    let mut s_gamma = CMatrix::zeros(dim);
    for m in 1..n {
        s_gamma = s_gamma.add(&data.gamma_l[m]);
    }
    let beta_n = &data.beta_l[n];
    let gamma_n = &data.gamma_l[n];
    let gamma_np = &data.gamma_l[n + 1];
    let nu_sb = commutator(nu, &s_beta);

    let r1 = mu
        .add(&nu_sb)
        .add(&nu.mul(&beta_n.add(&data.beta_l[n + 1])))
        .mul(gamma_np)
        .add(&id.scale(real_scalar((n + 1) as f64)));

    let r2 = lam
        .add(&nu.mul(&gamma_n.add(gamma_np).add(&beta_n.mul(beta_n))))
        .sub(&mu.mul(beta_n))
        .add(&commutator(mu, &s_beta).mul(&id.add(beta_n)))
        .add(&commutator(nu, &s_gamma.sub(&s_betabeta)))
        .add(&nu_sb.mul(&s_beta));

    Ok(r1.norm_max().to_f64().max(r2.norm_max().to_f64()))
}

/// Solve the first alt-dPI equation for γ_{n+1} given the β side of the state:
/// γ_{n+1} = −(n+1)(μ + [ν, Σ_{k≤n−1}β_k] + ν(β_n+β_{n+1}))^{-1}.
/// Needs β through n+1 in the state; a singular bracket is a lattice
/// singularity at n+1.
pub fn altdpi_gamma_from_beta<R: Real>(
    state: &LatticeState<R>,
    n: usize,
) -> Result<CMatrix<R>, MoprhError> {
    if n + 2 > state.beta_len() {
        return Err(MoprhError::Config(format!(
            "gamma-from-beta at n = {n} needs beta history through {}",
            n + 1
        )));
    }
    let bracket = state
        .mu
        .add(&commutator(&state.nu, state.s_beta(n)))
        .add(&state.nu.mul(&state.beta(n).add(state.beta(n + 1))));
    let inv = bracket
        .inverse()
        .map_err(|_| MoprhError::LatticeSingularity { n: n + 1 })?;
    Ok(inv.scale(real_scalar(-((n + 1) as f64))))
}

/// Residual of the dPI lattice for the cubic left weight datum
/// h^L = μz + νz³, h^R = 0:
///   (μ + ν(γ_{n+2}+γ_{n+1}+γ_n) + [ν, Σ_{k≤n−1}γ_k])γ_{n+1} + (n+1)I.
pub fn dpi_residual<R: Real>(
    data: &RecurrenceData<R>,
    mu: &CMatrix<R>,
    nu: &CMatrix<R>,
    n: usize,
) -> Result<f64, MoprhError> {
    if n + 2 > data.n_max {
        return Err(MoprhError::Config(format!(
            "dPI residual at n = {n} needs recursion coefficients through {}",
            n + 2
        )));
    }
    let dim = data.dim;
    let mut s_gamma = CMatrix::zeros(dim);
    for k in 1..n {
        s_gamma = s_gamma.add(&data.gamma_l[k]);
    }
    let window = data.gamma_l[n + 2]
        .add(&data.gamma_l[n + 1])
        .add(&data.gamma_l[n]);
    let r = mu
        .add(&nu.mul(&window))
        .add(&commutator(nu, &s_gamma))
        .mul(&data.gamma_l[n + 1])
        .add(&CMatrix::identity(dim).scale(real_scalar((n + 1) as f64)));
    Ok(r.norm_max().to_f64())
}

/// The two circulating forms of the ν = −I dPI step. `Derived` is the one the
/// general lattice implies (and the quadrature oracle confirms):
/// γ_{m+1} = m γ_m^{-1} − γ_m − γ_{m−1} + μ. `Printed` is the other form
/// in circulation, γ_{n+2} = n γ_n^{-1} − γ_n − γ_{n−1} − μ, shipped for
/// comparison runs; it disagrees with the derived step in both index and the
/// sign of μ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DpiVariant {
    Derived,
    Printed,
}

/// Append the next γ to a ν = −I dPI state and return it. A singular pivot γ
/// halts the run with a lattice-singularity event.
pub fn dpi_iterate<R: Real>(
    state: &mut LatticeState<R>,
    variant: DpiVariant,
) -> Result<CMatrix<R>, MoprhError> {
    let m = state.gamma_len().checked_sub(1).filter(|&m| m >= 1).ok_or_else(|| {
        MoprhError::Config("dPI iteration needs at least γ_0, γ_1 seeded".into())
    })?;
    let next = match variant {
        DpiVariant::Derived => {
            let inv = state.gamma(m).inverse().map_err(|_| MoprhError::LatticeSingularity { n: m })?;
            inv.scale(real_scalar(m as f64))
                .sub(state.gamma(m))
                .sub(state.gamma(m - 1))
                .add(&state.mu)
        }
        DpiVariant::Printed => {
            // the step reaches two behind the head: γ_{m+1} from γ_{m−1}, γ_{m−2}
            let j = m - 1;
            let lead = if j == 0 {
                // 0·γ_0^{-1} suppressed by convention, γ_{−1} = 0
                CMatrix::zeros(state.dim)
            } else {
                let inv = state
                    .gamma(j)
                    .inverse()
                    .map_err(|_| MoprhError::LatticeSingularity { n: j })?;
                inv.scale(real_scalar(j as f64)).sub(state.gamma(j - 1))
            };
            lead.sub(state.gamma(j)).sub(&state.mu)
        }
    };
    state.push_gamma(next.clone())?;
    Ok(next)
}

/// Side-by-side table of lattice-iterated vs quadrature-derived γ_n.
#[derive(Clone, Debug)]
pub struct LatticeComparison {
    pub variant: DpiVariant,
    /// ‖γ_n^{lattice} − γ_n^{quadrature}‖_max for n = 0.. (truncated at a halt)
    pub diffs: Vec<f64>,
    pub max_diff: f64,
    /// first n where the drift exceeds 1e−4
    pub divergence_index: Option<usize>,
    /// step at which the iteration hit a singular pivot, if any
    pub halted_at: Option<usize>,
}

/// Run the ν = −I dPI iteration from moment-seeded (γ_0, γ_1) and compare the
/// trajectory against the quadrature recursion coefficients.
pub fn lattice_vs_oracle<R: Real>(
    data: &RecurrenceData<R>,
    table: &MomentTable<R>,
    mu: &CMatrix<R>,
    variant: DpiVariant,
    n_max: usize,
) -> Result<LatticeComparison, MoprhError> {
    let dim = data.dim;
    let nu = CMatrix::identity(dim).neg();
    let mut state = LatticeState::dpi_start(table, mu.clone(), nu)?;
    let mut halted_at = None;
    while state.gamma_len() <= n_max {
        match dpi_iterate(&mut state, variant) {
            Ok(_) => {}
            Err(MoprhError::LatticeSingularity { n }) => {
                halted_at = Some(n);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let top = (state.gamma_len() - 1).min(n_max).min(data.n_max);
    let mut diffs = Vec::with_capacity(top + 1);
    let mut max_diff = 0.0f64;
    let mut divergence_index = None;
    for n in 0..=top {
        let d = state.gamma(n).dist_max(&data.gamma_l[n]).to_f64();
        if d > 1e-4 && divergence_index.is_none() {
            divergence_index = Some(n);
        }
        max_diff = max_diff.max(d);
        diffs.push(d);
    }
    Ok(LatticeComparison {
        variant,
        diffs,
        max_diff,
        divergence_index,
        halted_at,
    })
}
