//! Experiment configuration: a strict JSON schema (unknown keys rejected,
//! complex entries always as [re, im] pairs) plus the builtin presets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::contour::ContourSpec;
use crate::error::MoprhError;
use crate::mxcore::matrix::CMatrix;
use crate::mxcore::poly::MatrixPoly;
use crate::scalar::{Cplx, Real};
use crate::weights::PearsonSpec;

/// One complex entry as [re, im].
pub type EntryCfg = [f64; 2];
/// Matrix as rows of complex entries.
pub type MatrixCfg = Vec<Vec<EntryCfg>>;
/// Matrix polynomial coefficients in ascending degree.
pub type PolyCfg = Vec<MatrixCfg>;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub weight: WeightConfig,
    pub contour: ContourConfig,
    pub quadrature: QuadratureConfig,
    pub n_max: usize,
    /// identity-id → tolerance overrides; anything absent uses the default.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub precision: Precision,
    pub suites: Vec<SuiteId>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub family: FamilyTag,
    pub dim: usize,
    pub h_left: PolyCfg,
    pub h_right: PolyCfg,
    /// Constant α's for the eigenvalue suite (Hermite-class only).
    #[serde(default)]
    pub alpha_left: Option<MatrixCfg>,
    #[serde(default)]
    pub alpha_right: Option<MatrixCfg>,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    Hermite,
    Altdpi,
    Dpi,
    Custom,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    pub kind: ContourKindTag,
    pub t_max: f64,
    #[serde(default)]
    pub reflected: bool,
    #[serde(default = "default_orientation")]
    pub orientation: i8,
}

fn default_orientation() -> i8 {
    1
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ContourKindTag {
    RealLine,
    Hyperbola,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub panels: usize,
    pub order: usize,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    Recurrence,
    RhIdentities,
    Cd,
    Ode,
    Eigen,
    HermiteLattice,
    Altdpi,
    Dpi,
    LatticeVsOracle,
}

impl SuiteId {
    pub const ALL: [SuiteId; 9] = [
        SuiteId::Recurrence,
        SuiteId::RhIdentities,
        SuiteId::Cd,
        SuiteId::Ode,
        SuiteId::Eigen,
        SuiteId::HermiteLattice,
        SuiteId::Altdpi,
        SuiteId::Dpi,
        SuiteId::LatticeVsOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::Recurrence => "recurrence",
            SuiteId::RhIdentities => "rh-identities",
            SuiteId::Cd => "cd",
            SuiteId::Ode => "ode",
            SuiteId::Eigen => "eigen",
            SuiteId::HermiteLattice => "hermite-lattice",
            SuiteId::Altdpi => "altdpi",
            SuiteId::Dpi => "dpi",
            SuiteId::LatticeVsOracle => "lattice-vs-oracle",
        }
    }
}

fn check_matrix(m: &MatrixCfg, dim: usize, what: &str) -> Result<(), MoprhError> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(MoprhError::Config(format!("{what} must be a {dim}x{dim} matrix")));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(MoprhError::Config(format!("{what} has a non-finite entry")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), MoprhError> {
        let dim = self.weight.dim;
        if dim == 0 {
            return Err(MoprhError::Config("matrix size must be at least 1".into()));
        }
        if self.weight.h_left.is_empty() || self.weight.h_right.is_empty() {
            return Err(MoprhError::Config(
                "both Pearson coefficient arrays need at least the constant term".into(),
            ));
        }
        for (side, poly) in [("h_left", &self.weight.h_left), ("h_right", &self.weight.h_right)] {
            for (k, c) in poly.iter().enumerate() {
                check_matrix(c, dim, &format!("{side}[{k}]"))?;
            }
        }
        for (side, alpha) in [
            ("alpha_left", &self.weight.alpha_left),
            ("alpha_right", &self.weight.alpha_right),
        ] {
            if let Some(a) = alpha {
                check_matrix(a, dim, side)?;
            }
        }
        let degl = self.weight.h_left.len() - 1;
        let degr = self.weight.h_right.len() - 1;
        match self.weight.family {
            FamilyTag::Hermite => {
                if degl.max(degr) > 1 {
                    return Err(MoprhError::Config(
                        "hermite family needs degree-1 Pearson coefficients".into(),
                    ));
                }
            }
            FamilyTag::Altdpi => {
                if degl > 2 || self.weight.h_right.iter().flatten().flatten().flatten().any(|x| *x != 0.0)
                {
                    return Err(MoprhError::Config(
                        "altdpi family needs h_left of degree <= 2 and h_right = 0".into(),
                    ));
                }
            }
            FamilyTag::Dpi => {
                if degl > 3 || self.weight.h_right.iter().flatten().flatten().flatten().any(|x| *x != 0.0)
                {
                    return Err(MoprhError::Config(
                        "dpi family needs h_left of degree <= 3 and h_right = 0".into(),
                    ));
                }
            }
            FamilyTag::Custom => {}
        }
        if !(self.contour.t_max > 0.0) {
            return Err(MoprhError::Config("contour t_max must be positive".into()));
        }
        if self.quadrature.panels == 0 || self.quadrature.order == 0 {
            return Err(MoprhError::Config("quadrature needs positive panels and order".into()));
        }
        if self.n_max == 0 {
            return Err(MoprhError::Config("n_max must be at least 1".into()));
        }
        if self.suites.is_empty() {
            return Err(MoprhError::Config("at least one suite must be requested".into()));
        }
        for (id, tol) in &self.tolerances {
            if !(*tol > 0.0) {
                return Err(MoprhError::Config(format!("tolerance for {id} must be positive")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, MoprhError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }

    pub fn matrix<R: Real>(m: &MatrixCfg) -> CMatrix<R> {
        let dim = m.len();
        let mut out = CMatrix::zeros(dim);
        for (i, row) in m.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out[(i, j)] = Cplx::from_f64(e[0], e[1]);
            }
        }
        out
    }

    pub fn poly<R: Real>(p: &PolyCfg, dim: usize) -> MatrixPoly<R> {
        MatrixPoly::from_coeffs(dim, p.iter().map(|c| Self::matrix(c)).collect())
    }

    pub fn contour_spec<R: Real>(&self) -> ContourSpec<R> {
        match self.contour.kind {
            ContourKindTag::RealLine => ContourSpec::real_line(self.contour.t_max),
            ContourKindTag::Hyperbola => ContourSpec::hyperbola(
                self.contour.t_max,
                self.contour.reflected,
                self.contour.orientation,
            ),
        }
    }

    pub fn pearson_spec<R: Real>(&self) -> PearsonSpec<R> {
        let dim = self.weight.dim;
        PearsonSpec::new(
            Self::poly(&self.weight.h_left, dim),
            Self::poly(&self.weight.h_right, dim),
            self.contour_spec(),
        )
    }

    pub fn alpha_pair<R: Real>(&self) -> Option<(CMatrix<R>, CMatrix<R>)> {
        match (&self.weight.alpha_left, &self.weight.alpha_right) {
            (Some(l), Some(r)) => Some((Self::matrix(l), Self::matrix(r))),
            _ => None,
        }
    }
}

fn diag_cfg(dim: usize, entries: &[f64]) -> MatrixCfg {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { [entries[i], 0.0] } else { [0.0, 0.0] })
                .collect()
        })
        .collect()
}

fn zeros_cfg(dim: usize) -> MatrixCfg {
    vec![vec![[0.0, 0.0]; dim]; dim]
}

pub const PRESET_NAMES: [&str; 6] = [
    "scalar-hermite",
    "matrix-hermite-2x2",
    "freud-quartic-scalar",
    "freud-quartic-2x2-diag",
    "altdpi-scalar-magnus",
    "altdpi-2x2-diag",
];

pub fn preset_descriptions() -> Vec<(&'static str, &'static str)> {
    vec![
        ("scalar-hermite", "Gaussian weight e^{-x^2} on the real line; full identity suites"),
        (
            "matrix-hermite-2x2",
            "2x2 Hermite-class weight with nilpotent linear datum; full identity suites",
        ),
        (
            "freud-quartic-scalar",
            "scalar quartic weight e^{-x^4/4 - tx^2}, t = 0.5; dPI lattice vs quadrature",
        ),
        (
            "freud-quartic-2x2-diag",
            "diagonal 2x2 quartic weight, channel t = (0.5, 0.25); dPI lattice vs quadrature",
        ),
        (
            "altdpi-scalar-magnus",
            "scalar weight e^{z^3/3 + tz} on a decaying hyperbola, t = 0.4; alt-dPI pair",
        ),
        (
            "altdpi-2x2-diag",
            "diagonal 2x2 hyperbola weight, channel t = (0.3, 0.7); alt-dPI pair",
        ),
    ]
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let hermite_suites = vec![
        SuiteId::Recurrence,
        SuiteId::RhIdentities,
        SuiteId::Cd,
        SuiteId::Ode,
        SuiteId::Eigen,
        SuiteId::HermiteLattice,
    ];
    let cfg = match name {
        "scalar-hermite" => ExperimentConfig {
            name: "scalar-hermite".into(),
            weight: WeightConfig {
                family: FamilyTag::Hermite,
                dim: 1,
                h_left: vec![zeros_cfg(1), diag_cfg(1, &[-1.0])],
                h_right: vec![zeros_cfg(1), diag_cfg(1, &[-1.0])],
                alpha_left: Some(zeros_cfg(1)),
                alpha_right: Some(zeros_cfg(1)),
            },
            contour: ContourConfig {
                kind: ContourKindTag::RealLine,
                t_max: 8.0,
                reflected: false,
                orientation: 1,
            },
            quadrature: QuadratureConfig { panels: 28, order: 14 },
            n_max: 9,
            tolerances: BTreeMap::new(),
            precision: Precision::Double,
            suites: hermite_suites.clone(),
            out_dir: None,
        },
        "matrix-hermite-2x2" => {
            let mut b = zeros_cfg(2);
            b[0][1] = [0.7, 0.0];
            let bt = {
                let mut m = zeros_cfg(2);
                m[1][0] = [0.7, 0.0];
                m
            };
            ExperimentConfig {
                name: "matrix-hermite-2x2".into(),
                weight: WeightConfig {
                    family: FamilyTag::Hermite,
                    dim: 2,
                    h_left: vec![b, diag_cfg(2, &[-1.0, -1.0])],
                    h_right: vec![bt, diag_cfg(2, &[-1.0, -1.0])],
                    alpha_left: Some(diag_cfg(2, &[0.0, 2.0])),
                    alpha_right: Some(diag_cfg(2, &[0.0, 2.0])),
                },
                contour: ContourConfig {
                    kind: ContourKindTag::RealLine,
                    t_max: 8.0,
                    reflected: false,
                    orientation: 1,
                },
                quadrature: QuadratureConfig { panels: 28, order: 14 },
                n_max: 8,
                tolerances: BTreeMap::new(),
                precision: Precision::Double,
                suites: hermite_suites,
                out_dir: None,
            }
        }
        "freud-quartic-scalar" | "dpi-variant-check" => ExperimentConfig {
            // "dpi-variant-check" is an alias: the lattice-vs-oracle suite always
            // reports both iteration variants, so the divergence of the printed
            // one is on record in every dPI run
            name: "freud-quartic-scalar".into(),
            weight: WeightConfig {
                family: FamilyTag::Dpi,
                dim: 1,
                h_left: vec![
                    zeros_cfg(1),
                    diag_cfg(1, &[-1.0]),
                    zeros_cfg(1),
                    diag_cfg(1, &[-1.0]),
                ],
                h_right: vec![zeros_cfg(1)],
                alpha_left: None,
                alpha_right: None,
            },
            contour: ContourConfig {
                kind: ContourKindTag::RealLine,
                t_max: 6.0,
                reflected: false,
                orientation: 1,
            },
            quadrature: QuadratureConfig { panels: 28, order: 14 },
            n_max: 10,
            tolerances: BTreeMap::new(),
            precision: Precision::Double,
            suites: vec![SuiteId::Recurrence, SuiteId::Dpi, SuiteId::LatticeVsOracle],
            out_dir: None,
        },
        "freud-quartic-2x2-diag" => ExperimentConfig {
            name: "freud-quartic-2x2-diag".into(),
            weight: WeightConfig {
                family: FamilyTag::Dpi,
                dim: 2,
                h_left: vec![
                    zeros_cfg(2),
                    diag_cfg(2, &[-1.0, -0.5]),
                    zeros_cfg(2),
                    diag_cfg(2, &[-1.0, -1.0]),
                ],
                h_right: vec![zeros_cfg(2)],
                alpha_left: None,
                alpha_right: None,
            },
            contour: ContourConfig {
                kind: ContourKindTag::RealLine,
                t_max: 6.0,
                reflected: false,
                orientation: 1,
            },
            quadrature: QuadratureConfig { panels: 28, order: 14 },
            n_max: 10,
            tolerances: BTreeMap::new(),
            precision: Precision::Double,
            suites: vec![SuiteId::Recurrence, SuiteId::Dpi, SuiteId::LatticeVsOracle],
            out_dir: None,
        },
        "altdpi-scalar-magnus" => ExperimentConfig {
            name: "altdpi-scalar-magnus".into(),
            weight: WeightConfig {
                family: FamilyTag::Altdpi,
                dim: 1,
                h_left: vec![diag_cfg(1, &[0.4]), zeros_cfg(1), diag_cfg(1, &[1.0])],
                h_right: vec![zeros_cfg(1)],
                alpha_left: None,
                alpha_right: None,
            },
            contour: ContourConfig {
                kind: ContourKindTag::Hyperbola,
                t_max: 2.5,
                reflected: false,
                orientation: 1,
            },
            quadrature: QuadratureConfig { panels: 28, order: 14 },
            n_max: 8,
            tolerances: BTreeMap::new(),
            precision: Precision::Double,
            suites: vec![SuiteId::Recurrence, SuiteId::Altdpi],
            out_dir: None,
        },
        "altdpi-2x2-diag" => ExperimentConfig {
            name: "altdpi-2x2-diag".into(),
            weight: WeightConfig {
                family: FamilyTag::Altdpi,
                dim: 2,
                h_left: vec![
                    diag_cfg(2, &[0.3, 0.7]),
                    zeros_cfg(2),
                    diag_cfg(2, &[1.0, 1.0]),
                ],
                h_right: vec![zeros_cfg(2)],
                alpha_left: None,
                alpha_right: None,
            },
            contour: ContourConfig {
                kind: ContourKindTag::Hyperbola,
                t_max: 2.5,
                reflected: false,
                orientation: 1,
            },
            quadrature: QuadratureConfig { panels: 28, order: 14 },
            n_max: 7,
            tolerances: BTreeMap::new(),
            precision: Precision::Double,
            suites: vec![SuiteId::Recurrence, SuiteId::Altdpi],
            out_dir: None,
        },
        _ => return None,
    };
    Some(cfg)
}
