//! Uniform, parameter-vector view of every model, used by the fitter,
//! the synthesiser and the gradient checker.
//!
//! Parameters are flat `f64` slices in canonical units (ms, kHz); inputs are
//! two-component points whose meaning depends on the model (see
//! [`ModelId::input_names`]).

use std::fmt;
use std::str::FromStr;

use crate::models::{
    field_kernel, mims_kernel, spectral_kernel, temperature_kernel, ModelError,
};
use crate::units::Time;

/// A model input point. Unused coordinates are ignored.
pub type Input = [f64; 2];

/// Admissible range of a parameter, enforced through reparameterisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Free,
    /// Strictly positive, fitted in log space.
    Positive,
    /// Open interval, fitted through a scaled logistic.
    Interval { lo: f64, hi: f64 },
}

impl Bound {
    pub fn contains(&self, v: f64) -> bool {
        match *self {
            Bound::Free => v.is_finite(),
            Bound::Positive => v > 0.0 && v.is_finite(),
            Bound::Interval { lo, hi } => v >= lo && v <= hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub unit: &'static str,
    pub bound: Bound,
}

const fn pos(name: &'static str, unit: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        unit,
        bound: Bound::Positive,
    }
}

const fn interval(name: &'static str, unit: &'static str, lo: f64, hi: f64) -> ParamSpec {
    ParamSpec {
        name,
        unit,
        bound: Bound::Interval { lo, hi },
    }
}

const MIMS_PARAMS: [ParamSpec; 3] = [
    pos("I0", "a.u."),
    pos("T_M", "ms"),
    interval("x", "", 0.3, 4.0),
];
const FIELD_PARAMS: [ParamSpec; 5] = [
    pos("gamma0", "kHz"),
    pos("alpha1", "kHz"),
    pos("alpha2", "kHz"),
    pos("g1", ""),
    pos("g2", ""),
];
const TEMP_PARAMS: [ParamSpec; 3] = [
    pos("gamma_floor", "kHz"),
    pos("amplitude", "kHz/K^n"),
    interval("n", "", 0.5, 3.0),
];
const SECH2_PARAMS: [ParamSpec; 2] = [pos("gamma_max", "kHz"), pos("g", "")];
const SD_PARAMS: [ParamSpec; 4] = [
    pos("gamma0", "kHz"),
    pos("gamma_SD", "kHz"),
    pos("R_SD", "kHz"),
    pos("gamma_TLS", "kHz"),
];
const THREE_LEVEL_PARAMS: [ParamSpec; 3] = [
    interval("beta", "", 0.0, 2.0),
    pos("T1", "ms"),
    pos("T_Z", "ms"),
];
const ECHO_PARAMS: [ParamSpec; 8] = [
    pos("I0", "a.u."),
    pos("gamma0", "kHz"),
    pos("gamma_SD", "kHz"),
    pos("R_SD", "kHz"),
    pos("gamma_TLS", "kHz"),
    interval("beta", "", 0.0, 2.0),
    pos("T1", "ms"),
    pos("T_Z", "ms"),
];

/// Identifier of a catalogued model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    /// Two-pulse stretched-exponential decay.
    Mims,
    /// Linewidth versus magnetic field.
    Field,
    /// Linewidth versus temperature (floor plus power law).
    Temperature,
    /// sech^2 spectral-diffusion amplitude.
    Sech2,
    /// Full spectral-diffusion linewidth in (t12, t23).
    SpectralDiffusion,
    /// Spectral-diffusion linewidth at t12 = 0.
    SpectralDiffusionT23,
    /// Three-level population factor.
    ThreeLevel,
    /// Three-pulse stimulated-echo intensity.
    StimulatedEcho,
}

impl ModelId {
    pub const ALL: [ModelId; 8] = [
        ModelId::Mims,
        ModelId::Field,
        ModelId::Temperature,
        ModelId::Sech2,
        ModelId::SpectralDiffusion,
        ModelId::SpectralDiffusionT23,
        ModelId::ThreeLevel,
        ModelId::StimulatedEcho,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Mims => "mims",
            ModelId::Field => "field",
            ModelId::Temperature => "temperature",
            ModelId::Sech2 => "sech2",
            ModelId::SpectralDiffusion => "sd",
            ModelId::SpectralDiffusionT23 => "sd-t23",
            ModelId::ThreeLevel => "three-level",
            ModelId::StimulatedEcho => "echo-3ppe",
        }
    }

    pub fn params(self) -> &'static [ParamSpec] {
        match self {
            ModelId::Mims => &MIMS_PARAMS,
            ModelId::Field => &FIELD_PARAMS,
            ModelId::Temperature => &TEMP_PARAMS,
            ModelId::Sech2 => &SECH2_PARAMS,
            ModelId::SpectralDiffusion | ModelId::SpectralDiffusionT23 => &SD_PARAMS,
            ModelId::ThreeLevel => &THREE_LEVEL_PARAMS,
            ModelId::StimulatedEcho => &ECHO_PARAMS,
        }
    }

    /// Meaning of the input coordinates.
    pub fn input_names(self) -> [&'static str; 2] {
        match self {
            ModelId::Mims => ["t12_ms", "-"],
            ModelId::Field | ModelId::Sech2 => ["B_T", "T_K"],
            ModelId::Temperature => ["T_K", "-"],
            ModelId::SpectralDiffusion | ModelId::StimulatedEcho => ["t12_ms", "t23_ms"],
            ModelId::SpectralDiffusionT23 | ModelId::ThreeLevel => ["t23_ms", "-"],
        }
    }

    /// Whether the model output is an echo intensity (as opposed to a linewidth).
    pub fn is_intensity(self) -> bool {
        matches!(
            self,
            ModelId::Mims | ModelId::StimulatedEcho | ModelId::ThreeLevel
        )
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

/// A model usable by the fitter: named, bounded parameters plus value and
/// analytic gradient at an input point.
pub trait Model: Send + Sync {
    fn id(&self) -> ModelId;

    fn param_specs(&self) -> &'static [ParamSpec] {
        self.id().params()
    }

    fn n_params(&self) -> usize {
        self.param_specs().len()
    }

    /// Index of the input coordinate that fit windows apply to.
    fn time_axis(&self) -> usize {
        0
    }

    fn eval(&self, p: &[f64], x: Input) -> Result<f64, ModelError>;

    /// Value and partial derivatives with respect to every parameter.
    fn gradient(&self, p: &[f64], x: Input, grad: &mut [f64]) -> Result<f64, ModelError>;

    /// The catalogue entry behind this model, if any (enables data-driven
    /// starting points in multi-start fits).
    fn as_catalog(&self) -> Option<CatalogModel> {
        None
    }
}

/// A catalogued model together with its fixed per-dataset constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogModel {
    Mims,
    Field,
    Temperature,
    Sech2,
    SpectralDiffusion { t0: Time },
    SpectralDiffusionT23 { t0: Time },
    ThreeLevel,
    StimulatedEcho { t0: Time },
}

/// Default TLS reference time (the shortest waiting time of the 3PPE scans).
pub const DEFAULT_T0: Time = Time::from_ms(0.05);

impl CatalogModel {
    pub fn new(id: ModelId) -> Self {
        Self::with_t0(id, DEFAULT_T0)
    }

    pub fn with_t0(id: ModelId, t0: Time) -> Self {
        match id {
            ModelId::Mims => CatalogModel::Mims,
            ModelId::Field => CatalogModel::Field,
            ModelId::Temperature => CatalogModel::Temperature,
            ModelId::Sech2 => CatalogModel::Sech2,
            ModelId::SpectralDiffusion => CatalogModel::SpectralDiffusion { t0 },
            ModelId::SpectralDiffusionT23 => CatalogModel::SpectralDiffusionT23 { t0 },
            ModelId::ThreeLevel => CatalogModel::ThreeLevel,
            ModelId::StimulatedEcho => CatalogModel::StimulatedEcho { t0 },
        }
    }

    pub fn t0(&self) -> Option<Time> {
        match *self {
            CatalogModel::SpectralDiffusion { t0 }
            | CatalogModel::SpectralDiffusionT23 { t0 }
            | CatalogModel::StimulatedEcho { t0 } => Some(t0),
            _ => None,
        }
    }

    fn check(&self, p: &[f64], x: Input) -> Result<(), ModelError> {
        let id = self.id();
        let expected = id.params().len();
        if p.len() != expected {
            return Err(ModelError::ParamCount {
                model: id.name(),
                expected,
                got: p.len(),
            });
        }
        let dom = |ok: bool, quantity, value, requirement| {
            crate::models::require(ok, quantity, value, requirement)
        };
        match *self {
            CatalogModel::Mims => {
                dom(x[0] >= 0.0, "t12", x[0], "t12 >= 0")?;
                dom(p[1] > 0.0, "T_M", p[1], "T_M > 0")
            }
            CatalogModel::Field | CatalogModel::Sech2 => {
                dom(x[0] >= 0.0, "B", x[0], "B >= 0 T")?;
                dom(x[1] > 0.0, "T", x[1], "T > 0 K")
            }
            CatalogModel::Temperature => dom(x[0] > 0.0, "T", x[0], "T > 0 K"),
            CatalogModel::SpectralDiffusion { t0 } | CatalogModel::StimulatedEcho { t0 } => {
                dom(x[0] >= 0.0, "t12", x[0], "t12 >= 0")?;
                dom(t0.ms() > 0.0, "t0", t0.ms(), "t0 > 0")?;
                dom(x[1] >= t0.ms(), "t23", x[1], "t23 >= t0")?;
                if let CatalogModel::StimulatedEcho { .. } = self {
                    dom(p[6] > 0.0, "T1", p[6], "T1 > 0")?;
                    dom(p[7] > 0.0, "T_Z", p[7], "T_Z > 0")?;
                }
                Ok(())
            }
            CatalogModel::SpectralDiffusionT23 { t0 } => {
                dom(t0.ms() > 0.0, "t0", t0.ms(), "t0 > 0")?;
                dom(x[0] >= t0.ms(), "t23", x[0], "t23 >= t0")
            }
            CatalogModel::ThreeLevel => {
                dom(x[0] >= 0.0, "t23", x[0], "t23 >= 0")?;
                dom(p[1] > 0.0, "T1", p[1], "T1 > 0")?;
                dom(p[2] > 0.0, "T_Z", p[2], "T_Z > 0")
            }
        }
    }
}

impl Model for CatalogModel {
    fn as_catalog(&self) -> Option<CatalogModel> {
        Some(*self)
    }

    fn id(&self) -> ModelId {
        match self {
            CatalogModel::Mims => ModelId::Mims,
            CatalogModel::Field => ModelId::Field,
            CatalogModel::Temperature => ModelId::Temperature,
            CatalogModel::Sech2 => ModelId::Sech2,
            CatalogModel::SpectralDiffusion { .. } => ModelId::SpectralDiffusion,
            CatalogModel::SpectralDiffusionT23 { .. } => ModelId::SpectralDiffusionT23,
            CatalogModel::ThreeLevel => ModelId::ThreeLevel,
            CatalogModel::StimulatedEcho { .. } => ModelId::StimulatedEcho,
        }
    }

    fn time_axis(&self) -> usize {
        match self {
            CatalogModel::StimulatedEcho { .. } => 1,
            _ => 0,
        }
    }

    fn eval(&self, p: &[f64], x: Input) -> Result<f64, ModelError> {
        self.check(p, x)?;
        Ok(match *self {
            CatalogModel::Mims => mims_kernel::eval(p[0], p[1], p[2], x[0]),
            CatalogModel::Field => field_kernel::eval(p, x[0], x[1]),
            CatalogModel::Temperature => temperature_kernel::eval(p, x[0]),
            CatalogModel::Sech2 => spectral_kernel::sech2_eval(p, x[0], x[1]),
            CatalogModel::SpectralDiffusion { t0 } => {
                spectral_kernel::sd_eval(p, t0.ms(), x[0], x[1])
            }
            CatalogModel::SpectralDiffusionT23 { t0 } => {
                spectral_kernel::sd_eval(p, t0.ms(), 0.0, x[0])
            }
            CatalogModel::ThreeLevel => spectral_kernel::population(p[0], p[1], p[2], x[0]),
            CatalogModel::StimulatedEcho { t0 } => {
                spectral_kernel::echo_eval(p, t0.ms(), x[0], x[1])
            }
        })
    }

    fn gradient(&self, p: &[f64], x: Input, grad: &mut [f64]) -> Result<f64, ModelError> {
        self.check(p, x)?;
        fn put<const N: usize>(grad: &mut [f64], (f, g): (f64, [f64; N])) -> f64 {
            grad[..N].copy_from_slice(&g);
            f
        }
        Ok(match *self {
            CatalogModel::Mims => put(grad, mims_kernel::grad(p[0], p[1], p[2], x[0])),
            CatalogModel::Field => put(grad, field_kernel::grad(p, x[0], x[1])),
            CatalogModel::Temperature => put(grad, temperature_kernel::grad(p, x[0])),
            CatalogModel::Sech2 => put(grad, spectral_kernel::sech2_grad(p, x[0], x[1])),
            CatalogModel::SpectralDiffusion { t0 } => {
                put(grad, spectral_kernel::sd_grad(p, t0.ms(), x[0], x[1]))
            }
            CatalogModel::SpectralDiffusionT23 { t0 } => {
                put(grad, spectral_kernel::sd_grad(p, t0.ms(), 0.0, x[0]))
            }
            CatalogModel::ThreeLevel => {
                put(grad, spectral_kernel::population_grad(p[0], p[1], p[2], x[0]))
            }
            CatalogModel::StimulatedEcho { t0 } => {
                put(grad, spectral_kernel::echo_grad(p, t0.ms(), x[0], x[1]))
            }
        })
    }
}

/// Analytic partial derivatives of a catalogued model at one input point.
pub fn model_gradient(model: &dyn Model, params: &[f64], input: Input) -> Result<Vec<f64>, ModelError> {
    let mut g = vec![0.0; model.n_params()];
    model.gradient(params, input, &mut g)?;
    Ok(g)
}

/// Named parameter vector for one model, with bounds and a fixed mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub model: ModelId,
    pub values: Vec<f64>,
    pub bounds: Vec<Bound>,
    pub fixed: Vec<bool>,
}

impl ModelParams {
    pub fn new(model: ModelId, values: Vec<f64>) -> Result<Self, ModelError> {
        let specs = model.params();
        if values.len() != specs.len() {
            return Err(ModelError::ParamCount {
                model: model.name(),
                expected: specs.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            model,
            bounds: specs.iter().map(|s| s.bound).collect(),
            fixed: vec![false; values.len()],
            values,
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.model.params().iter().map(|s| s.name).collect()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.model.params().iter().position(|s| s.name == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.values[i])
    }

    /// Sets a value by name; returns false if the name is unknown.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match self.index(name) {
            Some(i) => {
                self.values[i] = value;
                true
            }
            None => false,
        }
    }

    pub fn fix(mut self, name: &str) -> Self {
        if let Some(i) = self.index(name) {
            self.fixed[i] = true;
        }
        self
    }

    pub fn free(mut self, name: &str) -> Self {
        if let Some(i) = self.index(name) {
            self.fixed[i] = false;
        }
        self
    }

    pub fn n_free(&self) -> usize {
        self.fixed.iter().filter(|f| !**f).count()
    }

    pub fn within_bounds(&self) -> bool {
        self.values
            .iter()
            .zip(&self.bounds)
            .all(|(v, b)| b.contains(*v))
    }
}
