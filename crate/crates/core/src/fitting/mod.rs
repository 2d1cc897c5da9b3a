//! Bounded nonlinear least squares for the catalogued models.
//!
//! Positive parameters are fitted in log space and interval-bounded ones
//! through a scaled logistic, so every accepted iterate is feasible. The
//! solver is a damped Gauss-Newton (Levenberg-Marquardt) iteration on the
//! weighted residuals with analytic Jacobians; uncertainties come from the
//! Jacobian at the optimum.

mod covariance;
mod guess;
mod lm;

pub use covariance::{covariance_from_jacobian, Covariance};
pub use guess::{initial_guess, InitialGuess};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::catalog::{Bound, Input, Model, ModelId, ModelParams};
use crate::models::ModelError;
use crate::units::Time;

/// One measured point: model input, observed value and optional 1-sigma error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub input: Input,
    pub value: f64,
    pub sigma: Option<f64>,
}

impl Observation {
    pub fn new(input: Input, value: f64) -> Self {
        Self {
            input,
            value,
            sigma: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }
}

/// Space in which residuals are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSpace {
    Linear,
    /// `ln(model) - ln(observed)`; observations must be positive.
    LogIntensity,
}

/// Weighting used when observations carry no sigma.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Uniform,
    /// sigma proportional to the observed value (linear space only).
    Relative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub residual_space: ResidualSpace,
    pub weighting: Weighting,
    pub max_iterations: usize,
    /// Stop once an accepted step lowers SSE by less than this fraction.
    pub sse_rtol: f64,
    /// Stop once every gradient component is this small relative to
    /// `|J_j| |r|` (cosine criterion).
    pub grad_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Inclusive `[min, max]` on the model's time axis, in ms.
    pub window: Option<(f64, f64)>,
}

/// Start of the default two-pulse fit window.
pub const TWO_PULSE_WINDOW_START: Time = Time::from_ms(250e-6);

impl FitConfig {
    /// Decay fits: log-intensity residuals, uniform weights.
    pub fn decay() -> Self {
        Self {
            residual_space: ResidualSpace::LogIntensity,
            weighting: Weighting::Uniform,
            max_iterations: 500,
            sse_rtol: 1e-12,
            grad_tol: 1e-10,
            restarts: 1,
            seed: 0,
            window: None,
        }
    }

    /// Two-pulse decay fits, skipping the first 250 ns.
    pub fn two_pulse() -> Self {
        Self {
            window: Some((TWO_PULSE_WINDOW_START.ms(), f64::INFINITY)),
            ..Self::decay()
        }
    }

    /// Linewidth-versus-condition fits: linear residuals, relative weights.
    pub fn linewidth() -> Self {
        Self {
            residual_space: ResidualSpace::Linear,
            weighting: Weighting::Relative,
            ..Self::decay()
        }
    }

    pub fn with_restarts(mut self, restarts: usize, seed: u64) -> Self {
        self.restarts = restarts;
        self.seed = seed;
        self
    }

    pub fn with_window(mut self, min_ms: f64, max_ms: f64) -> Self {
        self.window = Some((min_ms, max_ms));
        self
    }

    pub fn validate(&self) -> Result<(), FitError> {
        let bad = |msg: &str| Err(FitError::InvalidConfig(msg.to_string()));
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.sse_rtol > 0.0) || !(self.grad_tol > 0.0) {
            return bad("convergence thresholds must be positive");
        }
        if self.restarts < 1 {
            return bad("restarts must be at least 1");
        }
        if let Some((lo, hi)) = self.window {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return bad("fit window must satisfy min <= max");
            }
        }
        Ok(())
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        Self::decay()
    }
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("{points} points in the fit window cannot determine {free} free parameters")]
    Underdetermined { points: usize, free: usize },
    #[error("model is not finite at the initial parameters: {0}")]
    NonFiniteAtInit(String),
    #[error("initial value {name} = {value} lies outside its bounds")]
    InitOutOfBounds { name: &'static str, value: f64 },
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error("no initial-guess heuristic for model `{0}`")]
    NoHeuristic(ModelId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Relative SSE decrease fell below `sse_rtol`.
    SseConverged,
    /// Gradient cosine fell below `grad_tol`.
    GradientConverged,
    /// Residuals vanished.
    ExactFit,
    /// No step could lower SSE at working precision.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ModelParams,
    /// 1-sigma errors from the Jacobian covariance. Zero for fixed
    /// parameters, infinite for directions the data cannot resolve.
    pub std_errors: Vec<f64>,
    /// Full-size covariance; rows and columns of fixed parameters are zero.
    pub covariance: DMatrix<f64>,
    pub unbounded: Vec<bool>,
    /// Weighted sum of squared residuals.
    pub sse: f64,
    pub dof: usize,
    pub converged: bool,
    pub termination: Termination,
    pub iterations: usize,
    /// Number of starts whose SSE is within 1% of the best.
    pub n_restarts_agreeing: usize,
    pub restarts: usize,
    /// Weighted residuals of the in-window points.
    pub residuals: Vec<f64>,
    /// SSE after each accepted step, starting with the initial SSE.
    pub sse_trace: Vec<f64>,
    pub n_points: usize,
}

impl FitResult {
    pub fn model(&self) -> ModelId {
        self.params.model
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.params.get(name)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.params.index(name).map(|i| self.std_errors[i])
    }

    pub fn reduced_sse(&self) -> f64 {
        self.sse / self.dof as f64
    }
}

/// One parameter's estimate and 1-sigma error (`None` when unbounded).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamUncertainty {
    pub name: &'static str,
    pub value: f64,
    pub std_error: Option<f64>,
    pub fixed: bool,
}

/// Per-parameter 1-sigma errors of a fit.
pub fn uncertainties(fit: &FitResult) -> Vec<ParamUncertainty> {
    fit.params
        .names()
        .into_iter()
        .enumerate()
        .map(|(i, name)| ParamUncertainty {
            name,
            value: fit.params.values[i],
            std_error: (!fit.unbounded[i]).then_some(fit.std_errors[i]),
            fixed: fit.params.fixed[i],
        })
        .collect()
}

fn select_window<'a>(model: &dyn Model, data: &'a [Observation], cfg: &FitConfig) -> Vec<&'a Observation> {
    let axis = model.time_axis();
    data.iter()
        .filter(|o| match cfg.window {
            Some((lo, hi)) => o.input[axis] >= lo && o.input[axis] <= hi,
            None => true,
        })
        .collect()
}

/// Fits `model` to `data` starting from `init`.
///
/// Non-convergence within `max_iterations` is not an error: the result is
/// returned with `converged == false`.
pub fn fit(
    model: &dyn Model,
    data: &[Observation],
    init: &ModelParams,
    cfg: &FitConfig,
) -> Result<FitResult, FitError> {
    cfg.validate()?;
    if init.model != model.id() {
        return Err(FitError::InvalidConfig(format!(
            "parameters are for `{}` but the model is `{}`",
            init.model,
            model.id()
        )));
    }
    let obs = select_window(model, data, cfg);
    let free: Vec<usize> = (0..init.values.len()).filter(|&i| !init.fixed[i]).collect();
    if obs.len() < free.len() + 1 {
        return Err(FitError::Underdetermined {
            points: obs.len(),
            free: free.len(),
        });
    }
    for (i, (v, b)) in init.values.iter().zip(&init.bounds).enumerate() {
        if !b.contains(*v) {
            return Err(FitError::InitOutOfBounds {
                name: model.param_specs()[i].name,
                value: *v,
            });
        }
    }

    let mut scale = Vec::with_capacity(obs.len());
    for o in &obs {
        if !o.value.is_finite() {
            return Err(FitError::InvalidData(format!("non-finite observation at {:?}", o.input)));
        }
        let s = match cfg.residual_space {
            ResidualSpace::Linear => match (o.sigma, cfg.weighting) {
                (Some(s), _) => s,
                (None, Weighting::Relative) => o.value.abs(),
                (None, Weighting::Uniform) => 1.0,
            },
            ResidualSpace::LogIntensity => {
                if o.value <= 0.0 {
                    return Err(FitError::InvalidData(format!(
                        "log-intensity residuals need positive data, got {} at {:?}",
                        o.value, o.input
                    )));
                }
                o.sigma.map_or(1.0, |s| s / o.value)
            }
        };
        if !(s > 0.0) || !s.is_finite() {
            return Err(FitError::InvalidData(format!("non-positive weight scale at {:?}", o.input)));
        }
        scale.push(s);
    }

    let problem = lm::Problem {
        model,
        obs: obs.into_iter().copied().collect(),
        scale,
        space: cfg.residual_space,
        template: init.values.clone(),
        free,
        bounds: init.bounds.clone(),
    };
    let out = lm::levenberg_marquardt(&problem, cfg)?;

    let n = init.values.len();
    let dof = problem.obs.len() - problem.free.len();
    let cov = covariance_from_jacobian(&out.jacobian, out.sse, dof);
    let mut covariance = DMatrix::zeros(n, n);
    let mut std_errors = vec![0.0; n];
    let mut unbounded = vec![false; n];
    for (a, &i) in problem.free.iter().enumerate() {
        std_errors[i] = cov.std_errors[a];
        unbounded[i] = cov.unbounded[a];
        for (b, &j) in problem.free.iter().enumerate() {
            covariance[(i, j)] = cov.matrix[(a, b)];
        }
    }

    let mut params = init.clone();
    params.values = out.params;
    Ok(FitResult {
        params,
        std_errors,
        covariance,
        unbounded,
        sse: out.sse,
        dof,
        converged: out.termination != Termination::MaxIterations,
        termination: out.termination,
        iterations: out.iterations,
        n_restarts_agreeing: 1,
        restarts: 1,
        residuals: out.residuals,
        sse_trace: out.sse_trace,
        n_points: problem.obs.len(),
    })
}

/// Log-uniform jitter of up to a factor 1.5 on positive parameters, and
/// +-50% (clamped inside the interval) on interval-bounded ones.
fn jitter(init: &ModelParams, rng: &mut ChaCha8Rng) -> ModelParams {
    let mut p = init.clone();
    let span = 1.5f64.ln();
    for i in 0..p.values.len() {
        let draw: f64 = rng.random_range(-1.0..1.0);
        if p.fixed[i] {
            continue;
        }
        let v = p.values[i];
        p.values[i] = match p.bounds[i] {
            Bound::Positive => v * (draw * span).exp(),
            Bound::Interval { lo, hi } => {
                let w = hi - lo;
                (v + 0.5 * draw * v.abs().max(0.05 * w)).clamp(lo + 1e-6 * w, hi - 1e-6 * w)
            }
            Bound::Free => v + 0.5 * draw * v.abs().max(1.0),
        };
    }
    p
}

/// Runs [`fit`] from `init` and from `cfg.restarts - 1` further starts;
/// returns the lowest-SSE result.
///
/// For catalogued models the second start is the data-driven
/// [`initial_guess`] (fixed parameters keep their `init` values). The
/// remaining starts are seeded jitters of `init` and of that guess in turn.
pub fn multi_start_fit(
    model: &dyn Model,
    data: &[Observation],
    init: &ModelParams,
    cfg: &FitConfig,
) -> Result<FitResult, FitError> {
    let first = fit(model, data, init, cfg)?;
    if cfg.restarts <= 1 {
        return Ok(first);
    }
    let mut centres = vec![init.clone()];
    if let Some(cat) = model.as_catalog() {
        let windowed: Vec<Observation> = select_window(model, data, cfg).into_iter().copied().collect();
        if let Ok(g) = initial_guess(&cat, &windowed) {
            let mut p = init.clone();
            for i in 0..p.values.len() {
                if !p.fixed[i] {
                    p.values[i] = g.params.values[i];
                }
            }
            if p.within_bounds() && p.values != init.values {
                centres.push(p);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sses = vec![first.sse];
    let mut best = first;
    for k in 1..cfg.restarts {
        let start = if k < centres.len() {
            centres[k].clone()
        } else {
            jitter(&centres[k % centres.len()], &mut rng)
        };
        if let Ok(r) = fit(model, data, &start, cfg) {
            sses.push(r.sse);
            if r.sse < best.sse {
                best = r;
            }
        }
    }
    best.restarts = cfg.restarts;
    best.n_restarts_agreeing = sses
        .iter()
        .filter(|&&s| (s - best.sse).abs() <= 0.01 * best.sse)
        .count();
    Ok(best)
}
