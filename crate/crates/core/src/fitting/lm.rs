use nalgebra::{DMatrix, DVector};

use super::{FitConfig, FitError, ResidualSpace, Termination};
use crate::catalog::{Bound, Model};
use crate::fitting::Observation;

pub(super) struct Problem<'a> {
    pub model: &'a dyn Model,
    pub obs: Vec<Observation>,
    /// Per-point residual divisor (sigma, in the residual space).
    pub scale: Vec<f64>,
    pub space: ResidualSpace,
    /// Full parameter vector; fixed entries are taken from here.
    pub template: Vec<f64>,
    pub free: Vec<usize>,
    pub bounds: Vec<Bound>,
}

pub(super) struct Outcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Jacobian of the weighted residuals with respect to the free
    /// parameters in their natural units.
    pub jacobian: DMatrix<f64>,
    pub sse: f64,
    pub iterations: usize,
    pub sse_trace: Vec<f64>,
    pub termination: Termination,
}

const LAMBDA_MAX: f64 = 1e20;

fn to_internal(b: Bound, p: f64) -> f64 {
    match b {
        Bound::Free => p,
        Bound::Positive => p.ln(),
        Bound::Interval { lo, hi } => {
            let w = hi - lo;
            let s = ((p - lo) / w).clamp(1e-12, 1.0 - 1e-12);
            (s / (1.0 - s)).ln()
        }
    }
}

fn to_external(b: Bound, u: f64) -> f64 {
    match b {
        Bound::Free => u,
        Bound::Positive => u.clamp(-700.0, 700.0).exp(),
        Bound::Interval { lo, hi } => lo + (hi - lo) / (1.0 + (-u).exp()),
    }
}

/// dp/du at external value `p`.
fn chain(b: Bound, p: f64) -> f64 {
    match b {
        Bound::Free => 1.0,
        Bound::Positive => p,
        Bound::Interval { lo, hi } => (p - lo) * (hi - p) / (hi - lo),
    }
}

impl Problem<'_> {
    fn params(&self, u: &[f64]) -> Vec<f64> {
        let mut p = self.template.clone();
        for (k, &i) in self.free.iter().enumerate() {
            p[i] = to_external(self.bounds[i], u[k]);
        }
        p
    }

    fn residual(&self, f: f64, o: &Observation, s: f64) -> f64 {
        match self.space {
            ResidualSpace::Linear => (f - o.value) / s,
            ResidualSpace::LogIntensity => (f.ln() - o.value.ln()) / s,
        }
    }

    /// Weighted residuals, or `None` if any is non-finite.
    fn residuals(&self, p: &[f64]) -> Option<Vec<f64>> {
        let mut r = Vec::with_capacity(self.obs.len());
        for (o, &s) in self.obs.iter().zip(&self.scale) {
            let f = self.model.eval(p, o.input).ok()?;
            let v = self.residual(f, o, s);
            if !v.is_finite() {
                return None;
            }
            r.push(v);
        }
        Some(r)
    }

    /// Residuals and Jacobian in natural free-parameter units.
    pub fn linearize(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>), String> {
        let m = self.obs.len();
        let k = self.free.len();
        let mut r = Vec::with_capacity(m);
        let mut jac = DMatrix::zeros(m, k);
        let mut grad = vec![0.0; p.len()];
        for (row, (o, &s)) in self.obs.iter().zip(&self.scale).enumerate() {
            let f = self.model.gradient(p, o.input, &mut grad).map_err(|e| e.to_string())?;
            let v = self.residual(f, o, s);
            if !v.is_finite() {
                return Err(format!("residual is {v} at input {:?}", o.input));
            }
            r.push(v);
            let d = match self.space {
                ResidualSpace::Linear => 1.0 / s,
                ResidualSpace::LogIntensity => 1.0 / (f * s),
            };
            for (col, &i) in self.free.iter().enumerate() {
                let g = grad[i] * d;
                if !g.is_finite() {
                    return Err(format!("non-finite derivative for parameter {i} at {:?}", o.input));
                }
                jac[(row, col)] = g;
            }
        }
        Ok((r, jac))
    }

    fn to_internal_jacobian(&self, p: &[f64], jac: &DMatrix<f64>) -> DMatrix<f64> {
        let mut ju = jac.clone();
        for (col, &i) in self.free.iter().enumerate() {
            let c = chain(self.bounds[i], p[i]);
            ju.column_mut(col).scale_mut(c);
        }
        ju
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Largest `|g_j| / (|J_j| |r|)` over the columns.
fn gradient_cosine(ju: &DMatrix<f64>, g: &DVector<f64>, rnorm: f64) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..ju.ncols() {
        let cn = ju.column(j).norm();
        if cn > 0.0 && rnorm > 0.0 {
            worst = worst.max(g[j].abs() / (cn * rnorm));
        }
    }
    worst
}

pub(super) fn levenberg_marquardt(problem: &Problem<'_>, cfg: &FitConfig) -> Result<Outcome, FitError> {
    let k = problem.free.len();
    let mut u: Vec<f64> = problem
        .free
        .iter()
        .map(|&i| to_internal(problem.bounds[i], problem.template[i]))
        .collect();
    let mut p = problem.params(&u);
    let (mut r, mut jac) = problem.linearize(&p).map_err(FitError::NonFiniteAtInit)?;
    let mut sse = sum_sq(&r);
    let mut trace = vec![sse];

    let mut ju = problem.to_internal_jacobian(&p, &jac);
    let mut a = ju.transpose() * &ju;
    let mut g = ju.transpose() * DVector::from_column_slice(&r);
    let max_diag = (0..k).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
    let mut lambda = if max_diag > 0.0 { 1e-3 * max_diag } else { 1e-3 };
    let lambda_cap = LAMBDA_MAX * max_diag.max(1.0);

    let mut iterations = 0;
    let termination = loop {
        if sse == 0.0 {
            break Termination::ExactFit;
        }
        if k == 0 || gradient_cosine(&ju, &g, sse.sqrt()) <= cfg.grad_tol {
            break Termination::GradientConverged;
        }
        if iterations >= cfg.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let mut damped = a.clone();
        for i in 0..k {
            damped[(i, i)] += lambda;
        }
        let step = match damped.cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => {
                lambda *= 3.0;
                if lambda > lambda_cap {
                    break Termination::Stalled;
                }
                continue;
            }
        };

        let u_new: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let p_new = problem.params(&u_new);
        let trial = problem.residuals(&p_new).map(|r_new| {
            let s = sum_sq(&r_new);
            (r_new, s)
        });
        match trial {
            Some((_, sse_new)) if sse_new < sse => {
                let rel = (sse - sse_new) / sse;
                // the Jacobian can still fail where the value is finite
                let (r_new, jac_new) = match problem.linearize(&p_new) {
                    Ok(v) => v,
                    Err(_) => {
                        lambda *= 3.0;
                        if lambda > lambda_cap {
                            break Termination::Stalled;
                        }
                        continue;
                    }
                };
                u = u_new;
                p = p_new;
                r = r_new;
                jac = jac_new;
                sse = sse_new;
                trace.push(sse);
                ju = problem.to_internal_jacobian(&p, &jac);
                a = ju.transpose() * &ju;
                g = ju.transpose() * DVector::from_column_slice(&r);
                lambda = (lambda / 3.0).max(1e-300);
                if sse == 0.0 {
                    break Termination::ExactFit;
                }
                if rel <= cfg.sse_rtol {
                    break Termination::SseConverged;
                }
            }
            _ => {
                lambda *= 3.0;
                if lambda > lambda_cap {
                    break Termination::Stalled;
                }
            }
        }
    };

    Ok(Outcome {
        params: p,
        residuals: r,
        jacobian: jac,
        sse,
        iterations,
        sse_trace: trace,
        termination,
    })
}
