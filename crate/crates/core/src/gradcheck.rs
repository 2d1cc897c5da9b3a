//! Central finite-difference verification of the analytic model gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{CatalogModel, Input, Model, ModelId};
use crate::models::ModelError;
use crate::units::Time;

/// Derivatives below this multiple of the finite-difference rounding bound
/// `eps |f| / h` are compared against that bound instead of their own size.
const ROUNDING_MARGIN: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub model: ModelId,
    pub draws: usize,
    /// Largest relative discrepancy over all draws and parameters.
    pub max_rel_error: f64,
    /// Parameter name at which the largest discrepancy occurred.
    pub worst_param: &'static str,
}

impl GradCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

/// Central differences with step `1e-6 * max(|p|, 1)`.
pub fn central_difference(model: &dyn Model, p: &[f64], x: Input) -> Result<Vec<f64>, ModelError> {
    let mut out = Vec::with_capacity(p.len());
    let mut q = p.to_vec();
    for i in 0..p.len() {
        let h = 1e-6 * p[i].abs().max(1.0);
        q[i] = p[i] + h;
        let up = model.eval(&q, x)?;
        q[i] = p[i] - h;
        let down = model.eval(&q, x)?;
        q[i] = p[i];
        out.push((up - down) / (2.0 * h));
    }
    Ok(out)
}

/// Relative discrepancy, with `floor` guarding derivatives that vanish to
/// working precision.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor).max(f64::MIN_POSITIVE)
}

/// Floor for [`relative_error`] at a point where the model value is `f` and
/// the parameter is `p`.
pub fn rounding_floor(f: f64, p: f64) -> f64 {
    let h = 1e-6 * p.abs().max(1.0);
    ROUNDING_MARGIN * f64::EPSILON * f.abs() / h
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Draws a physically sensible parameter vector and input point.
///
/// Ranges cover the experimental regime (mK temperatures, fields up to 2 T,
/// ns to ms delays) while keeping every parameter at least one finite
/// difference step away from its bounds.
pub fn random_draw(model: &CatalogModel, rng: &mut ChaCha8Rng) -> (Vec<f64>, Input) {
    match *model {
        CatalogModel::Mims => {
            let tm = log_uniform(rng, 0.008, 0.2);
            let x: f64 = rng.random_range(0.5..3.0);
            // delays where the decayed intensity is still above e^-8
            let decay: f64 = rng.random_range(1e-3..8.0);
            let t = 0.5 * tm * (0.5 * decay).powf(1.0 / x);
            (vec![rng.random_range(0.1..2.0), tm, x], [t, 0.0])
        }
        CatalogModel::Field => (
            vec![
                rng.random_range(1.0..20.0),
                rng.random_range(1.0..50.0),
                rng.random_range(1.0..30.0),
                rng.random_range(0.05..0.6),
                rng.random_range(0.001..0.05),
            ],
            [rng.random_range(0.0..2.0), log_uniform(rng, 0.005, 0.6)],
        ),
        CatalogModel::Temperature => (
            vec![
                rng.random_range(1.0..20.0),
                rng.random_range(1.0..200.0),
                rng.random_range(0.6..2.8),
            ],
            [log_uniform(rng, 0.005, 0.6), 0.0],
        ),
        CatalogModel::Sech2 => (
            vec![rng.random_range(1.0..60.0), rng.random_range(0.05..2.0)],
            [rng.random_range(0.0..0.5), log_uniform(rng, 0.005, 0.6)],
        ),
        CatalogModel::SpectralDiffusion { t0 } => (
            sd_params(rng),
            [
                log_uniform(rng, 5e-5, 2e-3),
                log_uniform(rng, t0.ms(), 100.0 * t0.ms()),
            ],
        ),
        CatalogModel::SpectralDiffusionT23 { t0 } => (
            sd_params(rng),
            [log_uniform(rng, t0.ms(), 200.0 * t0.ms()), 0.0],
        ),
        CatalogModel::ThreeLevel => {
            let (beta, t1, tz) = three_level_params(rng);
            (vec![beta, t1, tz], [log_uniform(rng, 0.01, 30.0), 0.0])
        }
        CatalogModel::StimulatedEcho { t0 } => {
            let sd = sd_params(rng);
            let (beta, t1, tz) = three_level_params(rng);
            (
                vec![
                    rng.random_range(0.2..2.0),
                    sd[0],
                    sd[1],
                    sd[2],
                    sd[3],
                    beta,
                    t1,
                    tz,
                ],
                [
                    log_uniform(rng, 5e-5, 2e-3),
                    log_uniform(rng, t0.ms(), 150.0 * t0.ms()),
                ],
            )
        }
    }
}

fn sd_params(rng: &mut ChaCha8Rng) -> Vec<f64> {
    vec![
        rng.random_range(1.0..20.0),
        rng.random_range(1.0..60.0),
        log_uniform(rng, 0.05, 5.0),
        rng.random_range(0.5..30.0),
    ]
}

fn three_level_params(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let t1 = rng.random_range(3.0..20.0);
    // keep T_Z clear of T1; the degenerate branch is covered separately
    let tz = if rng.random_bool(0.5) {
        log_uniform(rng, 50.0, 5000.0)
    } else {
        rng.random_range(0.2..0.8) * t1
    };
    (rng.random_range(0.05..1.95), t1, tz)
}

/// Compares analytic and finite-difference gradients on `draws` seeded
/// random points.
pub fn check_model(model: &CatalogModel, draws: usize, seed: u64) -> Result<GradCheck, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (model.id() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let specs = model.param_specs();
    let mut worst = (0.0f64, specs[0].name);
    let mut analytic = vec![0.0; specs.len()];
    for _ in 0..draws {
        let (p, x) = random_draw(model, &mut rng);
        let f = model.gradient(&p, x, &mut analytic)?;
        let numeric = central_difference(model, &p, x)?;
        for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            let e = relative_error(*a, *n, rounding_floor(f, p[i]));
            if e > worst.0 || e.is_nan() {
                worst = (if e.is_nan() { f64::INFINITY } else { e }, specs[i].name);
            }
        }
    }
    Ok(GradCheck {
        model: model.id(),
        draws,
        max_rel_error: worst.0,
        worst_param: worst.1,
    })
}

/// Runs [`check_model`] across the whole catalogue.
pub fn check_all(draws: usize, seed: u64) -> Result<Vec<GradCheck>, ModelError> {
    ModelId::ALL
        .iter()
        .map(|id| check_model(&CatalogModel::with_t0(*id, Time::from_us(50.0)), draws, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_uses_floor() {
        assert_eq!(relative_error(0.0, 0.0, 0.0), 0.0);
        assert!(relative_error(1e-12, 2e-12, rounding_floor(50.0, 0.3)) < 1e-5);
        assert!((relative_error(1.0, 1.1, 1e-6) - 0.1 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn draws_are_valid_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for id in ModelId::ALL {
            let m = CatalogModel::new(id);
            for _ in 0..50 {
                let (p, x) = random_draw(&m, &mut rng);
                assert!(m.eval(&p, x).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn whole_catalogue_matches_finite_differences() {
        for seed in [1, 7] {
            for c in check_all(100, seed).unwrap() {
                assert!(c.passes(1e-5), "{:?}", c);
            }
        }
    }
}
