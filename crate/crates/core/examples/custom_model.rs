//! Fit a model that is not in the catalogue by implementing `Model`.

use echofit::catalog::{Bound, Input, Model, ModelId, ModelParams};
use echofit::fitting::{fit, FitConfig, Observation};
use echofit::models::ModelError;

/// Plain exponential decay `I0 exp(-2 t / T_M)`, reusing the Mims parameter
/// layout with x pinned to 1.
struct Exponential;

impl Model for Exponential {
    fn id(&self) -> ModelId {
        ModelId::Mims
    }

    fn eval(&self, p: &[f64], x: Input) -> Result<f64, ModelError> {
        Ok(p[0] * (-2.0 * x[0] / p[1]).exp())
    }

    fn gradient(&self, p: &[f64], x: Input, grad: &mut [f64]) -> Result<f64, ModelError> {
        let e = (-2.0 * x[0] / p[1]).exp();
        grad[0] = e;
        grad[1] = p[0] * e * 2.0 * x[0] / (p[1] * p[1]);
        grad[2] = 0.0;
        Ok(p[0] * e)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data: Vec<Observation> = (1..40)
        .map(|i| {
            let t = 0.001 * i as f64;
            let wobble = 1.0 + 0.01 * ((i * 7919) % 13) as f64 / 13.0 - 0.005;
            Observation::new([t, 0.0], 0.9 * (-2.0 * t / 0.03).exp() * wobble)
        })
        .collect();
    let init = ModelParams::new(ModelId::Mims, vec![1.0, 0.02, 1.0])?.fix("x");
    assert!(matches!(init.bounds[1], Bound::Positive));
    let r = fit(&Exponential, &data, &init, &FitConfig::decay())?;
    println!("I0 = {:.4} +- {:.4}", r.params.values[0], r.std_errors[0]);
    println!("T_M = {:.5} ms +- {:.5}", r.params.values[1], r.std_errors[1]);
    Ok(())
}
