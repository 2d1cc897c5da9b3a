//! Fit a noisy two-pulse decay and print parameters with 1-sigma errors.

use echofit::catalog::{CatalogModel, ModelId, ModelParams};
use echofit::fitting::{initial_guess, multi_start_fit, uncertainties, FitConfig, Observation};
use echofit::models::gamma_eff_from_tm;
use echofit::pipeline::Condition;
use echofit::synth::{synth_trace, Grid, Modulation, Noise, SynthSpec};
use echofit::Time;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = ModelParams::new(ModelId::Mims, vec![0.8, Time::from_us(35.0).ms(), 1.3])?;
    let spec = SynthSpec::two_pulse(truth, Grid::linear(Time::from_us(0.05).ms(), 0.07, 150), Condition::new(0.007, 0.09))
        .with_noise(Noise::Multiplicative(0.02), 42)
        .with_modulation(Modulation::default());
    let trace = synth_trace(&spec)?;

    let data: Vec<Observation> = trace
        .times_ms
        .iter()
        .zip(&trace.intensity)
        .map(|(&t, &y)| Observation::new([t, 0.0], y))
        .collect();
    // the default two-pulse window drops the modulated first 250 ns
    let cfg = FitConfig::two_pulse().with_restarts(8, 1);
    let guess = initial_guess(&CatalogModel::Mims, &data)?;
    let fit = multi_start_fit(&CatalogModel::Mims, &data, &guess.params, &cfg)?;

    println!("{} points in window, {:?} after {} iterations", fit.n_points, fit.termination, fit.iterations);
    for u in uncertainties(&fit) {
        println!("  {:<3} = {:.6} +- {:.6}", u.name, u.value, u.std_error.unwrap_or(f64::INFINITY));
    }
    let tm = fit.value("T_M").unwrap();
    println!("Gamma_eff = {:.3} kHz", gamma_eff_from_tm(Time::from_ms(tm))?);
    println!("restarts agreeing: {}/{}", fit.n_restarts_agreeing, fit.restarts);
    Ok(())
}
