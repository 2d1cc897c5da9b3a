//! Fit the floor-plus-power-law temperature model to a synthetic scan.

use echofit::catalog::CatalogModel;
use echofit::fitting::{initial_guess, multi_start_fit, FitConfig, Observation};
use echofit::pipeline::ConditionAxis;
use echofit::presets::illustrative_temp;
use echofit::synth::{synth_scan, Grid, Noise};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = illustrative_temp();
    let table = synth_scan(&p.model, &p.params, ConditionAxis::Temperature, &Grid::log(0.007, 0.55, 25), 0.09, Noise::Multiplicative(0.03), 3)?;
    let obs: Vec<Observation> = table
        .rows
        .iter()
        .map(|r| Observation::new([r.condition.temperature_k, 0.0], r.value))
        .collect();
    let guess = initial_guess(&CatalogModel::Temperature, &obs)?;
    println!("guess: {:?}", guess.params.values);
    let fit = multi_start_fit(&CatalogModel::Temperature, &obs, &guess.params, &FitConfig::linewidth().with_restarts(4, 3))?;
    for (i, n) in fit.params.names().iter().enumerate() {
        println!("{n:<12} {:>9.4} +- {:.4}  (truth {})", fit.params.values[i], fit.std_errors[i], p.params.values[i]);
    }
    Ok(())
}
