//! Tabulate Gamma_eff(B) with noise, refit the field model, locate the minimum.

use echofit::catalog::CatalogModel;
use echofit::demo::fit_field_table;
use echofit::models::{field_linewidth_minimum, FieldModelParams};
use echofit::pipeline::ConditionAxis;
use echofit::presets::paper_field_7mk;
use echofit::synth::{synth_scan, Grid, Noise};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset = paper_field_7mk();
    let grid = Grid::Explicit(vec![0.0, 0.01, 0.02, 0.04, 0.06, 0.09, 0.12, 0.2, 0.3, 0.4, 0.6, 1.0, 1.5, 2.0]);
    let table = synth_scan(&CatalogModel::Field, &preset.params, ConditionAxis::Field, &grid, 0.007, Noise::Multiplicative(0.03), 7)?;
    print!("{}", table.to_csv());

    let fit = fit_field_table(&table, 8, 7)?;
    println!("\nfitted (truth, quoted sigma):");
    let sigma = preset.quoted_sigma.as_ref().unwrap();
    for (i, name) in fit.params.names().iter().enumerate() {
        println!(
            "  {name:<6} {:>9.4} +- {:<8.4} ({}, {})",
            fit.params.values[i], fit.std_errors[i], preset.params.values[i], sigma[i]
        );
    }
    let m = field_linewidth_minimum(&FieldModelParams::from_slice(&fit.params.values), 0.007, 2.0)?;
    println!("minimum: {:.4} kHz at {:.4} T", m.linewidth, m.field);
    Ok(())
}
