//! Joint fit of three stimulated-echo traces that share one condition.

use echofit::pipeline::{batch_fit_3ppe, EchoTrace, PipelineConfig, TzEntry};
use echofit::presets::paper_3ppe_7mk_009t;
use echofit::synth::{synth_trace, Grid, Noise, SynthSpec};
use echofit::Time;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = paper_3ppe_7mk_009t();
    let traces = [90.0, 330.0, 1068.0]
        .iter()
        .enumerate()
        .map(|(k, &ns)| {
            let spec = SynthSpec::three_pulse(p.model, p.params.clone(), Time::from_ns(ns), Grid::log(0.05, 7.5, 300), p.condition)
                .with_noise(Noise::Multiplicative(0.03), 100 + k as u64);
            synth_trace(&spec)
        })
        .collect::<Result<Vec<EchoTrace>, _>>()?;

    let cfg = PipelineConfig {
        seed: 5,
        tz: vec![TzEntry { temperature_k: 0.007, field_t: 0.09, tz_s: 2.0 }],
        ..PipelineConfig::default()
    };
    let result = batch_fit_3ppe(&traces, &cfg)?;
    let fit = result.fits[0].1.as_ref().map_err(|e| e.clone())?;
    let sigma = p.quoted_sigma.unwrap();
    println!("{:<10} {:>9} {:>9} {:>7} {:>7}", "param", "fitted", "stderr", "truth", "quoted");
    for (i, n) in fit.params.names().iter().enumerate() {
        let tag = if fit.params.fixed[i] { " fixed" } else { "" };
        println!(
            "{n:<10} {:>9.4} {:>9.4} {:>7} {:>7}{tag}",
            fit.params.values[i], fit.std_errors[i], p.params.values[i], sigma[i]
        );
    }
    Ok(())
}
