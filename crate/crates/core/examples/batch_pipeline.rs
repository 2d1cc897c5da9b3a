//! Write trace files, load them back, batch-fit and emit a report.
//!
//! Output goes to `$ECHOFIT_OUT_DIR/batch_pipeline` or a temp directory.

use echofit::catalog::{ModelId, ModelParams};
use echofit::pipeline::{batch_fit_2ppe, emit_report, load_trace, write_trace, Condition, PipelineConfig, Report};
use echofit::synth::{synth_trace, Grid, Noise, SynthSpec};
use echofit::units::TimeUnit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = std::env::var_os("ECHOFIT_OUT_DIR").map_or_else(std::env::temp_dir, Into::into);
    let dir = base.join("batch_pipeline");
    std::fs::create_dir_all(dir.join("traces"))?;

    let mut paths = Vec::new();
    for (k, (b, tm_us)) in [(0.0, 8.0), (0.09, 32.0), (0.5, 26.0), (2.0, 16.0)].into_iter().enumerate() {
        let p = ModelParams::new(ModelId::Mims, vec![0.5, tm_us * 1e-3, 1.3])?;
        let spec = SynthSpec::two_pulse(p, Grid::linear(5e-5, 2.0 * tm_us * 1e-3, 120), Condition::new(0.007, b))
            .with_noise(Noise::Multiplicative(0.02), k as u64);
        let path = dir.join("traces").join(format!("trace_{k}.txt"));
        write_trace(&synth_trace(&spec)?, &path, TimeUnit::Us)?;
        paths.push(path);
    }

    let cfg = PipelineConfig::from_toml("seed = 11\nrestarts = 4\nnormalize_i0 = true\n")?;
    let traces = paths.iter().map(|p| load_trace(p)).collect::<Result<Vec<_>, _>>()?;
    let result = batch_fit_2ppe(&traces, &cfg)?;
    print!("{}", result.gamma_eff.to_csv());

    let report = Report {
        title: "batch example".into(),
        config: cfg.to_toml(),
        tables: result.tables(),
        fits: result.fits.iter().map(|(c, r)| ("2ppe".to_string(), *c, r.as_ref().map_err(Clone::clone))).collect(),
        ..Default::default()
    };
    for f in emit_report(&report, &dir.join("report"))? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
