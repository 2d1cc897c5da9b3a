use echofit::catalog::{CatalogModel, ModelId, ModelParams};
use echofit::fitting::{fit, initial_guess, FitConfig, Observation};
use echofit::models::{field_linewidth_minimum, FieldModelParams};
use echofit::pipeline::{
    batch_fit_2ppe, batch_fit_3ppe, load_trace, write_trace, Condition, EchoTrace, PipelineConfig, TzEntry,
};
use echofit::presets::{paper_3ppe_7mk_009t, paper_field_7mk};
use echofit::synth::{synth_trace, Grid, Noise, SynthSpec};
use echofit::{Model, Time};
use echofit::units::TimeUnit;

fn mims_trace(b: f64, tm_us: f64, seed: u64) -> EchoTrace {
    let p = ModelParams::new(ModelId::Mims, vec![0.5, tm_us * 1e-3, 1.3]).unwrap();
    synth_trace(
        &SynthSpec::two_pulse(p, Grid::linear(0.00005, 2.0 * tm_us * 1e-3, 100), Condition::new(0.007, b))
            .with_noise(Noise::Multiplicative(0.02), seed),
    )
    .unwrap()
}

fn cfg() -> PipelineConfig {
    PipelineConfig { seed: 3, restarts: 4, ..Default::default() }
}

#[test]
fn single_trace_batch_equals_direct_fit() {
    let t = mims_trace(0.1, 30.0, 1);
    let batch = batch_fit_2ppe(std::slice::from_ref(&t), &cfg()).unwrap();
    assert_eq!(batch.gamma_eff.rows.len(), 1);
    let direct = echofit::pipeline::fit_2ppe_trace(&t, &cfg()).unwrap();
    let tm = direct.params.values[1];
    let gamma = 1.0 / (std::f64::consts::PI * tm);
    assert_eq!(batch.gamma_eff.rows[0].value, gamma);
    assert_eq!(batch.i0.rows[0].value, direct.params.values[0]);
    let se = direct.std_errors[1] / (std::f64::consts::PI * tm * tm);
    assert_eq!(batch.gamma_eff.rows[0].stderr, se);
}

#[test]
fn corrupted_trace_is_isolated() {
    let good: Vec<EchoTrace> = (0..4).map(|k| mims_trace(0.1 * (k + 1) as f64, 20.0 + 5.0 * k as f64, k)).collect();
    let mut bad = mims_trace(0.05, 25.0, 9);
    bad.intensity[10] = f64::NAN;
    let mut all = good.clone();
    all.insert(2, bad);
    let with = batch_fit_2ppe(&all, &cfg()).unwrap();
    let without = batch_fit_2ppe(&good, &cfg()).unwrap();
    assert_eq!(with.gamma_eff.rows.len(), 5);
    assert_eq!(with.gamma_eff.rows.iter().filter(|r| r.is_failed()).count(), 1);
    let valid: Vec<_> = with.gamma_eff.valid_rows().cloned().collect();
    assert_eq!(valid, without.gamma_eff.rows);
    let failed = with.gamma_eff.rows.iter().find(|r| r.is_failed()).unwrap();
    assert_eq!(failed.condition.field_t, 0.05);
}

#[test]
fn batch_is_deterministic_and_sorted() {
    let traces: Vec<EchoTrace> = [0.3, 0.1, 0.2].iter().enumerate().map(|(k, &b)| mims_trace(b, 25.0, k as u64)).collect();
    let a = batch_fit_2ppe(&traces, &cfg()).unwrap();
    let b = batch_fit_2ppe(&traces, &cfg()).unwrap();
    assert_eq!(a.gamma_eff, b.gamma_eff);
    let fields: Vec<f64> = a.gamma_eff.rows.iter().map(|r| r.condition.field_t).collect();
    assert_eq!(fields, vec![0.1, 0.2, 0.3]);
}

#[test]
fn mixed_sequences_rejected() {
    let p = paper_3ppe_7mk_009t();
    let three = synth_trace(&SynthSpec::three_pulse(p.model, p.params, Time::from_ns(90.0), Grid::log(0.05, 7.5, 20), p.condition)).unwrap();
    assert!(batch_fit_2ppe(&[mims_trace(0.1, 30.0, 1), three], &cfg()).is_err());
}

#[test]
fn field_grid_minimum_structure() {
    let field = paper_field_7mk();
    let grid = [0.0, 0.02, 0.04, 0.06, 0.09, 0.14, 0.2, 0.3, 0.5, 0.8, 1.2, 2.0];
    let traces: Vec<EchoTrace> = grid
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            let g = field.model.eval(&field.params.values, [b, 0.007]).unwrap();
            mims_trace(b, 1e3 / (std::f64::consts::PI * g), 100 + k as u64)
        })
        .collect();
    let r = batch_fit_2ppe(&traces, &cfg()).unwrap();
    let min_row = r.gamma_eff.valid_rows().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
    let m = field_linewidth_minimum(&FieldModelParams::from_slice(&field.params.values), 0.007, 2.0).unwrap();
    let nearest = grid.iter().copied().min_by(|a, b| (a - m.field).abs().total_cmp(&(b - m.field).abs())).unwrap();
    assert_eq!(min_row.condition.field_t, nearest);
}

fn three_pulse_set(beta: f64, noise: f64, points: usize, seed: u64) -> Vec<EchoTrace> {
    let p = paper_3ppe_7mk_009t();
    let mut params = p.params.clone();
    params.set("beta", beta);
    [90.0, 330.0, 1068.0]
        .iter()
        .enumerate()
        .map(|(k, &ns)| {
            synth_trace(
                &SynthSpec::three_pulse(p.model, params.clone(), Time::from_ns(ns), Grid::log(0.05, 7.5, points), p.condition)
                    .with_noise(Noise::Multiplicative(noise), seed * 10 + k as u64),
            )
            .unwrap()
        })
        .collect()
}

fn cfg3() -> PipelineConfig {
    PipelineConfig {
        tz: vec![TzEntry { temperature_k: 0.007, field_t: 0.09, tz_s: 2.0 }],
        ..cfg()
    }
}

#[test]
fn three_pulse_recovery_within_quoted_bands() {
    let r = batch_fit_3ppe(&three_pulse_set(0.5, 0.03, 300, 1), &cfg3()).unwrap();
    let fit = r.fits[0].1.as_ref().unwrap();
    let sigma = paper_3ppe_7mk_009t().quoted_sigma.unwrap();
    let truth = paper_3ppe_7mk_009t().params.values;
    for i in 1..5 {
        assert!((fit.params.values[i] - truth[i]).abs() <= 3.0 * sigma[i], "param {i}");
    }
    assert!(r.gamma0.rows[0].flags.is_empty());
    // T1 and T_Z stay at their configured values
    assert_eq!(fit.params.values[6], 9.0);
    assert_eq!(fit.params.values[7], 2000.0);
}

#[test]
fn zero_branching_ratio_recovered() {
    let r = batch_fit_3ppe(&three_pulse_set(0.0, 0.01, 300, 2), &cfg3()).unwrap();
    assert!(r.beta.rows[0].value < 0.02, "beta {}", r.beta.rows[0].value);
}

#[test]
fn coarse_waiting_time_grid_is_well_posed() {
    let r = batch_fit_3ppe(&three_pulse_set(0.5, 0.03, 12, 3), &cfg3()).unwrap();
    let fit = r.fits[0].1.as_ref().unwrap();
    assert!(fit.dof > 0);
    assert!(fit.converged);
}

#[test]
fn missing_tz_is_flagged() {
    let r = batch_fit_3ppe(&three_pulse_set(0.5, 0.03, 40, 4), &cfg()).unwrap();
    assert!(r.beta.rows[0].flags.iter().any(|f| f.to_string() == "assumed-tz"));
}

#[test]
fn trace_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = mims_trace(0.09, 30.0, 5);
    let path = dir.path().join("t.txt");
    write_trace(&t, &path, TimeUnit::Ms).unwrap();
    assert_eq!(load_trace(&path).unwrap(), t);
    // microsecond files hold the same values to the last few ulps
    write_trace(&t, &path, TimeUnit::Us).unwrap();
    let back = load_trace(&path).unwrap();
    for (a, b) in back.times_ms.iter().zip(&t.times_ms) {
        assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
    }
    assert_eq!(back.intensity, t.intensity);
    assert_eq!(back.provenance, t.provenance);
}

#[test]
fn demo_report_contains_consistent_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = echofit::demo::run_demo(&echofit::demo::DemoConfig::default(), dir.path()).unwrap();
    assert!(out.all_passed());
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    let m = field_linewidth_minimum(&FieldModelParams::from_slice(&out.field_fit.params.values), 0.007, 2.0).unwrap();
    assert!(summary.contains(&format!("B_star_T: {}", echofit::pipeline::sig6(m.field))));
    assert!(summary.contains(&format!("gamma_star_kHz: {}", echofit::pipeline::sig6(m.linewidth))));
}

#[test]
fn guess_then_fit_on_loaded_trace() {
    let t = mims_trace(0.0, 8.0, 6);
    let obs: Vec<Observation> = t.times_ms.iter().zip(&t.intensity).map(|(&x, &y)| Observation::new([x, 0.0], y)).collect();
    let g = initial_guess(&CatalogModel::Mims, &obs).unwrap();
    let r = fit(&CatalogModel::Mims, &obs, &g.params, &FitConfig::two_pulse()).unwrap();
    assert!((r.params.values[1] / 0.008 - 1.0).abs() < 0.02);
}
