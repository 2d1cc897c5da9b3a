//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use echofit::catalog::{CatalogModel, Input};
use echofit::demo::{run_demo, DemoConfig};
use echofit::fitting::{initial_guess, multi_start_fit, FitConfig, Observation};
use echofit::gradcheck::check_all;
use echofit::models::{
    field_linewidth, field_linewidth_minimum, gamma_eff_from_tm, stimulated_echo_intensity,
    three_level_population_factor, FieldModelParams, SpectralDiffusionParams, ThreeLevelParams,
};
use echofit::pipeline::{batch_fit_3ppe, EchoTrace, PipelineConfig, TzEntry};
use echofit::presets::{paper_3ppe_7mk_009t, paper_field_7mk};
use echofit::synth::{synth_points, synth_trace, Grid, Noise, SynthSpec};
use echofit::units::MU_B_OVER_K_B;
use echofit::Time;

const T_7MK: f64 = 0.007;

// tolerances and limits
const ZERO_FIELD_TOL: f64 = 1e-9;
const ASYMPTOTE_TOL: f64 = 1e-6;
const MINIMUM_FIELD_TOL: f64 = 1e-4;
const MINIMUM_WIDTH_RANGE: (f64, f64) = (8.5, 10.0);
const GAMMA_EFF_TOL: f64 = 0.01;
const GRAD_TOL: f64 = 1e-5;
const GRAD_DRAWS: usize = 100;
const MIMS_TRIALS: u64 = 200;
const MIMS_MEDIAN_TM: f64 = 0.02;
const MIMS_MEDIAN_X: f64 = 0.05;
const NOISELESS_TOL: f64 = 1e-6;
const ROUND_TRIP_TRIALS: u64 = 50;
const BAND: f64 = 3.0;
const PASS_FRACTION: f64 = 0.9;
const CONTINUITY_TOL: f64 = 1e-8;
const TWO_LEVEL_TOL: f64 = 1e-12;
const COVERAGE_RANGE: (f64, f64) = (0.62, 0.75);
const RESTARTS: usize = 8;

const FIELD_GRID: [f64; 14] = [0.0, 0.01, 0.02, 0.04, 0.06, 0.09, 0.12, 0.2, 0.3, 0.4, 0.6, 1.0, 1.5, 2.0];
const T3PPE_POINTS: usize = 300;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn field_params() -> FieldModelParams {
    FieldModelParams::from_slice(&paper_field_7mk().params.values)
}

fn c1_zero_field() -> Outcome {
    let v = field_linewidth(&field_params(), 0.0, T_7MK).unwrap();
    outcome((v - 40.02).abs() <= ZERO_FIELD_TOL, format!("Gamma(0 T) = {v:.12} kHz"))
}

fn c2_asymptote() -> Outcome {
    let p = field_params();
    let c = MU_B_OVER_K_B / T_7MK;
    // smallest field with both exponent arguments above 50, then well beyond
    let b_min = 50.0 / (p.g2.min(p.g1) * c);
    let mut worst = 0.0f64;
    for b in [b_min * 1.0001, 2.0 * b_min, 10.0 * b_min] {
        worst = worst.max((field_linewidth(&p, b, T_7MK).unwrap() - 25.04).abs());
    }
    outcome(worst < ASYMPTOTE_TOL, format!("max |Gamma - 25.04| = {worst:.3e} kHz for B >= {b_min:.2} T"))
}

fn c3_minimum() -> Outcome {
    let p = field_params();
    let m = field_linewidth_minimum(&p, T_7MK, 2.0).unwrap();
    let c = MU_B_OVER_K_B / T_7MK;
    let analytic = (p.alpha1 * p.g1 / (p.alpha2 * p.g2)).ln() / ((p.g1 - p.g2) * c);
    let ok = (m.field - analytic).abs() < MINIMUM_FIELD_TOL
        && m.linewidth >= MINIMUM_WIDTH_RANGE.0
        && m.linewidth <= MINIMUM_WIDTH_RANGE.1;
    outcome(
        ok,
        format!("B* = {:.6} T (analytic {analytic:.6} T), Gamma* = {:.4} kHz", m.field, m.linewidth),
    )
}

fn c4_conversion() -> Outcome {
    let g = gamma_eff_from_tm(Time::from_us(40.0)).unwrap();
    outcome((g - 7.96).abs() < GAMMA_EFF_TOL, format!("T_M = 40 us -> {g:.4} kHz"))
}

fn c5_gradients() -> Outcome {
    let results = check_all(GRAD_DRAWS, 5).unwrap();
    let worst = results.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    let failing: Vec<&str> = results.iter().filter(|r| !r.passes(GRAD_TOL)).map(|r| r.model.name()).collect();
    outcome(
        failing.is_empty(),
        format!("{} models x {GRAD_DRAWS} draws, max rel error {worst:.2e}, failing {failing:?}", results.len()),
    )
}

fn mims_inputs() -> Vec<Input> {
    Grid::linear(0.00025, 0.030, 50).points().unwrap().into_iter().map(|t| [t, 0.0]).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn c6_mims_round_trip() -> Outcome {
    let truth = [1.0, 0.040, 1.3];
    let model = CatalogModel::Mims;
    let cfg = FitConfig::two_pulse().with_restarts(RESTARTS, 0);
    let fit_one = |data: &[Observation], seed: u64| {
        let g = initial_guess(&model, data).unwrap();
        multi_start_fit(&model, data, &g.params, &FitConfig { seed, ..cfg.clone() }).unwrap()
    };
    let clean = synth_points(&model, &truth, &mims_inputs(), Noise::None, 0).unwrap();
    let r = fit_one(&clean, 0);
    let noiseless = r.params.values.iter().zip(&truth).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);

    let mut tm_err = Vec::new();
    let mut x_err = Vec::new();
    for k in 0..MIMS_TRIALS {
        let data = synth_points(&model, &truth, &mims_inputs(), Noise::Multiplicative(0.02), 10_000 + k).unwrap();
        let r = fit_one(&data, k);
        tm_err.push((r.params.values[1] - truth[1]).abs() / truth[1]);
        x_err.push((r.params.values[2] - truth[2]).abs());
    }
    let (mt, mx) = (median(tm_err), median(x_err));
    outcome(
        mt < MIMS_MEDIAN_TM && mx < MIMS_MEDIAN_X && noiseless <= NOISELESS_TOL,
        format!("median |dT_M|/T_M = {mt:.4}, median |dx| = {mx:.4}, noiseless max rel error {noiseless:.1e}"),
    )
}

fn within_bands(values: &[f64], truth: &[f64], sigma: &[f64], idx: &[usize]) -> bool {
    idx.iter().all(|&i| (values[i] - truth[i]).abs() <= BAND * sigma[i])
}

fn c7_field_round_trip() -> Outcome {
    let preset = paper_field_7mk();
    let sigma = preset.quoted_sigma.clone().unwrap();
    let inputs: Vec<Input> = FIELD_GRID.iter().map(|&b| [b, T_7MK]).collect();
    let mut hits = 0;
    let mut per_param = [0usize; 5];
    for k in 0..ROUND_TRIP_TRIALS {
        let data = synth_points(&preset.model, &preset.params.values, &inputs, Noise::Multiplicative(0.03), 20_000 + k).unwrap();
        let g = initial_guess(&preset.model, &data).unwrap();
        let r = multi_start_fit(&preset.model, &data, &g.params, &FitConfig::linewidth().with_restarts(RESTARTS, k)).unwrap();
        for (i, n) in per_param.iter_mut().enumerate() {
            if within_bands(&r.params.values, &preset.params.values, &sigma, &[i]) {
                *n += 1;
            }
        }
        if within_bands(&r.params.values, &preset.params.values, &sigma, &[0, 1, 2, 3, 4]) {
            hits += 1;
        }
    }
    let frac = hits as f64 / ROUND_TRIP_TRIALS as f64;
    outcome(
        frac >= PASS_FRACTION,
        format!(
            "{hits}/{ROUND_TRIP_TRIALS} trials with all five inside 3x sigma (per parameter {per_param:?})"
        ),
    )
}

fn c8_three_pulse_round_trip() -> Outcome {
    let preset = paper_3ppe_7mk_009t();
    let sigma = preset.quoted_sigma.clone().unwrap();
    let cfg = PipelineConfig {
        restarts: 4,
        tz: vec![TzEntry { temperature_k: T_7MK, field_t: 0.09, tz_s: 2.0 }],
        ..PipelineConfig::default()
    };
    let mut hits = 0;
    for k in 0..ROUND_TRIP_TRIALS {
        let traces: Vec<EchoTrace> = [90.0, 330.0, 1068.0]
            .iter()
            .enumerate()
            .map(|(j, &ns)| {
                let spec = SynthSpec::three_pulse(
                    preset.model,
                    preset.params.clone(),
                    Time::from_ns(ns),
                    Grid::log(0.05, 7.5, T3PPE_POINTS),
                    preset.condition,
                )
                .with_noise(Noise::Multiplicative(0.03), 30_000 + 10 * k + j as u64);
                synth_trace(&spec).unwrap()
            })
            .collect();
        let r = batch_fit_3ppe(&traces, &PipelineConfig { seed: k, ..cfg.clone() }).unwrap();
        if let Ok(fit) = &r.fits[0].1 {
            if within_bands(&fit.params.values, &preset.params.values, &sigma, &[1, 2, 3, 4]) {
                hits += 1;
            }
        }
    }
    let frac = hits as f64 / ROUND_TRIP_TRIALS as f64;
    outcome(
        frac >= PASS_FRACTION,
        format!("{hits}/{ROUND_TRIP_TRIALS} trials with gamma0, gamma_TLS, gamma_SD, R_SD inside 3x sigma"),
    )
}

fn c9_three_level_limits() -> Outcome {
    let t1 = Time::from_ms(9.0);
    let mut jump = 0.0f64;
    for &t23 in &[0.1, 1.0, 9.0, 30.0, 100.0] {
        let at = |tz_ms: f64| {
            three_level_population_factor(&ThreeLevelParams::new(1.0, t1, Time::from_ms(tz_ms), 0.5), Time::from_ms(t23))
                .unwrap()
        };
        let exact = at(9.0);
        jump = jump.max((at(9.0 * (1.0 + 1e-7)) - exact).abs()).max((at(9.0 * (1.0 - 1e-7)) - exact).abs());
    }
    let mut worst = 0.0f64;
    for &(t12_us, t23_ms) in &[(0.09, 0.05), (0.33, 1.0), (1.068, 5.0), (5.0, 7.5)] {
        let p = ThreeLevelParams::new(0.7, t1, Time::from_s(2.0), 0.0);
        let sd = SpectralDiffusionParams::new(7.96, 0.0, 1.02, 0.0, Time::from_us(50.0));
        let (t12, t23) = (Time::from_us(t12_us), Time::from_ms(t23_ms));
        let v = stimulated_echo_intensity(&p, &sd, t12, t23).unwrap();
        let two_level = 0.7 * (-2.0 * t23.ms() / t1.ms()).exp() * (-4.0 * std::f64::consts::PI * t12.ms() * 7.96).exp();
        worst = worst.max((v - two_level).abs() / two_level);
    }
    outcome(
        jump < CONTINUITY_TOL && worst <= TWO_LEVEL_TOL,
        format!("jump across T_Z = T1 is {jump:.2e}; two-level reduction rel error {worst:.2e}"),
    )
}

fn c10_coverage() -> Outcome {
    let truth = [1.0, 0.040, 1.3];
    let model = CatalogModel::Mims;
    let mut covered = [0usize; 3];
    for k in 0..MIMS_TRIALS {
        let data = synth_points(&model, &truth, &mims_inputs(), Noise::Multiplicative(0.02), 40_000 + k).unwrap();
        let g = initial_guess(&model, &data).unwrap();
        let r = multi_start_fit(&model, &data, &g.params, &FitConfig::two_pulse().with_restarts(RESTARTS, k)).unwrap();
        for i in 0..3 {
            if (r.params.values[i] - truth[i]).abs() <= r.std_errors[i] {
                covered[i] += 1;
            }
        }
    }
    let frac: Vec<f64> = covered.iter().map(|&c| c as f64 / MIMS_TRIALS as f64).collect();
    let ok = frac.iter().all(|f| *f >= COVERAGE_RANGE.0 && *f <= COVERAGE_RANGE.1);
    outcome(
        ok,
        format!("1-sigma coverage I0 {:.3}, T_M {:.3}, x {:.3} over {MIMS_TRIALS} fits", frac[0], frac[1], frac[2]),
    )
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = DemoConfig { seed: 1, ..DemoConfig::default() };
    let a = run_demo(&cfg, &dir.path().join("a")).unwrap();
    let b = run_demo(&cfg, &dir.path().join("b")).unwrap();
    let mut differing = Vec::new();
    for (pa, pb) in a.files.iter().zip(&b.files) {
        if std::fs::read(pa).unwrap() != std::fs::read(pb).unwrap() {
            differing.push(pa.file_name().unwrap().to_string_lossy().to_string());
        }
    }
    let ok = a.files.len() == b.files.len() && differing.is_empty() && a.all_passed();
    outcome(ok, format!("{} files compared, {} differ, demo checks passed: {}", a.files.len(), differing.len(), a.all_passed()))
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "zero-field identity", Duration::from_secs(1), c1_zero_field),
        (2, "high-field asymptote", Duration::from_secs(1), c2_asymptote),
        (3, "field minimum", Duration::from_secs(1), c3_minimum),
        (4, "Gamma_eff from T_M", Duration::from_secs(1), c4_conversion),
        (5, "gradient suite", Duration::from_secs(10), c5_gradients),
        (6, "two-pulse round trip", Duration::from_secs(30), c6_mims_round_trip),
        (7, "field-model round trip", Duration::from_secs(60), c7_field_round_trip),
        (8, "three-pulse round trip", Duration::from_secs(120), c8_three_pulse_round_trip),
        (9, "three-level limits", Duration::from_secs(1), c9_three_level_limits),
        (10, "uncertainty calibration", Duration::from_secs(60), c10_coverage),
        (11, "demo determinism", Duration::from_secs(60), c11_determinism),
    ];
    let mut failures = 0;
    for (n, name, limit, f) in criteria {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let in_time = took <= limit;
        let passed = o.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "{} criterion {n:>2} {name}: {}; {:.2} s (limit {} s){}",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { " OVER TIME" }
        );
    }
    println!("{failures} of 11 criteria failed");
    if failures > 0 {
        std::process::exit(1);
    }
}
