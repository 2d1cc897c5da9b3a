//! End-to-end run on synthetic data generated from the built-in presets.
//!
//! Two-pulse traces over a field grid are fitted trace by trace, the
//! resulting Gamma_eff(B) table is fitted with the field model, and
//! three-pulse traces at three fields are fitted jointly per field. The
//! report carries the embedded consistency checks.

use std::path::{Path, PathBuf};

use crate::catalog::{CatalogModel, Model, ModelId, ModelParams};
use crate::fitting::{initial_guess, multi_start_fit, FitConfig, FitResult, Observation};
use crate::models::{field_linewidth_minimum, gamma_eff_from_tm, tm_from_gamma_eff, FieldMinimum, FieldModelParams};
use crate::pipeline::{
    batch_fit_2ppe, batch_fit_3ppe, emit_report, sig6, trace_to_string, Condition, EchoTrace, PipelineConfig, Report,
    ScanTable, TzEntry,
};
use crate::presets::{paper_3ppe_7mk_009t, paper_field_7mk};
use crate::synth::{synth_trace, Grid, Modulation, Noise, SynthSpec};
use crate::units::{Time, TimeUnit, MU_B_OVER_K_B};

/// Fields of the two-pulse scan, in tesla.
pub const DEMO_FIELDS: [f64; 20] = [
    0.0, 0.01, 0.02, 0.03, 0.04, 0.06, 0.09, 0.14, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.25, 1.5, 1.75, 2.0,
];
/// Three-pulse conditions: (field in T, branching ratio).
pub const DEMO_3PPE: [(f64, f64); 3] = [(0.0, 0.2), (0.09, 0.5), (2.0, 0.3)];
pub const DEMO_T12_NS: [f64; 3] = [90.0, 330.0, 1068.0];
pub const DEMO_TEMPERATURE_K: f64 = 0.007;
const STRETCH: f64 = 1.3;
/// The 3x band holds for ~95% of seeds; the gate is looser so that the demo
/// only fails on a real regression.
const RECOVERY_GATE: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct DemoConfig {
    pub seed: u64,
    pub restarts: usize,
    pub two_pulse_noise: f64,
    pub three_pulse_noise: f64,
    /// Points per three-pulse trace.
    pub t23_points: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            restarts: 8,
            two_pulse_noise: 0.02,
            three_pulse_noise: 0.03,
            t23_points: 300,
        }
    }
}

impl DemoConfig {
    pub fn describe(&self) -> String {
        format!(
            "seed = {}\nrestarts = {}\ntwo_pulse_noise = {}\nthree_pulse_noise = {}\nt23_points = {}\ntemperature_K = {}\n",
            self.seed, self.restarts, self.two_pulse_noise, self.three_pulse_noise, self.t23_points, DEMO_TEMPERATURE_K
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
    pub field_fit: FitResult,
    pub fitted_minimum: FieldMinimum,
}

impl DemoOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Zero-delay intensity rising with field, from ~0.3 to ~0.8.
fn i0_ramp(b: f64) -> f64 {
    0.3 + 0.5 * (1.0 - (-b / 0.3).exp())
}

fn two_pulse_traces(cfg: &DemoConfig) -> Result<Vec<EchoTrace>, String> {
    let field = paper_field_7mk();
    DEMO_FIELDS
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            let gamma = field.model.eval(&field.params.values, [b, DEMO_TEMPERATURE_K]).map_err(|e| e.to_string())?;
            let tm = tm_from_gamma_eff(gamma).map_err(|e| e.to_string())?;
            let params = ModelParams::new(ModelId::Mims, vec![i0_ramp(b), tm.ms(), STRETCH]).map_err(|e| e.to_string())?;
            let spec = SynthSpec::two_pulse(
                params,
                Grid::linear(Time::from_us(0.05).ms(), 2.0 * tm.ms(), 120),
                Condition::new(DEMO_TEMPERATURE_K, b),
            )
            .with_noise(Noise::Multiplicative(cfg.two_pulse_noise), cfg.seed.wrapping_mul(1000).wrapping_add(k as u64))
            .with_modulation(Modulation::default());
            synth_trace(&spec).map_err(|e| e.to_string())
        })
        .collect()
}

fn three_pulse_traces(cfg: &DemoConfig) -> Result<Vec<EchoTrace>, String> {
    let preset = paper_3ppe_7mk_009t();
    let mut out = Vec::new();
    for (c, &(b, beta)) in DEMO_3PPE.iter().enumerate() {
        let mut params = preset.params.clone();
        params.set("beta", beta);
        for (k, &ns) in DEMO_T12_NS.iter().enumerate() {
            let spec = SynthSpec::three_pulse(
                preset.model,
                params.clone(),
                Time::from_ns(ns),
                Grid::log(0.05, 7.5, cfg.t23_points),
                Condition::new(DEMO_TEMPERATURE_K, b),
            )
            .with_noise(
                Noise::Multiplicative(cfg.three_pulse_noise),
                cfg.seed.wrapping_mul(1000).wrapping_add(500 + 10 * c as u64 + k as u64),
            );
            out.push(synth_trace(&spec).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Fits the field model to a Gamma_eff table, weighting by the row errors
/// where they are positive and relatively otherwise.
pub fn fit_field_table(table: &ScanTable, restarts: usize, seed: u64) -> Result<FitResult, String> {
    let obs: Vec<Observation> = table
        .valid_rows()
        .map(|r| {
            let o = Observation::new([r.condition.field_t, r.condition.temperature_k], r.value);
            if r.stderr.is_finite() && r.stderr > 0.0 { o.with_sigma(r.stderr) } else { o }
        })
        .collect();
    let guess = initial_guess(&CatalogModel::Field, &obs).map_err(|e| e.to_string())?;
    let cfg = FitConfig::linewidth().with_restarts(restarts, seed);
    multi_start_fit(&CatalogModel::Field, &obs, &guess.params, &cfg).map_err(|e| e.to_string())
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Runs the demo and writes the report into `out_dir`.
pub fn run_demo(cfg: &DemoConfig, out_dir: &Path) -> Result<DemoOutcome, String> {
    let field = paper_field_7mk();
    let fp = FieldModelParams::from_slice(&field.params.values);
    let preset3 = paper_3ppe_7mk_009t();
    let mut checks = Vec::new();

    let g0 = field.model.eval(&field.params.values, [0.0, DEMO_TEMPERATURE_K]).map_err(|e| e.to_string())?;
    checks.push(check(
        "zero-field linewidth",
        (g0 - 40.02).abs() < 1e-9,
        format!("Gamma(0) = {} kHz (expected gamma0 + alpha1 = 40.02)", sig6(g0)),
    ));

    let truth_min = field_linewidth_minimum(&fp, DEMO_TEMPERATURE_K, 2.0).map_err(|e| e.to_string())?;
    let c = MU_B_OVER_K_B / DEMO_TEMPERATURE_K;
    let analytic = (fp.alpha1 * fp.g1 / (fp.alpha2 * fp.g2)).ln() / ((fp.g1 - fp.g2) * c);
    checks.push(check(
        "field minimum of preset",
        (truth_min.field - analytic).abs() < 1e-4 && (8.5..=10.0).contains(&truth_min.linewidth),
        format!(
            "B* = {} T (stationarity {} T), Gamma* = {} kHz",
            sig6(truth_min.field),
            sig6(analytic),
            sig6(truth_min.linewidth)
        ),
    ));

    let traces2 = two_pulse_traces(cfg)?;
    let pcfg = PipelineConfig {
        seed: cfg.seed,
        restarts: cfg.restarts,
        ..PipelineConfig::default()
    };
    let two = batch_fit_2ppe(&traces2, &pcfg)?;
    let failed2 = two.gamma_eff.rows.iter().filter(|r| !r.flags.is_empty()).count();
    checks.push(check("two-pulse rows unflagged", failed2 == 0, format!("{failed2} flagged rows")));

    let nearest = DEMO_FIELDS
        .iter()
        .copied()
        .min_by(|a, b| (a - truth_min.field).abs().total_cmp(&(b - truth_min.field).abs()))
        .unwrap_or(0.0);
    let table_min = two
        .gamma_eff
        .valid_rows()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .map(|r| r.condition.field_t);
    checks.push(check(
        "Gamma_eff table minimum",
        table_min == Some(nearest),
        format!(
            "lowest fitted Gamma_eff at {} T, grid point nearest B* is {nearest} T",
            table_min.map_or("-".into(), sig6)
        ),
    ));

    let field_fit = fit_field_table(&two.gamma_eff, cfg.restarts, cfg.seed)?;
    let fitted = FieldModelParams::from_slice(&field_fit.params.values);
    let fitted_min = field_linewidth_minimum(&fitted, DEMO_TEMPERATURE_K, 2.0).map_err(|e| e.to_string())?;
    let at_min = CatalogModel::Field
        .eval(&field_fit.params.values, [fitted_min.field, DEMO_TEMPERATURE_K])
        .unwrap_or(f64::NAN);
    checks.push(check(
        "fitted field minimum",
        (at_min - fitted_min.linewidth).abs() <= 1e-9 * at_min && (fitted_min.field - truth_min.field).abs() < 0.05,
        format!(
            "B* = {} T, Gamma* = {} kHz from the refitted table (truth {} T)",
            sig6(fitted_min.field),
            sig6(fitted_min.linewidth),
            sig6(truth_min.field)
        ),
    ));

    let traces3 = three_pulse_traces(cfg)?;
    let pcfg3 = PipelineConfig {
        tz: DEMO_3PPE
            .iter()
            .map(|&(b, _)| TzEntry { temperature_k: DEMO_TEMPERATURE_K, field_t: b, tz_s: 2.0 })
            .collect(),
        ..pcfg.clone()
    };
    let three = batch_fit_3ppe(&traces3, &pcfg3)?;

    let sigma = preset3.quoted_sigma.clone().unwrap_or_default();
    let mut recovery = String::from("field_T,parameter,truth,fitted,stderr,quoted_sigma,within_3sigma\n");
    let mut all_within = true;
    let mut beta_ok = true;
    let mut beta_detail = Vec::new();
    for ((cond, res), &(b, beta)) in three.fits.iter().zip(&DEMO_3PPE) {
        let fit = res.as_ref().map_err(|e| format!("3ppe fit at {} T failed: {e}", cond.field_t))?;
        for (i, name) in fit.params.names().iter().enumerate() {
            if fit.params.fixed[i] {
                continue;
            }
            let truth = if *name == "beta" { beta } else { preset3.params.values[i] };
            let v = fit.params.values[i];
            let within = sigma[i] > 0.0 && (v - truth).abs() <= 3.0 * sigma[i];
            if sigma[i] > 0.0 && b == 0.09 {
                all_within &= (v - truth).abs() <= RECOVERY_GATE * sigma[i];
            }
            recovery.push_str(&format!(
                "{},{name},{},{},{},{},{}\n",
                sig6(b),
                sig6(truth),
                sig6(v),
                sig6(fit.std_errors[i]),
                sig6(sigma[i]),
                if sigma[i] > 0.0 { within.to_string() } else { "-".into() }
            ));
        }
        let fb = fit.params.values[5];
        beta_ok &= (fb - beta).abs() < 0.1;
        beta_detail.push(format!("{} T: {} (truth {beta})", sig6(b), sig6(fb)));
    }
    checks.push(check(
        "3ppe recovery at 0.09 T",
        all_within,
        format!("gamma0, gamma_TLS, gamma_SD, R_SD within {RECOVERY_GATE}x quoted sigma (3x column in recovery_3ppe.csv)"),
    ));
    checks.push(check("branching ratio recovery", beta_ok, beta_detail.join("; ")));

    let derived = gamma_eff_from_tm(Time::from_us(40.0)).map_err(|e| e.to_string())?;
    checks.push(check(
        "Gamma_eff for T_M = 40 us",
        (derived - 7.96).abs() < 0.01,
        format!("{} kHz", sig6(derived)),
    ));

    let mut extra = vec![("recovery_3ppe.csv".to_string(), recovery)];
    for (k, t) in traces2.iter().enumerate() {
        let name = format!("traces/2ppe_{k:02}_B{:.3}T.txt", t.condition.field_t);
        extra.push((name, trace_to_string(t, TimeUnit::Us)));
    }
    for t in &traces3 {
        let t12 = t.fixed_delay.map_or(0.0, |d| d.ns());
        let name = format!("traces/3ppe_B{:.3}T_t12_{t12:.0}ns.txt", t.condition.field_t);
        extra.push((name, trace_to_string(t, TimeUnit::Ms)));
    }

    let mut tables: Vec<&ScanTable> = two.tables();
    tables.extend(three.tables());
    let mut fits: Vec<(String, Condition, Result<&FitResult, String>)> = Vec::new();
    for (c, r) in &two.fits {
        fits.push(("2ppe".into(), *c, r.as_ref().map_err(Clone::clone)));
    }
    fits.push(("field-model".into(), Condition::new(DEMO_TEMPERATURE_K, 0.0), Ok(&field_fit)));
    for (c, r) in &three.fits {
        fits.push(("3ppe".into(), *c, r.as_ref().map_err(Clone::clone)));
    }
    let notes = checks
        .iter()
        .map(|c| (c.name.to_string(), format!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.detail)))
        .collect();
    let report = Report {
        title: "echofit demo report".into(),
        config: format!("{}\n{}", cfg.describe(), pcfg3.to_toml()),
        tables,
        fits,
        field_minimum: Some(fitted_min),
        notes,
        extra_files: extra,
    };
    let files = emit_report(&report, out_dir).map_err(|e| e.to_string())?;
    Ok(DemoOutcome {
        checks,
        files,
        field_fit,
        fitted_minimum: fitted_min,
    })
}
