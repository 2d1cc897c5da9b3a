//! Command-line front end. `main.rs` only forwards to [`run`].

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::catalog::{CatalogModel, Model, ModelId, ModelParams};
use crate::demo::{fit_field_table, run_demo, DemoConfig};
use crate::fitting::{initial_guess, multi_start_fit, FitConfig, Observation};
use crate::gradcheck::{check_all, check_model};
use crate::models::{field_linewidth_minimum, FieldModelParams};
use crate::pipeline::{
    batch_fit_2ppe, batch_fit_3ppe, emit_report, load_trace, sig6, trace_to_string, Condition, ConditionAxis,
    PipelineConfig, Report, ScanTable,
};
use crate::presets::{preset, Preset, PRESET_NAMES};
use crate::synth::{synth_scan, synth_trace, Grid, Modulation, Noise, SynthSpec, Sweep};
use crate::units::{Time, TimeUnit};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ECHOFIT_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "echofit-out";
const GRAD_TOL: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(name = "echofit", version, about = "Photon-echo decay models, fitting and synthetic data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a model at one point.
    Eval(EvalArgs),
    /// Write a synthetic echo trace.
    Synth(SynthArgs),
    /// Fit two-pulse traces with the stretched-exponential decay.
    #[command(name = "fit-2ppe")]
    Fit2ppe(BatchArgs),
    /// Jointly fit three-pulse traces per condition.
    #[command(name = "fit-3ppe")]
    Fit3ppe(BatchArgs),
    /// Linewidth versus field: tabulate a model or fit a table.
    #[command(name = "scan-field")]
    ScanField(ScanArgs),
    /// Linewidth versus temperature: tabulate a model or fit a table.
    #[command(name = "scan-temp")]
    ScanTemp(ScanArgs),
    /// Compare analytic gradients with central differences.
    #[command(name = "check-grad")]
    CheckGrad(GradArgs),
    /// Synthesize the preset datasets, fit them and write a report.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
struct ModelChoice {
    /// Built-in parameter set.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated parameter values in catalogue order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Option<Vec<f64>>,
    /// Reference waiting time t0 for spectral-diffusion models, in us.
    #[arg(long = "t0-us", default_value_t = 50.0)]
    t0_us: f64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Model name (mims, field, temperature, sech2, sd, sd-t23, three-level, echo-3ppe).
    model: String,
    #[command(flatten)]
    choice: ModelChoice,
    /// Field in tesla.
    #[arg(long = "B")]
    b: Option<f64>,
    /// Temperature in kelvin.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Pulse separation t12 in us.
    #[arg(long = "t12-us")]
    t12_us: Option<f64>,
    /// Waiting time t23 in us.
    #[arg(long = "t23-us")]
    t23_us: Option<f64>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// mims (two-pulse) or echo-3ppe (three-pulse versus t23).
    #[arg(long, default_value = "mims")]
    model: String,
    #[command(flatten)]
    choice: ModelChoice,
    /// First delay, in `--unit`.
    #[arg(long)]
    min: f64,
    /// Last delay, in `--unit`.
    #[arg(long)]
    max: f64,
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Logarithmic spacing.
    #[arg(long)]
    log: bool,
    /// Time unit of `--min`/`--max` and of the written file.
    #[arg(long, default_value = "us")]
    unit: TimeUnit,
    /// Relative Gaussian noise.
    #[arg(long = "noise-rel", conflicts_with = "noise_abs")]
    noise_rel: Option<f64>,
    /// Absolute Gaussian noise.
    #[arg(long = "noise-abs")]
    noise_abs: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Apply the default damped-cosine modulation (two-pulse only).
    #[arg(long)]
    modulation: bool,
    /// Fixed t12 for three-pulse traces, in ns.
    #[arg(long = "t12-ns")]
    t12_ns: Option<f64>,
    #[arg(long = "T", default_value_t = 0.007)]
    t: f64,
    #[arg(long = "B", default_value_t = 0.0)]
    b: f64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Trace files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Pipeline configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report directory (default: $ECHOFIT_OUT_DIR or ./echofit-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    choice: ModelChoice,
    /// Fit this `condition,value,stderr,flag` table instead of tabulating.
    #[arg(long = "fit-table")]
    fit_table: Option<PathBuf>,
    /// The coordinate held fixed: temperature (K) for field scans, field (T) for temperature scans.
    #[arg(long)]
    fixed: Option<f64>,
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
    #[arg(long, default_value_t = 40)]
    count: usize,
    #[arg(long)]
    log: bool,
    #[arg(long = "noise-rel")]
    noise_rel: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Report directory (default: $ECHOFIT_OUT_DIR or ./echofit-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradArgs {
    /// Check every catalogued model.
    #[arg(long, conflicts_with = "model")]
    all: bool,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    draws: usize,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Report directory (default: $ECHOFIT_OUT_DIR or ./echofit-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure modes mapped to exit codes.
enum Failure {
    Usage(String),
    Runtime(String),
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(msg: impl ToString) -> Failure {
    Failure::Runtime(msg.to_string())
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn default_preset(id: ModelId) -> Option<&'static str> {
    match id {
        ModelId::Field => Some("paper-field-7mK"),
        ModelId::StimulatedEcho => Some("paper-3ppe-7mK-0.09T"),
        ModelId::Temperature => Some("illustrative-temp"),
        ModelId::Mims => Some("illustrative-mims"),
        _ => None,
    }
}

fn resolve_preset(name: &str) -> Result<Preset, Failure> {
    preset(name).ok_or_else(|| usage(format!("unknown preset `{name}` (known: {})", PRESET_NAMES.join(", "))))
}

/// Model and parameters from `--params`, `--preset` or the model's default preset.
fn resolve_model(id: ModelId, choice: &ModelChoice, w: &mut dyn Write) -> Result<(CatalogModel, ModelParams), Failure> {
    let t0 = Time::from_us(choice.t0_us);
    let model = match id {
        ModelId::SpectralDiffusion | ModelId::SpectralDiffusionT23 | ModelId::StimulatedEcho => {
            CatalogModel::with_t0(id, t0)
        }
        _ => CatalogModel::new(id),
    };
    let params = match (&choice.params, &choice.preset) {
        (Some(_), Some(_)) => return Err(usage("give either --params or --preset, not both")),
        (Some(v), None) => ModelParams::new(id, v.clone()).map_err(|e| usage(e.to_string()))?,
        (None, name) => {
            let name = match name.as_deref().or(default_preset(id)) {
                Some(n) => n,
                None => return Err(usage(format!("model `{id}` has no preset; pass --params"))),
            };
            let p = resolve_preset(name)?;
            if p.model.id() != id {
                return Err(usage(format!("preset `{name}` is for model `{}`, not `{id}`", p.model.id())));
            }
            let _ = writeln!(w, "config: preset = {name}");
            return Ok((p.model, p.params));
        }
    };
    Ok((model, params))
}

fn print_params(w: &mut dyn Write, p: &ModelParams) {
    let parts: Vec<String> = p
        .names()
        .iter()
        .zip(&p.values)
        .map(|(n, v)| format!("{n}={}", sig6(*v)))
        .collect();
    let _ = writeln!(w, "config: params = {}", parts.join(" "));
}

fn cmd_eval(a: &EvalArgs, w: &mut dyn Write) -> CmdResult {
    let id: ModelId = a.model.parse().map_err(|e: crate::models::ModelError| usage(e.to_string()))?;
    let _ = writeln!(w, "config: model = {id}");
    let (model, params) = resolve_model(id, &a.choice, w)?;
    print_params(w, &params);
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| usage(format!("model `{id}` needs {flag}")));
    let us = |v: f64| Time::from_us(v).ms();
    let input = match id {
        ModelId::Mims => [us(need(a.t12_us, "--t12-us")?), 0.0],
        ModelId::Field | ModelId::Sech2 => [need(a.b, "--B")?, need(a.t, "--T")?],
        ModelId::Temperature => [need(a.t, "--T")?, 0.0],
        ModelId::SpectralDiffusion | ModelId::StimulatedEcho => {
            [us(need(a.t12_us, "--t12-us")?), us(need(a.t23_us, "--t23-us")?)]
        }
        ModelId::SpectralDiffusionT23 | ModelId::ThreeLevel => [us(need(a.t23_us, "--t23-us")?), 0.0],
    };
    let names = id.input_names();
    let _ = writeln!(w, "config: input = {}={} {}={}", names[0], sig6(input[0]), names[1], sig6(input[1]));
    let v = model.eval(&params.values, input).map_err(runtime)?;
    let unit = if id.is_intensity() { "" } else { " kHz" };
    let _ = writeln!(w, "{id} = {}{unit}", sig6(v));
    Ok(())
}

fn cmd_synth(a: &SynthArgs, w: &mut dyn Write) -> CmdResult {
    let id: ModelId = a.model.parse().map_err(|e: crate::models::ModelError| usage(e.to_string()))?;
    let _ = writeln!(w, "config: model = {id}");
    let (model, params) = resolve_model(id, &a.choice, w)?;
    let noise = match (a.noise_rel, a.noise_abs) {
        (Some(s), _) => Noise::Multiplicative(s),
        (_, Some(s)) => Noise::Additive(s),
        _ => Noise::None,
    };
    let to_ms = |v: f64| Time::from_unit(v, a.unit).ms();
    let grid = if a.log {
        Grid::log(to_ms(a.min), to_ms(a.max), a.count)
    } else {
        Grid::linear(to_ms(a.min), to_ms(a.max), a.count)
    };
    let sweep = match id {
        ModelId::Mims => Sweep::Delay,
        ModelId::StimulatedEcho => Sweep::WaitingTime {
            t12: Time::from_ns(a.t12_ns.ok_or_else(|| usage("echo-3ppe traces need --t12-ns"))?),
        },
        _ => return Err(usage(format!("synth writes echo traces; use scan-field/scan-temp for `{id}`"))),
    };
    let spec = SynthSpec {
        model,
        params,
        grid,
        sweep,
        noise,
        seed: a.seed,
        modulation: a.modulation.then(Modulation::default),
        condition: Condition::new(a.t, a.b),
    };
    print_params(w, &spec.params);
    let _ = writeln!(
        w,
        "config: grid = {} .. {} {} x{} {}; noise = {:?}; seed = {}; modulation = {:?}; T = {} K; B = {} T",
        sig6(a.min),
        sig6(a.max),
        a.unit,
        a.count,
        if a.log { "log" } else { "linear" },
        spec.noise,
        spec.seed,
        spec.modulation,
        sig6(a.t),
        sig6(a.b)
    );
    let trace = synth_trace(&spec).map_err(|e| usage(e.to_string()))?;
    let text = trace_to_string(&trace, a.unit);
    match &a.out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
            let _ = writeln!(w, "wrote {} points to {}", trace.len(), p.display());
        }
        None => {
            let _ = w.write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn load_config(a: &BatchArgs) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
            PipelineConfig::from_toml(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn print_table(w: &mut dyn Write, t: &ScanTable) {
    let _ = writeln!(w, "\n{} ({})", t.quantity.name(), t.axis.name());
    let _ = w.write_all(t.to_csv().lines().skip(2).collect::<Vec<_>>().join("\n").as_bytes());
    let _ = writeln!(w);
}

fn cmd_batch(a: &BatchArgs, three: bool, w: &mut dyn Write) -> CmdResult {
    let cfg = load_config(a)?;
    let dir = out_dir(&a.out);
    let _ = writeln!(w, "config: out = {}", dir.display());
    for line in cfg.to_toml().lines().filter(|l| !l.is_empty()) {
        let _ = writeln!(w, "config: {line}");
    }
    let traces = a
        .files
        .iter()
        .map(|p| load_trace(p).map_err(runtime))
        .collect::<Result<Vec<_>, _>>()?;
    let report_cfg = cfg.to_toml();
    let (tables, fits): (Vec<ScanTable>, Vec<_>) = if three {
        let r = batch_fit_3ppe(&traces, &cfg).map_err(runtime)?;
        (r.tables().into_iter().cloned().collect(), r.fits)
    } else {
        let r = batch_fit_2ppe(&traces, &cfg).map_err(runtime)?;
        (r.tables().into_iter().cloned().collect(), r.fits)
    };
    for t in &tables {
        print_table(w, t);
    }
    let label = if three { "3ppe" } else { "2ppe" };
    let report = Report {
        title: format!("echofit fit-{label}"),
        config: report_cfg,
        tables: tables.iter().collect(),
        fits: fits
            .iter()
            .map(|(c, r)| (label.to_string(), *c, r.as_ref().map_err(Clone::clone)))
            .collect(),
        ..Default::default()
    };
    let files = emit_report(&report, &dir).map_err(runtime)?;
    let _ = writeln!(w, "\nwrote {} files to {}", files.len(), dir.display());
    Ok(())
}

fn cmd_scan(a: &ScanArgs, axis: ConditionAxis, w: &mut dyn Write) -> CmdResult {
    let id = match axis {
        ConditionAxis::Field => ModelId::Field,
        ConditionAxis::Temperature => ModelId::Temperature,
    };
    let fixed = a.fixed.unwrap_or(match axis {
        ConditionAxis::Field => 0.007,
        ConditionAxis::Temperature => 0.0,
    });
    let dir = out_dir(&a.out);
    let _ = writeln!(w, "config: model = {id}; {} = {}", if axis == ConditionAxis::Field { "T_K" } else { "B_T" }, sig6(fixed));
    let _ = writeln!(w, "config: out = {}", dir.display());

    let (table, params, fit) = if let Some(path) = &a.fit_table {
        let text = std::fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        let table = ScanTable::from_csv(&text, fixed).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        if table.axis != axis {
            return Err(usage(format!("{} is indexed by {}", path.display(), table.axis.name())));
        }
        let _ = writeln!(w, "config: fit-table = {}; restarts = {}; seed = {}", path.display(), a.restarts, a.seed);
        let fit = if id == ModelId::Field {
            fit_field_table(&table, a.restarts, a.seed).map_err(runtime)?
        } else {
            let obs: Vec<Observation> = table
                .valid_rows()
                .map(|r| {
                    let o = Observation::new([r.condition.temperature_k, 0.0], r.value);
                    if r.stderr > 0.0 && r.stderr.is_finite() { o.with_sigma(r.stderr) } else { o }
                })
                .collect();
            let model = CatalogModel::Temperature;
            let guess = initial_guess(&model, &obs).map_err(runtime)?;
            multi_start_fit(&model, &obs, &guess.params, &FitConfig::linewidth().with_restarts(a.restarts, a.seed))
                .map_err(runtime)?
        };
        let _ = writeln!(w, "\nfit: converged={} sse={} dof={}", fit.converged, sig6(fit.sse), fit.dof);
        for u in crate::fitting::uncertainties(&fit) {
            let se = u.std_error.map_or("unbounded".to_string(), sig6);
            let _ = writeln!(w, "  {} = {} +- {se}", u.name, sig6(u.value));
        }
        (table, fit.params.clone(), Some(fit))
    } else {
        let (model, params) = resolve_model(id, &a.choice, w)?;
        print_params(w, &params);
        let (lo, hi) = match axis {
            ConditionAxis::Field => (a.min.unwrap_or(0.0), a.max.unwrap_or(2.0)),
            ConditionAxis::Temperature => (a.min.unwrap_or(0.007), a.max.unwrap_or(0.55)),
        };
        let grid = if a.log { Grid::log(lo, hi, a.count) } else { Grid::linear(lo, hi, a.count) };
        let noise = a.noise_rel.map_or(Noise::None, Noise::Multiplicative);
        let _ = writeln!(
            w,
            "config: grid = {} .. {} x{} {}; noise = {noise:?}; seed = {}",
            sig6(lo),
            sig6(hi),
            a.count,
            if a.log { "log" } else { "linear" },
            a.seed
        );
        let table = synth_scan(&model, &params, axis, &grid, fixed, noise, a.seed).map_err(|e| usage(e.to_string()))?;
        (table, params, None)
    };
    print_table(w, &table);

    let minimum = if id == ModelId::Field {
        let fp = FieldModelParams::from_slice(&params.values);
        let b_max = table.rows.iter().map(|r| r.condition.field_t).fold(0.0, f64::max);
        let m = field_linewidth_minimum(&fp, fixed, if b_max > 0.0 { b_max } else { 2.0 }).map_err(runtime)?;
        let _ = writeln!(w, "\nminimum: B* = {} T, Gamma* = {} kHz ({:?})", sig6(m.field), sig6(m.linewidth), m.location);
        Some(m)
    } else {
        None
    };
    let report = Report {
        title: format!("echofit scan-{}", if id == ModelId::Field { "field" } else { "temp" }),
        config: format!("model = {id}\nfixed = {}\n", sig6(fixed)),
        tables: vec![&table],
        fits: fit
            .iter()
            .map(|f| (id.name().to_string(), Condition::new(fixed, 0.0), Ok(f)))
            .collect(),
        field_minimum: minimum,
        ..Default::default()
    };
    let files = emit_report(&report, &dir).map_err(runtime)?;
    let _ = writeln!(w, "wrote {} files to {}", files.len(), dir.display());
    Ok(())
}

fn cmd_check_grad(a: &GradArgs, w: &mut dyn Write) -> CmdResult {
    let _ = writeln!(w, "config: seed = {}; draws = {}; tolerance = {GRAD_TOL:e}", a.seed, a.draws);
    let results = match (&a.model, a.all) {
        (Some(name), false) => {
            let id: ModelId = name.parse().map_err(|e: crate::models::ModelError| usage(e.to_string()))?;
            vec![check_model(&CatalogModel::new(id), a.draws, a.seed).map_err(runtime)?]
        }
        (None, true) => check_all(a.draws, a.seed).map_err(runtime)?,
        _ => return Err(usage("pass --all or --model <name>")),
    };
    let mut worst = 0.0f64;
    for r in &results {
        worst = worst.max(r.max_rel_error);
        let _ = writeln!(
            w,
            "{:<12} draws={} max_rel_error={} worst_param={} {}",
            r.model.name(),
            r.draws,
            sig6(r.max_rel_error),
            r.worst_param,
            if r.passes(GRAD_TOL) { "ok" } else { "FAIL" }
        );
    }
    let _ = writeln!(w, "max relative error {}", sig6(worst));
    if results.iter().all(|r| r.passes(GRAD_TOL)) {
        Ok(())
    } else {
        Err(runtime(format!("gradient mismatch above {GRAD_TOL:e}")))
    }
}

fn cmd_demo(a: &DemoArgs, w: &mut dyn Write) -> CmdResult {
    let cfg = DemoConfig {
        seed: a.seed,
        restarts: a.restarts,
        ..DemoConfig::default()
    };
    let dir = out_dir(&a.out);
    for line in cfg.describe().lines() {
        let _ = writeln!(w, "config: {line}");
    }
    let _ = writeln!(w, "config: out = {}", dir.display());
    let out = run_demo(&cfg, &dir).map_err(runtime)?;
    let fp = &out.field_fit.params;
    let _ = writeln!(
        w,
        "field-model fit: {}",
        fp.names()
            .iter()
            .zip(&fp.values)
            .zip(&out.field_fit.std_errors)
            .map(|((n, v), s)| format!("{n}={}+-{}", sig6(*v), sig6(*s)))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let _ = writeln!(
        w,
        "field minimum: B* = {} T, Gamma* = {} kHz",
        sig6(out.fitted_minimum.field),
        sig6(out.fitted_minimum.linewidth)
    );
    for c in &out.checks {
        let _ = writeln!(w, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let _ = writeln!(w, "wrote {} files to {}", out.files.len(), dir.display());
    if out.all_passed() {
        Ok(())
    } else {
        Err(runtime("demo consistency checks failed"))
    }
}

/// Runs the CLI with explicit argument list and output streams; returns
/// the exit code (0 success, 1 runtime failure, 2 usage error).
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Fit2ppe(a) => cmd_batch(a, false, out),
        Command::Fit3ppe(a) => cmd_batch(a, true, out),
        Command::ScanField(a) => cmd_scan(a, ConditionAxis::Field, out),
        Command::ScanTemp(a) => cmd_scan(a, ConditionAxis::Temperature, out),
        Command::CheckGrad(a) => cmd_check_grad(a, out),
        Command::Demo(a) => cmd_demo(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

/// Runs the CLI on the process arguments and standard streams.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
