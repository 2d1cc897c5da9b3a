use rayon::prelude::*;

use super::{Condition, ConditionAxis, EchoTrace, Flag, PipelineConfig, Quantity, ScanRow, ScanTable, Sequence};
use crate::catalog::{CatalogModel, ModelId, ModelParams};
use crate::fitting::{initial_guess, multi_start_fit, FitResult, Observation};
use crate::models::gamma_eff_from_tm;
use crate::units::Time;

/// Per-condition seed; depends only on the base seed and the condition, so
/// a trace's fit does not change when other traces are added or removed.
fn condition_seed(seed: u64, c: &Condition) -> u64 {
    let (a, b) = c.key();
    let mut z = seed ^ a.rotate_left(17) ^ b.rotate_left(41);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Field axis unless every trace shares one field and temperatures differ.
fn pick_axis(conds: &[Condition]) -> ConditionAxis {
    let same_field = conds.windows(2).all(|w| w[0].field_t == w[1].field_t);
    let same_temp = conds.windows(2).all(|w| w[0].temperature_k == w[1].temperature_k);
    if same_field && !same_temp {
        ConditionAxis::Temperature
    } else {
        ConditionAxis::Field
    }
}

fn fit_flags(fit: &FitResult, idx: &[usize]) -> Vec<Flag> {
    let mut flags = Vec::new();
    if !fit.converged {
        flags.push(Flag::NotConverged);
    }
    if idx.iter().any(|&i| fit.unbounded[i]) {
        flags.push(Flag::Unbounded);
    }
    flags
}

/// Outcome of a two-pulse batch.
#[derive(Debug, Clone)]
pub struct TwoPpeFit {
    pub gamma_eff: ScanTable,
    pub i0: ScanTable,
    pub x: ScanTable,
    /// Per-trace fits in input order.
    pub fits: Vec<(Condition, Result<FitResult, String>)>,
}

impl TwoPpeFit {
    pub fn tables(&self) -> Vec<&ScanTable> {
        vec![&self.gamma_eff, &self.i0, &self.x]
    }
}

/// Mims fit of one two-pulse trace inside the configured window.
pub fn fit_2ppe_trace(trace: &EchoTrace, cfg: &PipelineConfig) -> Result<FitResult, String> {
    trace.validate()?;
    if trace.sequence != Sequence::TwoPulse {
        return Err(format!("expected a 2ppe trace, got {}", trace.sequence));
    }
    let fit_cfg = cfg.two_pulse_fit();
    let (lo, hi) = fit_cfg.window.unwrap_or((0.0, f64::INFINITY));
    let mut obs: Vec<Observation> = trace
        .times_ms
        .iter()
        .zip(&trace.intensity)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(&t, &y)| Observation::new([t, 0.0], y))
        .collect();
    if cfg.normalize_i0 {
        let max = obs.iter().map(|o| o.value).fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            return Err("no positive intensity in the fit window".into());
        }
        for o in &mut obs {
            o.value /= max;
        }
    }
    let guess = initial_guess(&CatalogModel::Mims, &obs).map_err(|e| e.to_string())?;
    let fit_cfg = fit_cfg.with_restarts(cfg.restarts, condition_seed(cfg.seed, &trace.condition));
    multi_start_fit(&CatalogModel::Mims, &obs, &guess.params, &fit_cfg).map_err(|e| e.to_string())
}

/// Fits every two-pulse trace and tabulates Gamma_eff, I0 and x against
/// the condition. A failing trace becomes a flagged row.
pub fn batch_fit_2ppe(traces: &[EchoTrace], cfg: &PipelineConfig) -> Result<TwoPpeFit, String> {
    cfg.validate()?;
    if let Some(t) = traces.iter().find(|t| t.sequence != Sequence::TwoPulse) {
        return Err(format!("batch mixes sequences: found {} in a 2ppe batch", t.sequence));
    }
    let fits: Vec<(Condition, Result<FitResult, String>)> = traces
        .par_iter()
        .map(|t| (t.condition, fit_2ppe_trace(t, cfg)))
        .collect();
    let conds: Vec<Condition> = traces.iter().map(|t| t.condition).collect();
    let axis = pick_axis(&conds);
    let mut gamma = ScanTable::new(axis, Quantity::GammaEff);
    let mut i0 = ScanTable::new(axis, Quantity::I0);
    let mut x = ScanTable::new(axis, Quantity::X);
    for (c, r) in &fits {
        match r {
            Ok(fit) => {
                let tm = fit.params.values[1];
                let se_tm = fit.std_errors[1];
                let g = gamma_eff_from_tm(Time::from_ms(tm)).unwrap_or(f64::NAN);
                let se_g = se_tm / (std::f64::consts::PI * tm * tm);
                let mut row = ScanRow::ok(*c, g, se_g);
                row.flags = fit_flags(fit, &[1]);
                gamma.rows.push(row);
                let mut row = ScanRow::ok(*c, fit.params.values[0], fit.std_errors[0]);
                row.flags = fit_flags(fit, &[0]);
                i0.rows.push(row);
                let mut row = ScanRow::ok(*c, fit.params.values[2], fit.std_errors[2]);
                row.flags = fit_flags(fit, &[2]);
                x.rows.push(row);
            }
            Err(e) => {
                for t in [&mut gamma, &mut i0, &mut x] {
                    t.rows.push(ScanRow::failed(*c, e.clone()));
                }
            }
        }
    }
    for t in [&mut gamma, &mut i0, &mut x] {
        t.sort();
    }
    Ok(TwoPpeFit { gamma_eff: gamma, i0, x, fits })
}

/// Outcome of a three-pulse batch.
#[derive(Debug, Clone)]
pub struct ThreePpeFit {
    pub gamma0: ScanTable,
    pub gamma_tls: ScanTable,
    pub gamma_sd: ScanTable,
    pub r_sd: ScanTable,
    pub beta: ScanTable,
    /// Joint fits per condition, sorted by condition.
    pub fits: Vec<(Condition, Result<FitResult, String>)>,
}

impl ThreePpeFit {
    pub fn tables(&self) -> Vec<&ScanTable> {
        vec![&self.gamma0, &self.gamma_tls, &self.gamma_sd, &self.r_sd, &self.beta]
    }
}

type ConditionFit = Result<(FitResult, bool), String>;

fn fit_3ppe_condition(
    cond: Condition,
    group: &[&EchoTrace],
    cfg: &PipelineConfig,
) -> Result<(FitResult, bool), String> {
    let mut obs = Vec::new();
    for t in group {
        t.validate()?;
        let t12 = t.fixed_delay.ok_or("3ppe-t23 trace without fixed t12")?.ms();
        obs.extend(
            t.times_ms
                .iter()
                .zip(&t.intensity)
                .map(|(&t23, &y)| Observation::new([t12, t23], y)),
        );
    }
    let t0 = obs.iter().map(|o| o.input[1]).fold(f64::INFINITY, f64::min);
    if !(t0 > 0.0) {
        return Err("waiting times must be positive".into());
    }
    if cfg.normalize_i0 {
        let max = obs.iter().map(|o| o.value).fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            return Err("no positive intensity".into());
        }
        for o in &mut obs {
            o.value /= max;
        }
    }
    let model = CatalogModel::with_t0(ModelId::StimulatedEcho, Time::from_ms(t0));
    let guess = initial_guess(&model, &obs).map_err(|e| e.to_string())?;
    let (tz, assumed) = cfg.tz_ms(&cond);
    let mut init: ModelParams = guess.params.fix("T_Z");
    init.set("T1", cfg.t1_ms);
    init.set("T_Z", tz);
    if !cfg.free_t1 {
        init = init.fix("T1");
    }
    let fit_cfg = cfg
        .three_pulse_fit()
        .with_restarts(cfg.restarts, condition_seed(cfg.seed, &cond));
    let fit = multi_start_fit(&model, &obs, &init, &fit_cfg).map_err(|e| e.to_string())?;
    Ok((fit, assumed))
}

/// Joint fit of all three-pulse traces that share a condition; T1 and T_Z
/// come from the configuration.
pub fn batch_fit_3ppe(traces: &[EchoTrace], cfg: &PipelineConfig) -> Result<ThreePpeFit, String> {
    cfg.validate()?;
    if let Some(t) = traces.iter().find(|t| t.sequence != Sequence::ThreePulseT23) {
        return Err(format!("batch mixes sequences: found {} in a 3ppe-t23 batch", t.sequence));
    }
    let mut conds: Vec<Condition> = traces.iter().map(|t| t.condition).collect();
    conds.sort_by(|a, b| a.total_cmp(b));
    conds.dedup_by(|a, b| a.key() == b.key());
    let results: Vec<(Condition, ConditionFit)> = conds
        .par_iter()
        .map(|c| {
            let group: Vec<&EchoTrace> = traces.iter().filter(|t| t.condition.key() == c.key()).collect();
            (*c, fit_3ppe_condition(*c, &group, cfg))
        })
        .collect();

    let axis = pick_axis(&conds);
    let quantities = [
        (Quantity::Gamma0, 1),
        (Quantity::GammaTls, 4),
        (Quantity::GammaSd, 2),
        (Quantity::RSd, 3),
        (Quantity::Beta, 5),
    ];
    let mut tables: Vec<ScanTable> = quantities.iter().map(|(q, _)| ScanTable::new(axis, *q)).collect();
    for (c, r) in &results {
        for (table, &(_, idx)) in tables.iter_mut().zip(&quantities) {
            let row = match r {
                Ok((fit, assumed)) => {
                    let mut row = ScanRow::ok(*c, fit.params.values[idx], fit.std_errors[idx]);
                    row.flags = fit_flags(fit, &[idx]);
                    if *assumed {
                        row.flags.push(Flag::AssumedTz);
                    }
                    row
                }
                Err(e) => ScanRow::failed(*c, e.clone()),
            };
            table.rows.push(row);
        }
    }
    for t in &mut tables {
        t.sort();
    }
    let mut it = tables.into_iter();
    let mut next = || it.next().expect("five tables");
    Ok(ThreePpeFit {
        gamma0: next(),
        gamma_tls: next(),
        gamma_sd: next(),
        r_sd: next(),
        beta: next(),
        fits: results.into_iter().map(|(c, r)| (c, r.map(|(f, _)| f))).collect(),
    })
}
