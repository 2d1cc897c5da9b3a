use serde::{Deserialize, Serialize};

use super::Condition;
use crate::fitting::FitConfig;

/// T_Z for one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TzEntry {
    pub temperature_k: f64,
    pub field_t: f64,
    pub tz_s: f64,
}

/// Batch-fitting settings, loadable from TOML.
///
/// ```toml
/// seed = 1
/// restarts = 8
/// window_min_us = 0.25
/// normalize_i0 = true
/// t1_ms = 9.0
/// free_t1 = false
/// default_tz_s = 1.0
///
/// [[tz]]
/// temperature_k = 0.007
/// field_t = 0.09
/// tz_s = 2.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub restarts: usize,
    /// Lower edge of the two-pulse fit window.
    pub window_min_us: f64,
    /// Upper edge of the two-pulse fit window (unbounded when absent).
    pub window_max_us: Option<f64>,
    /// Divide each trace by its largest in-window intensity before fitting.
    pub normalize_i0: bool,
    pub t1_ms: f64,
    pub free_t1: bool,
    /// Used (and flagged) for conditions missing from `tz`.
    pub default_tz_s: f64,
    pub max_iterations: usize,
    pub tz: Vec<TzEntry>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 8,
            window_min_us: 0.25,
            window_max_us: None,
            normalize_i0: false,
            t1_ms: 9.0,
            free_t1: false,
            default_tz_s: 1.0,
            max_iterations: 500,
            tz: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.restarts < 1 {
            return Err("restarts must be at least 1".into());
        }
        if self.max_iterations < 1 {
            return Err("max_iterations must be at least 1".into());
        }
        if !(self.window_min_us >= 0.0) {
            return Err("window_min_us must be >= 0".into());
        }
        if let Some(hi) = self.window_max_us {
            if !(hi > self.window_min_us) {
                return Err("window_max_us must exceed window_min_us".into());
            }
        }
        if !(self.t1_ms > 0.0) || !(self.default_tz_s > 0.0) || self.tz.iter().any(|e| !(e.tz_s > 0.0)) {
            return Err("T1 and T_Z values must be positive".into());
        }
        Ok(())
    }

    /// T_Z in ms for `c`, and whether it was assumed.
    pub fn tz_ms(&self, c: &Condition) -> (f64, bool) {
        self.tz
            .iter()
            .find(|e| e.temperature_k == c.temperature_k && e.field_t == c.field_t)
            .map_or((self.default_tz_s * 1e3, true), |e| (e.tz_s * 1e3, false))
    }

    pub fn two_pulse_fit(&self) -> FitConfig {
        let mut f = FitConfig::two_pulse().with_window(
            self.window_min_us * 1e-3,
            self.window_max_us.map_or(f64::INFINITY, |v| v * 1e-3),
        );
        f.max_iterations = self.max_iterations;
        f.restarts = self.restarts;
        f
    }

    pub fn three_pulse_fit(&self) -> FitConfig {
        let mut f = FitConfig::decay();
        f.max_iterations = self.max_iterations;
        f.restarts = self.restarts;
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut c = PipelineConfig::default();
        c.tz.push(TzEntry { temperature_k: 0.007, field_t: 0.09, tz_s: 2.0 });
        let back = PipelineConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(PipelineConfig::from_toml("seeed = 3").is_err());
    }

    #[test]
    fn tz_lookup() {
        let c = PipelineConfig::from_toml(
            "[[tz]]\ntemperature_k = 0.007\nfield_t = 0.09\ntz_s = 2.0\n",
        )
        .unwrap();
        assert_eq!(c.tz_ms(&Condition::new(0.007, 0.09)), (2000.0, false));
        assert_eq!(c.tz_ms(&Condition::new(0.007, 2.0)), (1000.0, true));
    }
}
