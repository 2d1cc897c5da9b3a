//! Trace and table types, text formats, batch fitting and report output.

mod batch;
mod config;
mod format;
mod report;

pub use batch::{batch_fit_2ppe, batch_fit_3ppe, fit_2ppe_trace, ThreePpeFit, TwoPpeFit};
pub use config::{PipelineConfig, TzEntry};
pub use format::{load_trace, parse_trace, trace_to_string, write_trace, FormatError};
pub use report::{emit_report, Report, ReportError};

use std::fmt;
use std::str::FromStr;

use crate::units::Time;

/// Pulse sequence a trace was recorded with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sequence {
    /// Two-pulse echo versus the pulse delay t12.
    TwoPulse,
    /// Three-pulse echo versus waiting time t23 at fixed t12.
    ThreePulseT23,
    /// Three-pulse echo versus t12 at fixed t23.
    ThreePulseT12,
}

impl Sequence {
    pub fn name(self) -> &'static str {
        match self {
            Sequence::TwoPulse => "2ppe",
            Sequence::ThreePulseT23 => "3ppe-t23",
            Sequence::ThreePulseT12 => "3ppe-t12",
        }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sequence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "2ppe" => Ok(Sequence::TwoPulse),
            "3ppe-t23" => Ok(Sequence::ThreePulseT23),
            "3ppe-t12" => Ok(Sequence::ThreePulseT12),
            other => Err(format!("unknown sequence `{other}` (expected 2ppe, 3ppe-t23 or 3ppe-t12)")),
        }
    }
}

/// Sample temperature and applied field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Condition {
    pub temperature_k: f64,
    pub field_t: f64,
}

impl Condition {
    pub fn new(temperature_k: f64, field_t: f64) -> Self {
        Self { temperature_k, field_t }
    }

    /// Stable key for ordering and seeding.
    pub fn key(&self) -> (u64, u64) {
        (self.temperature_k.to_bits(), self.field_t.to_bits())
    }

    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.temperature_k
            .total_cmp(&other.temperature_k)
            .then(self.field_t.total_cmp(&other.field_t))
    }
}

/// Where a trace came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    File(String),
    Synth { seed: u64, model: String, params: Vec<f64> },
    Unknown,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::File(p) => write!(f, "file {p}"),
            Provenance::Synth { seed, model, params } => {
                write!(f, "synth seed={seed} model={model} params=")?;
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p:e}")?;
                }
                Ok(())
            }
            Provenance::Unknown => f.write_str("unknown"),
        }
    }
}

/// One measured (or synthesized) echo decay.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoTrace {
    pub sequence: Sequence,
    /// Swept delay in ms, strictly increasing.
    pub times_ms: Vec<f64>,
    pub intensity: Vec<f64>,
    /// The delay held fixed (t12 for `ThreePulseT23`, t23 for `ThreePulseT12`).
    pub fixed_delay: Option<Time>,
    pub condition: Condition,
    pub provenance: Provenance,
}

impl EchoTrace {
    pub fn len(&self) -> usize {
        self.times_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_ms.is_empty()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.times_ms.len() != self.intensity.len() {
            return Err(format!(
                "{} times but {} intensities",
                self.times_ms.len(),
                self.intensity.len()
            ));
        }
        if let Some(i) = self.times_ms.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(format!("times not strictly increasing at row {}", i + 2));
        }
        if let Some(i) = self.times_ms.iter().position(|t| !t.is_finite()) {
            return Err(format!("non-finite time at row {}", i + 1));
        }
        if let Some(i) = self.intensity.iter().position(|v| !v.is_finite()) {
            return Err(format!("non-finite intensity at row {}", i + 1));
        }
        if !(self.condition.temperature_k > 0.0) {
            return Err(format!("temperature must be positive, got {}", self.condition.temperature_k));
        }
        if !(self.condition.field_t >= 0.0) {
            return Err(format!("field must be non-negative, got {}", self.condition.field_t));
        }
        match (self.sequence, self.fixed_delay) {
            (Sequence::TwoPulse, _) => Ok(()),
            (_, Some(d)) if d.ms() >= 0.0 => Ok(()),
            (s, _) => Err(format!("{s} trace needs a non-negative fixed delay")),
        }
    }
}

/// Axis a scan table is indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionAxis {
    Field,
    Temperature,
}

impl ConditionAxis {
    pub fn name(self) -> &'static str {
        match self {
            ConditionAxis::Field => "field_T",
            ConditionAxis::Temperature => "temperature_K",
        }
    }

    pub fn value(self, c: &Condition) -> f64 {
        match self {
            ConditionAxis::Field => c.field_t,
            ConditionAxis::Temperature => c.temperature_k,
        }
    }
}

/// Quantity tabulated against the condition axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    GammaEff,
    I0,
    X,
    Gamma0,
    GammaTls,
    GammaSd,
    RSd,
    Beta,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::GammaEff,
        Quantity::I0,
        Quantity::X,
        Quantity::Gamma0,
        Quantity::GammaTls,
        Quantity::GammaSd,
        Quantity::RSd,
        Quantity::Beta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::GammaEff => "gamma_eff",
            Quantity::I0 => "i0",
            Quantity::X => "x",
            Quantity::Gamma0 => "gamma0",
            Quantity::GammaTls => "gamma_tls",
            Quantity::GammaSd => "gamma_sd",
            Quantity::RSd => "r_sd",
            Quantity::Beta => "beta",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Quantity::I0 | Quantity::X | Quantity::Beta => "",
            _ => "kHz",
        }
    }
}

/// Per-row status in a scan table.
#[derive(Debug, Clone, PartialEq)]
pub enum Flag {
    /// Fit raised an error; value and stderr are NaN.
    Failed(String),
    NotConverged,
    /// Standard error unavailable.
    Unbounded,
    /// T_Z was not in the configuration table.
    AssumedTz,
}

impl Flag {
    fn parse(s: &str) -> Flag {
        match s.trim() {
            "not-converged" => Flag::NotConverged,
            "unbounded" => Flag::Unbounded,
            "assumed-tz" => Flag::AssumedTz,
            other => Flag::Failed(other.strip_prefix("failed: ").unwrap_or(other).to_string()),
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::Failed(msg) => {
                let clean: String = msg.chars().map(|c| if c == ',' || c == '\n' { ';' } else { c }).collect();
                write!(f, "failed: {clean}")
            }
            Flag::NotConverged => f.write_str("not-converged"),
            Flag::Unbounded => f.write_str("unbounded"),
            Flag::AssumedTz => f.write_str("assumed-tz"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub condition: Condition,
    pub value: f64,
    pub stderr: f64,
    pub flags: Vec<Flag>,
}

impl ScanRow {
    pub fn ok(condition: Condition, value: f64, stderr: f64) -> Self {
        Self {
            condition,
            value,
            stderr,
            flags: Vec::new(),
        }
    }

    pub fn failed(condition: Condition, msg: impl Into<String>) -> Self {
        Self {
            condition,
            value: f64::NAN,
            stderr: f64::NAN,
            flags: vec![Flag::Failed(msg.into())],
        }
    }

    pub fn is_failed(&self) -> bool {
        self.flags.iter().any(|f| matches!(f, Flag::Failed(_)))
    }

    pub fn flag_text(&self) -> String {
        if self.flags.is_empty() {
            return "ok".to_string();
        }
        self.flags.iter().map(Flag::to_string).collect::<Vec<_>>().join(";")
    }
}

/// A derived quantity against an experimental condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub axis: ConditionAxis,
    pub quantity: Quantity,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn new(axis: ConditionAxis, quantity: Quantity) -> Self {
        Self {
            axis,
            quantity,
            rows: Vec::new(),
        }
    }

    /// Sorts rows by the axis value (ties by the other condition).
    pub fn sort(&mut self) {
        let axis = self.axis;
        self.rows.sort_by(|a, b| {
            axis.value(&a.condition)
                .total_cmp(&axis.value(&b.condition))
                .then(a.condition.total_cmp(&b.condition))
        });
    }

    /// Rows without a failure flag.
    pub fn valid_rows(&self) -> impl Iterator<Item = &ScanRow> {
        self.rows.iter().filter(|r| !r.is_failed())
    }

    pub fn file_stem(&self) -> String {
        let axis = match self.axis {
            ConditionAxis::Field => "field",
            ConditionAxis::Temperature => "temp",
        };
        format!("{}_vs_{axis}", self.quantity.name())
    }

    /// Parses [`ScanTable::to_csv`] output. The CSV records only the axis
    /// coordinate, so `other` supplies the remaining one (the temperature of
    /// a field table, the field of a temperature table).
    pub fn from_csv(text: &str, other: f64) -> Result<ScanTable, String> {
        let mut axis = None;
        let mut quantity = None;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("condition,") {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                if let Some((k, v)) = h.split_once(':') {
                    let v = v.trim();
                    match k.trim() {
                        "axis" => {
                            axis = Some(match v {
                                "field_T" => ConditionAxis::Field,
                                "temperature_K" => ConditionAxis::Temperature,
                                _ => return Err(format!("line {}: unknown axis `{v}`", i + 1)),
                            })
                        }
                        "quantity" => {
                            let name = v.split_whitespace().next().unwrap_or("");
                            quantity = Some(
                                Quantity::ALL
                                    .into_iter()
                                    .find(|q| q.name() == name)
                                    .ok_or_else(|| format!("line {}: unknown quantity `{name}`", i + 1))?,
                            );
                        }
                        _ => {}
                    }
                }
                continue;
            }
            let axis = axis.ok_or("missing `# axis:` header before data")?;
            let cols: Vec<&str> = line.splitn(4, ',').collect();
            if cols.len() < 3 {
                return Err(format!("line {}: expected condition,value,stderr[,flag]", i + 1));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("line {}: bad number `{s}`", i + 1));
            let x = num(cols[0])?;
            let condition = match axis {
                ConditionAxis::Field => Condition::new(other, x),
                ConditionAxis::Temperature => Condition::new(x, other),
            };
            let flags = cols
                .get(3)
                .map(|f| f.trim())
                .filter(|f| !f.is_empty() && *f != "ok")
                .map(|f| f.split(';').map(Flag::parse).collect())
                .unwrap_or_default();
            rows.push(ScanRow {
                condition,
                value: num(cols[1])?,
                stderr: num(cols[2])?,
                flags,
            });
        }
        Ok(ScanTable {
            axis: axis.ok_or("missing `# axis:` header")?,
            quantity: quantity.ok_or("missing `# quantity:` header")?,
            rows,
        })
    }

    /// `condition,value,stderr,flag` with six significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# quantity: {} {}\n# axis: {}\n", self.quantity.name(), self.quantity.unit(), self.axis.name());
        s.push_str("condition,value,stderr,flag\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                sig6(self.axis.value(&r.condition)),
                sig6(r.value),
                sig6(r.stderr),
                r.flag_text()
            ));
        }
        s
    }
}

/// Six significant digits: plain decimals for magnitudes in [1e-4, 1e6),
/// scientific notation otherwise; `nan`/`inf` spelled out.
pub fn sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    if v == 0.0 {
        return "0.00000".to_string();
    }
    let mag = v.abs();
    if !(1e-4..1e6).contains(&mag) {
        return format!("{v:.5e}");
    }
    let exp = mag.log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding may carry into a new leading digit (9.999996 -> 10.00000)
    let digits = s.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
    if digits.trim_start_matches('0').len() > 6 && decimals > 0 {
        format!("{v:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(40.02), "40.0200");
        assert_eq!(sig6(0.000123456789), "0.000123457");
        assert_eq!(sig6(7.957747154594767), "7.95775");
        assert_eq!(sig6(9.999996), "10.0000");
        assert_eq!(sig6(-0.5), "-0.500000");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(2.5e-7), "2.50000e-7");
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(f64::NAN), "nan");
        assert_eq!(sig6(f64::INFINITY), "inf");
    }

    #[test]
    fn sequence_round_trip() {
        for s in [Sequence::TwoPulse, Sequence::ThreePulseT23, Sequence::ThreePulseT12] {
            assert_eq!(s.name().parse::<Sequence>().unwrap(), s);
        }
        assert!("4ppe".parse::<Sequence>().is_err());
    }

    #[test]
    fn validate_rejects_non_monotone() {
        let t = EchoTrace {
            sequence: Sequence::TwoPulse,
            times_ms: vec![0.001, 0.003, 0.002],
            intensity: vec![1.0, 0.5, 0.4],
            fixed_delay: None,
            condition: Condition::new(0.007, 0.0),
            provenance: Provenance::Unknown,
        };
        assert!(t.validate().unwrap_err().contains("row 3"));
    }

    #[test]
    fn csv_rows_sorted() {
        let mut t = ScanTable::new(ConditionAxis::Field, Quantity::GammaEff);
        t.rows.push(ScanRow::ok(Condition::new(0.007, 2.0), 20.0, 0.1));
        t.rows.push(ScanRow::failed(Condition::new(0.007, 0.5), "bad, data"));
        t.rows.push(ScanRow::ok(Condition::new(0.007, 0.0), 40.0, 0.2));
        t.sort();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[2], "condition,value,stderr,flag");
        assert!(lines[3].starts_with("0.00000,40.0000"));
        assert!(lines[4].ends_with("failed: bad; data"));
        let back = ScanTable::from_csv(&csv, 0.007).unwrap();
        assert_eq!(back.rows.len(), 3);
        assert_eq!(back.quantity, Quantity::GammaEff);
        assert_eq!(back.rows[0].value, 40.0);
        assert!(back.rows[1].is_failed());
        assert_eq!(back.rows[2].condition, Condition::new(0.007, 2.0));
    }
}
