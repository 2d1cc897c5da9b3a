use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{Condition, EchoTrace, Provenance, Sequence};
use crate::units::{Time, TimeUnit};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Header { line: usize, msg: String },
    #[error("missing `# {0}:` header")]
    MissingHeader(&'static str),
    #[error("line {line}: {msg}")]
    Row { line: usize, msg: String },
    #[error("invalid trace: {0}")]
    Invalid(String),
}

fn parse_provenance(s: &str) -> Option<Provenance> {
    let rest = s.strip_prefix("synth ")?;
    let mut seed = None;
    let mut model = None;
    let mut params = None;
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=')?;
        match k {
            "seed" => seed = v.parse().ok(),
            "model" => model = Some(v.to_string()),
            "params" => {
                params = v
                    .split(',')
                    .filter(|p| !p.is_empty())
                    .map(|p| p.parse::<f64>().ok())
                    .collect::<Option<Vec<_>>>()
            }
            _ => return None,
        }
    }
    Some(Provenance::Synth {
        seed: seed?,
        model: model?,
        params: params.unwrap_or_default(),
    })
}

/// Parses the text trace format.
///
/// Header lines (`# key: value`) must declare `unit-time`, `sequence`,
/// `temperature_K` and `field_T`; three-pulse traces also need
/// `fixed-delay` (in the declared time unit). Data rows hold a time and an
/// intensity separated by whitespace, a comma or a tab. An optional
/// non-numeric column-name row is skipped.
pub fn parse_trace(text: &str, origin: &str) -> Result<EchoTrace, FormatError> {
    let mut unit = None;
    let mut sequence = None;
    let mut temperature = None;
    let mut field = None;
    let mut fixed = None;
    let mut source = None;
    let mut rows = Vec::new();
    let mut seen_data = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let Some((key, value)) = h.split_once(':') else {
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            let header_err = |msg: String| FormatError::Header { line: line_no, msg };
            let num = |v: &str| -> Result<f64, FormatError> {
                v.parse::<f64>()
                    .map_err(|_| header_err(format!("`{key}` expects a number, got `{v}`")))
            };
            match key {
                "unit-time" => unit = Some(value.parse::<TimeUnit>().map_err(|e| header_err(e.to_string()))?),
                "sequence" => sequence = Some(value.parse::<Sequence>().map_err(header_err)?),
                "temperature_K" => temperature = Some(num(value)?),
                "field_T" => field = Some(num(value)?),
                "fixed-delay" => fixed = Some(num(value)?),
                "source" => source = Some(value.to_string()),
                _ => {}
            }
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c == '\t' || c.is_whitespace())
            .filter(|c| !c.is_empty())
            .collect();
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse::<f64>().ok()).collect();
        match parsed {
            Some(v) if v.len() == 2 => {
                seen_data = true;
                rows.push((v[0], v[1]));
            }
            Some(v) => {
                return Err(FormatError::Row {
                    line: line_no,
                    msg: format!("expected 2 columns, found {}", v.len()),
                })
            }
            None if !seen_data && rows.is_empty() => {}
            None => {
                return Err(FormatError::Row {
                    line: line_no,
                    msg: format!("cannot parse `{line}`"),
                })
            }
        }
    }

    let unit = unit.ok_or(FormatError::MissingHeader("unit-time"))?;
    let sequence = sequence.ok_or(FormatError::MissingHeader("sequence"))?;
    let temperature_k = temperature.ok_or(FormatError::MissingHeader("temperature_K"))?;
    let field_t = field.ok_or(FormatError::MissingHeader("field_T"))?;
    let fixed_delay = match (sequence, fixed) {
        (Sequence::TwoPulse, f) => f.map(|v| Time::from_unit(v, unit)),
        (_, Some(v)) => Some(Time::from_unit(v, unit)),
        (_, None) => return Err(FormatError::MissingHeader("fixed-delay")),
    };
    let provenance = source
        .as_deref()
        .and_then(parse_provenance)
        .unwrap_or_else(|| Provenance::File(origin.to_string()));
    let trace = EchoTrace {
        sequence,
        times_ms: rows.iter().map(|r| Time::from_unit(r.0, unit).ms()).collect(),
        intensity: rows.iter().map(|r| r.1).collect(),
        fixed_delay,
        condition: Condition::new(temperature_k, field_t),
        provenance,
    };
    if trace.is_empty() {
        return Err(FormatError::Invalid("no data rows".into()));
    }
    trace.validate().map_err(FormatError::Invalid)?;
    Ok(trace)
}

pub fn load_trace(path: &Path) -> Result<EchoTrace, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_trace(&text, &path.display().to_string())
}

/// Serializes a trace with times in `unit`. Values use the shortest
/// representation that parses back to the same `f64`, so with `unit = ms`
/// a write/load cycle is bit-exact.
pub fn trace_to_string(trace: &EchoTrace, unit: TimeUnit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# unit-time: {unit}");
    let _ = writeln!(s, "# sequence: {}", trace.sequence);
    let _ = writeln!(s, "# temperature_K: {:?}", trace.condition.temperature_k);
    let _ = writeln!(s, "# field_T: {:?}", trace.condition.field_t);
    if let Some(d) = trace.fixed_delay {
        let _ = writeln!(s, "# fixed-delay: {:?}", d.in_unit(unit));
    }
    if !matches!(trace.provenance, Provenance::Unknown | Provenance::File(_)) {
        let _ = writeln!(s, "# source: {}", trace.provenance);
    }
    s.push_str("time\tintensity\n");
    for (t, y) in trace.times_ms.iter().zip(&trace.intensity) {
        let _ = writeln!(s, "{:?}\t{:?}", Time::from_ms(*t).in_unit(unit), y);
    }
    s
}

pub fn write_trace(trace: &EchoTrace, path: &Path, unit: TimeUnit) -> Result<(), FormatError> {
    std::fs::write(path, trace_to_string(trace, unit)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}
