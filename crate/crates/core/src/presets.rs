//! Named parameter sets.

use crate::catalog::{CatalogModel, ModelId, ModelParams};
use crate::pipeline::Condition;
use crate::units::Time;

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub model: CatalogModel,
    pub params: ModelParams,
    pub condition: Condition,
    /// Quoted 1-sigma uncertainties, aligned with `params` (zero where none is quoted).
    pub quoted_sigma: Option<Vec<f64>>,
}

pub const PRESET_NAMES: [&str; 4] = ["paper-field-7mK", "paper-3ppe-7mK-0.09T", "illustrative-temp", "illustrative-mims"];

/// Field-dependence fit at 7 mK.
pub fn paper_field_7mk() -> Preset {
    Preset {
        name: "paper-field-7mK",
        description: "linewidth-vs-field fit values at 7 mK",
        model: CatalogModel::Field,
        params: ModelParams::new(ModelId::Field, vec![7.42, 32.60, 17.62, 0.3507, 0.0064]).expect("valid"),
        condition: Condition::new(0.007, 0.0),
        quoted_sigma: Some(vec![0.14, 0.32, 0.49, 0.0092, 0.0004]),
    }
}

/// Three-pulse fit values at 7 mK and 0.09 T, with T1 = 9 ms, T_Z = 2 s,
/// beta = 0.5, I0 = 1 and t0 = 50 us.
pub fn paper_3ppe_7mk_009t() -> Preset {
    Preset {
        name: "paper-3ppe-7mK-0.09T",
        description: "stimulated-echo fit values at 7 mK, 0.09 T",
        model: CatalogModel::with_t0(ModelId::StimulatedEcho, Time::from_us(50.0)),
        params: ModelParams::new(
            ModelId::StimulatedEcho,
            vec![1.0, 7.96, 37.77, 1.02, 12.24, 0.5, 9.0, 2000.0],
        )
        .expect("valid")
        .fix("T1")
        .fix("T_Z"),
        condition: Condition::new(0.007, 0.09),
        quoted_sigma: Some(vec![0.0, 0.48, 4.18, 0.25, 0.90, 0.0, 0.0, 0.0]),
    }
}

/// Made-up temperature dependence for demonstrations (not fitted values).
pub fn illustrative_temp() -> Preset {
    Preset {
        name: "illustrative-temp",
        description: "illustrative floor plus T^1.34 power law",
        model: CatalogModel::Temperature,
        params: ModelParams::new(ModelId::Temperature, vec![2.0, 100.0, 1.34]).expect("valid"),
        condition: Condition::new(0.007, 0.0),
        quoted_sigma: None,
    }
}

/// Two-pulse decay with a 40 us phase-memory time.
pub fn illustrative_mims() -> Preset {
    Preset {
        name: "illustrative-mims",
        description: "two-pulse decay, I0 = 1, T_M = 40 us, x = 1.3",
        model: CatalogModel::Mims,
        params: ModelParams::new(ModelId::Mims, vec![1.0, Time::from_us(40.0).ms(), 1.3]).expect("valid"),
        condition: Condition::new(0.007, 0.0),
        quoted_sigma: None,
    }
}

pub fn preset(name: &str) -> Option<Preset> {
    match name {
        "paper-field-7mK" => Some(paper_field_7mk()),
        "paper-3ppe-7mK-0.09T" => Some(paper_3ppe_7mk_009t()),
        "illustrative-temp" => Some(illustrative_temp()),
        "illustrative-mims" => Some(illustrative_mims()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Model;

    #[test]
    fn all_names_resolve() {
        for n in PRESET_NAMES {
            let p = preset(n).unwrap();
            assert_eq!(p.name, n);
            assert_eq!(p.params.model, p.model.id());
            if let Some(s) = &p.quoted_sigma {
                assert_eq!(s.len(), p.params.values.len());
            }
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn zero_field_identity() {
        let p = paper_field_7mk();
        let v = p.model.eval(&p.params.values, [0.0, 0.007]).unwrap();
        assert!((v - 40.02).abs() < 1e-9);
    }
}
