//! Closed-form decay and linewidth models.
//!
//! All functions are pure. Times go in as [`Time`](crate::units::Time),
//! fields in tesla, temperatures in kelvin, and linewidths come out in kHz.
//! Each model also has a raw kernel on canonical units (ms, kHz) together
//! with its analytic partial derivatives; those kernels back the
//! [`catalog`](crate::catalog).

mod field;
mod mims;
mod spectral;
mod temperature;

pub use field::{
    field_linewidth, field_linewidth_minimum, FieldMinimum, FieldModelParams, MinimumLocation,
};
pub use mims::{gamma_eff_from_tm, mims_intensity, tm_from_gamma_eff, MimsParams};
pub use spectral::{
    sd_linewidth, sd_linewidth_t23, sech2_sd_amplitude, stimulated_echo_intensity,
    three_level_population_factor, SpectralDiffusionParams, ThreeLevelParams,
};
pub use temperature::{temp_linewidth, TempModelParams};

pub(crate) use field::kernel as field_kernel;
pub(crate) use mims::kernel as mims_kernel;
pub(crate) use spectral::kernel as spectral_kernel;
pub(crate) use temperature::kernel as temperature_kernel;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{quantity} = {value} is outside the model domain (requires {requirement})")]
    Domain {
        quantity: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("unknown model id `{0}`")]
    UnknownModel(String),
    #[error("model `{model}` takes {expected} parameters, got {got}")]
    ParamCount {
        model: &'static str,
        expected: usize,
        got: usize,
    },
}

pub(crate) fn require(
    ok: bool,
    quantity: &'static str,
    value: f64,
    requirement: &'static str,
) -> Result<(), ModelError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Domain {
            quantity,
            value,
            requirement,
        })
    }
}

