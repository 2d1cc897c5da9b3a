//! Time units and physical constants.
//!
//! Every time inside the crate is stored in milliseconds and every rate or
//! linewidth in kHz, so that products such as `R_SD * t23` or
//! `4 pi t12 Gamma` are dimensionless without hidden factors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Bohr magneton, J/T (CODATA 2018).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Boltzmann constant, J/K (exact SI).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Ratio mu_B / k_B in kelvin per tesla.
pub const MU_B_OVER_K_B: f64 = BOHR_MAGNETON / BOLTZMANN;

/// Physical constants used by the field-dependent models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Kelvin per tesla.
    pub mu_b_over_k_b: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        mu_b_over_k_b: MU_B_OVER_K_B,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// A time interval. Stored in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Time(f64);

impl Time {
    pub const ZERO: Time = Time(0.0);

    pub const fn from_ms(ms: f64) -> Self {
        Time(ms)
    }
    pub fn from_ns(ns: f64) -> Self {
        Time(ns * 1e-6)
    }
    pub fn from_us(us: f64) -> Self {
        Time(us * 1e-3)
    }
    pub fn from_s(s: f64) -> Self {
        Time(s * 1e3)
    }
    pub fn from_unit(value: f64, unit: TimeUnit) -> Self {
        Time(value * unit.ms_per_unit())
    }

    pub const fn ms(self) -> f64 {
        self.0
    }
    pub fn us(self) -> f64 {
        self.0 * 1e3
    }
    pub fn ns(self) -> f64 {
        self.0 * 1e6
    }
    pub fn s(self) -> f64 {
        self.0 * 1e-3
    }
    pub fn in_unit(self, unit: TimeUnit) -> f64 {
        match unit {
            TimeUnit::Ms => self.0,
            _ => self.0 / unit.ms_per_unit(),
        }
    }
}

/// Time units accepted in trace file headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeUnit {
    Ns,
    Us,
    Ms,
    S,
}

impl TimeUnit {
    pub fn ms_per_unit(self) -> f64 {
        match self {
            TimeUnit::Ns => 1e-6,
            TimeUnit::Us => 1e-3,
            TimeUnit::Ms => 1.0,
            TimeUnit::S => 1e3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::Ns => "ns",
            TimeUnit::Us => "us",
            TimeUnit::Ms => "ms",
            TimeUnit::S => "s",
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown time unit `{0}` (expected ns, us, ms or s)")]
pub struct UnknownTimeUnit(pub String);

impl FromStr for TimeUnit {
    type Err = UnknownTimeUnit;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ns" => Ok(TimeUnit::Ns),
            "us" | "µs" | "μs" => Ok(TimeUnit::Us),
            "ms" => Ok(TimeUnit::Ms),
            "s" => Ok(TimeUnit::S),
            other => Err(UnknownTimeUnit(other.to_string())),
        }
    }
}

/// `exp` with its argument clamped to [-700, 700].
#[inline]
pub fn exp_clamped(arg: f64) -> f64 {
    arg.clamp(-700.0, 700.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_b_over_k_b_matches_codata_ratio() {
        assert!((MU_B_OVER_K_B - 0.6717).abs() / 0.6717 < 1e-4);
        // 40-digit evaluation of 9.2740100783e-24 / 1.380649e-23
        assert!((MU_B_OVER_K_B - 0.671_713_815_625_839_7).abs() < 1e-15);
    }

    #[test]
    fn ns_header_converts_to_ms() {
        let t = Time::from_unit(250.0, TimeUnit::Ns);
        assert_eq!(t.ms(), 250.0 * 1e-6);
        assert!((Time::from_us(40.0).ms() - 0.04).abs() < 1e-18);
        assert!((Time::from_s(2.0).ms() - 2000.0).abs() < 1e-12);
    }

    #[test]
    fn unit_parse() {
        assert_eq!("us".parse::<TimeUnit>().unwrap(), TimeUnit::Us);
        assert!("min".parse::<TimeUnit>().is_err());
    }

    #[test]
    fn clamp_keeps_asymptotes_finite() {
        assert_eq!(exp_clamped(-1e6), (-700.0f64).exp());
        assert!(exp_clamped(1e6).is_finite());
    }
}
