use super::{require, ModelError};
use crate::units::{exp_clamped, Time};
use std::f64::consts::PI;

/// Parameters of the stretched-exponential (Mims) echo decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MimsParams {
    /// Zero-delay intensity.
    pub i0: f64,
    /// Phase-memory time.
    pub tm: Time,
    /// Stretch exponent.
    pub x: f64,
}

impl MimsParams {
    pub fn new(i0: f64, tm: Time, x: f64) -> Self {
        Self { i0, tm, x }
    }
}

/// Two-pulse echo intensity `I0 exp(-2 (2 t12 / T_M)^x)`.
pub fn mims_intensity(p: &MimsParams, t12: Time) -> Result<f64, ModelError> {
    require(t12.ms() >= 0.0, "t12", t12.ms(), "t12 >= 0")?;
    require(p.tm.ms() > 0.0, "T_M", p.tm.ms(), "T_M > 0")?;
    Ok(kernel::eval(p.i0, p.tm.ms(), p.x, t12.ms()))
}

/// Effective homogeneous linewidth (FWHM, kHz) for a phase-memory time.
pub fn gamma_eff_from_tm(tm: Time) -> Result<f64, ModelError> {
    require(tm.ms() > 0.0, "T_M", tm.ms(), "T_M > 0")?;
    Ok(1.0 / (PI * tm.ms()))
}

/// Inverse of [`gamma_eff_from_tm`].
pub fn tm_from_gamma_eff(gamma_khz: f64) -> Result<Time, ModelError> {
    require(gamma_khz > 0.0, "Gamma_eff", gamma_khz, "Gamma_eff > 0")?;
    Ok(Time::from_ms(1.0 / (PI * gamma_khz)))
}

pub(crate) mod kernel {
    use super::*;

    #[inline]
    pub fn eval(i0: f64, tm: f64, x: f64, t: f64) -> f64 {
        let u = 2.0 * t / tm;
        i0 * exp_clamped(-2.0 * u.powf(x))
    }

    /// Returns the value and `[d/dI0, d/dT_M, d/dx]`.
    pub fn grad(i0: f64, tm: f64, x: f64, t: f64) -> (f64, [f64; 3]) {
        let u = 2.0 * t / tm;
        let ux = u.powf(x);
        let e = exp_clamped(-2.0 * ux);
        let f = i0 * e;
        let d_tm = f * 2.0 * x * ux / tm;
        let d_x = if u > 0.0 { -2.0 * f * ux * u.ln() } else { 0.0 };
        (f, [e, d_tm, d_x])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delay_is_i0() {
        let p = MimsParams::new(1.0, Time::from_us(40.0), 1.0);
        assert_eq!(mims_intensity(&p, Time::ZERO).unwrap(), 1.0);
    }

    #[test]
    fn stretched_value() {
        let p = MimsParams::new(1.0, Time::from_us(40.0), 1.5);
        let v = mims_intensity(&p, Time::from_us(10.0)).unwrap();
        assert!((v - 0.493_068_691_395_239_8).abs() < 1e-12);
    }

    #[test]
    fn low_field_intensity_scale() {
        let p = MimsParams::new(0.3, Time::from_us(40.0), 1.0);
        let v = mims_intensity(&p, Time::from_us(20.0)).unwrap();
        assert!((v - 0.040_600_584_970_983_81).abs() < 1e-14);
    }

    #[test]
    fn negative_delay_is_domain_error() {
        let p = MimsParams::new(1.0, Time::from_us(40.0), 1.0);
        assert!(matches!(
            mims_intensity(&p, Time::from_us(-1.0)),
            Err(ModelError::Domain { .. })
        ));
    }

    #[test]
    fn gamma_eff_conversions() {
        let g = gamma_eff_from_tm(Time::from_us(40.0)).unwrap();
        assert!((g - 7.957_747_154_594_767).abs() < 1e-12);
        let g = gamma_eff_from_tm(Time::from_ms(1.0 / PI)).unwrap();
        assert!((g - 1.0).abs() < 1e-15);
        let g = gamma_eff_from_tm(Time::from_us(13.26)).unwrap();
        assert!((g - 24.005_270_451_266_26).abs() < 1e-10);
        assert!(gamma_eff_from_tm(Time::ZERO).is_err());
        assert!(gamma_eff_from_tm(Time::from_us(-3.0)).is_err());
    }

    #[test]
    fn d_i0_is_intensity_over_i0() {
        let (f, g) = kernel::grad(0.7, 0.04, 1.3, 0.011);
        assert!((g[0] - f / 0.7).abs() < 1e-15);
    }

    #[test]
    fn log_intensity_linear_in_stretched_time() {
        let p = MimsParams::new(2.0, Time::from_us(25.0), 1.7);
        for i in 1..50 {
            let t = Time::from_us(i as f64 * 0.6);
            let v = mims_intensity(&p, t).unwrap();
            let s = (2.0 * t.ms() / p.tm.ms()).powf(p.x);
            assert!(((v / p.i0).ln() + 2.0 * s).abs() < 1e-12);
            let prev = mims_intensity(&p, Time::from_us((i - 1) as f64 * 0.6)).unwrap();
            assert!(v < prev);
        }
    }
}
