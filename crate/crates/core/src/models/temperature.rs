use super::{require, ModelError};

/// Saturating power law `floor + amplitude * T^n` (kHz, T in kelvin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempModelParams {
    pub gamma_floor: f64,
    pub amplitude: f64,
    pub exponent: f64,
}

impl TempModelParams {
    pub fn new(gamma_floor: f64, amplitude: f64, exponent: f64) -> Self {
        Self {
            gamma_floor,
            amplitude,
            exponent,
        }
    }
}

pub fn temp_linewidth(p: &TempModelParams, t: f64) -> Result<f64, ModelError> {
    require(t > 0.0, "T", t, "T > 0 K")?;
    Ok(kernel::eval(&[p.gamma_floor, p.amplitude, p.exponent], t))
}

pub(crate) mod kernel {
    #[inline]
    pub fn eval(p: &[f64], t: f64) -> f64 {
        p[0] + p[1] * t.powf(p[2])
    }

    pub fn grad(p: &[f64], t: f64) -> (f64, [f64; 3]) {
        let tn = t.powf(p[2]);
        (p[0] + p[1] * tn, [1.0, tn, p[1] * tn * t.ln()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_zero_is_floor() {
        let p = TempModelParams::new(8.0, 0.0, 1.7);
        assert_eq!(temp_linewidth(&p, 0.05).unwrap(), 8.0);
    }

    #[test]
    fn power_law_values() {
        let p = TempModelParams::new(0.0, 100.0, 1.34);
        assert!((temp_linewidth(&p, 0.2).unwrap() - 11.571_247_800_619_31).abs() < 1e-10);
        let p = TempModelParams::new(0.0, 100.0, 1.53);
        assert!((temp_linewidth(&p, 0.2).unwrap() - 8.522_674_328_957_924).abs() < 1e-10);
    }

    #[test]
    fn monotone_with_floor_limit() {
        let p = TempModelParams::new(7.5, 60.0, 1.34);
        let mut prev = p.gamma_floor;
        for i in 1..200 {
            let v = temp_linewidth(&p, i as f64 * 0.003).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!((temp_linewidth(&p, 1e-9).unwrap() - 7.5).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_temperature_rejected() {
        let p = TempModelParams::new(1.0, 1.0, 1.0);
        assert!(temp_linewidth(&p, 0.0).is_err());
        assert!(temp_linewidth(&p, -1.0).is_err());
    }
}
