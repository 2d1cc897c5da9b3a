//! Three-pulse echo models: spectral-diffusion linewidth, three-level
//! population factor, the composed stimulated-echo intensity, and the
//! sech^2 field/temperature form of the spectral-diffusion amplitude.

use super::{require, ModelError};
use crate::units::{exp_clamped, Time, MU_B_OVER_K_B};
use std::f64::consts::PI;

/// Spectral-diffusion linewidth parameters. Linewidths and `r_sd` in kHz;
/// `gamma_tls` is kHz per decade of `t23 / t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDiffusionParams {
    pub gamma0: f64,
    pub gamma_sd: f64,
    pub r_sd: f64,
    pub gamma_tls: f64,
    /// Reference timescale of the logarithmic term. Fixed per dataset.
    pub t0: Time,
}

impl SpectralDiffusionParams {
    pub fn new(gamma0: f64, gamma_sd: f64, r_sd: f64, gamma_tls: f64, t0: Time) -> Self {
        Self {
            gamma0,
            gamma_sd,
            r_sd,
            gamma_tls,
            t0,
        }
    }

    fn array(&self) -> [f64; 4] {
        [self.gamma0, self.gamma_sd, self.r_sd, self.gamma_tls]
    }
}

/// Three-level decay parameters: intensity scale, excited-state lifetime,
/// Zeeman shelving lifetime and branching ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelParams {
    pub i0: f64,
    pub t1: Time,
    pub tz: Time,
    pub beta: f64,
}

impl ThreeLevelParams {
    pub fn new(i0: f64, t1: Time, tz: Time, beta: f64) -> Self {
        Self { i0, t1, tz, beta }
    }
}

fn check_sd(p: &SpectralDiffusionParams, t12: Time, t23: Time) -> Result<(), ModelError> {
    require(t12.ms() >= 0.0, "t12", t12.ms(), "t12 >= 0")?;
    require(p.t0.ms() > 0.0, "t0", p.t0.ms(), "t0 > 0")?;
    // the logarithmic term is only defined from t0 onwards; with no TLS
    // contribution it vanishes identically and earlier delays are allowed
    if p.gamma_tls != 0.0 {
        require(t23 >= p.t0, "t23", t23.ms(), "t23 >= t0")?;
    } else {
        require(t23.ms() >= 0.0, "t23", t23.ms(), "t23 >= 0")?;
    }
    Ok(())
}

/// Full spectral-diffusion linewidth (kHz) at pulse separation `t12` and
/// waiting time `t23`.
pub fn sd_linewidth(p: &SpectralDiffusionParams, t12: Time, t23: Time) -> Result<f64, ModelError> {
    check_sd(p, t12, t23)?;
    Ok(kernel::sd_eval(&p.array(), p.t0.ms(), t12.ms(), t23.ms()))
}

/// Small-`t12` form of [`sd_linewidth`].
pub fn sd_linewidth_t23(p: &SpectralDiffusionParams, t23: Time) -> Result<f64, ModelError> {
    sd_linewidth(p, Time::ZERO, t23)
}

fn check_three_level(p: &ThreeLevelParams, t23: Time) -> Result<(), ModelError> {
    require(t23.ms() >= 0.0, "t23", t23.ms(), "t23 >= 0")?;
    require(p.t1.ms() > 0.0, "T1", p.t1.ms(), "T1 > 0")?;
    require(p.tz.ms() > 0.0, "T_Z", p.tz.ms(), "T_Z > 0")
}

/// Population factor of the three-level stimulated echo (before squaring).
pub fn three_level_population_factor(p: &ThreeLevelParams, t23: Time) -> Result<f64, ModelError> {
    check_three_level(p, t23)?;
    Ok(kernel::population(p.beta, p.t1.ms(), p.tz.ms(), t23.ms()))
}

/// Stimulated-echo intensity with three-level population trapping and the
/// spectral-diffusion linewidth.
pub fn stimulated_echo_intensity(
    p: &ThreeLevelParams,
    sd: &SpectralDiffusionParams,
    t12: Time,
    t23: Time,
) -> Result<f64, ModelError> {
    check_three_level(p, t23)?;
    check_sd(sd, t12, t23)?;
    let q = [
        p.i0,
        sd.gamma0,
        sd.gamma_sd,
        sd.r_sd,
        sd.gamma_tls,
        p.beta,
        p.t1.ms(),
        p.tz.ms(),
    ];
    Ok(kernel::echo_eval(&q, sd.t0.ms(), t12.ms(), t23.ms()))
}

/// `gamma_max * sech^2(g mu_B B / (2 k_B T))`, kHz.
pub fn sech2_sd_amplitude(gamma_max: f64, g: f64, b: f64, t: f64) -> Result<f64, ModelError> {
    require(t > 0.0, "T", t, "T > 0 K")?;
    Ok(kernel::sech2_eval(&[gamma_max, g], b, t))
}

pub(crate) mod kernel {
    use super::*;

    /// Relative |T_Z - T1| / T1 below which the degenerate limit is used.
    const DEGENERATE_REL: f64 = 1e-9;

    /// Logarithmic TLS term, zero when its amplitude is zero.
    #[inline]
    fn tls_log(gamma_tls: f64, t0: f64, t23: f64) -> f64 {
        if gamma_tls == 0.0 {
            0.0
        } else {
            (t23 / t0).log10()
        }
    }

    #[inline]
    pub fn sd_eval(p: &[f64], t0: f64, t12: f64, t23: f64) -> f64 {
        let [g0, gsd, r, gtls] = [p[0], p[1], p[2], p[3]];
        g0 + 0.5 * gsd * (r * t12 + (1.0 - exp_clamped(-r * t23))) + gtls * tls_log(gtls, t0, t23)
    }

    /// Derivatives with respect to `[gamma0, gamma_sd, r_sd, gamma_tls]`.
    pub fn sd_grad(p: &[f64], t0: f64, t12: f64, t23: f64) -> (f64, [f64; 4]) {
        let [g0, gsd, r, gtls] = [p[0], p[1], p[2], p[3]];
        let e = exp_clamped(-r * t23);
        let log = (t23 / t0).log10();
        let f = g0 + 0.5 * gsd * (r * t12 + (1.0 - e)) + gtls * tls_log(gtls, t0, t23);
        (
            f,
            [1.0, 0.5 * (r * t12 + 1.0 - e), 0.5 * gsd * (t12 + t23 * e), log],
        )
    }

    #[inline]
    fn degenerate(t1: f64, tz: f64) -> bool {
        ((tz - t1) / t1).abs() < DEGENERATE_REL
    }

    #[inline]
    pub fn population(beta: f64, t1: f64, tz: f64, t: f64) -> f64 {
        let a = exp_clamped(-t / t1);
        if degenerate(t1, tz) {
            return a + 0.5 * beta * (t / t1) * a;
        }
        // tz/(tz - t1) * (e^{-t/tz} - e^{-t/t1}) written through expm1 so the
        // near-degenerate difference keeps its precision
        let delta = t * (tz - t1) / (t1 * tz);
        let shelved = tz * a * delta.clamp(-700.0, 700.0).exp_m1() / (tz - t1);
        a + 0.5 * beta * shelved
    }

    /// Derivatives with respect to `[beta, T1, T_Z]`.
    pub fn population_grad(beta: f64, t1: f64, tz: f64, t: f64) -> (f64, [f64; 3]) {
        let a = exp_clamped(-t / t1);
        let da_dt1 = a * t / (t1 * t1);
        if degenerate(t1, tz) {
            let shelved = (t / t1) * a;
            // derivatives of f(s) = exp(-t/s)
            let f1 = t / (t1 * t1) * a;
            let f2 = a * (t * t / t1.powi(4) - 2.0 * t / t1.powi(3));
            return (
                a + 0.5 * beta * shelved,
                [
                    0.5 * shelved,
                    da_dt1 + 0.5 * beta * 0.5 * t1 * f2,
                    0.5 * beta * (f1 + 0.5 * t1 * f2),
                ],
            );
        }
        let z = exp_clamped(-t / tz);
        let d = tz - t1;
        let k = tz / d;
        let delta = t * d / (t1 * tz);
        let diff = a * delta.clamp(-700.0, 700.0).exp_m1();
        let f = a + 0.5 * beta * k * diff;
        let d_beta = 0.5 * k * diff;
        let d_t1 = da_dt1 + 0.5 * beta * (tz / (d * d) * diff - k * da_dt1);
        let d_tz = 0.5 * beta * (-t1 / (d * d) * diff + k * z * t / (tz * tz));
        (f, [d_beta, d_t1, d_tz])
    }

    /// Parameters: `[I0, gamma0, gamma_sd, r_sd, gamma_tls, beta, T1, T_Z]`.
    #[inline]
    pub fn echo_eval(q: &[f64], t0: f64, t12: f64, t23: f64) -> f64 {
        let pop = population(q[5], q[6], q[7], t23);
        let gamma = sd_eval(&q[1..5], t0, t12, t23);
        q[0] * pop * pop * exp_clamped(-4.0 * PI * t12 * gamma)
    }

    pub fn echo_grad(q: &[f64], t0: f64, t12: f64, t23: f64) -> (f64, [f64; 8]) {
        let (pop, dpop) = population_grad(q[5], q[6], q[7], t23);
        let (gamma, dgamma) = sd_grad(&q[1..5], t0, t12, t23);
        let e = exp_clamped(-4.0 * PI * t12 * gamma);
        let f = q[0] * pop * pop * e;
        let k = -4.0 * PI * t12 * f;
        let p2 = 2.0 * q[0] * pop * e;
        (
            f,
            [
                pop * pop * e,
                k * dgamma[0],
                k * dgamma[1],
                k * dgamma[2],
                k * dgamma[3],
                p2 * dpop[0],
                p2 * dpop[1],
                p2 * dpop[2],
            ],
        )
    }

    #[inline]
    fn sech2(a: f64) -> f64 {
        let e = (-2.0 * a.abs()).exp();
        4.0 * e / ((1.0 + e) * (1.0 + e))
    }

    #[inline]
    pub fn sech2_eval(p: &[f64], b: f64, t: f64) -> f64 {
        p[0] * sech2(p[1] * MU_B_OVER_K_B * b / (2.0 * t))
    }

    /// Derivatives with respect to `[gamma_max, g]`.
    pub fn sech2_grad(p: &[f64], b: f64, t: f64) -> (f64, [f64; 2]) {
        let k = MU_B_OVER_K_B * b / (2.0 * t);
        let a = p[1] * k;
        let s = sech2(a);
        (p[0] * s, [s, -2.0 * p[0] * s * a.tanh() * k])
    }
}
