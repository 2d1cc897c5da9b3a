//! Evaluate the catalogued models at a few representative points.

use echofit::models::{
    field_linewidth, field_linewidth_minimum, gamma_eff_from_tm, mims_intensity, sd_linewidth_t23,
    stimulated_echo_intensity, three_level_population_factor, FieldModelParams, MimsParams,
    SpectralDiffusionParams, ThreeLevelParams,
};
use echofit::Time;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let field = FieldModelParams::new(7.42, 32.60, 17.62, 0.3507, 0.0064);
    let t = 0.007;
    println!("Gamma_eff(B) at {t} K:");
    for b in [0.0, 0.05, 0.09, 0.14, 0.5, 2.0] {
        println!("  {b:>5.2} T  {:8.4} kHz", field_linewidth(&field, b, t)?);
    }
    let m = field_linewidth_minimum(&field, t, 2.0)?;
    println!("minimum {:.4} kHz at {:.4} T ({:?})", m.linewidth, m.field, m.location);

    let tm = Time::from_us(40.0);
    println!("\nT_M = 40 us -> Gamma_eff = {:.4} kHz", gamma_eff_from_tm(tm)?);
    let mims = MimsParams::new(1.0, tm, 1.3);
    for us in [1.0, 10.0, 20.0, 40.0] {
        println!("  I(t12 = {us:>4} us) = {:.5}", mims_intensity(&mims, Time::from_us(us))?);
    }

    let sd = SpectralDiffusionParams::new(7.96, 37.77, 1.02, 12.24, Time::from_us(50.0));
    let tl = ThreeLevelParams::new(1.0, Time::from_ms(9.0), Time::from_s(2.0), 0.5);
    println!("\nthree-pulse decay at t12 = 330 ns:");
    for ms in [0.05, 0.5, 5.0, 7.5] {
        let t23 = Time::from_ms(ms);
        println!(
            "  t23 = {ms:>4} ms  Gamma = {:7.3} kHz  F = {:.4}  I = {:.4}",
            sd_linewidth_t23(&sd, t23)?,
            three_level_population_factor(&tl, t23)?,
            stimulated_echo_intensity(&tl, &sd, Time::from_ns(330.0), t23)?
        );
    }
    Ok(())
}
