use super::{FitError, Observation};
use crate::catalog::{CatalogModel, Model, ModelId, ModelParams};
use crate::units::MU_B_OVER_K_B;

/// Heuristic starting point for a fit.
#[derive(Debug, Clone)]
pub struct InitialGuess {
    pub params: ModelParams,
    /// The data carried too little information for the heuristic; the
    /// values are generic defaults.
    pub degenerate: bool,
}

fn sorted_by(data: &[Observation], axis: usize) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = data.iter().map(|o| (o.input[axis], o.value)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// First abscissa at which `y` crosses `level`, linearly interpolated.
fn crossing(pts: &[(f64, f64)], level: f64, falling: bool) -> Option<f64> {
    pts.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let hit = if falling { y0 >= level && y1 < level } else { y0 <= level && y1 > level };
        hit.then(|| x0 + (level - y0) * (x1 - x0) / (y1 - y0))
    })
}

fn positive(v: f64, fallback: f64) -> f64 {
    if v.is_finite() && v > 0.0 { v } else { fallback }
}

/// Ordinary least-squares line; returns `(intercept, slope)`.
fn line_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

fn mims(data: &[Observation]) -> (Vec<f64>, bool) {
    let pts = sorted_by(data, 0);
    let i0 = positive(pts[0].1, 1.0);
    let t_last = pts[pts.len() - 1].0;
    let level = i0 * (-2.0f64).exp();
    // the stretched decay reaches e^-2 at t12 = T_M / 2 whatever x is
    if let Some(t) = crossing(&pts, level, true) {
        return (vec![i0, positive(2.0 * t, t_last), 1.0], false);
    }
    let (t, y) = pts[pts.len() - 1];
    let ratio = y / i0;
    if ratio > 0.0 && ratio < 1.0 && t > 0.0 {
        (vec![i0, -4.0 * t / ratio.ln(), 1.0], false)
    } else {
        (vec![i0, positive(10.0 * t_last, 1.0), 1.0], true)
    }
}

fn field(data: &[Observation]) -> (Vec<f64>, bool) {
    let pts = sorted_by(data, 0);
    let temp = data[0].input[1];
    let c = MU_B_OVER_K_B / temp;
    let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let gamma0 = positive(0.8 * ymin, 1.0);
    let first = pts[0].1;
    let last = pts[pts.len() - 1].1;
    let alpha1 = positive(first - gamma0, 0.1 * gamma0);
    let alpha2 = positive(last - gamma0, 0.1 * gamma0);
    let b_max = pts[pts.len() - 1].0;
    let i_min = pts.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map_or(0, |p| p.0);
    let g1 = crossing(&pts[..=i_min], 0.5 * (first + ymin), true)
        .filter(|b| *b > 0.0)
        .map_or(1.0 / (c * 0.05 * b_max.max(1e-3)), |b| 2f64.ln() / (c * b));
    let g2 = crossing(&pts[i_min..], 0.5 * (last + ymin), false)
        .filter(|b| *b > 0.0)
        .map_or(1.0 / (c * 0.5 * b_max.max(1e-3)), |b| 2f64.ln() / (c * b));
    let degenerate = pts.len() < 5 || !(first > ymin) || !(last > ymin);
    (vec![gamma0, alpha1, alpha2, positive(g1, 1.0), positive(g2, 0.1)], degenerate)
}

fn temperature(data: &[Observation]) -> (Vec<f64>, bool) {
    let pts = sorted_by(data, 0);
    let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    // scan the floor and keep the straightest log-log line
    let mut best: Option<(f64, [f64; 3])> = None;
    for k in 0..20 {
        let floor = ymin * k as f64 / 20.0;
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts
            .iter()
            .filter(|(t, y)| *t > 0.0 && *y > floor)
            .map(|(t, y)| (t.ln(), (y - floor).ln()))
            .unzip();
        if xs.len() < 3 {
            continue;
        }
        if let Some((a, n)) = line_fit(&xs, &ys) {
            let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - a - n * x).powi(2)).sum();
            if n.is_finite() && best.as_ref().is_none_or(|b| ss < b.0) {
                best = Some((ss, [positive(floor, 0.01 * ymin.abs().max(1e-3)), a.exp(), n.clamp(0.6, 2.9)]));
            }
        }
    }
    match best {
        Some((_, p)) => (p.to_vec(), false),
        None => (vec![positive(0.5 * ymin, 1.0), positive(0.5 * ymin, 1.0), 1.0], true),
    }
}

fn sech2(data: &[Observation]) -> (Vec<f64>, bool) {
    let pts = sorted_by(data, 0);
    let c = MU_B_OVER_K_B / data[0].input[1];
    let ymax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let gmax = positive(ymax, 1.0);
    // sech^2(z) = 1/2 at z = asinh(1)
    let g = crossing(&pts, 0.5 * gmax, true)
        .filter(|b| *b > 0.0)
        .map(|b| 2.0 * 1f64.asinh() / (c * b));
    match g {
        Some(g) => (vec![gmax, positive(g, 2.0)], false),
        None => (vec![gmax, 2.0], true),
    }
}

/// Spectral-diffusion parameters from `(t23, linewidth)` pairs: the
/// earliest width gives gamma0, the late-time slope against log10(t23)
/// gives gamma_TLS, and what is left of the rise goes to gamma_SD.
fn sd_from_widths(pts: &[(f64, f64)], t0: f64) -> ([f64; 4], bool) {
    let (t_first, w_first) = pts[0];
    let (t_last, w_last) = pts[pts.len() - 1];
    let gamma0 = positive(w_first, 1.0);
    let mid = pts[pts.len() / 2].0;
    let r_sd = positive(1.0 / mid, 1.0);
    let late = &pts[pts.len() / 2..];
    let (xs, ys): (Vec<f64>, Vec<f64>) = late.iter().map(|(t, w)| (t.log10(), *w)).unzip();
    let slope = if late.len() >= 2 { line_fit(&xs, &ys).map_or(0.0, |l| l.1) } else { 0.0 };
    let rise = w_last - w_first;
    let gamma_tls = positive(slope, 0.05 * rise.abs().max(0.1 * gamma0));
    let tls_part = gamma_tls * (t_last / t0.max(1e-300)).log10().max(0.0);
    let gamma_sd = positive(2.0 * (rise - tls_part), positive(rise, gamma0));
    let degenerate = !(rise > 0.0) || !(t_last > t_first);
    ([gamma0, gamma_sd, r_sd, gamma_tls], degenerate)
}

fn sd(data: &[Observation], axis: usize, t0: f64) -> (Vec<f64>, bool) {
    let pts = sorted_by(data, axis);
    let (p, degenerate) = sd_from_widths(&pts, t0);
    (p.to_vec(), degenerate)
}

fn three_level(data: &[Observation]) -> (Vec<f64>, bool) {
    let pts = sorted_by(data, 0);
    let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    // the factor approaches 1 - beta/2 on the T1 scale
    let beta = (2.0 * (1.0 - ymin)).clamp(0.05, 1.95);
    let t1 = crossing(&pts, 1.0 - 0.3 * beta, true).map_or(pts[pts.len() / 2].0, |t| t);
    let tz = 100.0 * t1;
    (vec![beta, positive(t1, 1.0), positive(tz, 100.0)], pts.len() < 4)
}

/// Linear interpolation of `ln y` at `t` over points sorted by time.
fn interp_ln(pts: &[(f64, f64)], t: f64) -> Option<f64> {
    pts.windows(2).find_map(|w| {
        let ((t0, y0), (t1, y1)) = (w[0], w[1]);
        (t >= t0 && t <= t1 && y0 > 0.0 && y1 > 0.0).then(|| {
            let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            y0.ln() + f * (y1.ln() - y0.ln())
        })
    })
}

/// Groups three-pulse points by t12 and regresses `ln I` on t12 at each
/// t23 of the longest group: the slope is `-4 pi Gamma(t23)` and the
/// intercept `ln(I0 F^2)`.
fn echo(data: &[Observation], t0: f64) -> (Vec<f64>, bool) {
    let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for o in data {
        let t12 = o.input[0];
        match groups.iter_mut().find(|g| g.0 == t12) {
            Some(g) => g.1.push((o.input[1], o.value)),
            None => groups.push((t12, vec![(o.input[1], o.value)])),
        }
    }
    for g in &mut groups {
        g.1.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let reference = groups.iter().max_by_key(|g| g.1.len()).map(|g| g.1.clone()).unwrap_or_default();
    let mut widths = Vec::new();
    let mut amp = 0.0f64;
    if groups.len() >= 2 {
        for &(t23, _) in &reference {
            let (xs, ys): (Vec<f64>, Vec<f64>) = groups
                .iter()
                .filter_map(|g| interp_ln(&g.1, t23).map(|l| (g.0, l)))
                .unzip();
            if xs.len() < 2 {
                continue;
            }
            if let Some((a, s)) = line_fit(&xs, &ys) {
                let g = -s / (4.0 * std::f64::consts::PI);
                if g > 0.0 {
                    widths.push((t23, g));
                    amp = amp.max(a.exp());
                }
            }
        }
    }
    let (sdp, degenerate) = if widths.len() >= 2 {
        sd_from_widths(&widths, t0)
    } else {
        ([1.0, 1.0, 1.0, 0.1], true)
    };
    let vmax = data.iter().map(|o| o.value).fold(0.0f64, f64::max);
    let i0 = positive(amp, positive(vmax, 1.0));
    (
        vec![i0, sdp[0], sdp[1], sdp[2], sdp[3], 0.5, 9.0, 1000.0],
        degenerate,
    )
}

/// Data-driven starting values for `model`.
///
/// Needs at least three finite points.
pub fn initial_guess(model: &CatalogModel, data: &[Observation]) -> Result<InitialGuess, FitError> {
    let good: Vec<Observation> = data
        .iter()
        .filter(|o| o.value.is_finite() && o.input.iter().all(|x| x.is_finite()))
        .copied()
        .collect();
    if good.len() < 3 {
        return Err(FitError::InvalidData(format!(
            "initial guess needs at least 3 finite points, got {}",
            good.len()
        )));
    }
    let t0 = model.t0().map_or(0.0, |t| t.ms());
    let (values, degenerate) = match model.id() {
        ModelId::Mims => mims(&good),
        ModelId::Field => field(&good),
        ModelId::Temperature => temperature(&good),
        ModelId::Sech2 => sech2(&good),
        ModelId::SpectralDiffusion => sd(&good, 1, t0),
        ModelId::SpectralDiffusionT23 => sd(&good, 0, t0),
        ModelId::ThreeLevel => three_level(&good),
        ModelId::StimulatedEcho => echo(&good, t0),
    };
    let params = ModelParams::new(model.id(), values)?;
    Ok(InitialGuess { params, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogModel;

    fn sample(model: &CatalogModel, p: &[f64], xs: &[[f64; 2]]) -> Vec<Observation> {
        xs.iter()
            .map(|&x| Observation::new(x, model.eval(p, x).unwrap()))
            .collect()
    }

    #[test]
    fn mims_guess_close_to_truth() {
        let m = CatalogModel::Mims;
        let xs: Vec<[f64; 2]> = (0..40).map(|i| [0.0005 + 0.002 * i as f64, 0.0]).collect();
        let data = sample(&m, &[2.0, 0.04, 1.4], &xs);
        let g = initial_guess(&m, &data).unwrap();
        assert!(!g.degenerate);
        let tm = g.params.values[1];
        assert!((tm / 0.04 - 1.0).abs() < 0.1, "T_M guess {tm}");
    }

    #[test]
    fn flat_mims_is_degenerate() {
        let data: Vec<Observation> = (0..5).map(|i| Observation::new([i as f64 * 0.01, 0.0], 1.0)).collect();
        assert!(initial_guess(&CatalogModel::Mims, &data).unwrap().degenerate);
    }

    #[test]
    fn too_few_points() {
        let data = vec![Observation::new([0.0, 0.0], 1.0); 2];
        assert!(initial_guess(&CatalogModel::Mims, &data).is_err());
    }

    #[test]
    fn temperature_exponent_recovered() {
        let m = CatalogModel::Temperature;
        let xs: Vec<[f64; 2]> = (1..12).map(|i| [0.1 * i as f64 + 1.0, 0.0]).collect();
        let data = sample(&m, &[0.0001, 5.0, 1.5], &xs);
        let g = initial_guess(&m, &data).unwrap();
        assert!((g.params.values[2] - 1.5).abs() < 0.2);
    }

    #[test]
    fn every_model_has_a_guess_inside_bounds() {
        for id in ModelId::ALL {
            let m = CatalogModel::new(id);
            let xs: Vec<[f64; 2]> = (0..12).map(|i| [0.05 + 0.1 * i as f64, 0.05 + 0.5 * i as f64]).collect();
            let data: Vec<Observation> = xs.iter().map(|&x| Observation::new(x, 1.0 + x[0])).collect();
            let g = initial_guess(&m, &data).unwrap();
            assert!(g.params.within_bounds(), "{id}");
        }
    }
}
