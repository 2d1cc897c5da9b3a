use super::{require, ModelError};
use crate::units::{exp_clamped, MU_B_OVER_K_B};

/// Parameters of the magnetic-field linewidth model
/// `gamma0 + alpha1 exp(-g1 c B) + alpha2 (1 - exp(-g2 c B))`, `c = mu_B/(k_B T)`.
///
/// `alpha1`/`g1` belong to the term that is suppressed by the field,
/// `alpha2`/`g2` to the term that rises with it. Linewidths in kHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldModelParams {
    pub gamma0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl FieldModelParams {
    pub fn new(gamma0: f64, alpha1: f64, alpha2: f64, g1: f64, g2: f64) -> Self {
        Self {
            gamma0,
            alpha1,
            alpha2,
            g1,
            g2,
        }
    }

    /// The decaying term's g-factor exceeds the rising term's.
    ///
    /// A fit that violates this landed in the mirrored basin; it is flagged,
    /// never swapped, because the two terms are not interchangeable.
    pub fn has_canonical_ordering(&self) -> bool {
        self.g1 > self.g2
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.gamma0, self.alpha1, self.alpha2, self.g1, self.g2]
    }

    pub fn from_slice(p: &[f64]) -> Self {
        Self::new(p[0], p[1], p[2], p[3], p[4])
    }
}

fn check_inputs(b: f64, t: f64) -> Result<(), ModelError> {
    require(t > 0.0, "T", t, "T > 0 K")?;
    require(b >= 0.0, "B", b, "B >= 0 T")
}

/// Effective homogeneous linewidth (kHz) at field `b` (T) and temperature `t` (K).
pub fn field_linewidth(p: &FieldModelParams, b: f64, t: f64) -> Result<f64, ModelError> {
    check_inputs(b, t)?;
    Ok(kernel::eval(&p.to_array(), b, t))
}

/// Where the minimum of the field model sits on `[0, B_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimumLocation {
    Interior,
    LowerBoundary,
    UpperBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMinimum {
    /// Tesla.
    pub field: f64,
    /// kHz.
    pub linewidth: f64,
    /// kHz/T at the returned field.
    pub slope: f64,
    pub location: MinimumLocation,
}

impl FieldMinimum {
    pub fn is_interior(&self) -> bool {
        self.location == MinimumLocation::Interior
    }
}

const MIN_GRID_POINTS: usize = 4001;
const SLOPE_TOL: f64 = 1e-9;

/// Global minimiser of [`field_linewidth`] on `[0, b_max]`.
///
/// A dense grid locates the basin, then a safeguarded Newton iteration on
/// the slope drives `|dGamma/dB|` below 1e-9 kHz/T. Minima at either end of
/// the interval are returned with the matching [`MinimumLocation`].
pub fn field_linewidth_minimum(
    p: &FieldModelParams,
    t: f64,
    b_max: f64,
) -> Result<FieldMinimum, ModelError> {
    require(t > 0.0, "T", t, "T > 0 K")?;
    require(b_max > 0.0, "B_max", b_max, "B_max > 0 T")?;
    let arr = p.to_array();
    let n = MIN_GRID_POINTS;
    let step = b_max / (n - 1) as f64;
    let grid = |i: usize| if i == n - 1 { b_max } else { i as f64 * step };

    // ties resolve to the largest field so a flat tail reports B_max
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..n {
        let v = kernel::eval(&arr, grid(i), t);
        if v <= best_val {
            best_val = v;
            best = i;
        }
    }

    let slope_at = |b: f64| kernel::slope(&arr, b, t);
    let boundary = |b: f64, location| FieldMinimum {
        field: b,
        linewidth: kernel::eval(&arr, b, t),
        slope: slope_at(b),
        location,
    };

    if best == 0 && slope_at(0.0) >= 0.0 {
        return Ok(boundary(0.0, MinimumLocation::LowerBoundary));
    }
    if best == n - 1 && slope_at(b_max) <= 0.0 {
        return Ok(boundary(b_max, MinimumLocation::UpperBoundary));
    }

    let mut lo = grid(best.saturating_sub(1));
    let mut hi = grid((best + 1).min(n - 1));
    // the bracket must straddle a sign change of the slope
    if slope_at(lo) > 0.0 || slope_at(hi) < 0.0 {
        return Ok(boundary(grid(best), MinimumLocation::Interior));
    }

    let mut b = grid(best);
    for _ in 0..200 {
        let d = slope_at(b);
        if d.abs() < SLOPE_TOL {
            break;
        }
        if d < 0.0 {
            lo = b;
        } else {
            hi = b;
        }
        let curv = kernel::curvature(&arr, b, t);
        let newton = b - d / curv;
        let next = if curv > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == b || hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
        b = next;
    }

    Ok(FieldMinimum {
        field: b,
        linewidth: kernel::eval(&arr, b, t),
        slope: slope_at(b),
        location: MinimumLocation::Interior,
    })
}

pub(crate) mod kernel {
    use super::*;

    #[inline]
    fn rates(p: &[f64], b: f64, t: f64) -> (f64, f64, f64) {
        let c = MU_B_OVER_K_B / t;
        let e1 = exp_clamped(-p[3] * c * b);
        let e2 = exp_clamped(-p[4] * c * b);
        (c, e1, e2)
    }

    #[inline]
    pub fn eval(p: &[f64], b: f64, t: f64) -> f64 {
        let (_, e1, e2) = rates(p, b, t);
        p[0] + p[1] * e1 + p[2] * (1.0 - e2)
    }

    /// Value and derivatives with respect to `[gamma0, alpha1, alpha2, g1, g2]`.
    pub fn grad(p: &[f64], b: f64, t: f64) -> (f64, [f64; 5]) {
        let (c, e1, e2) = rates(p, b, t);
        let f = p[0] + p[1] * e1 + p[2] * (1.0 - e2);
        (
            f,
            [1.0, e1, 1.0 - e2, -p[1] * c * b * e1, p[2] * c * b * e2],
        )
    }

    pub fn slope(p: &[f64], b: f64, t: f64) -> f64 {
        let (c, e1, e2) = rates(p, b, t);
        -p[1] * p[3] * c * e1 + p[2] * p[4] * c * e2
    }

    pub fn curvature(p: &[f64], b: f64, t: f64) -> f64 {
        let (c, e1, e2) = rates(p, b, t);
        p[1] * (p[3] * c).powi(2) * e1 - p[2] * (p[4] * c).powi(2) * e2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper() -> FieldModelParams {
        FieldModelParams::new(7.42, 32.60, 17.62, 0.3507, 0.0064)
    }

    #[test]
    fn zero_field_is_gamma0_plus_alpha1() {
        for &t in &[0.007, 0.05, 0.5, 3.0] {
            let v = field_linewidth(&paper(), 0.0, t).unwrap();
            assert_eq!(v, 7.42 + 32.60);
        }
        assert!((field_linewidth(&paper(), 0.0, 0.007).unwrap() - 40.02).abs() < 1e-9);
    }

    #[test]
    fn high_field_asymptote() {
        let p = paper();
        let c = MU_B_OVER_K_B / 0.007;
        // both exponent arguments above 50
        let b = 51.0 / (p.g2 * c);
        let v = field_linewidth(&p, b, 0.007).unwrap();
        assert!((v - (p.gamma0 + p.alpha2)).abs() < 1e-9);
    }

    #[test]
    fn two_tesla_evaluation() {
        let v = field_linewidth(&paper(), 2.0, 0.007).unwrap();
        assert!((v - 19.880_921_753_805_91).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(field_linewidth(&paper(), 0.1, 0.0).is_err());
        assert!(field_linewidth(&paper(), -0.1, 0.007).is_err());
        assert!(field_linewidth_minimum(&paper(), 0.007, 0.0).is_err());
    }

    #[test]
    fn minimum_matches_stationarity() {
        let m = field_linewidth_minimum(&paper(), 0.007, 2.0).unwrap();
        assert!(m.is_interior());
        // 40-digit evaluation of ln(a1 g1 / (a2 g2)) / ((g1 - g2) c)
        assert!((m.field - 0.139_802_943_364_567_24).abs() < 1e-10);
        assert!((m.linewidth - 9.164_794_567_223_437).abs() < 1e-9);
        assert!(m.slope.abs() < 1e-9);
    }

    #[test]
    fn monotone_decreasing_hits_upper_boundary() {
        let p = FieldModelParams::new(5.0, 10.0, 0.0, 0.5, 0.1);
        for &t in &[0.007, 0.1, 1.0] {
            let m = field_linewidth_minimum(&p, t, 2.0).unwrap();
            assert_eq!(m.location, MinimumLocation::UpperBoundary);
            assert_eq!(m.field, 2.0);
        }
    }

    #[test]
    fn monotone_increasing_hits_lower_boundary() {
        let p = FieldModelParams::new(5.0, 0.0, 10.0, 0.3, 0.1);
        for &t in &[0.007, 0.1, 1.0] {
            let m = field_linewidth_minimum(&p, t, 2.0).unwrap();
            assert_eq!(m.location, MinimumLocation::LowerBoundary);
            assert_eq!(m.field, 0.0);
        }
    }

    #[test]
    fn canonical_ordering() {
        assert!(paper().has_canonical_ordering());
        assert!(!FieldModelParams::new(1.0, 1.0, 1.0, 0.01, 0.2).has_canonical_ordering());
    }
}
