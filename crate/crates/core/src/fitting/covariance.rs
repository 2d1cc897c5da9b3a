use nalgebra::{DMatrix, SymmetricEigen};

/// Parameter covariance estimated from a residual Jacobian.
#[derive(Debug, Clone)]
pub struct Covariance {
    pub matrix: DMatrix<f64>,
    pub std_errors: Vec<f64>,
    /// Parameters the data leave undetermined (infinite standard error).
    pub unbounded: Vec<bool>,
}

const NULL_EIGEN: f64 = 1e-10;
const NULL_WEIGHT: f64 = 1e-6;

/// `s^2 (J^T J)^+` with `s^2 = sse / dof`.
///
/// Columns are scaled to unit norm before the eigendecomposition so that
/// parameters of very different magnitude do not masquerade as degenerate.
/// Directions whose eigenvalue falls below `1e-10` of the largest are
/// dropped; any parameter with noticeable weight on them is reported as
/// unbounded.
pub fn covariance_from_jacobian(jac: &DMatrix<f64>, sse: f64, dof: usize) -> Covariance {
    let k = jac.ncols();
    let s2 = if dof > 0 { sse / dof as f64 } else { f64::NAN };
    let norms: Vec<f64> = (0..k).map(|j| jac.column(j).norm()).collect();
    let mut scaled = jac.clone();
    for (j, &n) in norms.iter().enumerate() {
        if n > 0.0 {
            scaled.column_mut(j).unscale_mut(n);
        }
    }
    let info = scaled.transpose() * &scaled;
    let eig = SymmetricEigen::new(info);
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);

    let mut pinv = DMatrix::zeros(k, k);
    let mut null_weight = vec![0.0; k];
    for (e, &ev) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(e);
        if max_ev > 0.0 && ev > NULL_EIGEN * max_ev {
            pinv += (v * v.transpose()) / ev;
        } else {
            for j in 0..k {
                null_weight[j] += v[j] * v[j];
            }
        }
    }

    let mut matrix = DMatrix::zeros(k, k);
    let mut unbounded = vec![false; k];
    for i in 0..k {
        unbounded[i] = norms[i] == 0.0 || null_weight[i] > NULL_WEIGHT;
    }
    for i in 0..k {
        for j in 0..k {
            matrix[(i, j)] = if unbounded[i] || unbounded[j] {
                if i == j { f64::INFINITY } else { f64::NAN }
            } else {
                s2 * pinv[(i, j)] / (norms[i] * norms[j])
            };
        }
    }
    let std_errors = (0..k).map(|i| matrix[(i, i)].max(0.0).sqrt()).collect();
    Covariance { matrix, std_errors, unbounded }
}
