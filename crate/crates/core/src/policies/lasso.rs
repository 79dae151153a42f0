use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::interpolate::DesignData;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub theta: DVector<f64>,
    pub converged: bool,
    /// Full coordinate sweeps performed.
    pub iterations: usize,
}

fn soft_threshold(z: f64, penalty: f64) -> f64 {
    z.signum() * (z.abs() - penalty).max(0.0)
}

/// Minimizes `(1/2N)‖Y − Xθ‖² + penalty·‖θ‖₁` by cyclic coordinate descent.
///
/// Stops once the largest coordinate change in a sweep is at most `tol`, or
/// after `max_iter` sweeps with `converged = false`.
pub fn lasso_coordinate_descent(
    data: &DesignData,
    penalty: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LassoFit> {
    if !(penalty >= 0.0) || !(tol > 0.0) {
        return Err(Error::domain(format!(
            "lasso needs penalty >= 0 and tol > 0, got {penalty} and {tol}"
        )));
    }
    let x = data.contexts();
    let (n, p) = x.shape();
    let nf = n as f64;
    let col_sq: Vec<f64> = x.column_iter().map(|c| c.norm_squared() / nf).collect();
    let mut theta = DVector::<f64>::zeros(p);
    let mut residual = data.rewards().clone();

    for sweep in 1..=max_iter {
        let mut max_change = 0.0f64;
        for k in 0..p {
            if col_sq[k] == 0.0 {
                continue;
            }
            let col = x.column(k);
            let old: f64 = theta[k];
            // partial residual correlation with coordinate k added back
            let rho = col.dot(&residual) / nf + col_sq[k] * old;
            let new = soft_threshold(rho, penalty) / col_sq[k];
            let delta = new - old;
            if delta != 0.0 {
                residual.axpy(-delta, &col, 1.0);
                theta[k] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change <= tol {
            return Ok(LassoFit {
                theta,
                converged: true,
                iterations: sweep,
            });
        }
    }
    Ok(LassoFit {
        theta,
        converged: false,
        iterations: max_iter,
    })
}
