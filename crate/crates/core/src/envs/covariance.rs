use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectrum::EigenSequence;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceForm {
    /// Diagonal covariance in its eigenbasis, eigenvalues descending.
    Diagonal(EigenSequence),
    /// Dense symmetric PSD matrix.
    Dense(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
enum Sampler {
    /// Standard deviations per coordinate.
    Diagonal(Vec<f64>),
    /// `V Λ^{1/2}` from the symmetric eigendecomposition.
    Dense(DMatrix<f64>),
}

/// An arm's context covariance with a cached square-root factor, so a draw
/// `x = Σ^{1/2} z` costs at most `O(p²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpec {
    form: CovarianceForm,
    sampler: Sampler,
    spectrum: Vec<f64>,
}

impl CovarianceSpec {
    pub fn diagonal(eigs: EigenSequence) -> Self {
        let sampler = Sampler::Diagonal(eigs.values().iter().map(|v| v.sqrt()).collect());
        let spectrum = eigs.values().to_vec();
        CovarianceSpec {
            form: CovarianceForm::Diagonal(eigs),
            sampler,
            spectrum,
        }
    }

    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::domain(
                "covariance matrix must be square and non-empty",
            ));
        }
        let scale = matrix.amax().max(1.0);
        if (&matrix - matrix.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::domain("covariance matrix is not symmetric"));
        }
        let eig = matrix.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min < -1e-10 * scale {
            return Err(Error::domain(format!(
                "covariance matrix is not PSD (eigenvalue {min:e})"
            )));
        }
        let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let factor = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
        let mut spectrum: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
        spectrum.sort_by(|a, b| b.total_cmp(a));
        Ok(CovarianceSpec {
            form: CovarianceForm::Dense(matrix),
            sampler: Sampler::Dense(factor),
            spectrum,
        })
    }

    pub fn form(&self) -> &CovarianceForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn trace(&self) -> f64 {
        match &self.form {
            CovarianceForm::Diagonal(e) => e.trace(),
            CovarianceForm::Dense(m) => m.trace(),
        }
    }

    /// `c · Σ` for `c > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::domain(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        let root = factor.sqrt();
        Ok(match (&self.form, &self.sampler) {
            (CovarianceForm::Diagonal(e), _) => Self::diagonal(e.scaled(factor)?),
            (CovarianceForm::Dense(m), Sampler::Dense(f)) => CovarianceSpec {
                form: CovarianceForm::Dense(m * factor),
                sampler: Sampler::Dense(f * root),
                spectrum: self.spectrum.iter().map(|v| v * factor).collect(),
            },
            (CovarianceForm::Dense(_), Sampler::Diagonal(_)) => {
                unreachable!("dense uses a dense factor")
            }
        })
    }

    /// Dense `p × p` matrix (allocates for the diagonal form).
    pub fn to_matrix(&self) -> DMatrix<f64> {
        match &self.form {
            CovarianceForm::Diagonal(e) => {
                DMatrix::from_diagonal(&DVector::from_column_slice(e.values()))
            }
            CovarianceForm::Dense(m) => m.clone(),
        }
    }

    /// Draws one zero-mean Gaussian context with this covariance.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let p = self.dim();
        let z = DVector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)));
        match &self.sampler {
            Sampler::Diagonal(sd) => z.component_mul(&DVector::from_column_slice(sd)),
            Sampler::Dense(f) => f * z,
        }
    }

    /// `dᵀ Σ d`.
    pub fn quad_form(&self, d: &DVector<f64>) -> Result<f64> {
        if d.len() != self.dim() {
            return Err(Error::domain(format!(
                "vector length {} does not match covariance dimension {}",
                d.len(),
                self.dim()
            )));
        }
        Ok(match &self.form {
            CovarianceForm::Diagonal(e) => e
                .values()
                .iter()
                .zip(d.iter())
                .map(|(l, x)| l * x * x)
                .sum(),
            CovarianceForm::Dense(m) => d.dot(&(m * d)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use approx::assert_relative_eq;

    #[test]
    fn dense_validation() {
        assert!(
            CovarianceSpec::dense(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err()
        );
        assert!(
            CovarianceSpec::dense(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err()
        );
        let psd =
            CovarianceSpec::dense(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert_relative_eq!(psd.eigenvalues()[0], 2.0, epsilon = 1e-12);
        assert!(psd.eigenvalues()[1].abs() < 1e-12);
    }

    #[test]
    fn scaling_scales_spectrum_and_draws() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let base = CovarianceSpec::dense(m.clone()).unwrap();
        let scaled = base.scaled(4.0).unwrap();
        assert_relative_eq!(scaled.trace(), 12.0, epsilon = 1e-12);
        let x = base.sample(&mut stream(1, Stream::Contexts));
        let y = scaled.sample(&mut stream(1, Stream::Contexts));
        assert_relative_eq!(y, x * 2.0, epsilon = 1e-12);
        assert!(base.scaled(0.0).is_err());
    }

    #[test]
    fn quad_form_matches_matrix() {
        let diag = CovarianceSpec::diagonal(EigenSequence::new(vec![2.0, 1.0]).unwrap());
        assert_relative_eq!(
            diag.quad_form(&DVector::from_vec(vec![1.0, 0.0])).unwrap(),
            2.0
        );
        let d = DVector::from_vec(vec![0.3, -1.2]);
        let dense = CovarianceSpec::dense(diag.to_matrix()).unwrap();
        assert_relative_eq!(
            diag.quad_form(&d).unwrap(),
            dense.quad_form(&d).unwrap(),
            epsilon = 1e-14
        );
        assert!(diag.quad_form(&DVector::zeros(3)).is_err());
    }
}
