//! Gaussian reflectivity prior, measurement noise, and SNR accounting.
//!
//! The hidden-wall reflectivity vector `f` is modeled as a zero-mean
//! Gaussian with a smoothness-promoting covariance whose entries decay in
//! the squared distance between patch centers:
//!
//! ```text
//! cov[i, j] = exp(-|x_i - x_j|^2 / (2 pi sigma_f^2))
//! ```
//!
//! The exponent carries the `1 / (2 pi sigma_f^2)` factor verbatim; see
//! [`GaussianPrior::with_correlation_length`] for the standard
//! squared-exponential parameterization the experiment presets use.
//!
//! Measurement noise is i.i.d. Gaussian with variance `sigma^2`, and the
//! signal-to-noise ratio of an operator `A` is
//! `tr(A cov Aᵀ) / (M sigma^2)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::SurfacePatch;
use crate::rng::{rng_from_seed, standard_normal_vec};

/// Reflectivity values over the hidden-wall patches, aligned with the
/// wall's lexicographic patch order. Entries may be negative under the
/// zero-mean prior.
pub type ReflectivityField = DVector<f64>;

/// Zero-mean Gaussian prior over patch reflectivities.
///
/// Holds both the covariance and a symmetric factor `B` with `B Bᵀ ≈ cov`
/// (exact up to clipping of tiny negative eigenvalues, which squared-
/// exponential Gram matrices develop at fine grids).
#[derive(Debug, Clone)]
pub struct GaussianPrior {
    sigma_f_sq: f64,
    covariance: DMatrix<f64>,
    factor: DMatrix<f64>,
    clipped_fraction: f64,
}

impl GaussianPrior {
    /// Covariance from patch centers and spatial variance `sigma_f_sq`.
    pub fn from_patches(patches: &[SurfacePatch], sigma_f_sq: f64) -> Result<Self> {
        if sigma_f_sq.is_nan() || sigma_f_sq <= 0.0 {
            return Err(Error::Config("sigma_f_sq must be positive".into()));
        }
        if patches.is_empty() {
            return Err(Error::Empty("prior needs at least one patch".into()));
        }
        let n = patches.len();
        let scale = 1.0 / (2.0 * std::f64::consts::PI * sigma_f_sq);
        let cov = DMatrix::from_fn(n, n, |i, j| {
            let d2 = (patches[i].center - patches[j].center).norm_squared();
            (-scale * d2).exp()
        });
        Self::from_covariance(sigma_f_sq, cov)
    }

    /// Covariance with a plain squared-exponential profile
    /// `exp(-d^2 / (2 l^2))` for a correlation length `l` in meters.
    ///
    /// Equivalent to [`Self::from_patches`] at scale `l^2 / pi`; this is
    /// the form the experiment presets use, with their smoothness
    /// parameter read as a length.
    pub fn with_correlation_length(patches: &[SurfacePatch], length_m: f64) -> Result<Self> {
        if length_m.is_nan() || length_m <= 0.0 {
            return Err(Error::Config("correlation length must be positive".into()));
        }
        Self::from_patches(patches, length_m * length_m / std::f64::consts::PI)
    }

    /// Wrap an explicit covariance matrix (must be symmetric PSD up to
    /// numerical noise).
    pub fn from_covariance(sigma_f_sq: f64, covariance: DMatrix<f64>) -> Result<Self> {
        let n = covariance.nrows();
        if n != covariance.ncols() {
            return Err(Error::DimensionMismatch("covariance must be square".into()));
        }
        let eig = SymmetricEigen::new(covariance.clone());
        let spectral_norm = eig.eigenvalues.iter().fold(0.0_f64, |a, &e| a.max(e.abs()));
        let clipped_mass: f64 = eig.eigenvalues.iter().filter(|&&e| e < 0.0).map(|e| -e).sum();
        let clipped_fraction = if spectral_norm > 0.0 { clipped_mass / spectral_norm } else { 0.0 };
        if clipped_fraction > 1e-6 {
            eprintln!(
                "warning: prior covariance needed eigenvalue clipping of {:.3e} x spectral norm",
                clipped_fraction
            );
        }
        let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &e| a.min(e));
        if min_eig < -1e-8 * spectral_norm.max(1.0) {
            return Err(Error::IllPosed(format!(
                "covariance is not PSD: min eigenvalue {min_eig:.3e}"
            )));
        }
        let mut scaled = eig.eigenvectors.clone();
        for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
            let s = lambda.max(0.0).sqrt();
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        Ok(GaussianPrior {
            sigma_f_sq,
            covariance,
            factor: scaled,
            clipped_fraction,
        })
    }

    pub fn len(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sigma_f_sq(&self) -> f64 {
        self.sigma_f_sq
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Symmetric factor `B` with `B Bᵀ ≈ covariance`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Fraction of spectral mass removed by PSD clipping.
    pub fn clipped_fraction(&self) -> f64 {
        self.clipped_fraction
    }

    /// `tr(covariance)`; with the unit-diagonal kernel this equals N and is
    /// the prior signal energy `E|f|^2`.
    pub fn trace(&self) -> f64 {
        self.covariance.trace()
    }

    /// One draw from the prior using the caller's generator state.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_vec(standard_normal_vec(rng, self.len()));
        &self.factor * z
    }
}

/// i.i.d. measurement-noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    variance: f64,
}

impl NoiseModel {
    pub fn new(variance: f64) -> Result<Self> {
        if variance.is_nan() || variance < 0.0 || !variance.is_finite() {
            return Err(Error::Config("noise variance must be finite and >= 0".into()));
        }
        Ok(NoiseModel { variance })
    }

    pub fn variance(self) -> f64 {
        self.variance
    }
}

/// Deterministic prior draw for a bare seed.
pub fn sample_reflectivity(prior: &GaussianPrior, seed: u64) -> DVector<f64> {
    prior.sample_with(&mut rng_from_seed(seed))
}

/// `tr(A cov Aᵀ)`, the expected signal energy of the operator.
pub fn signal_trace(a: &DMatrix<f64>, prior: &GaussianPrior) -> f64 {
    // tr(A S Aᵀ) = sum over entries of (A S) ∘ A
    let asig = a * prior.covariance();
    asig.iter().zip(a.iter()).map(|(x, y)| x * y).sum()
}

/// SNR in dB: `10 log10( tr(A cov Aᵀ) / (M sigma^2) )`.
pub fn snr_db(a: &DMatrix<f64>, prior: &GaussianPrior, sigma_sq: f64) -> Result<f64> {
    if a.ncols() != prior.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} columns but the prior has {} entries",
            a.ncols(),
            prior.len()
        )));
    }
    if a.nrows() == 0 {
        return Err(Error::Empty("operator has no rows".into()));
    }
    if sigma_sq == 0.0 {
        return Err(Error::InfiniteSnr);
    }
    let ratio = signal_trace(a, prior) / (a.nrows() as f64 * sigma_sq);
    Ok(10.0 * ratio.log10())
}

/// Noise variance that places the operator at `target_db`:
/// `sigma^2 = tr(A cov Aᵀ) / (M 10^(target/10))`.
pub fn noise_for_target_snr(
    a: &DMatrix<f64>,
    prior: &GaussianPrior,
    target_db: f64,
) -> Result<f64> {
    if a.ncols() != prior.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} columns but the prior has {} entries",
            a.ncols(),
            prior.len()
        )));
    }
    let trace = signal_trace(a, prior);
    if trace <= 0.0 {
        return Err(Error::ZeroOperator);
    }
    Ok(trace / (a.nrows() as f64 * 10f64.powf(target_db / 10.0)))
}

/// `y = A f + e` with `e ~ N(0, sigma^2 I)`, deterministic per generator.
pub fn simulate_measurements_with<R: Rng + ?Sized>(
    a: &DMatrix<f64>,
    f: &DVector<f64>,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if a.ncols() != f.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} columns but the field has {} entries",
            a.ncols(),
            f.len()
        )));
    }
    let mut y = a * f;
    if sigma_sq > 0.0 {
        let std = sigma_sq.sqrt();
        let noise = standard_normal_vec(rng, y.len());
        for (yi, ni) in y.iter_mut().zip(noise) {
            *yi += std * ni;
        }
    }
    Ok(y)
}

/// Seeded convenience wrapper around [`simulate_measurements_with`].
pub fn simulate_measurements(
    a: &DMatrix<f64>,
    f: &DVector<f64>,
    sigma_sq: f64,
    seed: u64,
) -> Result<DVector<f64>> {
    simulate_measurements_with(a, f, sigma_sq, &mut rng_from_seed(seed))
}
