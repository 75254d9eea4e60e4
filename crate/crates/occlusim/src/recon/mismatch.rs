//! Spectral model of reconstruction under a mispositioned flat occluder.
//!
//! In the far-field, coincident-pair, continuum limit the reconstruction
//! obtained with an occluder displaced by `delta_x` transversely and
//! `delta_h` in depth relates to the true reflectivity spectrum `F` and
//! the occluder-plane spectrum `S` through a frequency rescaling, a
//! spectral-ratio distortion, and a linear phase:
//!
//! ```text
//! Fhat(w) = r * S(-r w / a') / S(-w / a') * exp(i w delta_x / a') * F((a/a') r w)
//! ```
//!
//! with `a = H/D`, `a' = (H + delta_h)/D` and `r = (1 - a')/(1 - a)`.
//! Matching occluder models (`a' = a`, `delta_x = 0`) make this the
//! identity; a pure transverse error keeps magnitudes and shifts the
//! reconstruction; a depth error rescales the axis and distorts shapes
//! through the spectral ratio, which flattens out for narrow occluders.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Geometry of the mismatch: true and assumed plane fractions plus the
/// transverse displacement in meters.
#[derive(Debug, Clone, Copy)]
pub struct MismatchParams {
    /// True plane fraction `H / D`.
    pub alpha: f64,
    /// Assumed plane fraction `(H + delta_h) / D`.
    pub alpha_assumed: f64,
    /// Assumed transverse displacement in meters.
    pub delta_x: f64,
    /// Relative magnitude floor below which `S` counts as vanishing and
    /// the frequency is reported unrecoverable.
    pub s_floor: f64,
}

impl MismatchParams {
    pub fn new(alpha: f64, alpha_assumed: f64, delta_x: f64) -> Result<Self> {
        for (name, a) in [("alpha", alpha), ("alpha_assumed", alpha_assumed)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {a}")));
            }
        }
        Ok(MismatchParams { alpha, alpha_assumed, delta_x, s_floor: 1e-8 })
    }

    /// Frequency-rescaling factor `(1 - a') / (1 - a)`.
    pub fn rescale(&self) -> f64 {
        (1.0 - self.alpha_assumed) / (1.0 - self.alpha)
    }
}

/// Predicted reconstruction spectrum at each requested frequency; `None`
/// marks frequencies where the occluder spectrum vanishes and nothing can
/// be predicted.
pub fn mismatch_spectrum(
    f_true: &Spectrum,
    s_occluder: &Spectrum,
    params: &MismatchParams,
    omegas: &[f64],
) -> Vec<Option<Complex64>> {
    let a = params.alpha;
    let a_mis = params.alpha_assumed;
    let r = params.rescale();
    let floor = params.s_floor * s_occluder.max_magnitude();
    omegas
        .iter()
        .map(|&w| {
            let s_denom = s_occluder.eval(-w / a_mis);
            if s_denom.norm() <= floor {
                return None;
            }
            let s_num = s_occluder.eval(-r * w / a_mis);
            let phase = Complex64::from_polar(1.0, w * params.delta_x / a_mis);
            let f_val = f_true.eval((a / a_mis) * r * w);
            Some(r * s_num / s_denom * phase * f_val)
        })
        .collect()
}
