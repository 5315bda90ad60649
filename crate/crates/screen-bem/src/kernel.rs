//! Helmholtz fundamental solution for wavenumbers with positive imaginary
//! part, `phi(x, y) = exp(ik|x-y|) / (4 pi |x-y|)`, and its normal
//! derivative in the source point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance below which kernel evaluation refuses to proceed; callers must
/// route coincident or near-coincident points through singular quadrature.
pub const SINGULAR_RADIUS: f64 = 1e-14;

/// A validated wavenumber: `k != 0` with `0 < arg(k) <= pi/2`, i.e.
/// `Im k > 0` and `Re k >= 0`. Real wavenumbers are rejected; the analysis
/// assumes absorption in the propagation medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavenumber(Complex64);

impl Wavenumber {
    pub fn new(k: Complex64) -> Result<Self> {
        if k.im <= 0.0 || k.re < 0.0 || !k.im.is_finite() || !k.re.is_finite() {
            return Err(Error::domain(format!(
                "wavenumber must satisfy Im k > 0 and Re k >= 0, got {k}"
            )));
        }
        Ok(Wavenumber(k))
    }

    /// `k = i kappa` on the positive imaginary axis, the default for
    /// capacity runs.
    pub fn imaginary(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::domain(format!(
                "imaginary-axis wavenumber needs kappa > 0, got {kappa}"
            )));
        }
        Ok(Wavenumber(Complex64::new(0.0, kappa)))
    }

    /// The unit imaginary wavenumber `k = i`.
    pub fn unit_imaginary() -> Self {
        Wavenumber(Complex64::new(0.0, 1.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    /// True when `k` lies on the positive imaginary axis, in which case the
    /// kernel is real positive and Galerkin matrices are real SPD.
    pub fn is_imaginary_axis(&self) -> bool {
        self.0.re == 0.0
    }
}

/// Kernel value for separation `r > 0`, no singularity guard.
#[inline]
pub(crate) fn phi_of_r(k: Wavenumber, r: f64) -> Complex64 {
    let kk = k.value();
    let inv = 1.0 / (4.0 * std::f64::consts::PI * r);
    if kk.re == 0.0 {
        // exp(i * (i kappa) * r) = exp(-kappa r): avoid the complex exp.
        Complex64::new((-kk.im * r).exp() * inv, 0.0)
    } else {
        (Complex64::i() * kk * r).exp() * inv
    }
}

fn dist3(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Fundamental solution `Phi(x, y) = exp(ik|x-y|)/(4 pi |x-y|)`.
pub fn phi(x: [f64; 3], y: [f64; 3], k: Wavenumber) -> Result<Complex64> {
    let r = dist3(x, y);
    if r < SINGULAR_RADIUS {
        return Err(Error::SingularEvaluation { r });
    }
    Ok(phi_of_r(k, r))
}

/// Normal derivative of the fundamental solution in the source point,
/// `dPhi/dn(y) = (ikr - 1) exp(ikr) / (4 pi r^3) * ((y - x) . n)`,
/// the kernel of the double-layer potential. Vanishes when `x`, `y` and the
/// screen are coplanar with `n` the plane normal.
pub fn dphi_dn_y(x: [f64; 3], y: [f64; 3], k: Wavenumber, normal: [f64; 3]) -> Result<Complex64> {
    let r = dist3(x, y);
    if r < SINGULAR_RADIUS {
        return Err(Error::SingularEvaluation { r });
    }
    let dot = (y[0] - x[0]) * normal[0] + (y[1] - x[1]) * normal[1] + (y[2] - x[2]) * normal[2];
    let kk = k.value();
    let ikr = Complex64::i() * kk * r;
    Ok((ikr - 1.0) * ikr.exp() / (4.0 * std::f64::consts::PI * r.powi(3)) * dot)
}
