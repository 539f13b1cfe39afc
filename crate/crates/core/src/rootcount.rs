//! Argument-principle root counting for the characteristic function on a
//! rectangle in the complex plane.
//!
//! This deliberately uses nothing but evaluations of `D_n`: it serves as an
//! independent check on the crossing-direction formulas, which are derived
//! from the partial derivatives instead.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::quasipoly::QuasiPolynomial;

#[derive(Debug, Error)]
pub enum RootCountError {
    #[error("contour passes through (or numerically too close to) a root at {at}")]
    ContourThroughRoot { at: Complex64 },
    #[error("winding number {winding} is not close to an integer")]
    NonIntegerWinding { winding: f64 },
}

/// Number of roots of `D_n(. ; tau1, tau2)` inside the rectangle
/// `[re_min, re_max] x [-im_max, im_max]`, by winding-number integration of
/// the phase of `D_n` along the boundary. `base_points` samples are placed
/// on the contour; steps whose phase jump exceeds `pi/2` are bisected until
/// resolved.
pub fn count_roots_rectangle(
    q: &QuasiPolynomial,
    tau1: f64,
    tau2: f64,
    re_min: f64,
    re_max: f64,
    im_max: f64,
    base_points: usize,
) -> Result<i64, RootCountError> {
    let corners = [
        Complex64::new(re_min, -im_max),
        Complex64::new(re_max, -im_max),
        Complex64::new(re_max, im_max),
        Complex64::new(re_min, im_max),
        Complex64::new(re_min, -im_max),
    ];
    let perimeter: f64 = corners.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let eval = |z: Complex64| q.eval_d(z, tau1, tau2);

    let mut winding = 0.0;
    for edge in corners.windows(2) {
        let (z0, z1) = (edge[0], edge[1]);
        let steps = ((z1 - z0).norm() / perimeter * base_points as f64).ceil() as usize;
        let steps = steps.max(2);
        let mut prev = eval(z0);
        for k in 1..=steps {
            let t = k as f64 / steps as f64;
            let z = z0 + (z1 - z0) * t;
            let cur = eval(z);
            winding += phase_step(
                &eval,
                z0 + (z1 - z0) * ((k - 1) as f64 / steps as f64),
                z,
                prev,
                cur,
                0,
            )?;
            prev = cur;
        }
    }
    let n = winding / (2.0 * PI);
    let rounded = n.round();
    if (n - rounded).abs() > 0.1 {
        return Err(RootCountError::NonIntegerWinding { winding: n });
    }
    Ok(rounded as i64)
}

/// Phase increment from `za` to `zb`, subdividing until each sub-step turns
/// by less than `pi/2`.
fn phase_step(
    eval: &dyn Fn(Complex64) -> Complex64,
    za: Complex64,
    zb: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: u32,
) -> Result<f64, RootCountError> {
    if fa.norm() < 1e-300 {
        return Err(RootCountError::ContourThroughRoot { at: za });
    }
    let delta = (fb / fa).arg();
    if delta.abs() < 0.5 * PI {
        return Ok(delta);
    }
    if depth >= 48 {
        return Err(RootCountError::ContourThroughRoot { at: za });
    }
    let zm = 0.5 * (za + zb);
    let fm = eval(zm);
    Ok(phase_step(eval, za, zm, fa, fm, depth + 1)?
        + phase_step(eval, zm, zb, fm, fb, depth + 1)?)
}

/// Roots with positive real part (inside `[0, 2] x [-3i, 3i]`), the
/// default unstable-root counter for this model's frequency range.
pub fn count_unstable_roots(
    q: &QuasiPolynomial,
    tau1: f64,
    tau2: f64,
) -> Result<i64, RootCountError> {
    count_roots_rectangle(q, tau1, tau2, 0.0, 2.0, 3.0, 10_000)
}
