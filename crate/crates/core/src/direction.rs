//! Crossing directions across switching curves and the root-accounting
//! stability check.
//!
//! At a curve point `(tau1, tau2)` with root `i omega`, the implicit
//! function theorem expresses the delays as functions of
//! `lambda = sigma + i omega`. The sign data below determines on which side
//! of the curve the pair of roots moves into the right half plane.

use thiserror::Error;

use crate::model::ModelParams;
use crate::quasipoly::QuasiPolynomial;
use crate::switching::{
    generate_all, tau_curve, CurveOptions, CurveSegment, ModeSelection, Window,
};

/// A point is accepted as "on a switching curve" when the characteristic
/// residual is below this.
pub const ON_CURVE_RESIDUAL: f64 = 1e-6;

/// Multiple-root guard: `|dD/dlambda|^2` below this is rejected.
pub const MULTIPLE_ROOT_GUARD: f64 = 1e-14;

/// Transversality threshold for the directional crossing expression.
pub const TRANSVERSALITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DirectionError {
    #[error("point is not on a switching curve: residual {residual:e} exceeds {max:e}")]
    OffCurve { residual: f64, max: f64 },
    #[error("i omega is (numerically) a multiple root at omega = {omega}")]
    MultipleRoot { omega: f64 },
    #[error(
        "path passes within {dist:e} of a curve-curve intersection near \
         (tau1, tau2) = ({tau1}, {tau2}); perturb the target point"
    )]
    PathThroughIntersection { tau1: f64, tau2: f64, dist: f64 },
    #[error("target point lies on a switching curve (distance {dist:e}); stability undefined")]
    PointOnCurve { dist: f64 },
    #[error("crossing refinement failed to converge at omega ~ {omega}")]
    RefinementFailed { omega: f64 },
}

/// Partial-derivative data of `D_n` at `lambda = i omega` on a curve point.
#[derive(Debug, Clone, Copy)]
pub struct CrossingData {
    /// `dD/dlambda = R0 + i I0`.
    pub r0: f64,
    pub i0: f64,
    /// `dD/dtau1 = R1 + i I1`.
    pub r1: f64,
    pub i1: f64,
    /// `dD/dtau2 = R2 + i I2`.
    pub r2: f64,
    pub i2: f64,
    /// `det Delta(omega) = (R0^2 + I0^2) / (R1 I2 - R2 I1)`; positive on
    /// `+` branches, negative on `-` branches.
    pub delta: f64,
    /// Sign of `R1 I2 - R2 I1`, i.e. whether the region to the right of the
    /// positive (increasing-omega) direction gains two unstable roots.
    pub two_more_on_right: bool,
}

/// Effect on the region to the right of a curve's positive direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightRegionEffect {
    GainsTwo,
    LosesTwo,
}

/// Net change of unstable-root count when crossing along a given direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingCount {
    GainsTwo,
    LosesTwo,
    Tangent,
}

impl CrossingCount {
    pub fn signed(self) -> i32 {
        match self {
            CrossingCount::GainsTwo => 2,
            CrossingCount::LosesTwo => -2,
            CrossingCount::Tangent => 0,
        }
    }
}

/// Crossing data at a curve point. Fails off-curve and at multiple roots.
pub fn partials(
    q: &QuasiPolynomial,
    omega: f64,
    tau1: f64,
    tau2: f64,
) -> Result<CrossingData, DirectionError> {
    let residual = q.residual(omega, tau1, tau2);
    if residual > ON_CURVE_RESIDUAL {
        return Err(DirectionError::OffCurve {
            residual,
            max: ON_CURVE_RESIDUAL,
        });
    }
    let (dl, dt1, dt2) = q.d_partials(omega, tau1, tau2);
    let (r0, i0) = (dl.re, dl.im);
    if r0 * r0 + i0 * i0 < MULTIPLE_ROOT_GUARD {
        return Err(DirectionError::MultipleRoot { omega });
    }
    let (r1, i1) = (dt1.re, dt1.im);
    let (r2, i2) = (dt2.re, dt2.im);
    let det = r1 * i2 - r2 * i1;
    Ok(CrossingData {
        r0,
        i0,
        r1,
        i1,
        r2,
        i2,
        delta: (r0 * r0 + i0 * i0) / det,
        two_more_on_right: det > 0.0,
    })
}

/// Effect on the right region given the branch sign of the curve. The
/// branch sign and the sign of `delta` agree on interior frequencies; a
/// mismatch indicates the data came from an interval endpoint.
pub fn crossing_direction(cd: &CrossingData, branch: crate::switching::Branch) -> RightRegionEffect {
    debug_assert!(
        cd.delta.is_infinite() || (cd.delta > 0.0) == (branch == crate::switching::Branch::Plus),
        "delta sign disagrees with branch"
    );
    match branch {
        crate::switching::Branch::Plus => RightRegionEffect::GainsTwo,
        crate::switching::Branch::Minus => RightRegionEffect::LosesTwo,
    }
}

/// Root-count change when `(tau1, tau2)` crosses the curve along
/// `(l1, l2)`: two more (fewer) unstable roots when
/// `-l1 (I0 I1 + R0 R1) - l2 (I0 I2 + R0 R2)` is positive (negative), and
/// tangent when that expression is below the transversality threshold.
pub fn direction_along(cd: &CrossingData, l1: f64, l2: f64) -> CrossingCount {
    let expr = -l1 * (cd.i0 * cd.i1 + cd.r0 * cd.r1) - l2 * (cd.i0 * cd.i2 + cd.r0 * cd.r2);
    if expr > TRANSVERSALITY_TOL {
        CrossingCount::GainsTwo
    } else if expr < -TRANSVERSALITY_TOL {
        CrossingCount::LosesTwo
    } else {
        CrossingCount::Tangent
    }
}

/// One transversal intersection of the scan path with a switching curve.
#[derive(Debug, Clone, Copy)]
pub struct PathCrossing {
    pub n: u32,
    pub j: u32,
    /// Path parameter in `[0, 1]` (straight segment from the origin).
    pub s: f64,
    pub omega: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// Signed root-count change accumulated when walking past this point.
    pub change: i32,
}

/// Root accounting along the straight path from the origin to
/// `(tau1, tau2)`: the target is stable iff the net crossing count over all
/// modes up to `n_max` is zero.
pub fn stable_region_check(
    p: &ModelParams,
    tau1: f64,
    tau2: f64,
    n_max: u32,
    opts: &CurveOptions,
) -> Result<bool, DirectionError> {
    Ok(path_crossings(p, tau1, tau2, n_max, opts)?
        .iter()
        .map(|c| c.change)
        .sum::<i32>()
        == 0)
}

/// The refined path crossings behind [`stable_region_check`], exposed for
/// diagnostics and tests.
pub fn path_crossings(
    p: &ModelParams,
    tau1: f64,
    tau2: f64,
    n_max: u32,
    opts: &CurveOptions,
) -> Result<Vec<PathCrossing>, DirectionError> {
    let target = (tau1, tau2);
    if tau1 == 0.0 && tau2 == 0.0 {
        return Ok(Vec::new());
    }
    let window = Window::new(tau1.max(1e-9), tau2.max(1e-9));
    let curves = generate_all(p, ModeSelection::UpTo(n_max), window, opts);

    let mut crossings: Vec<PathCrossing> = Vec::new();
    for mc in &curves {
        let q = crate::quasipoly::build(p, mc.n);
        for seg in &mc.segments {
            for w in seg.samples.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let Some((s, u)) =
                    segment_intersection(target, (a.tau1, a.tau2), (b.tau1, b.tau2))
                else {
                    continue;
                };
                let omega_guess = a.omega + u * (b.omega - a.omega);
                let (omega, s_ref) = refine_crossing(&q, seg, target, omega_guess, s)?;
                let (t1, t2) = (s_ref * target.0, s_ref * target.1);
                // reject if the refined point left the path segment
                if !(-1e-9..=1.0 + 1e-9).contains(&s_ref) {
                    continue;
                }
                if (1.0 - s_ref).abs() < 1e-7 {
                    return Err(DirectionError::PointOnCurve {
                        dist: ((t1 - target.0).powi(2) + (t2 - target.1).powi(2)).sqrt(),
                    });
                }
                let cd = partials(&q, omega, t1, t2)?;
                crossings.push(PathCrossing {
                    n: mc.n,
                    j: seg.j,
                    s: s_ref,
                    omega,
                    tau1: t1,
                    tau2: t2,
                    change: direction_along(&cd, target.0, target.1).signed(),
                });
            }
        }
    }

    crossings.sort_by(|a, b| a.s.total_cmp(&b.s));
    // merge duplicates at branch junctions (same mode and interval); flag
    // near-coincident crossings of distinct curves
    let mut merged: Vec<PathCrossing> = Vec::new();
    for c in crossings {
        if let Some(prev) = merged.last() {
            let d = ((prev.tau1 - c.tau1).powi(2) + (prev.tau2 - c.tau2).powi(2)).sqrt();
            if d < opts.link_tol {
                if prev.n == c.n && prev.j == c.j {
                    continue; // junction seen from both joined branches
                }
                return Err(DirectionError::PathThroughIntersection {
                    tau1: c.tau1,
                    tau2: c.tau2,
                    dist: d,
                });
            }
        }
        merged.push(c);
    }
    Ok(merged)
}

/// Intersection of the path `s * target` with the segment
/// `a + u (b - a)`, for `s in [0, 1]`, `u in [0, 1)`.
fn segment_intersection(
    target: (f64, f64),
    a: (f64, f64),
    b: (f64, f64),
) -> Option<(f64, f64)> {
    let d_p = target;
    let d_q = (b.0 - a.0, b.1 - a.1);
    let denom = d_p.0 * d_q.1 - d_p.1 * d_q.0;
    if denom.abs() < 1e-300 {
        return None;
    }
    let s = (a.0 * d_q.1 - a.1 * d_q.0) / denom;
    let u = (a.0 * d_p.1 - a.1 * d_p.0) / -denom;
    if (0.0..=1.0).contains(&s) && (0.0..1.0).contains(&u) {
        Some((s, u))
    } else {
        None
    }
}

/// Newton refinement of a polyline crossing in the unknowns `(omega, s)`:
/// solve `tau_curve(omega) - s * target = 0`.
fn refine_crossing(
    q: &QuasiPolynomial,
    seg: &CurveSegment,
    target: (f64, f64),
    mut omega: f64,
    mut s: f64,
) -> Result<(f64, f64), DirectionError> {
    let curve = |w: f64| tau_curve(q, w, seg.branch, seg.j1, seg.j2);
    for _ in 0..40 {
        let (t1, t2) = curve(omega).map_err(|_| DirectionError::RefinementFailed { omega })?;
        let g = (t1 - s * target.0, t2 - s * target.1);
        let gn = (g.0 * g.0 + g.1 * g.1).sqrt();
        if gn < 1e-12 {
            return Ok((omega, s));
        }
        let h = 1e-8 * omega.abs().max(1e-3);
        let (lo, hi) = (
            curve(omega - h).map_err(|_| DirectionError::RefinementFailed { omega })?,
            curve(omega + h).map_err(|_| DirectionError::RefinementFailed { omega })?,
        );
        let dt1 = (hi.0 - lo.0) / (2.0 * h);
        let dt2 = (hi.1 - lo.1) / (2.0 * h);
        // solve [dt1 -target.0; dt2 -target.1] (dw, ds) = -g
        let det = dt1 * (-target.1) - (-target.0) * dt2;
        if det.abs() < 1e-300 {
            return Err(DirectionError::RefinementFailed { omega });
        }
        let dw = (-g.0 * (-target.1) - (-target.0) * (-g.1)) / det;
        let ds = (dt1 * (-g.1) - (-g.0) * dt2) / det;
        omega += dw;
        s += ds;
    }
    let (t1, t2) = curve(omega).map_err(|_| DirectionError::RefinementFailed { omega })?;
    let gn = ((t1 - s * target.0).powi(2) + (t2 - s * target.1).powi(2)).sqrt();
    if gn < 1e-8 {
        Ok((omega, s))
    } else {
        Err(DirectionError::RefinementFailed { omega })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use num_complex::Complex64;
    use crate::quasipoly::build;
    use crate::switching::{crossing_set, Branch};

    fn baseline() -> ModelParams {
        ModelParams {
            r1: 0.8,
            r2: 1.0,
            a: 1.3,
            k: 0.7,
            gamma: 1.0,
            m: 0.27,
            l: 2.0,
            d1: 0.3,
            d2: 0.4,
        }
    }

    fn curve_point(branch: Branch, frac: f64) -> (QuasiPolynomial, f64, f64, f64) {
        let q = build(&baseline(), 0);
        let cs = crossing_set(&q, &CurveOptions::default());
        let iv = &cs.intervals[0];
        let w = iv.a + frac * (iv.b - iv.a);
        let (t1, t2) = tau_curve(&q, w, branch, 1, 1).unwrap();
        (q, w, t1, t2)
    }

    #[test]
    fn partials_match_finite_differences() {
        for (branch, frac) in [(Branch::Plus, 0.3), (Branch::Minus, 0.62)] {
            let (q, w, t1, t2) = curve_point(branch, frac);
            let cd = partials(&q, w, t1, t2).unwrap();
            let h = 1e-6;
            let fd = |f: &dyn Fn(f64) -> Complex64| (f(h) - f(-h)) / (2.0 * h);
            let d_sigma = fd(&|s| q.eval_d(Complex64::new(s, w), t1, t2));
            let d_tau1 = fd(&|e| q.eval_d(Complex64::new(0.0, w), t1 + e, t2));
            let d_tau2 = fd(&|e| q.eval_d(Complex64::new(0.0, w), t1, t2 + e));
            let scale = d_sigma.norm().max(d_tau1.norm()).max(d_tau2.norm());
            for (got, want) in [
                (cd.r0, d_sigma.re),
                (cd.i0, d_sigma.im),
                (cd.r1, d_tau1.re),
                (cd.i1, d_tau1.im),
                (cd.r2, d_tau2.re),
                (cd.i2, d_tau2.im),
            ] {
                assert!(
                    (got - want).abs() < 1e-5 * scale,
                    "partial mismatch: {got} vs finite difference {want}"
                );
            }
        }
    }

    #[test]
    fn determinant_identity_on_curve() {
        // R1 I2 - R2 I1 = +- omega^2 |P2 conj(P3) - P0 conj(P1)| sin(theta1)
        for (branch, sign) in [(Branch::Plus, 1.0), (Branch::Minus, -1.0)] {
            let (q, w, t1, t2) = curve_point(branch, 0.4);
            let cd = partials(&q, w, t1, t2).unwrap();
            let det = cd.r1 * cd.i2 - cd.r2 * cd.i1;
            let ad = q.angles(w).unwrap();
            let mag = (ad.a1 * ad.a1 + ad.b1 * ad.b1).sqrt();
            let expect = sign * w * w * mag * ad.theta1.sin();
            assert!(
                (det - expect).abs() < 1e-8 * expect.abs().max(1.0),
                "det = {det}, expected {expect}"
            );
            assert_eq!(cd.two_more_on_right, sign > 0.0);
            assert_eq!((cd.delta > 0.0), sign > 0.0);
        }
    }

    #[test]
    fn determinant_vanishes_at_interval_endpoints() {
        let q = build(&baseline(), 0);
        let cs = crossing_set(&q, &CurveOptions::default());
        let iv = &cs.intervals[0];
        for w in [iv.a, iv.b] {
            let (t1, t2) = tau_curve(&q, w, Branch::Plus, 1, 1).unwrap();
            let cd = partials(&q, w, t1, t2).unwrap();
            let det = cd.r1 * cd.i2 - cd.r2 * cd.i1;
            assert!(det.abs() < 1e-5, "det at endpoint = {det}");
        }
    }

    #[test]
    fn partials_rejects_off_curve_points() {
        let q = build(&baseline(), 0);
        assert!(matches!(
            partials(&q, 0.45, 1.0, 1.0),
            Err(DirectionError::OffCurve { .. })
        ));
    }

    #[test]
    fn crossing_direction_follows_branch() {
        let (q, w, t1, t2) = curve_point(Branch::Plus, 0.5);
        let cd = partials(&q, w, t1, t2).unwrap();
        assert_eq!(crossing_direction(&cd, Branch::Plus), RightRegionEffect::GainsTwo);
        let (q, w, t1, t2) = curve_point(Branch::Minus, 0.5);
        let cd = partials(&q, w, t1, t2).unwrap();
        assert_eq!(
            crossing_direction(&cd, Branch::Minus),
            RightRegionEffect::LosesTwo
        );
    }

    #[test]
    fn direction_along_right_normal_gains_on_plus_branch() {
        let (q, w, t1, t2) = curve_point(Branch::Plus, 0.5);
        let cd = partials(&q, w, t1, t2).unwrap();
        // tangent along increasing omega by finite differences
        let h = 1e-6;
        let (a1, a2) = tau_curve(&q, w - h, Branch::Plus, 1, 1).unwrap();
        let (b1, b2) = tau_curve(&q, w + h, Branch::Plus, 1, 1).unwrap();
        let tangent = ((b1 - a1) / (2.0 * h), (b2 - a2) / (2.0 * h));
        let right_normal = (tangent.1, -tangent.0);
        assert_eq!(
            direction_along(&cd, right_normal.0, right_normal.1),
            CrossingCount::GainsTwo
        );
        assert_eq!(
            direction_along(&cd, -right_normal.0, -right_normal.1),
            CrossingCount::LosesTwo
        );
        // the analytic tangent direction from the implicit-function matrix:
        // (dtau1/domega, dtau2/domega) ~ (I0 I2 + R0 R2, -(I0 I1 + R0 R1))
        let exact_tangent = (
            cd.i0 * cd.i2 + cd.r0 * cd.r2,
            -(cd.i0 * cd.i1 + cd.r0 * cd.r1),
        );
        // finite differences agree with it in direction
        let cos = (exact_tangent.0 * tangent.0 + exact_tangent.1 * tangent.1)
            / ((exact_tangent.0.powi(2) + exact_tangent.1.powi(2)).sqrt()
                * (tangent.0.powi(2) + tangent.1.powi(2)).sqrt());
        assert!(cos.abs() > 0.999999);
        assert_eq!(
            direction_along(&cd, exact_tangent.0, exact_tangent.1),
            CrossingCount::Tangent
        );
    }

    #[test]
    fn stable_region_reference_points() {
        let p = baseline();
        let opts = CurveOptions::default();
        assert!(stable_region_check(&p, 0.0, 0.0, 5, &opts).unwrap());
        assert!(stable_region_check(&p, 1.74, 0.67, 5, &opts).unwrap());
        assert!(!stable_region_check(&p, 3.62, 1.435, 5, &opts).unwrap());
    }

    #[test]
    fn path_crossings_accumulate_past_first_curve() {
        let p = baseline();
        let crossings = path_crossings(&p, 3.62, 1.435, 5, &CurveOptions::default()).unwrap();
        assert!(!crossings.is_empty());
        let net: i32 = crossings.iter().map(|c| c.change).sum();
        assert!(net > 0);
        // sorted by path parameter
        assert!(crossings.windows(2).all(|w| w[0].s <= w[1].s));
    }
}
