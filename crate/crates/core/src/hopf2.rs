//! Double Hopf candidates: transversal intersections of two switching
//! curves, where the characteristic equation carries two distinct pairs of
//! pure imaginary roots.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::ModelParams;
use crate::numeric::solve_dense;
use crate::par;
use crate::quasipoly::{build, QuasiPolynomial};
use crate::switching::{generate_all, CurveOptions, CurveSegment, ModeSelection, Window};

/// Frequency ratios closer than this to a low-order rational are flagged
/// strongly resonant.
pub const STRONG_RESONANCE_BAND: f64 = 1e-3;
/// Outer band for the `near`-resonant flag.
pub const NEAR_RESONANCE_BAND: f64 = 1e-2;
/// Intersections with `|omega1 - omega2|` below this are discarded: both
/// roots would coincide, which is a curve junction, not a double Hopf.
pub const MIN_FREQUENCY_GAP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum Hopf2Error {
    #[error("Newton refinement did not converge after {0} iterations")]
    NoConvergence(usize),
}

/// Distance of the frequency ratio to low-order rationals `m:n`,
/// `1 <= m, n <= 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resonance {
    None,
    Near { m: u32, n: u32, error: f64 },
    Strong { m: u32, n: u32, error: f64 },
}

impl Resonance {
    pub fn label(&self) -> &'static str {
        match self {
            Resonance::None => "none",
            Resonance::Near { .. } => "near",
            Resonance::Strong { .. } => "strong",
        }
    }
}

/// A refined (or flagged unrefined) double Hopf candidate. Frequencies are
/// ordered `omega1 < omega2`; `n1`, `n2` are the spatial modes of the two
/// intersecting curves.
#[derive(Debug, Clone, Copy)]
pub struct DoubleHopfPoint {
    pub tau1: f64,
    pub tau2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub n1: u32,
    pub n2: u32,
    pub resonance: Resonance,
    /// False when Newton refinement failed; coordinates then carry the
    /// polyline-intersection estimate only.
    pub refined: bool,
    /// `|D_{n1}(i omega1)|` at the point.
    pub residual1: f64,
    /// `|D_{n2}(i omega2)|` at the point.
    pub residual2: f64,
}

/// Classify the frequency ratio against `m:n`, `1 <= m, n <= 3`.
pub fn resonance_check(omega1: f64, omega2: f64) -> Resonance {
    let ratio = omega1 / omega2;
    let mut best: Option<(u32, u32, f64)> = None;
    for m in 1..=3u32 {
        for n in 1..=3u32 {
            let err = (ratio - m as f64 / n as f64).abs();
            if best.map_or(true, |(_, _, e)| err < e) {
                best = Some((m, n, err));
            }
        }
    }
    let (m, n, error) = best.expect("candidate set is non-empty");
    if error < STRONG_RESONANCE_BAND {
        Resonance::Strong { m, n, error }
    } else if error < NEAR_RESONANCE_BAND {
        Resonance::Near { m, n, error }
    } else {
        Resonance::None
    }
}

struct Candidate {
    tau1: f64,
    tau2: f64,
    omega_a: f64,
    omega_b: f64,
}

/// All transversal intersections of two sampled curve segments, refined by
/// a damped Newton solve of the four residual equations
/// `(Re D_a(i w_a), Im D_a, Re D_b(i w_b), Im D_b) = 0` in
/// `(tau1, tau2, w_a, w_b)`.
pub fn intersect(
    qa: &QuasiPolynomial,
    seg_a: &CurveSegment,
    qb: &QuasiPolynomial,
    seg_b: &CurveSegment,
) -> Vec<DoubleHopfPoint> {
    let mut points = Vec::new();
    for cand in polyline_intersections(seg_a, seg_b) {
        if (cand.omega_a - cand.omega_b).abs() < MIN_FREQUENCY_GAP {
            continue;
        }
        let (pt, refined) = match refine(qa, qb, &cand) {
            Ok(x) => (x, true),
            Err(_) => ([cand.tau1, cand.tau2, cand.omega_a, cand.omega_b], false),
        };
        let [tau1, tau2, wa, wb] = pt;
        if (wa - wb).abs() < MIN_FREQUENCY_GAP || tau1 < 0.0 || tau2 < 0.0 {
            continue;
        }
        let (omega1, omega2, n1, n2) = if wa < wb {
            (wa, wb, qa.mode(), qb.mode())
        } else {
            (wb, wa, qb.mode(), qa.mode())
        };
        let (q1, q2) = if wa < wb { (qa, qb) } else { (qb, qa) };
        points.push(DoubleHopfPoint {
            tau1,
            tau2,
            omega1,
            omega2,
            n1,
            n2,
            resonance: resonance_check(omega1, omega2),
            refined,
            residual1: q1.residual(omega1, tau1, tau2),
            residual2: q2.residual(omega2, tau1, tau2),
        });
    }
    dedup(points)
}

fn dedup(mut points: Vec<DoubleHopfPoint>) -> Vec<DoubleHopfPoint> {
    points.sort_by(|a, b| (a.tau1, a.tau2).partial_cmp(&(b.tau1, b.tau2)).unwrap());
    let mut out: Vec<DoubleHopfPoint> = Vec::new();
    for p in points {
        let dup = out.iter().any(|q| {
            (q.tau1 - p.tau1).abs() < 1e-6
                && (q.tau2 - p.tau2).abs() < 1e-6
                && (q.omega1 - p.omega1).abs() < 1e-6
                && (q.omega2 - p.omega2).abs() < 1e-6
        });
        if !dup {
            out.push(p);
        }
    }
    out
}

fn bbox(samples: &[crate::switching::CurveSample]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for s in samples {
        b[0] = b[0].min(s.tau1);
        b[1] = b[1].max(s.tau1);
        b[2] = b[2].min(s.tau2);
        b[3] = b[3].max(s.tau2);
    }
    b
}

fn boxes_overlap(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a[0] <= b[1] && b[0] <= a[1] && a[2] <= b[3] && b[2] <= a[3]
}

/// Polyline-polyline intersections with two-level bounding-box pruning.
fn polyline_intersections(seg_a: &CurveSegment, seg_b: &CurveSegment) -> Vec<Candidate> {
    let mut out = Vec::new();
    if seg_a.samples.len() < 2 || seg_b.samples.len() < 2 {
        return out;
    }
    if !boxes_overlap(&bbox(&seg_a.samples), &bbox(&seg_b.samples)) {
        return out;
    }
    const CHUNK: usize = 32;
    let chunks_a: Vec<&[crate::switching::CurveSample]> =
        overlapping_chunks(&seg_a.samples, CHUNK);
    let chunks_b: Vec<&[crate::switching::CurveSample]> =
        overlapping_chunks(&seg_b.samples, CHUNK);
    for ca in &chunks_a {
        let ba = bbox(ca);
        for cb in &chunks_b {
            if !boxes_overlap(&ba, &bbox(cb)) {
                continue;
            }
            for ia in 0..ca.len() - 1 {
                for ib in 0..cb.len() - 1 {
                    if let Some((t, u)) = cross(
                        (ca[ia].tau1, ca[ia].tau2),
                        (ca[ia + 1].tau1, ca[ia + 1].tau2),
                        (cb[ib].tau1, cb[ib].tau2),
                        (cb[ib + 1].tau1, cb[ib + 1].tau2),
                    ) {
                        out.push(Candidate {
                            tau1: ca[ia].tau1 + t * (ca[ia + 1].tau1 - ca[ia].tau1),
                            tau2: ca[ia].tau2 + t * (ca[ia + 1].tau2 - ca[ia].tau2),
                            omega_a: ca[ia].omega + t * (ca[ia + 1].omega - ca[ia].omega),
                            omega_b: cb[ib].omega + u * (cb[ib + 1].omega - cb[ib].omega),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Split a polyline into chunks that share one boundary vertex, so no
/// sub-segment is lost at chunk seams.
fn overlapping_chunks(samples: &[crate::switching::CurveSample], size: usize) -> Vec<&[crate::switching::CurveSample]> {
    let mut chunks = Vec::new();
    let mut start = 0;
    while start + 1 < samples.len() {
        let end = (start + size).min(samples.len() - 1);
        chunks.push(&samples[start..=end]);
        start = end;
    }
    chunks
}

/// Proper intersection of segments `a0-a1` and `b0-b1`; parameters in
/// `[0, 1) x [0, 1)` to avoid double counting at shared vertices.
fn cross(
    a0: (f64, f64),
    a1: (f64, f64),
    b0: (f64, f64),
    b1: (f64, f64),
) -> Option<(f64, f64)> {
    let da = (a1.0 - a0.0, a1.1 - a0.1);
    let db = (b1.0 - b0.0, b1.1 - b0.1);
    let denom = da.0 * db.1 - da.1 * db.0;
    if denom.abs() < 1e-300 {
        return None;
    }
    let diff = (b0.0 - a0.0, b0.1 - a0.1);
    let t = (diff.0 * db.1 - diff.1 * db.0) / denom;
    let u = (diff.0 * da.1 - diff.1 * da.0) / denom;
    if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
        Some((t, u))
    } else {
        None
    }
}

/// Damped Newton on the 4x4 system; the Jacobian uses the analytic partial
/// derivatives of both characteristic functions.
fn refine(
    qa: &QuasiPolynomial,
    qb: &QuasiPolynomial,
    cand: &Candidate,
) -> Result<[f64; 4], Hopf2Error> {
    let mut x = [cand.tau1, cand.tau2, cand.omega_a, cand.omega_b];
    let res = |x: &[f64; 4]| -> [f64; 4] {
        let da = qa.eval_d(Complex64::new(0.0, x[2]), x[0], x[1]);
        let db = qb.eval_d(Complex64::new(0.0, x[3]), x[0], x[1]);
        [da.re, da.im, db.re, db.im]
    };
    let norm = |r: &[f64; 4]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut r = res(&x);
    for iter in 0..50 {
        if norm(&r) < 1e-12 {
            return Ok(x);
        }
        let (dla, dt1a, dt2a) = qa.d_partials(x[2], x[0], x[1]);
        let (dlb, dt1b, dt2b) = qb.d_partials(x[3], x[0], x[1]);
        // d/d omega of D(i omega) = i * dD/dlambda
        let mut jac = [
            dt1a.re, dt2a.re, -dla.im, 0.0, //
            dt1a.im, dt2a.im, dla.re, 0.0, //
            dt1b.re, dt2b.re, 0.0, -dlb.im, //
            dt1b.im, dt2b.im, 0.0, dlb.re,
        ];
        let mut rhs = [-r[0], -r[1], -r[2], -r[3]];
        let Some(step) = solve_dense(&mut jac, &mut rhs, 4) else {
            return Err(Hopf2Error::NoConvergence(iter));
        };
        let mut scale = 1.0;
        loop {
            let trial = [
                x[0] + scale * step[0],
                x[1] + scale * step[1],
                x[2] + scale * step[2],
                x[3] + scale * step[3],
            ];
            let rt = res(&trial);
            if norm(&rt) < norm(&r) || scale < 1.0 / 256.0 {
                x = trial;
                r = rt;
                break;
            }
            scale *= 0.5;
        }
    }
    if norm(&r) < 1e-10 {
        Ok(x)
    } else {
        Err(Hopf2Error::NoConvergence(50))
    }
}

/// Search the whole window: generate curves for all modes (auto-truncated
/// or up to `modes`), intersect every segment pair, and merge.
pub fn find_double_hopf(
    p: &ModelParams,
    modes: ModeSelection,
    window: Window,
    opts: &CurveOptions,
) -> Vec<DoubleHopfPoint> {
    let curves = generate_all(p, modes, window, opts);
    let quasis: Vec<QuasiPolynomial> = curves.iter().map(|mc| build(p, mc.n)).collect();
    let segs: Vec<(usize, &CurveSegment)> = curves
        .iter()
        .enumerate()
        .flat_map(|(qi, mc)| mc.segments.iter().map(move |s| (qi, s)))
        .collect();
    let mut pairs = Vec::new();
    for i in 0..segs.len() {
        for k in i + 1..segs.len() {
            pairs.push((i, k));
        }
    }
    let found = par::map_collect(pairs, |(i, k)| {
        let (qa_idx, seg_a) = segs[i];
        let (qb_idx, seg_b) = segs[k];
        intersect(&quasis[qa_idx], seg_a, &quasis[qb_idx], seg_b)
    });
    dedup(found.into_iter().flatten().collect())
}

/// Direction into the stable wedge at a double Hopf point: both root pairs
/// must lose real part along it, so it is the negated mean of the two unit
/// crossing gradients. `None` when the gradients are antiparallel or the
/// point is not actually on both curves.
pub fn stable_wedge_direction(p: &ModelParams, pt: &DoubleHopfPoint) -> Option<(f64, f64)> {
    let gradient = |n: u32, omega: f64| -> Option<(f64, f64)> {
        let q = build(p, n);
        let cd = crate::direction::partials(&q, omega, pt.tau1, pt.tau2).ok()?;
        let g = (
            -(cd.i0 * cd.i1 + cd.r0 * cd.r1),
            -(cd.i0 * cd.i2 + cd.r0 * cd.r2),
        );
        let norm = (g.0 * g.0 + g.1 * g.1).sqrt();
        (norm > 0.0).then(|| (g.0 / norm, g.1 / norm))
    };
    let g1 = gradient(pt.n1, pt.omega1)?;
    let g2 = gradient(pt.n2, pt.omega2)?;
    let d = (-(g1.0 + g2.0), -(g1.1 + g2.1));
    let norm = (d.0 * d.0 + d.1 * d.1).sqrt();
    (norm > 1e-8).then(|| (d.0 / norm, d.1 / norm))
}

/// Whether the point sits on the boundary of the stable region: a probe a
/// short step into the stable wedge must pass the root-accounting check.
/// Retries with different step sizes when the probe path grazes a
/// curve-curve intersection.
pub fn on_stability_boundary(
    p: &ModelParams,
    pt: &DoubleHopfPoint,
    n_max: u32,
    opts: &CurveOptions,
) -> bool {
    let Some(dir) = stable_wedge_direction(p, pt) else {
        return false;
    };
    for step in [0.02, 0.01, 0.035] {
        let probe = (pt.tau1 + step * dir.0, pt.tau2 + step * dir.1);
        if probe.0 < 0.0 || probe.1 < 0.0 {
            continue;
        }
        match crate::direction::stable_region_check(p, probe.0, probe.1, n_max, opts) {
            Ok(stable) => return stable,
            Err(_) => continue,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::switching::{Branch, CurveSample};

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

    #[test]
    fn resonance_reference_cases() {
        // 0.61081 : 0.94964 avoids every m:n with 1 <= m, n <= 3
        assert_eq!(resonance_check(0.61081, 0.94964), Resonance::None);
        assert!(matches!(
            resonance_check(1.0, 2.0),
            Resonance::Strong { m: 1, n: 2, .. }
        ));
        // 1 : 3.01 -> |1/3.01 - 1/3| = 1.107e-3, inside the near band only
        match resonance_check(1.0, 3.01) {
            Resonance::Near { m: 1, n: 3, error } => {
                assert!((error - (1.0 / 3.0 - 1.0 / 3.01)).abs() < 1e-12)
            }
            other => panic!("expected near resonance, got {other:?}"),
        }
    }

    #[test]
    fn parallel_segments_do_not_intersect() {
        let q = build(&baseline(), 0);
        let mk = |offset: f64| CurveSegment {
            n: 0,
            j: 1,
            branch: Branch::Plus,
            j1: 0,
            j2: 0,
            samples: (0..10)
                .map(|i| CurveSample {
                    omega: 0.3 + 0.01 * i as f64,
                    tau1: i as f64,
                    tau2: offset + i as f64,
                })
                .collect(),
            reaches_a: false,
            reaches_b: false,
            unbounded: false,
        };
        assert!(intersect(&q, &mk(0.0), &q, &mk(1.0)).is_empty());
    }

    #[test]
    fn finds_reference_double_hopf_point() {
        let p = baseline();
        let window = Window::new(5.0, 3.0);
        let pts = find_double_hopf(&p, ModeSelection::Auto, window, &CurveOptions::default());
        assert!(!pts.is_empty());
        let hh = pts
            .iter()
            .filter(|pt| pt.refined)
            .min_by(|a, b| {
                let da = (a.tau1 - 3.9042).abs() + (a.tau2 - 1.406).abs();
                let db = (b.tau1 - 3.9042).abs() + (b.tau2 - 1.406).abs();
                da.total_cmp(&db)
            })
            .expect("refined intersections exist");
        assert!((hh.tau1 - 3.9042).abs() < 5e-3, "tau1 = {}", hh.tau1);
        assert!((hh.tau2 - 1.406).abs() < 5e-3, "tau2 = {}", hh.tau2);
        assert!((hh.omega1 - 0.61081).abs() < 1e-3, "omega1 = {}", hh.omega1);
        assert!((hh.omega2 - 0.94964).abs() < 1e-3, "omega2 = {}", hh.omega2);
        assert_eq!(hh.resonance, Resonance::None);
        assert_eq!((hh.n1, hh.n2), (0, 0));
        assert!(hh.residual1 < 1e-10 && hh.residual2 < 1e-10);
    }

    #[test]
    fn intersection_is_symmetric() {
        let p = baseline();
        let q = build(&p, 0);
        let opts = CurveOptions::default();
        let segs =
            crate::switching::generate_segments(&q, Window::new(5.0, 3.0), &opts);
        let mut found: Option<(DoubleHopfPoint, DoubleHopfPoint)> = None;
        'outer: for i in 0..segs.len() {
            for k in i + 1..segs.len() {
                let ab = intersect(&q, &segs[i], &q, &segs[k]);
                let ba = intersect(&q, &segs[k], &q, &segs[i]);
                assert_eq!(ab.len(), ba.len());
                if let (Some(x), Some(y)) = (ab.first(), ba.first()) {
                    found = Some((*x, *y));
                    break 'outer;
                }
            }
        }
        let (x, y) = found.expect("at least one intersecting pair in the window");
        assert!((x.tau1 - y.tau1).abs() < 1e-9);
        assert!((x.omega1 - y.omega1).abs() < 1e-9);
        assert!((x.omega2 - y.omega2).abs() < 1e-9);
    }

    #[test]
    fn reference_point_is_on_stability_boundary() {
        let p = baseline();
        let pts = find_double_hopf(
            &p,
            ModeSelection::Auto,
            Window::new(5.0, 3.0),
            &CurveOptions::default(),
        );
        let hh = pts
            .iter()
            .filter(|pt| pt.refined)
            .min_by(|a, b| {
                let da = (a.tau1 - 3.9042).abs() + (a.tau2 - 1.406).abs();
                let db = (b.tau1 - 3.9042).abs() + (b.tau2 - 1.406).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        assert!(on_stability_boundary(&p, hh, 5, &CurveOptions::default()));
        // an intersection deep inside the unstable fan is not on the boundary
        if let Some(far) = pts
            .iter()
            .find(|pt| pt.refined && (pt.tau1 - hh.tau1).abs() + (pt.tau2 - hh.tau2).abs() > 0.5)
        {
            assert!(!on_stability_boundary(&p, far, 5, &CurveOptions::default()));
        }
    }
}
