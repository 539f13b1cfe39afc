//! Stability switching curves in the `(tau1, tau2)` plane.
//!
//! For each spatial mode the crossing set `{omega > 0 : F_n(omega) <= 0}`
//! decomposes into finitely many intervals. Over each interval the two
//! branches
//!
//! ```text
//! tau1 = (+-theta1(omega) - phi1(omega) + 2 j1 pi) / omega
//! tau2 = (-+theta2(omega) - phi2(omega) + 2 j2 pi) / omega
//! ```
//!
//! trace curve segments; clipped to the closed positive quadrant they form
//! the stability switching curves. Opposite branches join at interval
//! endpoints with index shifts given by the endpoint bits
//! `theta_i(endpoint) = delta_i * pi`.

use std::f64::consts::PI;

use crate::numeric::{bisect, cosine_grid, polish_root, scan_sign_changes};
use crate::par;
use crate::quasipoly::{AngleData, AngleError, QuasiPolynomial};

/// Endpoint angles within this of `0` or `pi` are snapped exactly there
/// when sampling segments. At a refined root of `F` the angle is exactly a
/// multiple of `pi`; the square-root sensitivity of `acos` near `+-1` makes
/// the raw value noisy at the `1e-8` level, far below this threshold but
/// far above sample accuracy elsewhere.
const THETA_SNAP: f64 = 1e-4;

/// Branch selector: the sign in front of `theta1` (the `tau2` formula takes
/// the opposite sign).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

/// Knobs for crossing-set isolation and curve sampling.
#[derive(Debug, Clone)]
pub struct CurveOptions {
    /// Uniform scan points for sign changes of `F_n` on `[0, omega_max]`.
    pub omega_grid: usize,
    /// Samples per crossing interval, cosine-clustered toward endpoints.
    pub samples_per_interval: usize,
    /// Upper frequency bound; `None` applies the default rule (twice the
    /// largest root of `F_0` plus margin, or 10 when `F_0` has no roots).
    pub omega_max: Option<f64>,
    /// Root refinement stops when the bracket is shorter than this.
    pub bisect_tol: f64,
    /// Half-open intervals are sampled down to this frequency and flagged
    /// unbounded instead of extrapolating toward `omega = 0`.
    pub min_omega: f64,
    /// `|F| < flat_tol` at an interior grid point without a sign change is
    /// reported as a tangency suspect.
    pub flat_tol: f64,
    /// Endpoint coincidence tolerance for connectivity links.
    pub link_tol: f64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            omega_grid: 4000,
            samples_per_interval: 400,
            omega_max: None,
            bisect_tol: 1e-10,
            min_omega: 1e-4,
            flat_tol: 1e-12,
            link_tol: 1e-6,
        }
    }
}

/// One interval `[a, b]` of the crossing set, with the endpoint bits
/// `theta_i = delta_i * pi`. When `half_open` is set the interval is
/// `(0, b]`; `a` is stored as `0` and the `a`-side bits are meaningless.
#[derive(Debug, Clone)]
pub struct CrossingInterval {
    pub n: u32,
    /// 1-based interval index within the mode.
    pub j: u32,
    pub a: f64,
    pub b: f64,
    pub half_open: bool,
    pub delta1a: u8,
    pub delta2a: u8,
    pub delta1b: u8,
    pub delta2b: u8,
}

/// Crossing set of one mode plus any tangency suspects found during the
/// scan (grid points where `F` nearly vanishes without changing sign).
#[derive(Debug, Clone, Default)]
pub struct CrossingSet {
    pub intervals: Vec<CrossingInterval>,
    pub tangency_suspects: Vec<f64>,
}

/// Rectangular window `[0, tau1_max] x [0, tau2_max]`.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub tau1_max: f64,
    pub tau2_max: f64,
}

impl Window {
    pub fn new(tau1_max: f64, tau2_max: f64) -> Self {
        Window { tau1_max, tau2_max }
    }

    pub fn contains(&self, tau1: f64, tau2: f64) -> bool {
        (0.0..=self.tau1_max).contains(&tau1) && (0.0..=self.tau2_max).contains(&tau2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub omega: f64,
    pub tau1: f64,
    pub tau2: f64,
}

/// A sampled branch of a switching curve: one `(interval, branch, j1, j2)`
/// combination, clipped to the positive quadrant. Samples are ordered by
/// increasing omega.
#[derive(Debug, Clone)]
pub struct CurveSegment {
    pub n: u32,
    pub j: u32,
    pub branch: Branch,
    pub j1: i32,
    pub j2: i32,
    pub samples: Vec<CurveSample>,
    /// First sample sits at the interval's left sampling endpoint.
    pub reaches_a: bool,
    /// Last sample sits at the interval's right endpoint `b`.
    pub reaches_b: bool,
    /// Segment comes from a half-open interval and runs down to the
    /// `min_omega` cutoff: tau grows without bound as omega -> 0.
    pub unbounded: bool,
}

impl CurveSegment {
    pub fn first(&self) -> &CurveSample {
        self.samples.first().expect("segments are non-empty")
    }

    pub fn last(&self) -> &CurveSample {
        self.samples.last().expect("segments are non-empty")
    }
}

/// Which interval endpoint a connectivity link sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointTag {
    A,
    B,
}

/// Geometric coincidence of two segment endpoints.
#[derive(Debug, Clone, Copy)]
pub struct Link {
    pub seg_a: usize,
    pub seg_b: usize,
    pub endpoint: EndpointTag,
}

/// Default frequency cap: twice the largest root of `F_0` plus margin;
/// 10 when `F_0` has no root below 10.
pub fn default_omega_max(q0: &QuasiPolynomial, opts: &CurveOptions) -> f64 {
    let (brackets, _) =
        scan_sign_changes(|w| q0.f_value(w), 0.0, 10.0, opts.omega_grid, opts.flat_tol);
    match brackets.last() {
        Some(&(lo, hi)) => {
            let r = bisect(|w| q0.f_value(w), lo, hi, opts.bisect_tol);
            2.0 * r + 0.5
        }
        None => 10.0,
    }
}

fn endpoint_bit(theta: f64) -> u8 {
    u8::from(theta > 0.5 * PI)
}

/// Isolate the crossing set of `q`: sign-change scan on a uniform grid,
/// bisection refinement of each root, endpoint bits from the angles.
pub fn crossing_set(q: &QuasiPolynomial, opts: &CurveOptions) -> CrossingSet {
    let omega_max = opts.omega_max.unwrap_or_else(|| default_omega_max(q, opts));
    let f = |w: f64| q.f_value(w);
    let (brackets, tangency_suspects) =
        scan_sign_changes(f, 0.0, omega_max, opts.omega_grid, opts.flat_tol);
    let mut roots: Vec<f64> = brackets
        .iter()
        .map(|&(lo, hi)| polish_root(f, bisect(f, lo, hi, opts.bisect_tol)))
        .collect();
    roots.retain(|r| *r > 0.0);

    let mut intervals = Vec::new();
    let half_open_first = q.f_value(0.0) <= 0.0;
    let mut idx = 0usize;
    let mut j = 1u32;
    if half_open_first && !roots.is_empty() {
        intervals.push(make_interval(q, j, 0.0, roots[0], true));
        idx = 1;
        j += 1;
    }
    while idx + 1 < roots.len() {
        intervals.push(make_interval(q, j, roots[idx], roots[idx + 1], false));
        idx += 2;
        j += 1;
    }
    // an unpaired trailing root can only come from a grazing contact that
    // the flat-tol scan missed; surface it rather than guessing an interval
    let mut tangency_suspects = tangency_suspects;
    if idx < roots.len() {
        tangency_suspects.push(roots[idx]);
    }
    CrossingSet {
        intervals,
        tangency_suspects,
    }
}

fn make_interval(q: &QuasiPolynomial, j: u32, a: f64, b: f64, half_open: bool) -> CrossingInterval {
    let bits_at = |w: f64| match q.angles(w) {
        Ok(ad) => (endpoint_bit(ad.theta1), endpoint_bit(ad.theta2)),
        Err(_) => (0, 0),
    };
    let (delta1a, delta2a) = if half_open { (0, 0) } else { bits_at(a) };
    let (delta1b, delta2b) = bits_at(b);
    CrossingInterval {
        n: q.mode(),
        j,
        a,
        b,
        half_open,
        delta1a,
        delta2a,
        delta1b,
        delta2b,
    }
}

fn tau_from_angles(ad: &AngleData, branch: Branch, j1: i32, j2: i32) -> (f64, f64) {
    let s = branch.sign();
    let tau1 = (s * ad.theta1 - ad.phi1 + 2.0 * PI * j1 as f64) / ad.omega;
    let tau2 = (-s * ad.theta2 - ad.phi2 + 2.0 * PI * j2 as f64) / ad.omega;
    (tau1, tau2)
}

/// Delay pair on the `(branch, j1, j2)` curve at frequency `omega`. Values
/// may be negative; callers clip to the positive quadrant.
pub fn tau_curve(
    q: &QuasiPolynomial,
    omega: f64,
    branch: Branch,
    j1: i32,
    j2: i32,
) -> Result<(f64, f64), AngleError> {
    let ad = q.angles(omega)?;
    Ok(tau_from_angles(&ad, branch, j1, j2))
}

/// Partner indices predicted by the endpoint identity: the `+` branch with
/// offsets `(j1, j2)` meets the `-` branch with offsets
/// `(j1 + delta1, j2 - delta2)` at the given endpoint.
pub fn predicted_partner(iv: &CrossingInterval, j1: i32, j2: i32, end: EndpointTag) -> (i32, i32) {
    match end {
        EndpointTag::A => (j1 + iv.delta1a as i32, j2 - iv.delta2a as i32),
        EndpointTag::B => (j1 + iv.delta1b as i32, j2 - iv.delta2b as i32),
    }
}

/// All curve segments of `q` with at least one sample inside `window`.
pub fn generate_segments(
    q: &QuasiPolynomial,
    window: Window,
    opts: &CurveOptions,
) -> Vec<CurveSegment> {
    let cs = crossing_set(q, opts);
    segments_from_crossing_set(q, &cs, window, opts)
}

/// Segment generation from a precomputed crossing set.
pub fn segments_from_crossing_set(
    q: &QuasiPolynomial,
    cs: &CrossingSet,
    window: Window,
    opts: &CurveOptions,
) -> Vec<CurveSegment> {
    let mut jobs: Vec<(usize, Branch, i32, i32)> = Vec::new();
    let mut angle_tables: Vec<Vec<AngleData>> = Vec::new();
    for (iv_idx, iv) in cs.intervals.iter().enumerate() {
        let lo = if iv.half_open {
            opts.min_omega.min(0.5 * iv.b)
        } else {
            iv.a
        };
        let grid = cosine_grid(lo, iv.b, opts.samples_per_interval.max(2));
        let mut table: Vec<AngleData> = grid.iter().filter_map(|&w| q.angles(w).ok()).collect();
        if !iv.half_open {
            if let Some(first) = table.first_mut() {
                snap_endpoint_angles(first);
            }
        }
        if let Some(last) = table.last_mut() {
            snap_endpoint_angles(last);
        }
        // 2 pi j / omega bounds the reachable window
        let j1_max = (iv.b * window.tau1_max / (2.0 * PI)).ceil() as i32 + 1;
        let j2_max = (iv.b * window.tau2_max / (2.0 * PI)).ceil() as i32 + 1;
        for branch in [Branch::Plus, Branch::Minus] {
            for j1 in 0..=j1_max {
                for j2 in 0..=j2_max {
                    jobs.push((iv_idx, branch, j1, j2));
                }
            }
        }
        angle_tables.push(table);
    }

    let pieces = par::map_collect(jobs, |(iv_idx, branch, j1, j2)| {
        segments_for_combination(
            q,
            &cs.intervals[iv_idx],
            &angle_tables[iv_idx],
            branch,
            j1,
            j2,
            window,
        )
    });
    pieces.into_iter().flatten().collect()
}

fn snap_endpoint_angles(ad: &mut AngleData) {
    for theta in [&mut ad.theta1, &mut ad.theta2] {
        if *theta < THETA_SNAP {
            *theta = 0.0;
        } else if PI - *theta < THETA_SNAP {
            *theta = PI;
        }
    }
}

/// Put an endpoint sample exactly on the curve: 2D Newton on
/// `(Re D, Im D)(i omega; tau1, tau2) = 0`, holding fixed whichever delay
/// has the larger curve-tangent component (the other pairing is nearly
/// singular at interval endpoints, where `R1 I2 - R2 I1` vanishes).
fn polish_sample(q: &QuasiPolynomial, s: &mut CurveSample) {
    use num_complex::Complex64;
    let (dl, dt1, dt2) = q.d_partials(s.omega, s.tau1, s.tau2);
    let t1_comp = dl.im * dt2.im + dl.re * dt2.re;
    let t2_comp = dl.im * dt1.im + dl.re * dt1.re;
    let fix_tau1 = t1_comp.abs() >= t2_comp.abs();
    let (mut w, mut free) = (s.omega, if fix_tau1 { s.tau2 } else { s.tau1 });
    for _ in 0..15 {
        let (t1, t2) = if fix_tau1 { (s.tau1, free) } else { (free, s.tau2) };
        let d = q.eval_d(Complex64::new(0.0, w), t1, t2);
        if d.norm() < 1e-13 {
            break;
        }
        let (dl, dt1, dt2) = q.d_partials(w, t1, t2);
        let dtf = if fix_tau1 { dt2 } else { dt1 };
        // columns: omega (dD/domega = i dD/dlambda), free tau
        let det = -dl.im * dtf.im - dtf.re * dl.re;
        if det.abs() < 1e-14 {
            return;
        }
        let dw = (-d.re * dtf.im + dtf.re * d.im) / det;
        let df = (dl.im * d.im + d.re * dl.re) / det;
        w += dw;
        free += df;
        if dw.abs() < 1e-16 && df.abs() < 1e-16 {
            break;
        }
    }
    let (t1, t2) = if fix_tau1 { (s.tau1, free) } else { (free, s.tau2) };
    if t1 >= 0.0 && t2 >= 0.0 && q.residual(w, t1, t2) <= q.residual(s.omega, s.tau1, s.tau2) {
        s.omega = w;
        s.tau1 = t1;
        s.tau2 = t2;
    }
}

/// Sample one `(interval, branch, j1, j2)` combination, keep contiguous
/// runs inside the closed positive quadrant, and retain runs that touch
/// the window.
fn segments_for_combination(
    q: &QuasiPolynomial,
    iv: &CrossingInterval,
    angle_table: &[AngleData],
    branch: Branch,
    j1: i32,
    j2: i32,
    window: Window,
) -> Vec<CurveSegment> {
    let n_samples = angle_table.len();
    let mut runs: Vec<(usize, Vec<CurveSample>)> = Vec::new();
    let mut current: Option<(usize, Vec<CurveSample>)> = None;
    for (idx, ad) in angle_table.iter().enumerate() {
        let (tau1, tau2) = tau_from_angles(ad, branch, j1, j2);
        if tau1 >= 0.0 && tau2 >= 0.0 {
            let sample = CurveSample {
                omega: ad.omega,
                tau1,
                tau2,
            };
            match &mut current {
                Some((_, run)) => run.push(sample),
                None => current = Some((idx, vec![sample])),
            }
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    if let Some(run) = current.take() {
        runs.push(run);
    }

    runs.into_iter()
        .filter(|(_, run)| run.iter().any(|s| window.contains(s.tau1, s.tau2)))
        .map(|(start, mut run)| {
            let len = run.len();
            let reaches_a = start == 0 && !iv.half_open;
            let reaches_b = start + len == n_samples;
            // the snapped endpoint angles leave a square-root-sized error
            // in tau; polish those two samples back onto the curve
            if reaches_a {
                polish_sample(q, run.first_mut().expect("non-empty run"));
            }
            if reaches_b {
                polish_sample(q, run.last_mut().expect("non-empty run"));
            }
            CurveSegment {
                n: iv.n,
                j: iv.j,
                branch,
                j1,
                j2,
                reaches_a,
                reaches_b,
                unbounded: iv.half_open && start == 0,
                samples: run,
            }
        })
        .collect()
}

/// Geometric connectivity: pairs of opposite-branch segments of the same
/// interval whose terminal samples coincide within `opts.link_tol`.
pub fn connectivity(segs: &[CurveSegment], opts: &CurveOptions) -> Vec<Link> {
    let mut links = Vec::new();
    for i in 0..segs.len() {
        for k in i + 1..segs.len() {
            let (si, sk) = (&segs[i], &segs[k]);
            if si.n != sk.n || si.j != sk.j || si.branch == sk.branch {
                continue;
            }
            if si.reaches_a && sk.reaches_a && !si.unbounded && !sk.unbounded {
                let d = dist(si.first(), sk.first());
                if d < opts.link_tol {
                    links.push(Link {
                        seg_a: i,
                        seg_b: k,
                        endpoint: EndpointTag::A,
                    });
                }
            }
            if si.reaches_b && sk.reaches_b {
                let d = dist(si.last(), sk.last());
                if d < opts.link_tol {
                    links.push(Link {
                        seg_a: i,
                        seg_b: k,
                        endpoint: EndpointTag::B,
                    });
                }
            }
        }
    }
    links
}

fn dist(a: &CurveSample, b: &CurveSample) -> f64 {
    ((a.tau1 - b.tau1).powi(2) + (a.tau2 - b.tau2).powi(2)).sqrt()
}

/// Crossing set and segments for one mode.
#[derive(Debug, Clone)]
pub struct ModeCurves {
    pub n: u32,
    pub crossing: CrossingSet,
    pub segments: Vec<CurveSegment>,
}

/// Mode range selection for whole-plane curve generation.
#[derive(Debug, Clone, Copy)]
pub enum ModeSelection {
    /// Modes `0..=max`, including ones with empty crossing sets.
    UpTo(u32),
    /// Increase `n` until the first mode with an empty crossing set.
    Auto,
}

/// Curves for a range of spatial modes. With [`ModeSelection::Auto`] the
/// scan stops at the first mode whose crossing set is empty (the diffusion
/// terms grow like `n^4`, so once `F_n > 0` everywhere it stays positive).
pub fn generate_all(
    p: &crate::model::ModelParams,
    modes: ModeSelection,
    window: Window,
    opts: &CurveOptions,
) -> Vec<ModeCurves> {
    let q0 = crate::quasipoly::build(p, 0);
    let mut opts = opts.clone();
    if opts.omega_max.is_none() {
        opts.omega_max = Some(default_omega_max(&q0, &opts));
    }
    let mut out = Vec::new();
    let max = match modes {
        ModeSelection::UpTo(max) => max,
        ModeSelection::Auto => u32::MAX,
    };
    for n in 0..=max {
        let q = crate::quasipoly::build(p, n);
        let crossing = crossing_set(&q, &opts);
        let empty = crossing.intervals.is_empty();
        let segments = segments_from_crossing_set(&q, &crossing, window, &opts);
        out.push(ModeCurves {
            n,
            crossing,
            segments,
        });
        if empty && matches!(modes, ModeSelection::Auto) {
            break;
        }
    }
    out
}
