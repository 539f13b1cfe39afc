//! Poincare sections of recorded trajectories and attractor
//! classification from the section-point geometry.
//!
//! Section hits live in the `(u(0,t), u(0,t-tau1))` plane. A finite set of
//! tight clusters indicates a periodic orbit, hits filling a closed curve a
//! 2-torus, and scattered hits a 3-torus or chaotic set (not further
//! distinguished here).

use thiserror::Error;

use crate::numeric::{bisect, hermite, hermite_deriv};
use crate::simulate::Trajectory;

/// Minimum section hits before a classification is attempted.
pub const MIN_HITS: usize = 20;
/// Interpolation tolerance on the section condition at stored hits.
pub const SECTION_TOL: f64 = 1e-8;
/// Cluster radius for the periodic test.
pub const CLUSTER_RADIUS: f64 = 1e-3;
/// Maximum cluster count for the periodic test.
pub const MAX_PERIODIC_CLUSTERS: usize = 8;
/// A nearest-neighbor chain closes into a curve when no hop (and the
/// closing hop) exceeds this multiple of the median hop.
pub const CHAIN_GAP_RATIO: f64 = 10.0;
/// Amplitude of the trailing quarter of the trajectory below which the
/// state is called converged to equilibrium.
pub const EQUILIBRIUM_AMPLITUDE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("only {got} section hits (need at least {MIN_HITS}); classification withheld")]
    TooFewHits { got: usize },
}

/// Which codimension-one surface the section uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    /// `v(0, t) = v*`, rising crossings.
    VStar,
    /// `du/dt(0, t) = 0`, falling crossings (local maxima of `u(0, t)`).
    DuDotZero,
}

impl Section {
    pub fn label(self) -> &'static str {
        match self {
            Section::VStar => "v0=vstar",
            Section::DuDotZero => "du0=0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Equilibrium,
    Periodic,
    Torus2,
    Torus3OrChaos,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::Equilibrium => "equilibrium",
            Classification::Periodic => "periodic",
            Classification::Torus2 => "torus2",
            Classification::Torus3OrChaos => "torus3-or-chaos",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoincareResult {
    pub section: Section,
    /// Hit coordinates in the `(u(0,t), u(0,t-tau1))` plane.
    pub points: Vec<(f64, f64)>,
    pub times: Vec<f64>,
    pub classification: Option<Classification>,
    pub warnings: Vec<String>,
}

/// Locate one-sided section crossings by sign-change bracketing between
/// recorded samples and cubic-Hermite root refinement in time, then
/// classify the hit set.
pub fn poincare(traj: &Trajectory, section: Section) -> PoincareResult {
    let mut result = PoincareResult {
        section,
        points: Vec::new(),
        times: Vec::new(),
        classification: None,
        warnings: Vec::new(),
    };
    if traj.t.len() < 4 {
        result.warnings.push("trajectory too short".into());
        return result;
    }

    // the section indicator and its sign convention
    let g_at = |i: usize, t: f64| -> f64 {
        let (t0, t1) = (traj.t[i], traj.t[i + 1]);
        match section {
            Section::VStar => {
                hermite(t, t0, t1, traj.v0[i], traj.v0[i + 1], traj.dv0[i], traj.dv0[i + 1])
                    - traj.equilibrium.v_star
            }
            Section::DuDotZero => {
                hermite_deriv(t, t0, t1, traj.u0[i], traj.u0[i + 1], traj.du0[i], traj.du0[i + 1])
            }
        }
    };
    let rising = matches!(section, Section::VStar);

    for i in 0..traj.t.len() - 1 {
        let ga = g_at(i, traj.t[i]);
        let gb = g_at(i, traj.t[i + 1]);
        let crosses = if rising {
            ga < 0.0 && gb >= 0.0
        } else {
            ga > 0.0 && gb <= 0.0
        };
        if !crosses {
            continue;
        }
        let t_hit = bisect(|t| g_at(i, t), traj.t[i], traj.t[i + 1], 1e-13);
        let g_res = g_at(i, t_hit).abs();
        if g_res > SECTION_TOL {
            result
                .warnings
                .push(format!("hit at t = {t_hit} misses section by {g_res:e}"));
            continue;
        }
        let (t0, t1) = (traj.t[i], traj.t[i + 1]);
        let u = hermite(t_hit, t0, t1, traj.u0[i], traj.u0[i + 1], traj.du0[i], traj.du0[i + 1]);
        let u_lag = hermite(
            t_hit,
            t0,
            t1,
            traj.u0_lag[i],
            traj.u0_lag[i + 1],
            traj.du0_lag[i],
            traj.du0_lag[i + 1],
        );
        result.points.push((u, u_lag));
        result.times.push(t_hit);
    }

    if converged_to_equilibrium(traj) {
        result.classification = Some(Classification::Equilibrium);
        return result;
    }
    match classify(&result.points) {
        Ok(c) => result.classification = Some(c),
        Err(e) => result.warnings.push(e.to_string()),
    }
    result
}

/// Trailing-quarter amplitude test on the node-0 channels.
fn converged_to_equilibrium(traj: &Trajectory) -> bool {
    let n = traj.t.len();
    if n < 8 {
        return false;
    }
    let tail = n - n / 4..n;
    let amp = |xs: &[f64]| -> f64 {
        let slice = &xs[tail.clone()];
        let max = slice.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let min = slice.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        max - min
    };
    amp(&traj.u0) < EQUILIBRIUM_AMPLITUDE && amp(&traj.v0) < EQUILIBRIUM_AMPLITUDE
}

/// Classify a section-hit set: a handful of tight clusters is periodic;
/// hits that chain into a closed curve are a 2-torus; anything else is
/// labelled torus3-or-chaos (the two are not distinguished).
pub fn classify(points: &[(f64, f64)]) -> Result<Classification, ClassifyError> {
    if points.len() < MIN_HITS {
        return Err(ClassifyError::TooFewHits { got: points.len() });
    }
    if cluster_count(points, CLUSTER_RADIUS)
        .map(|k| k <= MAX_PERIODIC_CLUSTERS)
        .unwrap_or(false)
    {
        return Ok(Classification::Periodic);
    }
    if chain_closes(points) {
        return Ok(Classification::Torus2);
    }
    Ok(Classification::Torus3OrChaos)
}

/// Greedy clustering; `None` as soon as the count exceeds the periodic
/// bound (no need to finish).
fn cluster_count(points: &[(f64, f64)], radius: f64) -> Option<usize> {
    let mut centers: Vec<(f64, f64)> = Vec::new();
    for &p in points {
        if !centers
            .iter()
            .any(|c| dist(*c, p) < radius)
        {
            centers.push(p);
            if centers.len() > MAX_PERIODIC_CLUSTERS {
                return None;
            }
        }
    }
    Some(centers.len())
}

/// Nearest-neighbor chain through all hits: on a densely sampled closed
/// curve every hop is comparable to the median and the chain returns to its
/// start; scattered clouds force large jumps.
fn chain_closes(points: &[(f64, f64)]) -> bool {
    let n = points.len();
    let mut visited = vec![false; n];
    let mut hops = Vec::with_capacity(n);
    let mut current = 0usize;
    visited[0] = true;
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (k, &p) in points.iter().enumerate() {
            if !visited[k] {
                let d = dist(points[current], p);
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
        }
        hops.push(best_d);
        visited[best] = true;
        current = best;
    }
    let closing = dist(points[current], points[0]);
    hops.sort_by(f64::total_cmp);
    let median = hops[hops.len() / 2];
    if median == 0.0 {
        return false;
    }
    let max_hop = *hops.last().expect("at least one hop");
    max_hop <= CHAIN_GAP_RATIO * median && closing <= CHAIN_GAP_RATIO * median
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}
