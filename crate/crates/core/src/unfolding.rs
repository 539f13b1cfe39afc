//! Local unfolding of a double Hopf point: eigenvector/adjoint constants,
//! the polar normal-form parameters derived from supplied cubic
//! coefficients, the twelve-case classification, and the bifurcation set
//! (semi-lines and regions) around the critical point.
//!
//! The amplitude system after rescaling is
//!
//! ```text
//! rho1' = rho1 (nu1 + rho1^2 + b rho2^2)
//! rho2' = rho2 (nu2 + c rho1^2 + d rho2^2),     d = +-1
//! ```
//!
//! with `(nu1, nu2)` a linear image of the delay offsets
//! `(sigma1, sigma2) = (tau1 - tau1*, tau2 - tau2*)`.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::hopf2::DoubleHopfPoint;
use crate::model::{equilibrium, ModelParams};

/// Default chart radius for region lookups: the unfolding is local, and the
/// reference probe points sit within ~0.1 of the critical point.
pub const DEFAULT_CHART_RADIUS: f64 = 0.15;

/// Angular slack (radians, in the `nu` plane) for the on-boundary signal.
pub const BOUNDARY_ANGLE_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum UnfoldingError {
    #[error("normal-form constants are derived for spatial modes (0, 0); got ({0}, {1})")]
    NonzeroMode(u32, u32),
    #[error("degenerate normal form: {0} vanishes")]
    Degenerate(&'static str),
    #[error("nu map is singular (det = {0:e}); semi-lines undefined")]
    SingularNuMap(f64),
    #[error("semi-lines and regions are only laid out for case VIa; got {0}")]
    UnsupportedCase(&'static str),
}

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("point is {dist:.4} from the critical point, outside the chart radius {radius}")]
    OutOfChart { dist: f64, radius: f64 },
    #[error("point lies on semi-line {label} within angular tolerance")]
    OnBoundary { label: &'static str },
    #[error(transparent)]
    Unfolding(#[from] UnfoldingError),
}

/// Eigenvector and adjoint-eigenvector constants at the double Hopf point
/// (spatial wavenumbers zero).
#[derive(Debug, Clone, Copy)]
pub struct EigenData {
    pub r12: Complex64,
    pub r32: Complex64,
    pub r12_star: Complex64,
    pub r32_star: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

/// The eight complex normal-form coefficients: four linear-in-sigma, four
/// cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFormCoeffs {
    pub k11: Complex64,
    pub k21: Complex64,
    pub k13: Complex64,
    pub k23: Complex64,
    pub k2100: Complex64,
    pub k1011: Complex64,
    pub k0021: Complex64,
    pub k1110: Complex64,
}

/// The twelve planar unfoldings, keyed by the signs of `(d, b, c, d - bc)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnfoldingCase {
    Ia,
    Ib,
    II,
    III,
    IVa,
    IVb,
    V,
    VIa,
    VIb,
    VIIa,
    VIIb,
    VIII,
}

impl UnfoldingCase {
    pub fn label(self) -> &'static str {
        match self {
            UnfoldingCase::Ia => "Ia",
            UnfoldingCase::Ib => "Ib",
            UnfoldingCase::II => "II",
            UnfoldingCase::III => "III",
            UnfoldingCase::IVa => "IVa",
            UnfoldingCase::IVb => "IVb",
            UnfoldingCase::V => "V",
            UnfoldingCase::VIa => "VIa",
            UnfoldingCase::VIb => "VIb",
            UnfoldingCase::VIIa => "VIIa",
            UnfoldingCase::VIIb => "VIIb",
            UnfoldingCase::VIII => "VIII",
        }
    }

    /// Row lookup by the sign pattern. `None` only on the boundaries
    /// (some quantity vanishing), which [`unfold`] rejects beforehand.
    pub fn from_signs(d: f64, b: f64, c: f64, d_minus_bc: f64) -> Option<UnfoldingCase> {
        if d == 0.0 || b == 0.0 || c == 0.0 || d_minus_bc == 0.0 {
            return None;
        }
        let (bp, cp, ep) = (b > 0.0, c > 0.0, d_minus_bc > 0.0);
        Some(if d > 0.0 {
            match (bp, cp, ep) {
                (true, true, true) => UnfoldingCase::Ia,
                (true, true, false) => UnfoldingCase::Ib,
                (true, false, true) => UnfoldingCase::II,
                (false, true, true) => UnfoldingCase::III,
                (false, false, true) => UnfoldingCase::IVa,
                (false, false, false) => UnfoldingCase::IVb,
                // d = +1 with bc < 0 forces d - bc > 0
                (true, false, false) | (false, true, false) => return None,
            }
        } else {
            match (bp, cp, ep) {
                (true, true, false) => UnfoldingCase::V,
                (true, false, true) => UnfoldingCase::VIa,
                (true, false, false) => UnfoldingCase::VIb,
                (false, true, true) => UnfoldingCase::VIIa,
                (false, true, false) => UnfoldingCase::VIIb,
                (false, false, false) => UnfoldingCase::VIII,
                // d = -1 with bc > 0 forces d - bc < 0
                (true, true, true) | (false, false, true) => return None,
            }
        })
    }
}

/// Unfolding parameters of the rescaled amplitude system.
#[derive(Debug, Clone, Copy)]
pub struct UnfoldingParams {
    /// `sign(Re K2100)`.
    pub eps1: f64,
    /// `sign(Re K0021)`.
    pub eps2: f64,
    /// Row-major linear map `(sigma1, sigma2) -> (nu1, nu2)`.
    pub nu_map: [[f64; 2]; 2],
    pub b: f64,
    pub c: f64,
    /// `eps1 * eps2`, the coefficient of `rho2^3` after rescaling.
    pub d: f64,
    pub d_minus_bc: f64,
    pub case: UnfoldingCase,
}

/// Eigenvector constants `r12, r12*` (and their `omega2` twins) for one
/// frequency: the kernel data of the characteristic matrix at
/// `lambda = i omega` with wavenumber zero.
pub fn mode_constants(p: &ModelParams, omega: f64, tau_lag: f64) -> (Complex64, Complex64) {
    let e = equilibrium(p);
    let one_m = 1.0 - p.m;
    let rot = (-Complex64::i() * omega * tau_lag).exp();
    let denom = p.r2 * rot + Complex64::i() * omega;
    let r2c = p.gamma * one_m * p.r2 * rot / denom;
    let r2c_star = Complex64::new(-p.a * one_m * e.u_star, 0.0) / denom;
    (r2c, r2c_star)
}

/// The six constants of the center-subspace bases at the double Hopf
/// point. Only the wavenumber-(0, 0) case is supported.
pub fn eigen_data(p: &ModelParams, pt: &DoubleHopfPoint) -> Result<EigenData, UnfoldingError> {
    if pt.n1 != 0 || pt.n2 != 0 {
        return Err(UnfoldingError::NonzeroMode(pt.n1, pt.n2));
    }
    let e = equilibrium(p);
    let one_m = 1.0 - p.m;
    let (tau1, tau2) = (pt.tau1, pt.tau2);
    let (r12, r12_star) = mode_constants(p, pt.omega1, tau2);
    let (r32, r32_star) = mode_constants(p, pt.omega2, tau2);
    let norm_const = |omega: f64, r: Complex64, rs: Complex64| {
        let e1 = (-Complex64::i() * omega * tau1).exp();
        let e2 = (-Complex64::i() * omega * tau2).exp();
        let denom = Complex64::new(1.0, 0.0) + rs * r - tau1 * (p.r1 / p.k) * e.u_star * e1
            + rs * p.gamma * one_m * p.r2 * tau2 * e2
            - p.r2 * tau2 * e2 * rs * r;
        denom.inv()
    };
    Ok(EigenData {
        r12,
        r32,
        r12_star,
        r32_star,
        d1: norm_const(pt.omega1, r12, r12_star),
        d2: norm_const(pt.omega2, r32, r32_star),
    })
}

/// Unfolding parameters from the normal-form coefficients:
/// `eps_i = sign(Re K_cubic)`, `nu = eps1 * Re[(K11 K21); (K13 K23)] sigma`,
/// `b = eps1 eps2 Re K1011 / Re K0021`, `c = Re K1110 / Re K2100`,
/// `d = eps1 eps2`, classified per the twelve-case table.
pub fn unfold(k: &NormalFormCoeffs) -> Result<UnfoldingParams, UnfoldingError> {
    const DEGENERATE: f64 = 1e-12;
    if k.k2100.re.abs() < DEGENERATE {
        return Err(UnfoldingError::Degenerate("Re K2100"));
    }
    if k.k0021.re.abs() < DEGENERATE {
        return Err(UnfoldingError::Degenerate("Re K0021"));
    }
    let eps1 = k.k2100.re.signum();
    let eps2 = k.k0021.re.signum();
    let b = eps1 * eps2 * k.k1011.re / k.k0021.re;
    let c = k.k1110.re / k.k2100.re;
    let d = eps1 * eps2;
    let d_minus_bc = d - b * c;
    if d_minus_bc.abs() < DEGENERATE {
        return Err(UnfoldingError::Degenerate("d - bc"));
    }
    if b.abs() < DEGENERATE {
        return Err(UnfoldingError::Degenerate("b"));
    }
    if c.abs() < DEGENERATE {
        return Err(UnfoldingError::Degenerate("c"));
    }
    let case = UnfoldingCase::from_signs(d, b, c, d_minus_bc)
        .expect("non-degenerate signs always classify");
    Ok(UnfoldingParams {
        eps1,
        eps2,
        nu_map: [
            [eps1 * k.k11.re, eps1 * k.k21.re],
            [eps1 * k.k13.re, eps1 * k.k23.re],
        ],
        b,
        c,
        d,
        d_minus_bc,
        case,
    })
}

/// Role of a bifurcation ray in the amplitude system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayRole {
    /// `nu2 = 0`, `nu1 > 0`.
    Nu2ZeroPos,
    /// `nu1 = 0`, `nu2 > 0`.
    Nu1ZeroPos,
    /// Interior equilibrium collides with the `rho1`-axis one
    /// (`nu2 = c nu1`).
    E1Collision,
    /// Heteroclinic connection; known only to linear order (same tangent
    /// as the interior Hopf ray, higher-order correction dropped).
    Heteroclinic,
    /// Hopf bifurcation of the interior equilibrium.
    InteriorHopf,
    /// Interior equilibrium collides with the `rho2`-axis one.
    E2Collision,
    /// `nu2 = 0`, `nu1 < 0`.
    Nu2ZeroNeg,
    /// `nu1 = 0`, `nu2 < 0`.
    Nu1ZeroNeg,
}

impl RayRole {
    /// Fixed labels `L1..L8` for case VIa.
    pub fn via_label(self) -> &'static str {
        match self {
            RayRole::Nu2ZeroPos => "L1",
            RayRole::Nu1ZeroPos => "L2",
            RayRole::E1Collision => "L3",
            RayRole::Heteroclinic => "L4",
            RayRole::InteriorHopf => "L5",
            RayRole::E2Collision => "L6",
            RayRole::Nu2ZeroNeg => "L7",
            RayRole::Nu1ZeroNeg => "L8",
        }
    }
}

/// Which half-line in the `(tau1, tau2)` plane a semi-line occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideCondition {
    Tau1Greater,
    Tau1Less,
    Tau2Greater,
    Tau2Less,
}

impl SideCondition {
    pub fn describe(self, pt: &DoubleHopfPoint) -> String {
        match self {
            SideCondition::Tau1Greater => format!("tau1 > {:.4}", pt.tau1),
            SideCondition::Tau1Less => format!("tau1 < {:.4}", pt.tau1),
            SideCondition::Tau2Greater => format!("tau2 > {:.4}", pt.tau2),
            SideCondition::Tau2Less => format!("tau2 < {:.4}", pt.tau2),
        }
    }
}

/// One bifurcation semi-line radiating from the double Hopf point.
#[derive(Debug, Clone, Copy)]
pub struct SemiLine {
    pub role: RayRole,
    pub label: &'static str,
    /// The critical point the line passes through.
    pub point: (f64, f64),
    /// Direction of the half-line in the `(tau1, tau2)` plane.
    pub direction: (f64, f64),
    /// Ray direction in the `(nu1, nu2)` plane.
    pub nu_direction: (f64, f64),
    pub side: SideCondition,
    /// `dtau1/dtau2` along the line, the reciprocal-slope convention of the
    /// `tau2 = (tau1 - tau1*)/s + tau2*` display.
    pub reciprocal_slope: f64,
}

/// Bifurcation semi-lines through the critical point, obtained by mapping
/// the amplitude system's critical rays through the inverse of `nu_map`.
/// The heteroclinic line L4 is emitted with the interior-Hopf slope; its
/// higher-order correction is not resolvable from the cubic truncation.
pub fn semilines(
    up: &UnfoldingParams,
    pt: &DoubleHopfPoint,
) -> Result<Vec<SemiLine>, UnfoldingError> {
    let m = up.nu_map;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < 1e-14 {
        return Err(UnfoldingError::SingularNuMap(det));
    }
    let inv = [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ];
    let to_sigma = |v: (f64, f64)| {
        (
            inv[0][0] * v.0 + inv[0][1] * v.1,
            inv[1][0] * v.0 + inv[1][1] * v.1,
        )
    };

    let mut rays: Vec<(RayRole, (f64, f64))> = vec![
        (RayRole::Nu2ZeroPos, (1.0, 0.0)),
        (RayRole::Nu1ZeroPos, (0.0, 1.0)),
        (RayRole::Nu2ZeroNeg, (-1.0, 0.0)),
        (RayRole::Nu1ZeroNeg, (0.0, -1.0)),
    ];
    // interior-equilibrium existence boundaries: collision with the
    // rho1-axis equilibrium along nu2 = c nu1 (on the half where that
    // equilibrium exists, nu1 < 0), and with the rho2-axis equilibrium
    // along b nu2 = d nu1 (on the half where -nu2/d > 0)
    rays.push((RayRole::E1Collision, (-1.0, -up.c)));
    rays.push((RayRole::E2Collision, (-up.b, -up.d)));
    // interior Hopf requires d = -1 and d - bc > 0; the heteroclinic line
    // shares its tangent
    if up.d < 0.0 && up.d_minus_bc > 0.0 {
        let hopf = (-1.0, -(up.c - 1.0) / (up.b + 1.0));
        if interior_exists(up, hopf) {
            rays.push((RayRole::Heteroclinic, hopf));
            rays.push((RayRole::InteriorHopf, hopf));
        }
    }

    let mut out = Vec::new();
    for (role, nu_dir) in rays {
        let sigma = to_sigma(nu_dir);
        let norm = (sigma.0 * sigma.0 + sigma.1 * sigma.1).sqrt();
        let direction = (sigma.0 / norm, sigma.1 / norm);
        let side = match role {
            RayRole::Nu1ZeroPos | RayRole::Nu1ZeroNeg | RayRole::Nu2ZeroPos
            | RayRole::Nu2ZeroNeg => {
                if direction.0 >= 0.0 {
                    SideCondition::Tau1Greater
                } else {
                    SideCondition::Tau1Less
                }
            }
            _ => {
                if direction.1 >= 0.0 {
                    SideCondition::Tau2Greater
                } else {
                    SideCondition::Tau2Less
                }
            }
        };
        out.push(SemiLine {
            role,
            label: if up.case == UnfoldingCase::VIa {
                role.via_label()
            } else {
                role_name(role)
            },
            point: (pt.tau1, pt.tau2),
            direction,
            nu_direction: nu_dir,
            side,
            reciprocal_slope: direction.0 / direction.1,
        });
    }
    out.sort_by_key(|l| ray_order(l.role));
    Ok(out)
}

fn role_name(role: RayRole) -> &'static str {
    match role {
        RayRole::Nu2ZeroPos => "nu2=0 (nu1>0)",
        RayRole::Nu1ZeroPos => "nu1=0 (nu2>0)",
        RayRole::E1Collision => "interior/rho1-axis collision",
        RayRole::Heteroclinic => "heteroclinic",
        RayRole::InteriorHopf => "interior Hopf",
        RayRole::E2Collision => "interior/rho2-axis collision",
        RayRole::Nu2ZeroNeg => "nu2=0 (nu1<0)",
        RayRole::Nu1ZeroNeg => "nu1=0 (nu2<0)",
    }
}

fn ray_order(role: RayRole) -> u8 {
    match role {
        RayRole::Nu2ZeroPos => 1,
        RayRole::Nu1ZeroPos => 2,
        RayRole::E1Collision => 3,
        RayRole::Heteroclinic => 4,
        RayRole::InteriorHopf => 5,
        RayRole::E2Collision => 6,
        RayRole::Nu2ZeroNeg => 7,
        RayRole::Nu1ZeroNeg => 8,
    }
}

fn interior_exists(up: &UnfoldingParams, nu: (f64, f64)) -> bool {
    let x = (-up.d * nu.0 + up.b * nu.1) / up.d_minus_bc;
    let y = (up.c * nu.0 - nu.1) / up.d_minus_bc;
    x > 0.0 && y > 0.0
}

/// The eight regions around a case-VIa double Hopf point: D2 is the sink
/// sector between L7 and L8, and the numbering walks the sectors so that
/// D_k lies counterclockwise above L_{9-k}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
    D7,
    D8,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::D1 => "D1",
            Region::D2 => "D2",
            Region::D3 => "D3",
            Region::D4 => "D4",
            Region::D5 => "D5",
            Region::D6 => "D6",
            Region::D7 => "D7",
            Region::D8 => "D8",
        }
    }

    /// Attractor expected near the critical point, where stated for this
    /// region; `None` for regions whose local dynamics carry an unstable
    /// manifold with no single attractor label.
    pub fn attractor_note(self) -> Option<&'static str> {
        match self {
            Region::D2 => Some("stable equilibrium (sink)"),
            Region::D3 => Some("stable periodic solution"),
            Region::D4 => Some("quasi-periodic solution on a 2-torus"),
            Region::D5 => Some("quasi-periodic solution on a 3-torus (thin band)"),
            Region::D6 => Some("3-torus vanished; strange attractor possible"),
            _ => None,
        }
    }

    fn above_ray(role: RayRole) -> Region {
        // walking counterclockwise, the sector entered when leaving ray k
        match role {
            RayRole::Nu2ZeroPos => Region::D8,
            RayRole::Nu1ZeroPos => Region::D7,
            RayRole::E1Collision => Region::D6,
            RayRole::Heteroclinic => Region::D5,
            RayRole::InteriorHopf => Region::D4,
            RayRole::E2Collision => Region::D3,
            RayRole::Nu2ZeroNeg => Region::D2,
            RayRole::Nu1ZeroNeg => Region::D1,
        }
    }
}

/// Region lookup by angular position between consecutive semi-lines,
/// evaluated in the `nu` plane where the rays are exact. Only case VIa has
/// the eight-region layout.
pub fn region_of(
    up: &UnfoldingParams,
    pt: &DoubleHopfPoint,
    tau1: f64,
    tau2: f64,
    chart_radius: f64,
) -> Result<Region, RegionError> {
    if up.case != UnfoldingCase::VIa {
        return Err(UnfoldingError::UnsupportedCase(up.case.label()).into());
    }
    let sigma = (tau1 - pt.tau1, tau2 - pt.tau2);
    let dist = (sigma.0 * sigma.0 + sigma.1 * sigma.1).sqrt();
    if dist > chart_radius {
        return Err(RegionError::OutOfChart {
            dist,
            radius: chart_radius,
        });
    }
    let m = up.nu_map;
    let nu = (
        m[0][0] * sigma.0 + m[0][1] * sigma.1,
        m[1][0] * sigma.0 + m[1][1] * sigma.1,
    );
    let probe = angle_2pi(nu.1.atan2(nu.0));

    let lines = semilines(up, pt)?;
    let mut rays: Vec<(f64, RayRole)> = lines
        .iter()
        .map(|l| {
            (
                angle_2pi(l.nu_direction.1.atan2(l.nu_direction.0)),
                l.role,
            )
        })
        .collect();
    // L4 shares L5's angle; keep L5 after L4 so ties resolve past the pair
    rays.sort_by(|a, b| a.0.total_cmp(&b.0).then(ray_order(a.1).cmp(&ray_order(b.1))));

    for &(angle, role) in &rays {
        let mut diff = (probe - angle).abs();
        diff = diff.min(2.0 * PI - diff);
        if diff < BOUNDARY_ANGLE_TOL {
            return Err(RegionError::OnBoundary {
                label: role.via_label(),
            });
        }
    }
    let below = rays
        .iter()
        .rev()
        .find(|(angle, _)| *angle <= probe)
        .or_else(|| rays.last())
        .expect("eight rays present");
    Ok(Region::above_ray(below.1))
}

fn angle_2pi(a: f64) -> f64 {
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}
