//! Model parameters, positive equilibrium, linearization matrices, and the
//! nonlinear reaction terms of the delayed diffusive Leslie-Gower
//! predator-prey system
//!
//! ```text
//! du/dt = d1 u_xx + r1 u(x,t) [1 - u(x,t-tau1)/K] - a (1-m) u(x,t) v(x,t)
//! dv/dt = d2 v_xx + r2 v(x,t) [1 - v(x,t-tau2) / (gamma (1-m) u(x,t-tau2))]
//! ```
//!
//! on `[0, l*pi]` with zero-flux (Neumann) boundaries.

use thiserror::Error;

/// Prey-lag values at or below this are treated as a division error: the
/// Leslie-Gower term is singular at zero prey density.
pub const PREY_LAG_GUARD: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("refuge rate m must lie in [0, 1), got {0}")]
    RefugeOutOfRange(f64),
}

#[derive(Debug, Error, PartialEq)]
pub enum ReactionError {
    #[error("prey lag u(t - tau2) = {0} is not positive; Leslie-Gower term undefined")]
    NonpositivePreyLag(f64),
}

/// The nine biological/diffusion constants plus the domain scale.
/// The spatial interval is `[0, l*pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Prey intrinsic growth rate.
    pub r1: f64,
    /// Predator intrinsic growth rate.
    pub r2: f64,
    /// Per-capita capture rate.
    pub a: f64,
    /// Prey carrying capacity.
    pub k: f64,
    /// Prey-quality measure in the predator carrying capacity.
    pub gamma: f64,
    /// Refuge protecting rate, in `[0, 1)`.
    pub m: f64,
    /// Domain scale; the interval is `[0, l*pi]`.
    pub l: f64,
    /// Prey diffusion coefficient.
    pub d1: f64,
    /// Predator diffusion coefficient.
    pub d2: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("r1", self.r1),
            ("r2", self.r2),
            ("a", self.a),
            ("K", self.k),
            ("gamma", self.gamma),
            ("l", self.l),
            ("d1", self.d1),
            ("d2", self.d2),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        if !(0.0..1.0).contains(&self.m) {
            return Err(ModelError::RefugeOutOfRange(self.m));
        }
        Ok(())
    }

    /// `n^2 / l^2` for spatial mode `n`, the Laplacian eigenvalue scale.
    pub fn mode_factor(&self, n: u32) -> f64 {
        let nn = n as f64;
        nn * nn / (self.l * self.l)
    }
}

/// The unique positive constant equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub u_star: f64,
    pub v_star: f64,
}

/// 2x2 matrices of the linearization at the equilibrium: diffusion `D`,
/// instantaneous `A`, tau1-delayed `B`, tau2-delayed `C`. Row-major
/// `[[row0], [row1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linearization {
    pub d: [[f64; 2]; 2],
    pub a: [[f64; 2]; 2],
    pub b: [[f64; 2]; 2],
    pub c: [[f64; 2]; 2],
}

/// Positive equilibrium `u* = K r1 / (r1 + a K gamma (1-m)^2)`,
/// `v* = gamma (1-m) u*`.
pub fn equilibrium(p: &ModelParams) -> Equilibrium {
    let one_m = 1.0 - p.m;
    let u_star = p.k * p.r1 / (p.r1 + p.a * p.k * p.gamma * one_m * one_m);
    Equilibrium {
        u_star,
        v_star: p.gamma * one_m * u_star,
    }
}

/// Linearization matrices at the equilibrium.
pub fn linearize(p: &ModelParams, e: &Equilibrium) -> Linearization {
    let one_m = 1.0 - p.m;
    Linearization {
        d: [[p.d1, 0.0], [0.0, p.d2]],
        a: [[0.0, -p.a * one_m * e.u_star], [0.0, 0.0]],
        b: [[-p.r1 * e.u_star / p.k, 0.0], [0.0, 0.0]],
        c: [[0.0, 0.0], [p.gamma * one_m * p.r2, -p.r2]],
    }
}

/// Coefficients of the zero-delay characteristic quadratic
/// `lambda^2 + A lambda + B` for mode `n`. Both are sums of positive terms.
pub fn zero_delay_quadratic(p: &ModelParams, n: u32) -> (f64, f64) {
    let e = equilibrium(p);
    let mf = p.mode_factor(n);
    let one_m = 1.0 - p.m;
    let ru = p.r1 * e.u_star / p.k;
    let a = p.d1 * mf + p.d2 * mf + ru + p.r2;
    let b = p.d1 * p.d2 * mf * mf
        + ru * p.d2 * mf
        + p.r2 * p.d1 * mf
        + p.a * one_m * one_m * p.gamma * p.r2 * e.u_star
        + ru * p.r2;
    (a, b)
}

/// True iff for every mode `0 <= n <= n_max` the zero-delay characteristic
/// quadratic has positive coefficients, i.e. all its roots have negative
/// real parts.
pub fn zero_delay_stable(p: &ModelParams, n_max: u32) -> bool {
    (0..=n_max).all(|n| {
        let (a, b) = zero_delay_quadratic(p, n);
        a > 0.0 && b > 0.0
    })
}

/// Sufficient condition `r1/K > a (1-m)` under which the positive
/// equilibrium is globally asymptotically stable at zero delays.
pub fn global_stability_hint(p: &ModelParams) -> bool {
    p.r1 / p.k > p.a * (1.0 - p.m)
}

/// Full nonlinear reaction terms (no diffusion) at one spatial point, given
/// the current densities and the lagged values they couple to.
pub fn reaction(
    p: &ModelParams,
    u_now: f64,
    v_now: f64,
    u_lag1: f64,
    u_lag2: f64,
    v_lag2: f64,
) -> Result<(f64, f64), ReactionError> {
    if u_lag2 < PREY_LAG_GUARD {
        return Err(ReactionError::NonpositivePreyLag(u_lag2));
    }
    let one_m = 1.0 - p.m;
    let du = p.r1 * u_now * (1.0 - u_lag1 / p.k) - p.a * one_m * u_now * v_now;
    let dv = p.r2 * v_now * (1.0 - v_lag2 / (p.gamma * one_m * u_lag2));
    Ok((du, dv))
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn validate_rejects_bad_params() {
        let mut p = baseline();
        p.r1 = 0.0;
        assert_eq!(
            p.validate(),
            Err(ModelError::NonPositive {
                name: "r1",
                value: 0.0
            })
        );
        let mut p = baseline();
        p.m = 1.0;
        assert_eq!(p.validate(), Err(ModelError::RefugeOutOfRange(1.0)));
        assert!(baseline().validate().is_ok());
    }

    #[test]
    fn equilibrium_matches_reference_values() {
        let e = equilibrium(&baseline());
        assert!((e.u_star - 0.4358).abs() < 5e-5);
        assert!((e.v_star - 0.3181).abs() < 5e-5);
        // exact ratio v*/u* = gamma (1-m)
        assert_eq!(e.v_star / e.u_star, 1.0 * (1.0 - 0.27));
    }

    #[test]
    fn equilibrium_without_predation_is_carrying_capacity() {
        let mut p = baseline();
        p.a = 1e-300; // a = 0 limit; keep validate() happy
        let e = equilibrium(&p);
        assert!((e.u_star - p.k).abs() < 1e-12);
        assert!((e.v_star - p.gamma * (1.0 - p.m) * p.k).abs() < 1e-12);
    }

    #[test]
    fn prey_equilibrium_increases_with_refuge() {
        // u* -> K monotonically as m increases toward 1
        let mut prev = 0.0;
        for i in 0..100 {
            let mut p = baseline();
            p.m = i as f64 / 100.0;
            let e = equilibrium(&p);
            assert!(e.u_star > prev);
            prev = e.u_star;
        }
        let mut p = baseline();
        p.m = 0.999999;
        assert!((equilibrium(&p).u_star - p.k).abs() < 1e-4);
    }

    #[test]
    fn linearization_entries() {
        let p = baseline();
        let e = equilibrium(&p);
        let lin = linearize(&p, &e);
        // B11 = -r1 u*/K, from the reference u* = 0.4358
        assert!((lin.b[0][0] - (-0.4981)).abs() < 1e-3);
        assert_eq!(lin.b[0][1], 0.0);
        assert_eq!(lin.b[1], [0.0, 0.0]);
        // A12 = -a (1-m) u* < 0 always
        assert!(lin.a[0][1] < 0.0);
        assert_eq!(lin.c[1], [p.gamma * (1.0 - p.m) * p.r2, -p.r2]);
        assert_eq!(lin.c[0], [0.0, 0.0]);
        assert_eq!(lin.d, [[0.3, 0.0], [0.0, 0.4]]);
    }

    #[test]
    fn c21_reduces_to_r2_without_refuge() {
        let mut p = baseline();
        p.m = 0.0;
        p.gamma = 1.0;
        let e = equilibrium(&p);
        assert_eq!(linearize(&p, &e).c[1][0], p.r2);
    }

    #[test]
    fn zero_delay_stable_baseline() {
        assert!(zero_delay_stable(&baseline(), 10));
    }

    #[test]
    fn zero_delay_quadratic_mode0_linear_term() {
        let p = baseline();
        let e = equilibrium(&p);
        let (a, _) = zero_delay_quadratic(&p, 0);
        assert!((a - (p.r1 * e.u_star / p.k + p.r2)).abs() < 1e-15);
        assert!(a > 0.0);
    }

    #[test]
    fn global_stability_hint_cases() {
        // baseline: 0.8/0.7 > 1.3 * 0.73
        assert!(global_stability_hint(&baseline()));
        let mut p = baseline();
        p.a = 1e-300;
        assert!(global_stability_hint(&p));
        let mut p = baseline();
        p.r1 = 1e-6;
        assert!(!global_stability_hint(&p));
    }

    #[test]
    fn reaction_vanishes_at_equilibrium() {
        let p = baseline();
        let e = equilibrium(&p);
        let (du, dv) = reaction(&p, e.u_star, e.v_star, e.u_star, e.u_star, e.v_star).unwrap();
        assert!(du.abs() < 1e-15);
        assert!(dv.abs() < 1e-15);
    }

    #[test]
    fn reaction_predator_free() {
        let p = baseline();
        let (du, dv) = reaction(&p, 0.5, 0.0, 0.45, 0.5, 0.0).unwrap();
        assert_eq!(dv, 0.0);
        assert!((du - p.r1 * 0.5 * (1.0 - 0.45 / p.k)).abs() < 1e-15);
    }

    #[test]
    fn reaction_matches_independent_evaluation() {
        // Independent re-evaluation of the right-hand side at
        // (u, v, u_lag1, u_lag2, v_lag2) = (0.5, 0.3, 0.45, 0.44, 0.32).
        let p = baseline();
        let du_expect = 0.8 * 0.5 * (1.0 - 0.45 / 0.7) - 1.3 * (1.0 - 0.27) * 0.5 * 0.3;
        let dv_expect = 1.0 * 0.3 * (1.0 - 0.32 / (1.0 * (1.0 - 0.27) * 0.44));
        let (du, dv) = reaction(&p, 0.5, 0.3, 0.45, 0.44, 0.32).unwrap();
        assert!((du - du_expect).abs() < 1e-15);
        assert!((dv - dv_expect).abs() < 1e-15);
    }

    #[test]
    fn reaction_guards_prey_lag() {
        let p = baseline();
        assert!(matches!(
            reaction(&p, 0.5, 0.3, 0.45, 0.0, 0.32),
            Err(ReactionError::NonpositivePreyLag(_))
        ));
        assert!(reaction(&p, 0.5, 0.3, 0.45, 1e-13, 0.32).is_err());
    }
}
