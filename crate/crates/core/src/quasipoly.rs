//! The mode-n characteristic quasipolynomial
//!
//! ```text
//! D_n(lambda; tau1, tau2) = P0(lambda) + P1(lambda) e^(-lambda tau1)
//!                         + P2(lambda) e^(-lambda tau2)
//!                         + P3(lambda) e^(-lambda (tau1+tau2))
//! ```
//!
//! together with the frequency-domain quantities that drive the stability
//! switching curves: the degree-8 indicator polynomial `F_n` whose
//! nonpositive set is the crossing set, and the angle data
//! (theta_1, theta_2, phi_1, phi_2) entering the tau formulas.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::model::{equilibrium, ModelParams};

#[derive(Debug, Error, PartialEq)]
pub enum AngleError {
    /// `A^2 + B^2 = 0`: the argument phi is undefined at this frequency.
    #[error("degenerate angle at omega = {omega}: A^2 + B^2 vanishes")]
    Degenerate { omega: f64 },
    /// The cosine quotient left `[-1, 1]` by more than rounding slack, i.e.
    /// the frequency is outside the crossing set.
    #[error("omega = {omega} lies outside the crossing set (cos theta = {cos_theta})")]
    OutsideCrossingSet { omega: f64, cos_theta: f64 },
}

/// Real-coefficient polynomial, coefficients stored low-to-high.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        let mut d = 0;
        for (i, c) in self.0.iter().enumerate() {
            if *c != 0.0 {
                d = i;
            }
        }
        d
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.0.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn deriv(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect(),
        )
    }
}

/// The four polynomials of `D_n` for one spatial mode.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiPolynomial {
    n: u32,
    p: [Poly; 4],
}

/// Magnitude differences and the complex combinations behind the angle
/// definitions, all evaluated at `lambda = i omega`:
/// `md1 = |P0|^2 + |P1|^2 - |P2|^2 - |P3|^2`,
/// `md2 = |P0|^2 - |P1|^2 + |P2|^2 - |P3|^2`,
/// `a1 + i b1 = P2 conj(P3) - P0 conj(P1)`,
/// `a2 + i b2 = P1 conj(P3) - P0 conj(P2)`.
#[derive(Debug, Clone, Copy)]
pub struct Auxiliary {
    pub md1: f64,
    pub md2: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

/// Angle data at one crossing-set frequency.
#[derive(Debug, Clone, Copy)]
pub struct AngleData {
    pub omega: f64,
    pub f: f64,
    /// In `[0, pi]`.
    pub theta1: f64,
    /// In `[0, pi]`.
    pub theta2: f64,
    /// Principal argument in `(-pi, pi]`.
    pub phi1: f64,
    /// Principal argument in `(-pi, pi]`.
    pub phi2: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

/// Build `D_n` for the given parameters and spatial mode.
pub fn build(p: &ModelParams, n: u32) -> QuasiPolynomial {
    let e = equilibrium(p);
    let mf = p.mode_factor(n);
    let one_m = 1.0 - p.m;
    let ru = p.r1 * e.u_star / p.k;
    let q = QuasiPolynomial {
        n,
        p: [
            // (lambda + d1 n^2/l^2)(lambda + d2 n^2/l^2)
            Poly::new(vec![p.d1 * mf * p.d2 * mf, (p.d1 + p.d2) * mf, 1.0]),
            // (r1 u*/K) (lambda + d2 n^2/l^2)
            Poly::new(vec![ru * p.d2 * mf, ru]),
            // r2 (lambda + d1 n^2/l^2) + a (1-m)^2 gamma r2 u*
            Poly::new(vec![
                p.r2 * p.d1 * mf + p.a * one_m * one_m * p.gamma * p.r2 * e.u_star,
                p.r2,
            ]),
            // (r1 u*/K) r2
            Poly::new(vec![ru * p.r2]),
        ],
    };
    debug_assert!(q.assumptions_hold());
    q
}

impl QuasiPolynomial {
    /// Assemble from explicit polynomials (mainly for tests and synthetic
    /// quasipolynomials with the same four-term structure).
    pub fn from_polys(n: u32, p: [Poly; 4]) -> Self {
        QuasiPolynomial { n, p }
    }

    pub fn mode(&self) -> u32 {
        self.n
    }

    pub fn polys(&self) -> &[Poly; 4] {
        &self.p
    }

    /// Degree condition and nonvanishing sum at zero (assumptions (i)/(ii)
    /// behind the switching-curve method). Coprimeness is assumed, not
    /// checked.
    pub fn assumptions_hold(&self) -> bool {
        let d0 = self.p[0].degree();
        let deg_ok = self.p[1..].iter().all(|q| q.degree() <= d0);
        let sum0: f64 = self.p.iter().map(|q| q.coeffs()[0]).sum();
        deg_ok && sum0 != 0.0
    }

    /// Evaluate `D_n(lambda; tau1, tau2)`.
    pub fn eval_d(&self, lambda: Complex64, tau1: f64, tau2: f64) -> Complex64 {
        let e1 = (-lambda * tau1).exp();
        let e2 = (-lambda * tau2).exp();
        self.p[0].eval(lambda)
            + self.p[1].eval(lambda) * e1
            + self.p[2].eval(lambda) * e2
            + self.p[3].eval(lambda) * e1 * e2
    }

    /// Residual `|D_n(i omega; tau1, tau2)|`.
    pub fn residual(&self, omega: f64, tau1: f64, tau2: f64) -> f64 {
        self.eval_d(Complex64::new(0.0, omega), tau1, tau2).norm()
    }

    /// Complex partial derivatives at `lambda = i omega`:
    /// `(dD/dlambda, dD/dtau1, dD/dtau2)`.
    pub fn d_partials(
        &self,
        omega: f64,
        tau1: f64,
        tau2: f64,
    ) -> (Complex64, Complex64, Complex64) {
        let iw = Complex64::new(0.0, omega);
        let e1 = (-iw * tau1).exp();
        let e2 = (-iw * tau2).exp();
        let (p1, p2, p3) = (
            self.p[1].eval(iw),
            self.p[2].eval(iw),
            self.p[3].eval(iw),
        );
        let d_lambda = self.p[0].deriv().eval(iw)
            + (self.p[1].deriv().eval(iw) - p1 * tau1) * e1
            + (self.p[2].deriv().eval(iw) - p2 * tau2) * e2
            + (self.p[3].deriv().eval(iw) - p3 * (tau1 + tau2)) * e1 * e2;
        let d_tau1 = -iw * (p1 * e1 + p3 * e1 * e2);
        let d_tau2 = -iw * (p2 * e2 + p3 * e1 * e2);
        (d_lambda, d_tau1, d_tau2)
    }

    pub fn auxiliary(&self, omega: f64) -> Auxiliary {
        let iw = Complex64::new(0.0, omega);
        let p0 = self.p[0].eval(iw);
        let p1 = self.p[1].eval(iw);
        let p2 = self.p[2].eval(iw);
        let p3 = self.p[3].eval(iw);
        let (n0, n1, n2, n3) = (p0.norm_sqr(), p1.norm_sqr(), p2.norm_sqr(), p3.norm_sqr());
        let c1 = p2 * p3.conj() - p0 * p1.conj();
        let c2 = p1 * p3.conj() - p0 * p2.conj();
        Auxiliary {
            md1: n0 + n1 - n2 - n3,
            md2: n0 - n1 + n2 - n3,
            a1: c1.re,
            b1: c1.im,
            a2: c2.re,
            b2: c2.im,
        }
    }

    /// The crossing-set indicator
    /// `F_n(omega) = md1^2 - 4 (A1^2 + B1^2)`, a degree-8 polynomial in
    /// omega. `F_n(omega) <= 0` iff omega belongs to the crossing set.
    pub fn f_value(&self, omega: f64) -> f64 {
        let aux = self.auxiliary(omega);
        aux.md1 * aux.md1 - 4.0 * (aux.a1 * aux.a1 + aux.b1 * aux.b1)
    }

    /// `F_n` computed through the tau2-side quantities,
    /// `md2^2 - 4 (A2^2 + B2^2)`. Algebraically identical to [`f_value`];
    /// kept as the second route for the equivalence property of the two
    /// crossing-set conditions.
    ///
    /// [`f_value`]: QuasiPolynomial::f_value
    pub fn f_value_alt(&self, omega: f64) -> f64 {
        let aux = self.auxiliary(omega);
        aux.md2 * aux.md2 - 4.0 * (aux.a2 * aux.a2 + aux.b2 * aux.b2)
    }

    /// Angle data at a crossing-set frequency. Fails when the phi arguments
    /// are undefined (`A^2 + B^2 = 0`) or when omega is outside the
    /// crossing set (cosine quotient beyond `[-1, 1]` past rounding slack).
    pub fn angles(&self, omega: f64) -> Result<AngleData, AngleError> {
        // slack for cosine quotients at interval endpoints, where F = 0 up
        // to root-refinement error
        const COS_SLACK: f64 = 1e-9;
        let aux = self.auxiliary(omega);
        let r1 = (aux.a1 * aux.a1 + aux.b1 * aux.b1).sqrt();
        let r2 = (aux.a2 * aux.a2 + aux.b2 * aux.b2).sqrt();
        if r1 == 0.0 || r2 == 0.0 {
            return Err(AngleError::Degenerate { omega });
        }
        let q1 = aux.md1 / (2.0 * r1);
        let q2 = aux.md2 / (2.0 * r2);
        for q in [q1, q2] {
            if q.abs() > 1.0 + COS_SLACK {
                return Err(AngleError::OutsideCrossingSet {
                    omega,
                    cos_theta: q,
                });
            }
        }
        let mut phi1 = aux.b1.atan2(aux.a1);
        let mut phi2 = aux.b2.atan2(aux.a2);
        // principal value in (-pi, pi]
        if phi1 <= -PI {
            phi1 += 2.0 * PI;
        }
        if phi2 <= -PI {
            phi2 += 2.0 * PI;
        }
        Ok(AngleData {
            omega,
            f: aux.md1 * aux.md1 - 4.0 * r1 * r1,
            theta1: q1.clamp(-1.0, 1.0).acos(),
            theta2: q2.clamp(-1.0, 1.0).acos(),
            phi1,
            phi2,
            a1: aux.a1,
            b1: aux.b1,
            a2: aux.a2,
            b2: aux.b2,
        })
    }
}
