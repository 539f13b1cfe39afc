//! Numerical toolkit for a diffusive Leslie-Gower predator-prey system
//! with two delays: stability switching curves in the `(tau1, tau2)` plane,
//! crossing directions and root accounting, double Hopf point location,
//! classification of the local unfolding, and direct simulation of the
//! delayed reaction-diffusion system with Poincare-section attractor
//! classification.

pub mod config;
pub mod direction;
pub mod export;
pub mod hopf2;
pub mod model;
mod numeric;
pub mod par;
pub mod poincare;
pub mod quasipoly;
pub mod rootcount;
pub mod simulate;
pub mod switching;
pub mod unfolding;
