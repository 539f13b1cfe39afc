//! Direct simulation of the delayed reaction-diffusion system on
//! `[0, l*pi]` with zero-flux boundaries: method of lines with second-order
//! central differences (ghost-node Neumann closure), classical RK4 in time,
//! and two delay history buffers read through cubic Hermite interpolation.
//! Every RK4 stage re-samples the lagged fields at the stage time, which
//! keeps the scheme's order across the delayed terms.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{equilibrium, reaction, Equilibrium, ModelParams, ReactionError};
use crate::numeric::{hermite, hermite_deriv};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("solution lost positivity at t = {t} (node {node})")]
    PositivityLoss { t: f64, node: usize },
    #[error("non-finite value at t = {t} (node {node})")]
    NonFinite { t: f64, node: usize },
    #[error("prey lag became singular at t = {t}: {source}")]
    PreyLagSingular { t: f64, source: ReactionError },
}

/// Initial function on `[-max(tau1, tau2), 0]`.
#[derive(Debug, Clone)]
pub enum History {
    /// Equilibrium plus a constant offset, flat in space and time.
    Constant { du: f64, dv: f64 },
    /// Equilibrium plus `amplitude * cos(mode * x / l)` on both fields,
    /// flat in time. Mode 0 is a spatially flat offset.
    PerturbedMode { amplitude: f64, mode: u32 },
    /// Equilibrium plus independent per-node offsets drawn uniformly from
    /// `[-amplitude, amplitude]`, flat in time. Deterministic in the seed.
    Random { amplitude: f64, seed: u64 },
    /// Explicit initial fields with constant time slopes:
    /// `u(x_i, s) = u0[i] + s * us[i]`. A slope matching the right-hand
    /// side at `t = 0` gives a C^1-compatible warm start.
    Linear {
        u0: Vec<f64>,
        v0: Vec<f64>,
        us: Vec<f64>,
        vs: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    pub tau1: f64,
    pub tau2: f64,
    /// Number of spatial grid nodes.
    pub grid_points: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Recording starts after this time.
    pub t_transient: f64,
    /// Record every this many steps.
    pub output_every: usize,
    pub history: History,
    /// Optionally store full-field snapshots every this many steps.
    pub snapshot_every: Option<usize>,
}

impl SimConfig {
    pub fn new(params: ModelParams, tau1: f64, tau2: f64) -> Self {
        let grid_points = 64;
        let dt = Self::suggested_dt(&params, grid_points, tau1, tau2);
        SimConfig {
            params,
            tau1,
            tau2,
            grid_points,
            dt,
            t_end: 6000.0,
            t_transient: 2000.0,
            output_every: 10,
            history: History::Constant { du: 0.01, dv: 0.01 },
            snapshot_every: None,
        }
    }

    pub fn grid_spacing(&self) -> f64 {
        self.params.l * std::f64::consts::PI / (self.grid_points - 1) as f64
    }

    /// Largest step obeying both the explicit-diffusion bound
    /// `0.9 dx^2 / (2 max(d1, d2))` and `tau/10` for each positive delay.
    pub fn suggested_dt(p: &ModelParams, grid_points: usize, tau1: f64, tau2: f64) -> f64 {
        let dx = p.l * std::f64::consts::PI / (grid_points - 1) as f64;
        let mut dt = 0.9 * dx * dx / (2.0 * p.d1.max(p.d2));
        for tau in [tau1, tau2] {
            if tau > 0.0 {
                dt = dt.min(0.099 * tau);
            }
        }
        dt
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.params
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        if self.tau1 < 0.0 || self.tau2 < 0.0 {
            return Err(SimError::Config("delays must be non-negative".into()));
        }
        if self.grid_points < 3 {
            return Err(SimError::Config("grid_points must be at least 3".into()));
        }
        if !(self.dt > 0.0) {
            return Err(SimError::Config("dt must be positive".into()));
        }
        for tau in [self.tau1, self.tau2] {
            if tau > 0.0 && self.dt >= tau / 10.0 {
                return Err(SimError::Config(format!(
                    "dt = {} violates dt < tau/10 for tau = {}",
                    self.dt, tau
                )));
            }
        }
        let dx = self.grid_spacing();
        let bound = 0.9 * dx * dx / (2.0 * self.params.d1.max(self.params.d2));
        if self.dt > bound {
            return Err(SimError::Config(format!(
                "dt = {} exceeds the diffusion stability bound {bound}",
                self.dt
            )));
        }
        if self.t_transient >= self.t_end {
            return Err(SimError::Config("t_transient must be below t_end".into()));
        }
        if self.output_every == 0 {
            return Err(SimError::Config("output_every must be positive".into()));
        }
        Ok(())
    }
}

/// Grid fields and clock.
#[derive(Debug, Clone)]
pub struct SimState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

struct HistoryNode {
    t: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    du: Vec<f64>,
    dv: Vec<f64>,
}

/// Initial function evaluated as `base + s * slope`.
struct InitialFunction {
    u0: Vec<f64>,
    v0: Vec<f64>,
    us: Vec<f64>,
    vs: Vec<f64>,
}

impl InitialFunction {
    fn build(cfg: &SimConfig, e: &Equilibrium) -> Result<InitialFunction, SimError> {
        let m = cfg.grid_points;
        let zeros = vec![0.0; m];
        match &cfg.history {
            History::Constant { du, dv } => Ok(InitialFunction {
                u0: vec![e.u_star + du; m],
                v0: vec![e.v_star + dv; m],
                us: zeros.clone(),
                vs: zeros,
            }),
            History::PerturbedMode { amplitude, mode } => {
                let dx = cfg.grid_spacing();
                let profile: Vec<f64> = (0..m)
                    .map(|i| (*mode as f64 * i as f64 * dx / cfg.params.l).cos())
                    .collect();
                Ok(InitialFunction {
                    u0: profile.iter().map(|p| e.u_star + amplitude * p).collect(),
                    v0: profile.iter().map(|p| e.v_star + amplitude * p).collect(),
                    us: zeros.clone(),
                    vs: zeros,
                })
            }
            History::Random { amplitude, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut draw = |base: f64| -> Vec<f64> {
                    (0..m)
                        .map(|_| base + rng.gen_range(-*amplitude..=*amplitude))
                        .collect()
                };
                Ok(InitialFunction {
                    u0: draw(e.u_star),
                    v0: draw(e.v_star),
                    us: zeros.clone(),
                    vs: zeros,
                })
            }
            History::Linear { u0, v0, us, vs } => {
                if u0.len() != m || v0.len() != m || us.len() != m || vs.len() != m {
                    return Err(SimError::Config(
                        "history field lengths must match grid_points".into(),
                    ));
                }
                Ok(InitialFunction {
                    u0: u0.clone(),
                    v0: v0.clone(),
                    us: us.clone(),
                    vs: vs.clone(),
                })
            }
        }
    }
}

/// The integrator: owns the state, the ring buffer of past steps, and
/// scratch storage.
pub struct Simulator {
    cfg: SimConfig,
    e: Equilibrium,
    dx: f64,
    step_index: u64,
    state: SimState,
    initial: InitialFunction,
    ring: VecDeque<HistoryNode>,
    ring_capacity: usize,
    ws: Workspace,
}

struct Workspace {
    ulag1: Vec<f64>,
    ulag2: Vec<f64>,
    vlag2: Vec<f64>,
    stage_u: Vec<f64>,
    stage_v: Vec<f64>,
    ku: [Vec<f64>; 4],
    kv: [Vec<f64>; 4],
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Simulator, SimError> {
        cfg.validate()?;
        let e = equilibrium(&cfg.params);
        let initial = InitialFunction::build(&cfg, &e)?;
        let m = cfg.grid_points;
        let tau_max = cfg.tau1.max(cfg.tau2);
        let ring_capacity = (tau_max / cfg.dt).ceil() as usize + 3;
        let state = SimState {
            u: initial.u0.clone(),
            v: initial.v0.clone(),
            t: 0.0,
        };
        let ws = Workspace {
            ulag1: vec![0.0; m],
            ulag2: vec![0.0; m],
            vlag2: vec![0.0; m],
            stage_u: vec![0.0; m],
            stage_v: vec![0.0; m],
            ku: std::array::from_fn(|_| vec![0.0; m]),
            kv: std::array::from_fn(|_| vec![0.0; m]),
        };
        let mut sim = Simulator {
            cfg,
            e,
            dx: 0.0,
            step_index: 0,
            state,
            initial,
            ring: VecDeque::new(),
            ring_capacity,
            ws,
        };
        sim.dx = sim.cfg.grid_spacing();
        // seed the ring with the t = 0 node and its derivative
        let mut du = vec![0.0; m];
        let mut dv = vec![0.0; m];
        sim.eval_rhs(0.0, None, &mut du, &mut dv)?;
        sim.ring.push_back(HistoryNode {
            t: 0.0,
            u: sim.state.u.clone(),
            v: sim.state.v.clone(),
            du,
            dv,
        });
        Ok(sim)
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn equilibrium_point(&self) -> Equilibrium {
        self.e
    }

    /// Field time derivative of node 0 at the current time.
    pub fn current_derivative(&self) -> (f64, f64) {
        let node = self.ring.back().expect("ring holds the current node");
        (node.du[0], node.dv[0])
    }

    /// Interpolated `u(0, time)` and its time derivative from the history.
    pub fn sample_node0(&self, time: f64) -> (f64, f64) {
        if time <= 0.0 {
            return (
                self.initial.u0[0] + time * self.initial.us[0],
                self.initial.us[0],
            );
        }
        let (n0, n1) = self.bracket(time);
        let value = hermite(time, n0.t, n1.t, n0.u[0], n1.u[0], n0.du[0], n1.du[0]);
        let deriv = hermite_deriv(time, n0.t, n1.t, n0.u[0], n1.u[0], n0.du[0], n1.du[0]);
        (value, deriv)
    }

    fn bracket(&self, time: f64) -> (&HistoryNode, &HistoryNode) {
        let front_t = self.ring.front().expect("non-empty ring").t;
        let idx = ((time - front_t) / self.cfg.dt).floor() as isize;
        let idx = idx.clamp(0, self.ring.len() as isize - 2) as usize;
        (&self.ring[idx], &self.ring[idx + 1])
    }

    /// Fill lagged fields at `time` by cubic Hermite interpolation in the
    /// ring buffer (or the initial function for `time <= 0`).
    fn fill_lag(
        ring: &VecDeque<HistoryNode>,
        initial: &InitialFunction,
        dt: f64,
        time: f64,
        out_u: Option<&mut [f64]>,
        out_v: Option<&mut [f64]>,
    ) {
        if time <= 0.0 {
            if let Some(out) = out_u {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = initial.u0[i] + time * initial.us[i];
                }
            }
            if let Some(out) = out_v {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = initial.v0[i] + time * initial.vs[i];
                }
            }
            return;
        }
        let front_t = ring.front().expect("non-empty ring").t;
        let idx = ((time - front_t) / dt).floor() as isize;
        let idx = idx.clamp(0, ring.len() as isize - 2) as usize;
        let (n0, n1) = (&ring[idx], &ring[idx + 1]);
        if let Some(out) = out_u {
            for (i, o) in out.iter_mut().enumerate() {
                *o = hermite(time, n0.t, n1.t, n0.u[i], n1.u[i], n0.du[i], n1.du[i]);
            }
        }
        if let Some(out) = out_v {
            for (i, o) in out.iter_mut().enumerate() {
                *o = hermite(time, n0.t, n1.t, n0.v[i], n1.v[i], n0.dv[i], n1.dv[i]);
            }
        }
    }

    /// Right-hand side at stage time `t`, for the stage fields (or the
    /// current state when `stage` is `None`).
    fn eval_rhs(
        &mut self,
        t: f64,
        stage: Option<(usize, f64)>,
        out_du: &mut [f64],
        out_dv: &mut [f64],
    ) -> Result<(), SimError> {
        let m = self.cfg.grid_points;
        // assemble stage fields
        if let Some((k, coef)) = stage {
            for i in 0..m {
                self.ws.stage_u[i] = self.state.u[i] + coef * self.ws.ku[k][i];
                self.ws.stage_v[i] = self.state.v[i] + coef * self.ws.kv[k][i];
            }
        } else {
            self.ws.stage_u.copy_from_slice(&self.state.u);
            self.ws.stage_v.copy_from_slice(&self.state.v);
        }

        let (tau1, tau2) = (self.cfg.tau1, self.cfg.tau2);
        if tau1 > 0.0 {
            Self::fill_lag(
                &self.ring,
                &self.initial,
                self.cfg.dt,
                t - tau1,
                Some(&mut self.ws.ulag1),
                None,
            );
        } else {
            self.ws.ulag1.copy_from_slice(&self.ws.stage_u);
        }
        if tau2 > 0.0 {
            Self::fill_lag(
                &self.ring,
                &self.initial,
                self.cfg.dt,
                t - tau2,
                Some(&mut self.ws.ulag2),
                Some(&mut self.ws.vlag2),
            );
        } else {
            self.ws.ulag2.copy_from_slice(&self.ws.stage_u);
            self.ws.vlag2.copy_from_slice(&self.ws.stage_v);
        }

        let p = &self.cfg.params;
        let inv_dx2 = 1.0 / (self.dx * self.dx);
        let u = &self.ws.stage_u;
        let v = &self.ws.stage_v;
        for i in 0..m {
            // ghost-node Neumann closure at both ends
            let (u_lo, u_hi, v_lo, v_hi) = if i == 0 {
                (u[1], u[1], v[1], v[1])
            } else if i == m - 1 {
                (u[m - 2], u[m - 2], v[m - 2], v[m - 2])
            } else {
                (u[i - 1], u[i + 1], v[i - 1], v[i + 1])
            };
            let lap_u = (u_lo - 2.0 * u[i] + u_hi) * inv_dx2;
            let lap_v = (v_lo - 2.0 * v[i] + v_hi) * inv_dx2;
            let (ru, rv) = reaction(
                p,
                u[i],
                v[i],
                self.ws.ulag1[i],
                self.ws.ulag2[i],
                self.ws.vlag2[i],
            )
            .map_err(|source| SimError::PreyLagSingular { t, source })?;
            out_du[i] = p.d1 * lap_u + ru;
            out_dv[i] = p.d2 * lap_v + rv;
        }
        Ok(())
    }

    /// Advance one RK4 step. Each stage re-samples the lagged fields at its
    /// own time.
    pub fn step(&mut self) -> Result<(), SimError> {
        let m = self.cfg.grid_points;
        let dt = self.cfg.dt;
        let t = self.state.t;

        // k1 is the stored derivative of the current node
        {
            let node = self.ring.back().expect("ring holds the current node");
            debug_assert!((node.t - t).abs() < 1e-9);
            let (du, dv) = (node.du.clone(), node.dv.clone());
            self.ws.ku[0].copy_from_slice(&du);
            self.ws.kv[0].copy_from_slice(&dv);
        }
        let (mut du_new, mut dv_new) = (vec![0.0; m], vec![0.0; m]);
        // k2
        self.stage_into(1, 0, 0.5 * dt, t + 0.5 * dt)?;
        // k3
        self.stage_into(2, 1, 0.5 * dt, t + 0.5 * dt)?;
        // k4
        self.stage_into(3, 2, dt, t + dt)?;

        self.step_index += 1;
        let t_new = self.step_index as f64 * dt;
        for i in 0..m {
            self.state.u[i] += dt / 6.0
                * (self.ws.ku[0][i]
                    + 2.0 * self.ws.ku[1][i]
                    + 2.0 * self.ws.ku[2][i]
                    + self.ws.ku[3][i]);
            self.state.v[i] += dt / 6.0
                * (self.ws.kv[0][i]
                    + 2.0 * self.ws.kv[1][i]
                    + 2.0 * self.ws.kv[2][i]
                    + self.ws.kv[3][i]);
        }
        self.state.t = t_new;

        for i in 0..m {
            let (u, v) = (self.state.u[i], self.state.v[i]);
            if !u.is_finite() || !v.is_finite() {
                return Err(SimError::NonFinite { t: t_new, node: i });
            }
            if u <= 0.0 || v <= 0.0 {
                return Err(SimError::PositivityLoss { t: t_new, node: i });
            }
        }

        self.eval_rhs(t_new, None, &mut du_new, &mut dv_new)?;
        self.ring.push_back(HistoryNode {
            t: t_new,
            u: self.state.u.clone(),
            v: self.state.v.clone(),
            du: du_new,
            dv: dv_new,
        });
        while self.ring.len() > self.ring_capacity {
            self.ring.pop_front();
        }
        Ok(())
    }

    fn stage_into(
        &mut self,
        out_k: usize,
        from_k: usize,
        coef: f64,
        t_stage: f64,
    ) -> Result<(), SimError> {
        let mut du = std::mem::take(&mut self.ws.ku[out_k]);
        let mut dv = std::mem::take(&mut self.ws.kv[out_k]);
        let result = self.eval_rhs(t_stage, Some((from_k, coef)), &mut du, &mut dv);
        self.ws.ku[out_k] = du;
        self.ws.kv[out_k] = dv;
        result
    }

    /// Interpolated lag channel `u(0, t - tau1)` and its derivative, for
    /// trajectory recording.
    fn lag_channel(&self) -> (f64, f64) {
        if self.cfg.tau1 == 0.0 {
            let (du, _) = self.current_derivative();
            return (self.state.u[0], du);
        }
        self.sample_node0(self.state.t - self.cfg.tau1)
    }
}

/// Recorded trajectory: node-0 channels after the transient, the lag
/// channel `u(0, t - tau1)`, and optional full-field snapshots.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tau1: f64,
    pub tau2: f64,
    pub equilibrium: Equilibrium,
    pub t: Vec<f64>,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
    pub u0_lag: Vec<f64>,
    pub du0: Vec<f64>,
    pub dv0: Vec<f64>,
    pub du0_lag: Vec<f64>,
    pub snapshots: Vec<(f64, Vec<f64>, Vec<f64>)>,
    pub final_state: SimState,
}

/// Integrate the full horizon and record node-0 channels at the output
/// stride once past the transient.
pub fn run(cfg: SimConfig) -> Result<Trajectory, SimError> {
    let mut sim = Simulator::new(cfg)?;
    let cfg = sim.cfg.clone();
    let n_steps = (cfg.t_end / cfg.dt).round() as u64;
    let mut traj = Trajectory {
        tau1: cfg.tau1,
        tau2: cfg.tau2,
        equilibrium: sim.e,
        t: Vec::new(),
        u0: Vec::new(),
        v0: Vec::new(),
        u0_lag: Vec::new(),
        du0: Vec::new(),
        dv0: Vec::new(),
        du0_lag: Vec::new(),
        snapshots: Vec::new(),
        final_state: sim.state().clone(),
    };
    for step in 0..=n_steps {
        if step > 0 {
            sim.step()?;
        }
        let t = sim.state().t;
        if t >= cfg.t_transient && step % cfg.output_every as u64 == 0 {
            let (du0, dv0) = sim.current_derivative();
            let (u0_lag, du0_lag) = sim.lag_channel();
            traj.t.push(t);
            traj.u0.push(sim.state().u[0]);
            traj.v0.push(sim.state().v[0]);
            traj.u0_lag.push(u0_lag);
            traj.du0.push(du0);
            traj.dv0.push(dv0);
            traj.du0_lag.push(du0_lag);
        }
        if let Some(every) = cfg.snapshot_every {
            if step % every as u64 == 0 {
                traj.snapshots
                    .push((t, sim.state().u.clone(), sim.state().v.clone()));
            }
        }
    }
    traj.final_state = sim.state().clone();
    Ok(traj)
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

    fn quick_cfg(tau1: f64, tau2: f64) -> SimConfig {
        let p = baseline();
        let mut cfg = SimConfig::new(p, tau1, tau2);
        cfg.grid_points = 24;
        cfg.dt = SimConfig::suggested_dt(&p, 24, tau1, tau2);
        cfg
    }

    #[test]
    fn validate_rejects_bad_steps() {
        let mut cfg = quick_cfg(1.0, 0.5);
        cfg.dt = 0.06; // tau2/10 = 0.05
        assert!(matches!(cfg.validate(), Err(SimError::Config(_))));
        let mut cfg = quick_cfg(1.0, 0.5);
        cfg.dt = 10.0;
        assert!(cfg.validate().is_err());
        let mut cfg = quick_cfg(1.0, 0.5);
        cfg.t_transient = cfg.t_end;
        assert!(cfg.validate().is_err());
        assert!(quick_cfg(1.0, 0.5).validate().is_ok());
    }

    #[test]
    fn equilibrium_is_preserved_to_roundoff() {
        let mut cfg = quick_cfg(1.5, 0.7);
        cfg.history = History::Constant { du: 0.0, dv: 0.0 };
        let e = equilibrium(&cfg.params);
        let mut sim = Simulator::new(cfg).unwrap();
        for _ in 0..10_000 {
            sim.step().unwrap();
        }
        for i in 0..sim.config().grid_points {
            assert!((sim.state().u[i] - e.u_star).abs() < 1e-12);
            assert!((sim.state().v[i] - e.v_star).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_data_stays_homogeneous() {
        let mut cfg = quick_cfg(1.74, 0.67);
        cfg.history = History::Constant { du: 0.01, dv: 0.01 };
        let mut sim = Simulator::new(cfg).unwrap();
        for _ in 0..2_000 {
            sim.step().unwrap();
        }
        let (u0, v0) = (sim.state().u[0], sim.state().v[0]);
        for i in 0..sim.config().grid_points {
            assert!((sim.state().u[i] - u0).abs() < 1e-12);
            assert!((sim.state().v[i] - v0).abs() < 1e-12);
        }
    }

    /// Delays in the oscillatory regime (so discretization error stays
    /// above roundoff over the horizon), chosen commensurate with every
    /// test step: the solution's derivative jumps propagate from t = 0 to
    /// t = k1 tau1 + k2 tau2, all multiples of gcd = 0.72 here, so they
    /// land on step boundaries and the measured order is the scheme's own.
    /// Incommensurate delays add the usual breaking-point interpolation
    /// error, O(h^2)-localized at the jump-straddling reads.
    const ALIGNED_DELAYS: (f64, f64) = (3.6, 1.44);

    fn final_state_at(m: usize, dt: f64, t_end: f64) -> SimState {
        let p = baseline();
        let mut cfg = SimConfig::new(p, ALIGNED_DELAYS.0, ALIGNED_DELAYS.1);
        cfg.grid_points = m;
        cfg.dt = dt;
        cfg.t_end = t_end;
        cfg.t_transient = 0.0;
        cfg.output_every = usize::MAX / 2;
        cfg.history = History::PerturbedMode {
            amplitude: 0.01,
            mode: 1,
        };
        run(cfg).unwrap().final_state
    }

    #[test]
    fn temporal_self_convergence_order() {
        // halving dt at fixed grid: observed order should be ~4 (>= 3.5)
        let m = 24;
        let coarse = final_state_at(m, 0.02, 50.0);
        let mid = final_state_at(m, 0.01, 50.0);
        let fine = final_state_at(m, 0.005, 50.0);
        let diff = |a: &SimState, b: &SimState| -> f64 {
            a.u.iter()
                .zip(&b.u)
                .chain(a.v.iter().zip(&b.v))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        let e1 = diff(&coarse, &mid);
        let e2 = diff(&mid, &fine);
        let order = (e1 / e2).log2();
        assert!(order >= 3.5, "temporal order {order} (e1={e1:e}, e2={e2:e})");
    }

    #[test]
    fn spatial_self_convergence_order() {
        // doubling the grid at fixed (small) dt: observed order ~2 (>= 1.9)
        let dt = 0.002;
        let coarse = final_state_at(17, dt, 50.0);
        let mid = final_state_at(33, dt, 50.0);
        let fine = final_state_at(65, dt, 50.0);
        // compare on common nodes (every 2nd / 4th node of the finer grids)
        let diff = |a: &SimState, b: &SimState, stride: usize| -> f64 {
            let mut err = 0.0f64;
            for i in 0..a.u.len() {
                err = err.max((a.u[i] - b.u[i * stride]).abs());
                err = err.max((a.v[i] - b.v[i * stride]).abs());
            }
            err
        };
        let e1 = diff(&coarse, &mid, 2);
        let e2 = diff(&mid, &fine, 2);
        let order = (e1 / e2).log2();
        assert!(order >= 1.9, "spatial order {order} (e1={e1:e}, e2={e2:e})");
    }

    #[test]
    fn random_history_is_deterministic_in_seed() {
        let p = baseline();
        let make = |seed: u64| {
            let mut cfg = quick_cfg(1.74, 0.67);
            cfg.params = p;
            cfg.history = History::Random {
                amplitude: 0.005,
                seed,
            };
            cfg.t_end = 5.0;
            cfg.t_transient = 0.0;
            run(cfg).unwrap()
        };
        let a = make(7);
        let b = make(7);
        let c = make(8);
        assert_eq!(a.u0, b.u0);
        assert!(a.u0 != c.u0);
    }

    #[test]
    fn stable_point_converges_to_equilibrium() {
        let p = baseline();
        let mut cfg = quick_cfg(1.74, 0.67);
        cfg.t_end = 800.0;
        cfg.t_transient = 700.0;
        let traj = run(cfg).unwrap();
        let e = equilibrium(&p);
        let last_u = *traj.u0.last().unwrap();
        let last_v = *traj.v0.last().unwrap();
        assert!((last_u - e.u_star).abs() < 1e-3, "u0 = {last_u}");
        assert!((last_v - e.v_star).abs() < 1e-3, "v0 = {last_v}");
        // reference display values
        assert!((last_u - 0.4358).abs() < 1e-3);
        assert!((last_v - 0.3181).abs() < 1e-3);
    }

    #[test]
    fn zero_delay_case_converges_globally() {
        // r1/K > a(1-m): equilibrium attracts from several starts
        let p = baseline();
        for (du, dv) in [(0.1, -0.05), (-0.2, 0.1), (0.2, 0.2)] {
            let mut cfg = SimConfig::new(p, 0.0, 0.0);
            cfg.grid_points = 24;
            cfg.dt = SimConfig::suggested_dt(&p, 24, 0.0, 0.0);
            cfg.t_end = 400.0;
            cfg.t_transient = 0.0;
            cfg.history = History::Constant { du, dv };
            let traj = run(cfg).unwrap();
            let e = equilibrium(&p);
            assert!((traj.u0.last().unwrap() - e.u_star).abs() < 1e-4);
            assert!((traj.v0.last().unwrap() - e.v_star).abs() < 1e-4);
        }
    }

    #[test]
    fn lag_channel_matches_delayed_value() {
        // u0_lag(t) recorded at time t equals u0 recorded at t - tau1
        let mut cfg = quick_cfg(1.74, 0.67);
        cfg.t_end = 40.0;
        cfg.t_transient = 10.0;
        cfg.output_every = 1;
        let traj = run(cfg).unwrap();
        let dt_out = traj.t[1] - traj.t[0];
        let lag_steps = (traj.tau1 / dt_out).round() as usize;
        // tau1 = 1.74 is an exact multiple of the output stride only if
        // dt divides it; compare via interpolation error bound instead
        for i in lag_steps + 1..traj.t.len() {
            let t_lag = traj.t[i] - traj.tau1;
            // find the recorded sample nearest to t_lag
            let j = traj
                .t
                .iter()
                .position(|&t| (t - t_lag).abs() < 0.51 * dt_out)
                .unwrap();
            let du_scale = traj.du0[j].abs().max(1.0);
            assert!(
                (traj.u0_lag[i] - traj.u0[j]).abs()
                    < du_scale * (traj.t[j] - t_lag).abs() + 1e-9,
                "lag channel inconsistent at t = {}",
                traj.t[i]
            );
        }
    }
}
