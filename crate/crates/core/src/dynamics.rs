//! Time-domain simulation of the active power control loop.
//!
//! The swing equations
//!
//! ```text
//! 2H·dω/dt = P0 − P − (ω − ω0)/D_p
//!    dδ/dt = ω_n·(ω − ω0)
//! ```
//!
//! are integrated with fixed-step RK4. The network and limiter are
//! algebraic (quasi-static phasors) and re-solved at every RK stage; the
//! adaptive-VI PI loop is advanced once per step with the end-of-step
//! current. The frequency deviation is hard-limited to `±freq_clamp`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::limiter::{
    adaptive_vi_step, solve_adaptive, solve_implicit, steady_adaptive_delta_v, AdaptiveState, LimiterConfig,
    LimiterState, Strategy, ViValue,
};
use crate::network::{active_power, Circuit, NetworkSolution, Topology};
use crate::params::SystemParams;
use crate::phasor::Phasor;
use crate::relay::{relay_step, RelayEvent, RelaySettings, RelayState};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApclParams {
    /// Inertia constant H, seconds.
    pub h: f64,
    /// Damping (droop) coefficient D_p.
    pub d_p: f64,
    /// Active power setpoint P0, pu.
    pub p0: f64,
    /// Frequency setpoint, pu.
    pub omega0: f64,
    /// Rated angular frequency, rad/s.
    pub omega_n: f64,
    /// Limit on |ω − ω0|, pu.
    pub freq_clamp: f64,
}

impl Default for ApclParams {
    fn default() -> Self {
        Self {
            h: 7.0,
            d_p: 0.05,
            p0: 0.45,
            omega0: 1.0,
            omega_n: TAU * 60.0,
            freq_clamp: 0.01,
        }
    }
}

impl ApclParams {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.h > 0.0) {
            v.push(format!("h must be positive (got {})", self.h));
        }
        if !(self.d_p > 0.0) {
            v.push(format!("d_p must be positive (got {})", self.d_p));
        }
        if !(self.freq_clamp > 0.0) {
            v.push(format!("freq_clamp must be positive (got {})", self.freq_clamp));
        }
        if !(self.omega_n > 0.0) {
            v.push(format!("omega_n must be positive (got {})", self.omega_n));
        }
        if !self.p0.is_finite() {
            v.push("p0 must be finite".into());
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventKind {
    /// Step in the grid phase, i.e. an instantaneous change of δ.
    PhaseJump { radians: f64 },
    /// Bolted three-phase fault at `fraction` of the line from the relay.
    FaultApply { fraction: f64 },
    FaultClear,
    /// Step in the active power setpoint.
    PowerStep { delta_p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Unwrapped power angle, radians.
    pub delta: f64,
    pub omega_dev: f64,
    pub limiter: LimiterState,
    pub t: f64,
    pub topology: Topology,
    /// Active power setpoint in force (P0 plus applied steps).
    pub p0: f64,
    /// Index of the next pending event.
    pub next_event: usize,
}

/// Sampled simulation output, one entry per channel per step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationRecord {
    pub t: Vec<f64>,
    pub delta: Vec<f64>,
    pub omega_dev: Vec<f64>,
    pub i_mag: Vec<f64>,
    pub z_app: Vec<Option<Phasor>>,
    pub v_relay: Vec<Phasor>,
    pub p_e: Vec<f64>,
    pub vi: Vec<ViValue>,
    pub faulted: Vec<bool>,
    pub psb: Vec<bool>,
    pub ost: Vec<bool>,
    pub relay_events: Vec<RelayEvent>,
    /// Time of the first scheduled event, if any.
    pub disturbance_time: Option<f64>,
    pub freq_clamp: f64,
}

impl SimulationRecord {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Keeps every `factor`-th sample.
    pub fn decimate(&self, factor: usize) -> Self {
        fn pick<T: Clone>(v: &[T], f: usize) -> Vec<T> {
            v.iter().step_by(f).cloned().collect()
        }
        let f = factor.max(1);
        Self {
            t: pick(&self.t, f),
            delta: pick(&self.delta, f),
            omega_dev: pick(&self.omega_dev, f),
            i_mag: pick(&self.i_mag, f),
            z_app: pick(&self.z_app, f),
            v_relay: pick(&self.v_relay, f),
            p_e: pick(&self.p_e, f),
            vi: pick(&self.vi, f),
            faulted: pick(&self.faulted, f),
            psb: pick(&self.psb, f),
            ost: pick(&self.ost, f),
            relay_events: self.relay_events.clone(),
            disturbance_time: self.disturbance_time,
            freq_clamp: self.freq_clamp,
        }
    }
}

/// Right-hand side of the swing equations: `(dω/dt, dδ/dt)`.
pub fn swing_derivatives(omega_dev: f64, p0: f64, p_e: f64, params: &ApclParams) -> (f64, f64) {
    let d_omega = (p0 - p_e - omega_dev / params.d_p) / (2.0 * params.h);
    (d_omega, params.omega_n * omega_dev)
}

/// Swing derivatives with the frequency deviation held inside its clamp.
fn clamped_derivatives(omega_dev: f64, p0: f64, p_e: f64, params: &ApclParams) -> (f64, f64) {
    let w = omega_dev.clamp(-params.freq_clamp, params.freq_clamp);
    let (mut d_omega, d_delta) = swing_derivatives(w, p0, p_e, params);
    if (w >= params.freq_clamp && d_omega > 0.0) || (w <= -params.freq_clamp && d_omega < 0.0) {
        d_omega = 0.0;
    }
    (d_omega, d_delta)
}

/// One classical RK4 step of `y' = f(y)`.
pub fn rk4_step<const N: usize, F>(y: [f64; N], dt: f64, mut f: F) -> Result<[f64; N]>
where
    F: FnMut(&[f64; N]) -> Result<[f64; N]>,
{
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| -> [f64; N] { std::array::from_fn(|i| a[i] + s * b[i]) };
    let k1 = f(&y)?;
    let k2 = f(&axpy(&y, 0.5 * dt, &k1))?;
    let k3 = f(&axpy(&y, 0.5 * dt, &k2))?;
    let k4 = f(&axpy(&y, dt, &k3))?;
    Ok(std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

/// Electrical operating point at power angle `delta` for the limiter state.
pub fn electrical_power(
    delta: f64,
    limiter: &LimiterState,
    cfg: &LimiterConfig,
    params: &SystemParams,
    topology: Topology,
) -> Result<(f64, NetworkSolution, ViValue)> {
    let circuit = Circuit::new(delta, params, topology);
    let (sol, vi) = match cfg.strategy {
        Strategy::None => (circuit.solve(Phasor::new(0.0, 0.0))?, ViValue::ZERO),
        Strategy::VariableVi => {
            let s = solve_implicit(&circuit, cfg.variable_gain(params)?, params.alpha_vi(), params.i_th)?;
            (s.sol, s.vi)
        }
        Strategy::AdaptiveVi => {
            let s = solve_adaptive(&circuit, &limiter.adaptive, params)?;
            (s.sol, s.vi)
        }
    };
    Ok((active_power(&sol), sol, vi))
}

/// Fixed-step simulator for one scenario.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub system: SystemParams,
    pub apcl: ApclParams,
    pub limiter: LimiterConfig,
    pub events: Vec<Event>,
    pub relay: RelaySettings,
}

impl Simulator {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let mut events = scenario.events.clone();
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self {
            system: scenario.system.clone(),
            apcl: scenario.apcl.clone(),
            limiter: scenario.limiter.clone(),
            events,
            relay: scenario.relay.clone(),
        }
    }

    /// Pre-disturbance state: `initial_delta` if given, otherwise the
    /// stable equilibrium where P(δ) = P0.
    pub fn initial_state(&self, initial_delta: Option<f64>) -> Result<SimState> {
        let delta = match initial_delta {
            Some(d) => d,
            None => analysis::equilibrium_angle(self.apcl.p0, self.limiter.strategy, &self.system, &self.limiter)?,
        };
        let mut limiter = LimiterState::default();
        if self.limiter.strategy == Strategy::AdaptiveVi {
            let circuit = Circuit::new(delta, &self.system, Topology::Intact);
            let dv = steady_adaptive_delta_v(&circuit, &self.system).min(self.limiter.delta_v_max);
            limiter.adaptive = AdaptiveState { integrator: dv, delta_v: dv };
        }
        Ok(SimState {
            delta,
            omega_dev: 0.0,
            limiter,
            t: 0.0,
            topology: Topology::Intact,
            p0: self.apcl.p0,
            next_event: 0,
        })
    }

    fn apply_due_events(&self, state: &mut SimState) {
        while let Some(ev) = self.events.get(state.next_event) {
            if ev.time > state.t + 1e-9 {
                break;
            }
            match ev.kind {
                EventKind::PhaseJump { radians } => state.delta += radians,
                EventKind::FaultApply { fraction } => state.topology = Topology::Faulted { fraction },
                EventKind::FaultClear => state.topology = Topology::Intact,
                EventKind::PowerStep { delta_p } => state.p0 += delta_p,
            }
            state.next_event += 1;
        }
    }

    /// Advances one step of length `dt`. Returns the end-of-step network
    /// solution, evaluated before the PI update.
    pub fn step(&self, state: &mut SimState, dt: f64) -> Result<(f64, NetworkSolution, ViValue)> {
        self.apply_due_events(state);
        let limiter = state.limiter;
        let topology = state.topology;
        let p0 = state.p0;
        let y = rk4_step([state.delta, state.omega_dev], dt, |y| {
            let (p_e, _, _) = electrical_power(y[0], &limiter, &self.limiter, &self.system, topology)?;
            let (d_omega, d_delta) = clamped_derivatives(y[1], p0, p_e, &self.apcl);
            Ok([d_delta, d_omega])
        })
        .map_err(|e| Error::Simulation { t: state.t, source: Box::new(e) })?;

        state.delta = y[0];
        state.omega_dev = y[1].clamp(-self.apcl.freq_clamp, self.apcl.freq_clamp);
        state.t += dt;

        let (p_e, sol, vi) = electrical_power(state.delta, &limiter, &self.limiter, &self.system, topology)
            .map_err(|e| Error::Simulation { t: state.t, source: Box::new(e) })?;
        state.limiter.last_vi = vi;
        if self.limiter.strategy == Strategy::AdaptiveVi {
            state.limiter.adaptive =
                adaptive_vi_step(limiter.adaptive, sol.current_mag(), dt, &self.limiter, self.system.i_max);
        }
        Ok((p_e, sol, vi))
    }

    /// Integrates from t = 0 to `horizon`, sampling every step and feeding the relay.
    pub fn run(&self, horizon: f64, dt: f64, initial_delta: Option<f64>) -> Result<SimulationRecord> {
        if !(dt > 0.0) || !(horizon > 0.0) {
            return Err(Error::InvalidParams(format!("need dt > 0 and horizon > 0 (got {dt}, {horizon})")));
        }
        let steps = (horizon / dt).round() as usize;
        let mut state = self.initial_state(initial_delta)?;
        let mut relay = RelayState::new(&self.relay);
        let mut rec = SimulationRecord {
            disturbance_time: self.events.first().map(|e| e.time),
            freq_clamp: self.apcl.freq_clamp,
            ..Default::default()
        };

        let (p_e, sol, vi) =
            electrical_power(state.delta, &state.limiter, &self.limiter, &self.system, state.topology)?;
        let f_nom = self.system.f_nominal;
        relay_step(&mut relay, sol.z_apparent, 0.0, 0.0, &self.relay, f_nom);
        push_sample(&mut rec, &state, p_e, &sol, vi, &relay);

        for k in 1..=steps {
            let (p_e, sol, vi) = self.step(&mut state, dt)?;
            // re-anchor time to avoid accumulating rounding in t
            state.t = k as f64 * dt;
            relay_step(&mut relay, sol.z_apparent, state.t, dt, &self.relay, f_nom);
            push_sample(&mut rec, &state, p_e, &sol, vi, &relay);
        }
        rec.relay_events = relay.event_log;
        Ok(rec)
    }
}

fn push_sample(
    rec: &mut SimulationRecord,
    state: &SimState,
    p_e: f64,
    sol: &NetworkSolution,
    vi: ViValue,
    relay: &RelayState,
) {
    rec.t.push(state.t);
    rec.delta.push(state.delta);
    rec.omega_dev.push(state.omega_dev);
    rec.i_mag.push(sol.current_mag());
    rec.z_app.push(sol.z_apparent);
    rec.v_relay.push(sol.v_relay);
    rec.p_e.push(p_e);
    rec.vi.push(vi);
    rec.faulted.push(matches!(state.topology, Topology::Faulted { .. }));
    rec.psb.push(relay.psb_asserted);
    rec.ost.push(relay.ost_tripped);
}

/// Runs a scenario end to end.
pub fn run_scenario(scenario: &Scenario) -> Result<SimulationRecord> {
    Simulator::from_scenario(scenario).run(scenario.horizon, scenario.dt, scenario.initial_delta)
}
