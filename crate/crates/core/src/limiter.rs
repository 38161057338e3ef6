//! Virtual-impedance current limiting.
//!
//! Three strategies are supported:
//!
//! * `None`: the inverter tracks `E_ref` regardless of current.
//! * `VariableVi`: `R_VI = k_VI·(|I| − I_th)` above the threshold with a
//!   fixed gain designed so a bolted terminal fault draws exactly `I_max`.
//!   Because the VI depends on the current it produces, the operating point
//!   is the root of a scalar implicit equation in `|I|`.
//! * `AdaptiveVi`: the same VI law, but the gain is driven by a PI loop on
//!   `|I| − I_max` that sets the voltage drop ΔV across the VI.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Circuit, NetworkSolution, Topology};
use crate::params::SystemParams;
use crate::phasor::{Phasor, ZERO_MAGNITUDE};

/// Convergence tolerance of the implicit current solve, per-unit.
pub const SOLVE_TOLERANCE: f64 = 1e-10;
pub const SOLVE_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    None,
    #[serde(rename = "variable")]
    VariableVi,
    #[serde(rename = "adaptive")]
    AdaptiveVi,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::None, Strategy::VariableVi, Strategy::AdaptiveVi];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::VariableVi => "variable",
            Strategy::AdaptiveVi => "adaptive",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "unlimited" => Ok(Strategy::None),
            "variable" => Ok(Strategy::VariableVi),
            "adaptive" => Ok(Strategy::AdaptiveVi),
            other => Err(format!("unknown strategy `{other}` (expected none|variable|adaptive)")),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimiterConfig {
    pub strategy: Strategy,
    /// Fixed gain for the variable strategy; `None` uses the bolted-fault design.
    pub k_vi: Option<f64>,
    /// Adaptive PI proportional gain, 1/pu.
    pub kp: f64,
    /// Adaptive PI integral gain, 1/(pu·s).
    pub ki: f64,
    /// Upper clamp on ΔV, pu.
    pub delta_v_max: f64,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::None,
            k_vi: None,
            kp: 0.5,
            ki: 1000.0,
            delta_v_max: 2.0,
        }
    }
}

impl LimiterConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(k) = self.k_vi {
            if !(k >= 0.0) {
                v.push(format!("k_vi must be non-negative (got {k})"));
            }
        }
        if !(self.kp >= 0.0) || !(self.ki >= 0.0) {
            v.push(format!("kp and ki must be non-negative (got {}, {})", self.kp, self.ki));
        }
        if !(self.delta_v_max > 0.0) {
            v.push(format!("delta_v_max must be positive (got {})", self.delta_v_max));
        }
        v
    }

    /// Gain used by the variable strategy.
    pub fn variable_gain(&self, params: &SystemParams) -> Result<f64> {
        match self.k_vi {
            Some(k) => Ok(k),
            None => variable_vi_gain(params),
        }
    }
}

/// Virtual impedance `R_VI + j·X_VI`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ViValue {
    pub r_vi: f64,
    pub x_vi: f64,
}

impl ViValue {
    pub const ZERO: ViValue = ViValue { r_vi: 0.0, x_vi: 0.0 };

    pub fn impedance(&self) -> Phasor {
        Phasor::new(self.r_vi, self.x_vi)
    }

    pub fn is_active(&self) -> bool {
        self.r_vi > 0.0 || self.x_vi > 0.0
    }
}

/// PI state of the adaptive strategy.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AdaptiveState {
    pub integrator: f64,
    pub delta_v: f64,
}

/// Per-simulation limiter state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LimiterState {
    pub adaptive: AdaptiveState,
    /// VI value of the most recent network solve.
    pub last_vi: ViValue,
}

/// Bolted-fault design gain: `k_VI = |E_ref| / ((I_max − I_th)·I_max·√(1+α²))`.
pub fn variable_vi_gain(params: &SystemParams) -> Result<f64> {
    check_thresholds(params)?;
    Ok(gain_from_voltage_drop(params.e_mag(), params))
}

/// Gain that produces a voltage drop `delta_v` across the VI at `I_max`.
pub fn gain_from_voltage_drop(delta_v: f64, params: &SystemParams) -> f64 {
    let alpha = params.alpha_vi();
    delta_v / ((params.i_max - params.i_th) * params.i_max * (1.0 + alpha * alpha).sqrt())
}

fn check_thresholds(params: &SystemParams) -> Result<()> {
    if params.i_max > params.i_th && params.i_th > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidThresholds {
            i_max: params.i_max,
            i_th: params.i_th,
        })
    }
}

pub fn vi_from_current(mag: f64, gain: f64, alpha_vi: f64, i_th: f64) -> ViValue {
    if mag > i_th {
        let r_vi = gain * (mag - i_th);
        ViValue {
            r_vi,
            x_vi: alpha_vi * r_vi,
        }
    } else {
        ViValue::ZERO
    }
}

/// dq voltage drop across the VI: `(R·i_d − X·i_q) + j(R·i_q + X·i_d)`.
pub fn vi_voltage_drop(vi: ViValue, i_dq: Phasor) -> Phasor {
    Phasor::new(
        vi.r_vi * i_dq.re - vi.x_vi * i_dq.im,
        vi.r_vi * i_dq.im + vi.x_vi * i_dq.re,
    )
}

/// Voltage reference handed to the voltage controller once the VI is active.
pub fn vi_reference_update(vi: ViValue, i_dq: Phasor, e_ref: Phasor) -> Phasor {
    e_ref - vi_voltage_drop(vi, i_dq)
}

/// Consistent operating point of a current-dependent VI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViSolution {
    pub mag: f64,
    pub vi: ViValue,
    pub sol: NetworkSolution,
}

/// Solves `I = drive / (z_ext + k(|I|−I_th)(1+jα))` for the circuit.
///
/// The scalar residual `r(m) = m·|z_ext + k(m−I_th)(1+jα)| − |drive|` is
/// strictly increasing above `I_th` when z_ext and the VI lie in the first
/// quadrant, so a bracketed Newton iteration with bisection fallback always
/// converges.
pub fn solve_implicit(
    circuit: &Circuit,
    gain: f64,
    alpha_vi: f64,
    i_th: f64,
) -> Result<ViSolution> {
    let target = circuit.drive.norm();
    let z_ext = circuit.z_ext;
    let unsat = if z_ext.norm() >= ZERO_MAGNITUDE {
        target / z_ext.norm()
    } else {
        f64::INFINITY
    };
    if unsat <= i_th || gain == 0.0 {
        let sol = circuit.solve(Phasor::new(0.0, 0.0))?;
        return Ok(ViSolution {
            mag: sol.current_mag(),
            vi: ViValue::ZERO,
            sol,
        });
    }

    let dir = Phasor::new(gain, gain * alpha_vi);
    let residual = |m: f64| -> (f64, f64) {
        let w = z_ext + dir * (m - i_th);
        let wn = w.norm();
        let slope = if wn > 0.0 {
            wn + m * (w.conj() * dir).re / wn
        } else {
            dir.norm() * m
        };
        (m * wn - target, slope)
    };

    let mut lo = i_th;
    let mut hi = if unsat.is_finite() { unsat } else { i_th + 1.0 };
    let mut iterations = 0;
    while residual(hi).0 < 0.0 {
        hi = i_th + 2.0 * (hi - i_th);
        iterations += 1;
        if iterations > SOLVE_MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                iterations,
                residual: residual(hi).0,
            });
        }
    }

    let mut m = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..SOLVE_MAX_ITERATIONS {
        iterations += 1;
        let (r, slope) = residual(m);
        if r == 0.0 {
            converged = true;
            break;
        }
        if r < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
        let newton = m - r / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - m).abs();
        m = next;
        if step < SOLVE_TOLERANCE * 1e-3 || hi - lo < SOLVE_TOLERANCE * 1e-3 {
            converged = true;
            break;
        }
    }
    let (r, _) = residual(m);
    if !converged && r.abs() > SOLVE_TOLERANCE {
        return Err(Error::NoConvergence {
            iterations,
            residual: r,
        });
    }

    let vi = vi_from_current(m, gain, alpha_vi, i_th);
    let sol = circuit.solve(vi.impedance())?;
    Ok(ViSolution {
        mag: sol.current_mag(),
        vi,
        sol,
    })
}

/// Variable-VI operating point on the intact network at power angle `delta`.
pub fn solve_variable_vi_current(delta: f64, params: &SystemParams, gain: f64) -> Result<ViSolution> {
    let circuit = Circuit::new(delta, params, Topology::Intact);
    solve_implicit(&circuit, gain, params.alpha_vi(), params.i_th)
}

/// Advances the adaptive-VI PI controller by one sample.
///
/// Clamping anti-windup: the integrator is frozen while the output sits on
/// a clamp and the error pushes further into it, and it never leaves
/// `[0, delta_v_max]`.
pub fn adaptive_vi_step(
    state: AdaptiveState,
    mag: f64,
    dt: f64,
    cfg: &LimiterConfig,
    i_max: f64,
) -> AdaptiveState {
    let error = mag - i_max;
    let candidate = state.integrator + cfg.ki * error * dt;
    let unclamped = cfg.kp * error + candidate;
    let pushing_high = unclamped > cfg.delta_v_max && error > 0.0;
    let pushing_low = unclamped < 0.0 && error < 0.0 && state.integrator <= 0.0;
    let integrator = if pushing_high {
        // integrate only up to the point where the output meets the clamp
        state.integrator.max(candidate.min(cfg.delta_v_max - cfg.kp * error))
    } else if pushing_low {
        state.integrator
    } else {
        candidate.clamp(0.0, cfg.delta_v_max)
    };
    let delta_v = (cfg.kp * error + integrator).clamp(0.0, cfg.delta_v_max);
    AdaptiveState {
        integrator,
        delta_v,
    }
}

/// Adaptive-VI operating point for the PI output currently applied.
pub fn solve_adaptive(circuit: &Circuit, state: &AdaptiveState, params: &SystemParams) -> Result<ViSolution> {
    let gain = gain_from_voltage_drop(state.delta_v, params);
    solve_implicit(circuit, gain, params.alpha_vi(), params.i_th)
}

/// ΔV that regulates the circuit current to exactly `I_max`, or 0 when the
/// unlimited current is already within the limit.
pub fn steady_adaptive_delta_v(circuit: &Circuit, params: &SystemParams) -> f64 {
    let target = circuit.drive.norm() / params.i_max;
    if circuit.z_ext.norm() >= target {
        return 0.0;
    }
    let alpha = params.alpha_vi();
    let dir = Phasor::new(1.0, alpha) / (1.0 + alpha * alpha).sqrt();
    // |z_ext + c·dir| = target, c ≥ 0 (monotone in c)
    let (mut lo, mut hi) = (0.0, target + circuit.z_ext.norm());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (circuit.z_ext + dir * mid).norm() < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    // |Z_VI| = ΔV / I_max
    0.5 * (lo + hi) * params.i_max
}

/// `arccos[(|E|² + |V_g|² − (|Z_Σ|·i)²) / (2|E||V_g|)]`, the angle at which
/// the unlimited current magnitude reaches `i_level`.
pub fn critical_angle(params: &SystemParams, i_level: f64) -> Result<f64> {
    let e = params.e_mag();
    let vg = params.v_g_mag;
    let drop = params.z_sigma().norm() * i_level;
    let argument = (e * e + vg * vg - drop * drop) / (2.0 * e * vg);
    if argument > 1.0 {
        Err(Error::Unreachable {
            level: i_level,
            argument,
        })
    } else if argument < -1.0 {
        Err(Error::AlwaysExceeded {
            level: i_level,
            argument,
        })
    } else {
        Ok(argument.acos())
    }
}

/// Power-angle partition of a swing cycle into VI-inactive
/// `[0, b] ∪ [2π−b, 2π]` and VI-active `(b, 2π−b)` sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationSets {
    pub boundary: f64,
}

impl ActivationSets {
    /// Reduces `delta` to [0, 2π) before testing membership.
    pub fn is_active(&self, delta: f64) -> bool {
        let d = delta.rem_euclid(TAU);
        d > self.boundary && d < TAU - self.boundary
    }

    pub fn inactive_intervals(&self) -> [(f64, f64); 2] {
        [(0.0, self.boundary), (TAU - self.boundary, TAU)]
    }

    pub fn active_interval(&self) -> (f64, f64) {
        (self.boundary, TAU - self.boundary)
    }
}

/// Activation sets of a strategy; `None` for the unlimited strategy.
pub fn activation_sets(params: &SystemParams, strategy: Strategy) -> Result<Option<ActivationSets>> {
    let level = match strategy {
        Strategy::None => return Ok(None),
        Strategy::VariableVi => params.i_th,
        Strategy::AdaptiveVi => params.i_max,
    };
    Ok(Some(ActivationSets {
        boundary: critical_angle(params, level)?,
    }))
}
