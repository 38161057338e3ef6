//! Post-processing: quasi-static P–δ curves, equilibria, stability verdicts.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::SimulationRecord;
use crate::error::{Error, Result};
use crate::limiter::{gain_from_voltage_drop, solve_implicit, steady_adaptive_delta_v, LimiterConfig, Strategy, ViValue};
use crate::network::{active_power, Circuit, NetworkSolution, Topology};
use crate::params::SystemParams;
use crate::phasor::Phasor;

/// Minimum simulated time after the disturbance for a stability verdict, s.
pub const MIN_POST_EVENT_HORIZON: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PDeltaSample {
    pub delta: f64,
    pub p: f64,
    pub vi_active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PDeltaCurve {
    pub strategy: Strategy,
    pub samples: Vec<PDeltaSample>,
}

impl PDeltaCurve {
    /// Largest power on the curve and the angle where it occurs.
    pub fn peak(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::MIN, 0.0), |acc, s| if s.p > acc.0 { (s.p, s.delta) } else { acc })
    }
}

/// Steady-state operating point of a strategy at a fixed angle on the intact network.
///
/// The adaptive strategy is taken at its regulated steady state: |I| = I_max
/// whenever the unlimited current would exceed it.
pub fn quasi_static_point(
    delta: f64,
    strategy: Strategy,
    params: &SystemParams,
    cfg: &LimiterConfig,
) -> Result<(f64, NetworkSolution, ViValue)> {
    let circuit = Circuit::new(delta, params, Topology::Intact);
    let (sol, vi) = match strategy {
        Strategy::None => (circuit.solve(Phasor::new(0.0, 0.0))?, ViValue::ZERO),
        Strategy::VariableVi => {
            let s = solve_implicit(&circuit, cfg.variable_gain(params)?, params.alpha_vi(), params.i_th)?;
            (s.sol, s.vi)
        }
        Strategy::AdaptiveVi => {
            let dv = steady_adaptive_delta_v(&circuit, params);
            let s = solve_implicit(&circuit, gain_from_voltage_drop(dv, params), params.alpha_vi(), params.i_th)?;
            (s.sol, s.vi)
        }
    };
    Ok((active_power(&sol), sol, vi))
}

/// Quasi-static P(δ) on `n` equally spaced angles over [0, 2π].
pub fn p_delta_curve(strategy: Strategy, params: &SystemParams, cfg: &LimiterConfig, n: usize) -> Result<PDeltaCurve> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 samples, got {n}")));
    }
    let samples = (0..n)
        .map(|k| {
            let delta = TAU * k as f64 / (n - 1) as f64;
            let (p, _, vi) = quasi_static_point(delta, strategy, params, cfg)?;
            Ok(PDeltaSample { delta, p, vi_active: vi.is_active() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PDeltaCurve { strategy, samples })
}

/// Stable equilibrium angle where the quasi-static power equals `p0`:
/// the first crossing on the rising side of the curve, refined by bisection.
pub fn equilibrium_angle(p0: f64, strategy: Strategy, params: &SystemParams, cfg: &LimiterConfig) -> Result<f64> {
    let p = |d: f64| quasi_static_point(d, strategy, params, cfg).map(|r| r.0);
    const N: usize = 2000;
    let mut prev = (0.0, p(0.0)?);
    if prev.1 >= p0 {
        return Err(Error::InvalidParams(format!("P0 = {p0} is at or below P(0) = {}", prev.1)));
    }
    for k in 1..=N {
        let d = PI * k as f64 / N as f64;
        let cur = (d, p(d)?);
        if cur.1 >= p0 {
            let (mut lo, mut hi) = (prev.0, cur.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if p(mid)? < p0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        if cur.1 < prev.1 {
            break;
        }
        prev = cur;
    }
    Err(Error::InvalidParams(format!(
        "no equilibrium: P0 = {p0} exceeds the {strategy} power transfer limit"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Stable,
    Unstable,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Stable => "Stable",
            Classification::Unstable => "Unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub classification: Classification,
    /// Largest |δ(t) − δ_pre| after the disturbance, radians.
    pub max_delta_excursion: f64,
    pub pole_slips: u32,
}

/// Stable if δ never moves more than 2π from its pre-disturbance value.
///
/// Needs at least [`MIN_POST_EVENT_HORIZON`] seconds after the first event
/// (or after t = 0 when there are no events).
pub fn classify_stability(record: &SimulationRecord) -> Result<StabilityVerdict> {
    let (Some(&t_end), false) = (record.t.last(), record.is_empty()) else {
        return Err(Error::InsufficientHorizon { available: 0.0, required: MIN_POST_EVENT_HORIZON });
    };
    let t0 = record.disturbance_time.unwrap_or(0.0);
    if t_end - t0 < MIN_POST_EVENT_HORIZON - 1e-9 {
        return Err(Error::InsufficientHorizon { available: t_end - t0, required: MIN_POST_EVENT_HORIZON });
    }
    // last sample strictly before the disturbance takes effect
    let pre_idx = record.t.iter().rposition(|&t| t <= t0 + 1e-9).unwrap_or(0);
    let pre = record.delta[pre_idx];
    let excursion = record.delta[pre_idx..].iter().map(|d| (d - pre).abs()).fold(0.0, f64::max);
    let classification = if excursion > TAU { Classification::Unstable } else { Classification::Stable };
    Ok(StabilityVerdict {
        classification,
        max_delta_excursion: excursion,
        pole_slips: (excursion / TAU).floor() as u32,
    })
}

/// Distance below which consecutive phase-portrait points are merged.
pub const PORTRAIT_TOLERANCE: f64 = 1e-9;

/// `(δ, ω − ω0)` pairs. A sample is dropped when it lies within
/// [`PORTRAIT_TOLERANCE`] of the last kept point, so a record resting at
/// equilibrium collapses to a single point.
pub fn phase_portrait(record: &SimulationRecord) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(record.len());
    for (&d, &w) in record.delta.iter().zip(&record.omega_dev) {
        match out.last() {
            Some(&(ld, lw)) if (d - ld).abs() <= PORTRAIT_TOLERANCE && (w - lw).abs() <= PORTRAIT_TOLERANCE => {}
            _ => out.push((d, w)),
        }
    }
    out
}

/// Period of the first swing after `after`, from the first two downward
/// zero crossings of ω − ω0 (linear interpolation between samples).
pub fn first_swing_period(record: &SimulationRecord, after: f64) -> Option<f64> {
    let mut crossings = Vec::new();
    for i in 1..record.len() {
        if record.t[i - 1] < after {
            continue;
        }
        let (a, b) = (record.omega_dev[i - 1], record.omega_dev[i]);
        if a > 0.0 && b <= 0.0 {
            let frac = a / (a - b);
            crossings.push(record.t[i - 1] + frac * (record.t[i] - record.t[i - 1]));
            if crossings.len() == 2 {
                return Some(crossings[1] - crossings[0]);
            }
        }
    }
    None
}
