//! Closed-form apparent-impedance trajectories over a full swing cycle.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limiter::{activation_sets, solve_variable_vi_current, variable_vi_gain, Strategy};
use crate::params::SystemParams;
use crate::phasor::{polar, Phasor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Segment {
    Inactive,
    ActiveVariable,
    ActiveAdaptive,
}

impl Segment {
    pub fn as_str(self) -> &'static str {
        match self {
            Segment::Inactive => "inactive",
            Segment::ActiveVariable => "active_variable",
            Segment::ActiveAdaptive => "active_adaptive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub delta: f64,
    pub z_app: Phasor,
    pub segment: Segment,
}

/// Unlimited locus: `(Z_g + Z_l − Z_Σ/2) − j(Z_Σ/2)·cot(δ/2)`.
///
/// Assumes `|V_g| = |E_ref|`.
pub fn z_unlimited(delta: f64, params: &SystemParams) -> Result<Phasor> {
    let half = 0.5 * delta.rem_euclid(TAU);
    let s = half.sin();
    if s.abs() < 1e-12 {
        return Err(Error::PoleAtZero);
    }
    let zs = params.z_sigma();
    let cot = half.cos() / s;
    Ok(params.z_relay_to_grid() - zs * 0.5 - Phasor::new(0.0, 1.0) * zs * (0.5 * cot))
}

/// Variable-VI locus: `(Z_g + Z_l) + (|V_g|/|I|)∠(−δ − θ_i)` with the current
/// from the implicit solve. Falls back to [`z_unlimited`] outside the active set.
pub fn z_variable_vi(delta: f64, params: &SystemParams, gain: f64) -> Result<Phasor> {
    let sets = activation_sets(params, Strategy::VariableVi)?.expect("variable strategy has sets");
    if !sets.is_active(delta) {
        return z_unlimited(delta, params);
    }
    let s = solve_variable_vi_current(delta, params, gain)?;
    let i = s.sol.current;
    Ok(params.z_relay_to_grid() + polar(params.v_g_mag / i.norm(), -delta - i.arg()))
}

/// Phase of the regulated current, `θ_i = π/2 − δ/2 − φ` (valid for `|V_g| = |E_ref|`).
pub fn limited_current_angle(delta: f64, phi: f64) -> f64 {
    FRAC_PI_2 - 0.5 * delta - phi
}

/// Adaptive-VI locus: the arc `(Z_g + Z_l) + (|V_g|/I_max)∠(−δ/2 − π/2 + φ)`.
pub fn z_adaptive_vi(delta: f64, params: &SystemParams) -> Phasor {
    let d = delta.rem_euclid(TAU);
    params.z_relay_to_grid()
        + polar(params.v_g_mag / params.i_max, -0.5 * d - FRAC_PI_2 + params.phi())
}

/// Samples the full cycle on a uniform grid over (0, 2π), excluding both ends.
pub fn full_cycle(strategy: Strategy, params: &SystemParams, n_samples: usize) -> Result<Vec<TrajectorySample>> {
    if n_samples < 3 {
        return Err(Error::InvalidParams(format!("need at least 3 samples, got {n_samples}")));
    }
    let sets = activation_sets(params, strategy)?;
    let gain = match strategy {
        Strategy::VariableVi => variable_vi_gain(params)?,
        _ => 0.0,
    };
    (0..n_samples)
        .map(|k| {
            let delta = TAU * (k + 1) as f64 / (n_samples + 1) as f64;
            let active = sets.is_some_and(|s| s.is_active(delta));
            let (z_app, segment) = match (strategy, active) {
                (Strategy::VariableVi, true) => (z_variable_vi(delta, params, gain)?, Segment::ActiveVariable),
                (Strategy::AdaptiveVi, true) => (z_adaptive_vi(delta, params), Segment::ActiveAdaptive),
                _ => (z_unlimited(delta, params)?, Segment::Inactive),
            };
            Ok(TrajectorySample { delta, z_app, segment })
        })
        .collect()
}
