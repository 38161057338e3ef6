//! Single-machine phasor network.
//!
//! The inverter is an ideal voltage source `E_ref∠0` at the PCC (inner
//! voltage/current loops track perfectly), optionally behind a series
//! virtual impedance. The grid is `V_g∠−δ` behind Z_Σ. A bolted fault on
//! the line replaces the grid side with a zero-voltage node at a fraction
//! of the line length from the relay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::phasor::{polar, Phasor, ZERO_MAGNITUDE};

/// Network configuration seen by the inverter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum Topology {
    #[default]
    Intact,
    /// Three-phase bolted fault at `fraction` of the line measured from the relay.
    Faulted { fraction: f64 },
}

/// Thevenin view of the circuit from the inverter terminals.
///
/// `current = drive / (z_ext + z_vi)`; bus voltages follow from
/// [`Circuit::v_pcc`] and [`Circuit::v_relay`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circuit {
    /// Driving voltage `E_ref − V_remote`.
    pub drive: Phasor,
    /// External series impedance between PCC and the remote source.
    pub z_ext: Phasor,
    /// Remote source voltage (grid `V_g∠−δ`, or 0 for a fault).
    pub v_remote: Phasor,
    /// Impedance between the relay bus and the remote source.
    pub z_relay_remote: Phasor,
}

impl Circuit {
    pub fn new(delta: f64, params: &SystemParams, topology: Topology) -> Self {
        match topology {
            Topology::Intact => {
                let v_g = polar(params.v_g_mag, -delta);
                Self {
                    drive: params.e_ref - v_g,
                    z_ext: params.z_sigma(),
                    v_remote: v_g,
                    z_relay_remote: params.z_relay_to_grid(),
                }
            }
            Topology::Faulted { fraction } => {
                let z_fault = params.z_l * fraction;
                Self {
                    drive: params.e_ref,
                    z_ext: params.z_tr + z_fault,
                    v_remote: Phasor::new(0.0, 0.0),
                    z_relay_remote: z_fault,
                }
            }
        }
    }

    pub fn v_pcc(&self, current: Phasor) -> Phasor {
        self.v_remote + self.z_ext * current
    }

    pub fn v_relay(&self, current: Phasor) -> Phasor {
        self.v_remote + self.z_relay_remote * current
    }

    /// Solves the linear circuit for a fixed virtual impedance.
    pub fn solve(&self, z_vi: Phasor) -> Result<NetworkSolution> {
        let z_total = self.z_ext + z_vi;
        if z_total.norm() < ZERO_MAGNITUDE {
            return Err(Error::DegenerateCircuit(z_total.norm()));
        }
        Ok(self.solution_for(self.drive / z_total))
    }

    /// Builds the bus quantities for a known current phasor.
    pub fn solution_for(&self, current: Phasor) -> NetworkSolution {
        let v_relay = self.v_relay(current);
        let z_apparent = if current.norm() < ZERO_MAGNITUDE {
            None
        } else {
            Some(v_relay / current)
        };
        NetworkSolution {
            current,
            v_pcc: self.v_pcc(current),
            v_relay,
            z_apparent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSolution {
    /// Current at the relay, flowing from the inverter towards the grid.
    pub current: Phasor,
    pub v_pcc: Phasor,
    /// Voltage at Bus B.
    pub v_relay: Phasor,
    /// `v_relay / current`; `None` when the current is zero.
    pub z_apparent: Option<Phasor>,
}

impl NetworkSolution {
    pub fn is_zero_current(&self) -> bool {
        self.z_apparent.is_none()
    }

    pub fn current_mag(&self) -> f64 {
        self.current.norm()
    }
}

pub fn total_impedance(params: &SystemParams) -> Phasor {
    params.z_sigma()
}

/// Solves the intact network at power angle `delta` with series VI `z_vi`.
pub fn solve_network(delta: f64, z_vi: Phasor, params: &SystemParams) -> Result<NetworkSolution> {
    Circuit::new(delta, params, Topology::Intact).solve(z_vi)
}

/// P = ℜ(V_PCC · I*).
pub fn active_power(sol: &NetworkSolution) -> f64 {
    (sol.v_pcc * sol.current.conj()).re
}
