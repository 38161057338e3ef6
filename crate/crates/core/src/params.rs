use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasor::{angle, polar_deg, serde_phasor, Phasor};

/// Electrical parameters of the single-machine test system.
///
/// Topology: inverter PCC → transformer `z_tr` → Bus B (relay) → line `z_l`
/// → grid Thevenin impedance `z_g` → grid source `v_g_mag∠−δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// PCC voltage setpoint.
    #[serde(with = "serde_phasor")]
    pub e_ref: Phasor,
    pub v_g_mag: f64,
    #[serde(with = "serde_phasor")]
    pub z_g: Phasor,
    #[serde(with = "serde_phasor")]
    pub z_l: Phasor,
    #[serde(with = "serde_phasor")]
    pub z_tr: Phasor,
    pub i_max: f64,
    pub i_th: f64,
    /// VI ratio X_VI / R_VI. `None` selects tan φ of the total impedance.
    pub alpha_vi: Option<f64>,
    pub f_nominal: f64,
}

impl Default for SystemParams {
    /// The reference test system: 0.6∠84.29° line, 0.3∠84.29° grid,
    /// 0.16∠88.57° transformer, I_max = 1.2, I_th = 1.0, 60 Hz.
    fn default() -> Self {
        Self {
            e_ref: Phasor::new(1.0, 0.0),
            v_g_mag: 1.0,
            z_g: polar_deg(0.3, 84.29),
            z_l: polar_deg(0.6, 84.29),
            z_tr: polar_deg(0.16, 88.57),
            i_max: 1.2,
            i_th: 1.0,
            alpha_vi: None,
            f_nominal: 60.0,
        }
    }
}

impl SystemParams {
    /// Z_Σ = z_tr + z_l + z_g.
    pub fn z_sigma(&self) -> Phasor {
        self.z_tr + self.z_l + self.z_g
    }

    /// Impedance angle φ of Z_Σ.
    pub fn phi(&self) -> f64 {
        angle(self.z_sigma())
    }

    /// Impedance between the relay (Bus B) and the grid source.
    pub fn z_relay_to_grid(&self) -> Phasor {
        self.z_g + self.z_l
    }

    pub fn alpha_vi(&self) -> f64 {
        self.alpha_vi.unwrap_or_else(|| self.phi().tan())
    }

    pub fn e_mag(&self) -> f64 {
        self.e_ref.norm()
    }

    /// Returns every violated invariant, empty when the parameters are usable.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, z) in [("z_g", self.z_g), ("z_l", self.z_l), ("z_tr", self.z_tr)] {
            if !(z.norm() > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
                v.push(format!("|{name}| must be positive and finite"));
            }
        }
        if !(self.i_th > 0.0) {
            v.push(format!("i_th must be positive (got {})", self.i_th));
        }
        if !(self.i_max > self.i_th) {
            v.push(format!("i_max ({}) must exceed i_th ({})", self.i_max, self.i_th));
        }
        if let Some(a) = self.alpha_vi {
            if !(a >= 0.0) {
                v.push(format!("alpha_vi must be non-negative (got {a})"));
            }
        }
        if !(self.e_mag() > 0.0) {
            v.push("|e_ref| must be positive".into());
        }
        if !(self.v_g_mag > 0.0) {
            v.push(format!("v_g_mag must be positive (got {})", self.v_g_mag));
        }
        if !(self.f_nominal > 0.0) {
            v.push(format!("f_nominal must be positive (got {})", self.f_nominal));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_system_is_valid() {
        let p = SystemParams::default();
        assert!(p.violations().is_empty());
        assert!((p.phi().to_degrees() - 84.94).abs() < 5e-3);
    }

    #[test]
    fn thresholds_checked() {
        let p = SystemParams {
            i_max: 1.0,
            i_th: 1.0,
            ..Default::default()
        };
        assert_eq!(p.violations().len(), 1);
        assert!(p.validate().is_err());
    }
}
