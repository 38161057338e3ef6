//! Scenario files and the built-in case library.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{ApclParams, Event, EventKind};
use crate::error::{Error, Result};
use crate::limiter::{LimiterConfig, Strategy};
use crate::params::SystemParams;
use crate::phasor::polar_deg;
use crate::relay::RelaySettings;

pub const SCHEMA: &str = "swingvi.scenario/1";

pub const CASE_IDS: [&str; 12] = [
    "caseA1", "caseA2", "caseA3", "caseB1", "caseB2", "caseB3", "caseC1", "caseC2", "caseC3", "caseD", "caseE1",
    "caseE2",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    pub system: SystemParams,
    pub apcl: ApclParams,
    pub limiter: LimiterConfig,
    pub events: Vec<Event>,
    /// Simulated time, s.
    pub horizon: f64,
    /// Integration step, s.
    pub dt: f64,
    pub relay: RelaySettings,
    /// Start angle; `None` starts from the pre-disturbance equilibrium.
    pub initial_delta: Option<f64>,
    /// Output directory.
    pub outputs: PathBuf,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            schema: SCHEMA.to_string(),
            name: "default".to_string(),
            system: SystemParams::default(),
            apcl: ApclParams::default(),
            limiter: LimiterConfig::default(),
            events: Vec::new(),
            horizon: 30.0,
            dt: 5e-4,
            relay: RelaySettings::default(),
            initial_delta: None,
            outputs: PathBuf::from("out"),
        }
    }
}

impl Scenario {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.schema != SCHEMA {
            v.push(format!("unsupported schema `{}` (expected `{SCHEMA}`)", self.schema));
        }
        v.extend(self.system.violations());
        v.extend(self.apcl.violations());
        v.extend(self.limiter.violations());
        v.extend(self.relay.violations());
        let omega_n = std::f64::consts::TAU * self.system.f_nominal;
        if (self.apcl.omega_n - omega_n).abs() > 1e-9 * omega_n {
            v.push(format!(
                "apcl.omega_n ({}) does not match 2π·f_nominal ({omega_n})",
                self.apcl.omega_n
            ));
        }
        if !(self.dt > 0.0) {
            v.push(format!("dt must be positive (got {})", self.dt));
        }
        if !(self.horizon > 0.0) || !(self.horizon >= self.dt) {
            v.push(format!("horizon must be positive and at least dt (got {})", self.horizon));
        }
        let mut prev = f64::NEG_INFINITY;
        let mut faulted = false;
        for (k, e) in self.events.iter().enumerate() {
            if !(e.time >= 0.0) {
                v.push(format!("event {k}: time must be non-negative (got {})", e.time));
            }
            if e.time < prev {
                v.push(format!("event {k}: times must be non-decreasing"));
            }
            prev = prev.max(e.time);
            if !(e.time < self.horizon) {
                v.push(format!("event {k}: time {} is not before the horizon {}", e.time, self.horizon));
            }
            match e.kind {
                EventKind::FaultApply { fraction } => {
                    if !(0.0..=1.0).contains(&fraction) {
                        v.push(format!("event {k}: fault fraction must lie in [0, 1] (got {fraction})"));
                    }
                    if faulted {
                        v.push(format!("event {k}: fault applied while already faulted"));
                    }
                    faulted = true;
                }
                EventKind::FaultClear => {
                    if !faulted {
                        v.push(format!("event {k}: fault_clear without a preceding fault_apply"));
                    }
                    faulted = false;
                }
                EventKind::PhaseJump { radians } if !radians.is_finite() => {
                    v.push(format!("event {k}: phase jump must be finite"));
                }
                EventKind::PowerStep { delta_p } if !delta_p.is_finite() => {
                    v.push(format!("event {k}: power step must be finite"));
                }
                _ => {}
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a scenario from JSON text; omitted fields take defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Parse { line: 1, column: 0, message: "empty scenario file".into() });
        }
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    Scenario::from_json(&std::fs::read_to_string(path)?)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario.to_json()? + "\n")?;
    Ok(())
}

fn case(name: &str, strategy: Strategy, h: f64, d_p: f64, p0: f64, events: Vec<Event>) -> Scenario {
    let horizon = events.iter().map(|e| e.time).fold(0.0, f64::max) + 22.0;
    Scenario {
        name: name.to_string(),
        apcl: ApclParams { h, d_p, p0, ..ApclParams::default() },
        limiter: LimiterConfig::with_strategy(strategy),
        events,
        horizon,
        outputs: PathBuf::from("out").join(name),
        ..Scenario::default()
    }
}

fn at(time: f64, kind: EventKind) -> Event {
    Event { time, kind }
}

/// Built-in reference cases.
pub fn builtin_case(id: &str) -> Result<Scenario> {
    use EventKind::*;
    use Strategy::{AdaptiveVi as Ada, None as Unl, VariableVi as Var};
    let jump = |r: f64| vec![at(8.0, PhaseJump { radians: r })];
    let fault = |t: f64| vec![at(t, FaultApply { fraction: 0.5 }), at(t + 0.25, FaultClear)];
    let step = |dp: f64| vec![at(8.0, PowerStep { delta_p: dp })];
    let s = match id {
        "caseA1" => case(id, Unl, 7.0, 0.05, 0.45, jump(-1.59)),
        "caseA2" => case(id, Var, 7.0, 0.05, 0.45, jump(-1.59)),
        "caseA3" => case(id, Ada, 7.0, 0.05, 0.45, jump(-1.59)),
        "caseB1" => case(id, Unl, 7.0, 0.05, 0.7, fault(4.0)),
        "caseB2" => case(id, Var, 7.0, 0.05, 0.7, fault(4.0)),
        "caseB3" => case(id, Ada, 7.0, 0.05, 0.7, fault(4.0)),
        "caseC1" => case(id, Unl, 3.0, 0.05, 0.65, jump(-1.13)),
        "caseC2" => case(id, Var, 9.0, 0.05, 0.65, jump(-1.13)),
        "caseC3" => case(id, Ada, 3.0, 0.15, 0.65, jump(-1.13)),
        "caseD" => {
            let mut s = case(id, Ada, 7.0, 0.05, 0.7, fault(8.0));
            let line = 0.2;
            s.system.z_l = polar_deg(line, 84.29);
            s.system.z_g = polar_deg(0.3, 84.29);
            // reaches and blinders follow the line impedance
            s.relay = RelaySettings::default().scaled(line / 0.6);
            s
        }
        "caseE1" => case(id, Unl, 5.0, 0.05, 0.6, step(0.4)),
        "caseE2" => case(id, Unl, 5.0, 0.05, 0.6, step(0.5)),
        other => return Err(Error::UnknownCase(other.to_string())),
    };
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_cases_validate() {
        for id in CASE_IDS {
            builtin_case(id).unwrap().validate().unwrap();
        }
        assert!(matches!(builtin_case("caseZ"), Err(Error::UnknownCase(_))));
    }

    #[test]
    fn case_a1_settings() {
        let s = builtin_case("caseA1").unwrap();
        assert_eq!(s.limiter.strategy, Strategy::None);
        assert_eq!((s.apcl.h, s.apcl.d_p, s.apcl.p0), (7.0, 0.05, 0.45));
        assert_eq!(s.events, vec![at(8.0, EventKind::PhaseJump { radians: -1.59 })]);
    }

    #[test]
    fn case_d_settings() {
        let s = builtin_case("caseD").unwrap();
        assert_eq!(s.limiter.strategy, Strategy::AdaptiveVi);
        assert!((s.system.z_l.norm() - 0.2).abs() < 1e-12);
        assert!((s.system.z_g.norm() - 0.3).abs() < 1e-12);
        assert!((s.relay.zones[0].reach.norm() - 0.16).abs() < 1e-12);
        assert_eq!(s.events[1].time - s.events[0].time, 0.25);
    }

    #[test]
    fn empty_and_partial_files() {
        assert!(matches!(Scenario::from_json(""), Err(Error::Parse { .. })));
        assert!(matches!(Scenario::from_json("  \n"), Err(Error::Parse { .. })));
        let s = Scenario::from_json("{}").unwrap();
        assert_eq!(s, Scenario::default());
        let err = Scenario::from_json("{\n  \"horizon\": 30,\n  \"bogus\": 1\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn validation_lists_violations() {
        let s = Scenario {
            dt: 0.0,
            events: vec![at(40.0, EventKind::FaultClear)],
            ..Scenario::default()
        };
        let Err(Error::Validation(v)) = s.validate() else { panic!() };
        assert_eq!(v.len(), 3, "{v:?}");
    }

    #[test]
    fn json_round_trip() {
        for id in CASE_IDS {
            let s = builtin_case(id).unwrap();
            assert_eq!(Scenario::from_json(&s.to_json().unwrap()).unwrap(), s);
        }
    }
}
