//! Distance relay with three directional mho zones and a three-step
//! resistive-blinder power swing detector (PSB + OST).

use serde::{Deserialize, Serialize};

use crate::phasor::{polar_deg, serde_phasor, Phasor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MhoZone {
    #[serde(with = "serde_phasor")]
    pub reach: Phasor,
    pub time_delay: f64,
}

/// Directional mho: the circle through the origin with diameter `reach`.
/// Boundary points are inside.
pub fn mho_contains(z: Phasor, zone: &MhoZone) -> bool {
    (z - zone.reach * 0.5).norm() <= zone.reach.norm() * 0.5
}

/// Quadrilateral formed by two tilted resistive blinders and two reactance reaches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blinder {
    pub rgt: f64,
    pub lft: f64,
    pub fwd: f64,
    pub rev: f64,
    /// Blinder angle from the R axis, radians.
    pub tilt: f64,
}

impl Blinder {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rgt: self.rgt * factor,
            lft: self.lft * factor,
            fwd: self.fwd * factor,
            rev: self.rev * factor,
            tilt: self.tilt,
        }
    }
}

/// `u = R − X·cot(tilt) ∈ [lft, rgt]` and `X ∈ [rev, fwd]`.
pub fn blinder_contains(z: Phasor, b: &Blinder) -> bool {
    let u = z.re - z.im / b.tilt.tan();
    u >= b.lft && u <= b.rgt && z.im >= b.rev && z.im <= b.fwd
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaySettings {
    pub zones: Vec<MhoZone>,
    pub outer: Blinder,
    pub middle: Blinder,
    pub inner: Blinder,
    /// Minimum outer→middle transit time that classifies a swing, in cycles.
    pub psb_cycles: f64,
}

impl Default for RelaySettings {
    /// Reference settings: zones at 80/120/200 % of a 0.6∠84.29° line.
    fn default() -> Self {
        let tilt = 84.94f64.to_radians();
        Self {
            zones: vec![
                MhoZone { reach: polar_deg(0.48, 84.29), time_delay: 0.0 },
                MhoZone { reach: polar_deg(0.72, 84.29), time_delay: 0.5 },
                MhoZone { reach: polar_deg(1.20, 84.29), time_delay: 1.0 },
            ],
            outer: Blinder { rgt: 0.84, lft: -0.84, fwd: 1.88, rev: -0.56, tilt },
            middle: Blinder { rgt: 0.61, lft: -0.61, fwd: 1.57, rev: -0.47, tilt },
            inner: Blinder { rgt: 0.25, lft: -0.25, fwd: 1.31, rev: -0.39, tilt },
            psb_cycles: 2.0,
        }
    }
}

impl RelaySettings {
    /// Scales every reach by `factor`, keeping delays and angles.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            zones: self
                .zones
                .iter()
                .map(|z| MhoZone { reach: z.reach * factor, time_delay: z.time_delay })
                .collect(),
            outer: self.outer.scaled(factor),
            middle: self.middle.scaled(factor),
            inner: self.inner.scaled(factor),
            psb_cycles: self.psb_cycles,
        }
    }

    pub fn psb_delay(&self, f_nominal: f64) -> f64 {
        self.psb_cycles / f_nominal
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.zones.is_empty() {
            v.push("relay needs at least one zone".into());
        }
        for (k, z) in self.zones.iter().enumerate() {
            if !(z.reach.norm() > 0.0) || !(z.time_delay >= 0.0) {
                v.push(format!("zone {} needs a positive reach and non-negative delay", k + 1));
            }
        }
        for (name, b) in [("outer", &self.outer), ("middle", &self.middle), ("inner", &self.inner)] {
            if !(b.lft < 0.0 && 0.0 < b.rgt && b.rev < 0.0 && 0.0 < b.fwd) {
                v.push(format!("{name} blinder must satisfy lft < 0 < rgt and rev < 0 < fwd"));
            }
            if !(b.tilt > 0.0 && b.tilt <= std::f64::consts::FRAC_PI_2) {
                v.push(format!("{name} blinder tilt must lie in (0, π/2]"));
            }
        }
        if !(self.psb_cycles > 0.0) {
            v.push("psb_cycles must be positive".into());
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlinderId {
    Outer,
    Middle,
    Inner,
}

impl BlinderId {
    pub fn as_str(self) -> &'static str {
        match self {
            BlinderId::Outer => "outer",
            BlinderId::Middle => "middle",
            BlinderId::Inner => "inner",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event")]
pub enum RelayEventKind {
    BlinderEntry { blinder: BlinderId },
    BlinderExit { blinder: BlinderId },
    /// Outer→middle transit faster than the PSB threshold.
    FaultDetected { transit: f64 },
    PsbAsserted { transit: f64 },
    PsbReset,
    OutOfStepTrip,
    ZonePickup { zone: usize },
    ZoneDropout { zone: usize },
    ZoneTrip { zone: usize },
}

impl RelayEventKind {
    pub fn name(&self) -> &'static str {
        match self {
            RelayEventKind::BlinderEntry { .. } => "blinder_entry",
            RelayEventKind::BlinderExit { .. } => "blinder_exit",
            RelayEventKind::FaultDetected { .. } => "fault_detected",
            RelayEventKind::PsbAsserted { .. } => "psb_asserted",
            RelayEventKind::PsbReset => "psb_reset",
            RelayEventKind::OutOfStepTrip => "ost_trip",
            RelayEventKind::ZonePickup { .. } => "zone_pickup",
            RelayEventKind::ZoneDropout { .. } => "zone_dropout",
            RelayEventKind::ZoneTrip { .. } => "zone_trip",
        }
    }

    /// Zone number (1-based) or blinder name the event refers to.
    pub fn target(&self) -> String {
        match self {
            RelayEventKind::BlinderEntry { blinder } | RelayEventKind::BlinderExit { blinder } => {
                blinder.as_str().to_string()
            }
            RelayEventKind::ZonePickup { zone }
            | RelayEventKind::ZoneDropout { zone }
            | RelayEventKind::ZoneTrip { zone } => format!("zone{zone}"),
            RelayEventKind::FaultDetected { .. } | RelayEventKind::PsbAsserted { .. } => "middle".into(),
            RelayEventKind::PsbReset => "outer".into(),
            RelayEventKind::OutOfStepTrip => "inner".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayEvent {
    pub t: f64,
    #[serde(flatten)]
    pub kind: RelayEventKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelayState {
    /// Time spent inside each zone while unblocked; `None` when outside.
    pub zone_timers: Vec<Option<f64>>,
    pub zone_tripped: Vec<bool>,
    pub outer_entry_time: Option<f64>,
    pub psb_asserted: bool,
    pub ost_tripped: bool,
    pub in_outer: bool,
    pub in_middle: bool,
    pub in_inner: bool,
    pub event_log: Vec<RelayEvent>,
}

impl RelayState {
    pub fn new(settings: &RelaySettings) -> Self {
        Self {
            zone_timers: vec![None; settings.zones.len()],
            zone_tripped: vec![false; settings.zones.len()],
            ..Default::default()
        }
    }

    pub fn any_zone_tripped(&self) -> bool {
        self.zone_tripped.iter().any(|&t| t)
    }

    fn log(&mut self, t: f64, kind: RelayEventKind) {
        self.event_log.push(RelayEvent { t, kind });
    }
}

/// Processes one apparent-impedance sample.
///
/// `z = None` (zero current, impedance at infinity) lies outside every
/// characteristic. `dt` is the time since the previous sample.
pub fn relay_step(state: &mut RelayState, z: Option<Phasor>, t: f64, dt: f64, settings: &RelaySettings, f_nominal: f64) {
    let inside = |b: &Blinder| z.is_some_and(|z| blinder_contains(z, b));
    let (in_outer, in_middle, in_inner) = (inside(&settings.outer), inside(&settings.middle), inside(&settings.inner));

    if in_outer && !state.in_outer {
        state.outer_entry_time = Some(t);
        state.log(t, RelayEventKind::BlinderEntry { blinder: BlinderId::Outer });
    }
    if in_middle && !state.in_middle {
        state.log(t, RelayEventKind::BlinderEntry { blinder: BlinderId::Middle });
        if let Some(entry) = state.outer_entry_time.take() {
            let transit = t - entry;
            if transit > settings.psb_delay(f_nominal) {
                if !state.psb_asserted {
                    state.psb_asserted = true;
                    state.log(t, RelayEventKind::PsbAsserted { transit });
                }
            } else {
                state.log(t, RelayEventKind::FaultDetected { transit });
            }
        }
    }
    if in_inner && !state.in_inner {
        state.log(t, RelayEventKind::BlinderEntry { blinder: BlinderId::Inner });
        if state.psb_asserted && !state.ost_tripped {
            state.ost_tripped = true;
            state.log(t, RelayEventKind::OutOfStepTrip);
        }
    }
    if !in_inner && state.in_inner {
        state.log(t, RelayEventKind::BlinderExit { blinder: BlinderId::Inner });
    }
    if !in_middle && state.in_middle {
        state.log(t, RelayEventKind::BlinderExit { blinder: BlinderId::Middle });
    }
    if !in_outer && state.in_outer {
        state.outer_entry_time = None;
        state.log(t, RelayEventKind::BlinderExit { blinder: BlinderId::Outer });
        if state.psb_asserted {
            state.psb_asserted = false;
            state.log(t, RelayEventKind::PsbReset);
        }
    }
    state.in_outer = in_outer;
    state.in_middle = in_middle;
    state.in_inner = in_inner;

    let blocked = state.psb_asserted;
    for (k, zone) in settings.zones.iter().enumerate() {
        let picked = !blocked && z.is_some_and(|z| mho_contains(z, zone));
        let id = k + 1;
        match (picked, state.zone_timers[k]) {
            (true, None) => {
                state.zone_timers[k] = Some(0.0);
                state.log(t, RelayEventKind::ZonePickup { zone: id });
            }
            (true, Some(elapsed)) => state.zone_timers[k] = Some(elapsed + dt),
            (false, Some(_)) => {
                state.zone_timers[k] = None;
                state.log(t, RelayEventKind::ZoneDropout { zone: id });
            }
            (false, None) => {}
        }
        if let Some(elapsed) = state.zone_timers[k] {
            if !state.zone_tripped[k] && elapsed >= zone.time_delay - 1e-12 {
                state.zone_tripped[k] = true;
                state.log(t, RelayEventKind::ZoneTrip { zone: id });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mho_geometry() {
        let zone = RelaySettings::default().zones[0];
        assert!(mho_contains(zone.reach * 0.5, &zone));
        assert!(mho_contains(Phasor::new(0.0, 0.0), &zone));
        assert!(mho_contains(zone.reach, &zone));
        assert!(!mho_contains(zone.reach * 1.1, &zone));
        assert!(!mho_contains(-zone.reach * 0.1, &zone));
    }

    #[test]
    fn blinder_geometry() {
        let s = RelaySettings::default();
        for b in [&s.outer, &s.middle, &s.inner] {
            assert!(blinder_contains(Phasor::new(0.0, 0.0), b));
        }
        // u = 0 − 0.5·cot(84.94°) ≈ −0.0443
        let z = Phasor::new(0.0, 0.5);
        let u = z.re - z.im / s.inner.tilt.tan();
        assert!((u + 0.0443).abs() < 1e-4);
        assert!(blinder_contains(z, &s.inner));
        assert!(!blinder_contains(Phasor::new(1.0, 0.0), &s.outer));
        assert!(!blinder_contains(Phasor::new(0.0, 1.9), &s.outer));
        assert!(!blinder_contains(Phasor::new(0.0, -0.6), &s.outer));
    }

    #[test]
    fn blinders_are_nested() {
        let s = RelaySettings::default();
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let z = Phasor::new(-1.2 + 2.4 * i as f64 / n as f64, -0.8 + 3.0 * j as f64 / n as f64);
                if blinder_contains(z, &s.inner) {
                    assert!(blinder_contains(z, &s.middle));
                }
                if blinder_contains(z, &s.middle) {
                    assert!(blinder_contains(z, &s.outer));
                }
            }
        }
    }

    fn run(stream: &[(f64, Phasor)], settings: &RelaySettings) -> RelayState {
        let mut st = RelayState::new(settings);
        let mut prev = stream[0].0;
        for &(t, z) in stream {
            relay_step(&mut st, Some(z), t, t - prev, settings, 60.0);
            prev = t;
        }
        st
    }

    #[test]
    fn fault_step_trips_zone_one() {
        let s = RelaySettings::default();
        let load = Phasor::new(1.5, 0.3);
        let fault = s.zones[0].reach * 0.5;
        let stream: Vec<_> = (0..100)
            .map(|k| {
                let t = k as f64 * 5e-4;
                (t, if t < 0.01 { load } else { fault })
            })
            .collect();
        let st = run(&stream, &s);
        assert!(st.zone_tripped[0]);
        assert!(!st.psb_asserted && !st.ost_tripped);
        let trip = st.event_log.iter().find(|e| e.kind == RelayEventKind::ZoneTrip { zone: 1 }).unwrap();
        assert!((trip.t - 0.01).abs() < 1e-9);
        assert!(st.event_log.iter().any(|e| matches!(e.kind, RelayEventKind::FaultDetected { .. })));
    }

    #[test]
    fn slow_swing_blocks_then_out_of_step() {
        let s = RelaySettings::default();
        // R sweeps from +1.0 to −1.0 at X = 0.3 in 2 s (outer→middle ≈ 0.23 s)
        let stream: Vec<_> = (0..=4000)
            .map(|k| {
                let t = k as f64 * 5e-4;
                (t, Phasor::new(1.0 - t, 0.3))
            })
            .collect();
        let st = run(&stream, &s);
        let names: Vec<_> = st.event_log.iter().map(|e| e.kind.name()).collect();
        let psb = names.iter().position(|&n| n == "psb_asserted").unwrap();
        let ost = names.iter().position(|&n| n == "ost_trip").unwrap();
        assert!(psb < ost);
        assert!(!st.any_zone_tripped());
        assert!(names.contains(&"psb_reset"));
    }

    #[test]
    fn no_out_of_step_without_block() {
        let s = RelaySettings::default();
        let stream: Vec<_> = (0..=400)
            .map(|k| {
                let t = k as f64 * 5e-4;
                (t, Phasor::new(1.0 - 10.0 * t, 0.3))
            })
            .collect();
        let st = run(&stream, &s);
        assert!(!st.ost_tripped && !st.psb_asserted);
    }

    #[test]
    fn deterministic_logs() {
        let s = RelaySettings::default();
        let stream: Vec<_> = (0..3000)
            .map(|k| {
                let t = k as f64 * 1e-3;
                (t, Phasor::from_polar(1.5 - 0.5 * (3.0 * t).sin(), 0.2 + t))
            })
            .collect();
        assert_eq!(run(&stream, &s).event_log, run(&stream, &s).event_log);
    }
}
