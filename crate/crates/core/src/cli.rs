//! Command implementations behind the `swingvi` binary.
//!
//! Every command writes its CSV files plus `summary.json` into one output
//! directory. Floats use Rust's shortest round-trip formatting, so identical
//! inputs give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{classify_stability, first_swing_period, p_delta_curve, StabilityVerdict};
use crate::dynamics::{run_scenario, EventKind, SimulationRecord};
use crate::error::{Error, Result};
use crate::limiter::{critical_angle, Strategy};
use crate::relay::RelayEvent;
use crate::scenario::{builtin_case, load_scenario, Scenario};
use crate::trajectory::full_cycle;

pub const SUMMARY_SCHEMA: &str = "swingvi.summary/1";

/// Where a scenario comes from plus command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct ScenarioSource {
    pub scenario: Option<PathBuf>,
    pub case: Option<String>,
    pub strategy: Option<Strategy>,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ScenarioSource {
    /// Loads the file or built-in case (Table I defaults when neither is given)
    /// and applies the overrides.
    pub fn resolve(&self) -> Result<Scenario> {
        let mut s = match (&self.scenario, &self.case) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParams("give either --scenario or --case, not both".into()))
            }
            (Some(path), None) => load_scenario(path)?,
            (None, Some(id)) => builtin_case(id)?,
            (None, None) => Scenario::default(),
        };
        if let Some(strategy) = self.strategy {
            s.limiter.strategy = strategy;
            s.name = format!("{}-{}", s.name, strategy);
        }
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        if let Some(out) = &self.out {
            s.outputs = out.clone();
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryAngles {
    pub delta_th: Option<f64>,
    pub delta_lim: Option<f64>,
    pub delta_th_deg: Option<f64>,
    pub delta_lim_deg: Option<f64>,
}

impl BoundaryAngles {
    pub fn of(scenario: &Scenario) -> Self {
        let p = &scenario.system;
        let th = critical_angle(p, p.i_th).ok();
        let lim = critical_angle(p, p.i_max).ok();
        Self {
            delta_th: th,
            delta_lim: lim,
            delta_th_deg: th.map(f64::to_degrees),
            delta_lim_deg: lim.map(f64::to_degrees),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelaySummary {
    pub psb_assertions: usize,
    pub ost_trips: usize,
    pub zone_trips: Vec<usize>,
    pub events: Vec<RelayEvent>,
}

impl RelaySummary {
    pub fn of(events: &[RelayEvent]) -> Self {
        use crate::relay::RelayEventKind as K;
        Self {
            psb_assertions: events.iter().filter(|e| matches!(e.kind, K::PsbAsserted { .. })).count(),
            ost_trips: events.iter().filter(|e| matches!(e.kind, K::OutOfStepTrip)).count(),
            zone_trips: events
                .iter()
                .filter_map(|e| match e.kind {
                    K::ZoneTrip { zone } => Some(zone),
                    _ => None,
                })
                .collect(),
            events: events.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub command: &'static str,
    pub scenario: String,
    pub strategy: Strategy,
    pub boundary_angles: BoundaryAngles,
    pub verdict: Option<StabilityVerdict>,
    pub relay: Option<RelaySummary>,
    pub files: Vec<String>,
}

impl Summary {
    fn new(command: &'static str, scenario: &Scenario) -> Self {
        Self {
            schema: SUMMARY_SCHEMA,
            command,
            scenario: scenario.name.clone(),
            strategy: scenario.limiter.strategy,
            boundary_angles: BoundaryAngles::of(scenario),
            verdict: None,
            relay: None,
            files: Vec::new(),
        }
    }

    fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

pub fn write_record_csv(record: &SimulationRecord, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "delta", "omega_dev", "i_mag", "zapp_re", "zapp_im", "p_e", "vi_r", "vi_x", "psb", "ost"])?;
    for k in 0..record.len() {
        let (zr, zi) = match record.z_app[k] {
            Some(z) => (z.re.to_string(), z.im.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            record.t[k].to_string(),
            record.delta[k].to_string(),
            record.omega_dev[k].to_string(),
            record.i_mag[k].to_string(),
            zr,
            zi,
            record.p_e[k].to_string(),
            record.vi[k].r_vi.to_string(),
            record.vi[k].x_vi.to_string(),
            u8::from(record.psb[k]).to_string(),
            u8::from(record.ost[k]).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_relay_events_csv(events: &[RelayEvent], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "event", "target"])?;
    for e in events {
        w.write_record([e.t.to_string(), e.kind.name().to_string(), e.kind.target()])?;
    }
    w.flush()?;
    Ok(())
}

/// Time-domain simulation: `record.csv`, `relay_events.csv`, `summary.json`.
pub fn simulate(scenario: &Scenario, dir: &Path) -> Result<Summary> {
    fs::create_dir_all(dir)?;
    let record = run_scenario(scenario)?;
    write_record_csv(&record, &dir.join("record.csv"))?;
    write_relay_events_csv(&record.relay_events, &dir.join("relay_events.csv"))?;
    let mut summary = Summary::new("simulate", scenario);
    summary.verdict = classify_stability(&record).ok();
    summary.relay = Some(RelaySummary::of(&record.relay_events));
    summary.files = vec!["record.csv".into(), "relay_events.csv".into()];
    summary.write(dir)?;
    Ok(summary)
}

/// Closed-form full-cycle trajectory: `trajectory.csv`.
pub fn trajectory(scenario: &Scenario, samples: usize, dir: &Path) -> Result<Summary> {
    fs::create_dir_all(dir)?;
    let traj = full_cycle(scenario.limiter.strategy, &scenario.system, samples)?;
    let mut w = csv::Writer::from_path(dir.join("trajectory.csv"))?;
    w.write_record(["delta", "re", "im", "segment"])?;
    for s in &traj {
        w.write_record([
            s.delta.to_string(),
            s.z_app.re.to_string(),
            s.z_app.im.to_string(),
            s.segment.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    let mut summary = Summary::new("trajectory", scenario);
    summary.files = vec!["trajectory.csv".into()];
    summary.write(dir)?;
    Ok(summary)
}

/// Quasi-static P–δ curves of all three strategies: `pdelta.csv`.
pub fn pdelta(scenario: &Scenario, samples: usize, dir: &Path) -> Result<Summary> {
    fs::create_dir_all(dir)?;
    let curves = Strategy::ALL
        .iter()
        .map(|&s| p_delta_curve(s, &scenario.system, &scenario.limiter, samples))
        .collect::<Result<Vec<_>>>()?;
    let mut w = csv::Writer::from_path(dir.join("pdelta.csv"))?;
    w.write_record(["delta", "p_none", "p_variable", "vi_active_variable", "p_adaptive", "vi_active_adaptive"])?;
    for k in 0..samples {
        let (a, b, c) = (&curves[0].samples[k], &curves[1].samples[k], &curves[2].samples[k]);
        w.write_record([
            a.delta.to_string(),
            a.p.to_string(),
            b.p.to_string(),
            u8::from(b.vi_active).to_string(),
            c.p.to_string(),
            u8::from(c.vi_active).to_string(),
        ])?;
    }
    w.flush()?;
    let mut summary = Summary::new("pdelta", scenario);
    summary.files = vec!["pdelta.csv".into()];
    summary.write(dir)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub h: f64,
    pub d_p: f64,
    pub delta_p0: f64,
    pub verdict: Option<StabilityVerdict>,
    pub first_swing_period: Option<f64>,
    pub error: Option<String>,
}

/// Grid for [`sweep`]; empty lists keep the scenario values.
#[derive(Debug, Clone, Default)]
pub struct SweepGrid {
    pub h: Vec<f64>,
    pub d_p: Vec<f64>,
    pub delta_p0: Vec<f64>,
}

/// Runs the scenario over the H × D_p × ΔP0 grid in parallel.
///
/// ΔP0 replaces the size of the scenario's power-step events; without such
/// events it is added to the initial setpoint instead.
pub fn sweep_rows(base: &Scenario, grid: &SweepGrid) -> Vec<SweepRow> {
    let or = |v: &[f64], d: f64| if v.is_empty() { vec![d] } else { v.to_vec() };
    let hs = or(&grid.h, base.apcl.h);
    let dps = or(&grid.d_p, base.apcl.d_p);
    let base_step = base.events.iter().find_map(|e| match e.kind {
        EventKind::PowerStep { delta_p } => Some(delta_p),
        _ => None,
    });
    let dp0s = or(&grid.delta_p0, base_step.unwrap_or(0.0));
    let mut points = Vec::with_capacity(hs.len() * dps.len() * dp0s.len());
    for &h in &hs {
        for &d in &dps {
            points.extend(dp0s.iter().map(|&p| (h, d, p)));
        }
    }
    let after = base.events.first().map_or(0.0, |e| e.time);
    points
        .into_par_iter()
        .map(|(h, d_p, delta_p0)| {
            let mut s = base.clone();
            s.apcl.h = h;
            s.apcl.d_p = d_p;
            let mut stepped = false;
            for e in &mut s.events {
                if let EventKind::PowerStep { delta_p } = &mut e.kind {
                    *delta_p = delta_p0;
                    stepped = true;
                }
            }
            if !stepped {
                s.apcl.p0 += delta_p0;
            }
            let mut row = SweepRow { h, d_p, delta_p0, verdict: None, first_swing_period: None, error: None };
            match run_scenario(&s) {
                Ok(rec) => {
                    row.verdict = classify_stability(&rec).ok();
                    row.first_swing_period = first_swing_period(&rec, after);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}

/// Parameter sweep: `sweep.csv` with one verdict row per grid point.
pub fn sweep(scenario: &Scenario, grid: &SweepGrid, dir: &Path) -> Result<(Summary, Vec<SweepRow>)> {
    fs::create_dir_all(dir)?;
    let rows = sweep_rows(scenario, grid);
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    w.write_record(["h", "d_p", "delta_p0", "verdict", "max_delta_excursion", "pole_slips", "first_swing_period", "error"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &rows {
        w.write_record([
            r.h.to_string(),
            r.d_p.to_string(),
            r.delta_p0.to_string(),
            r.verdict.map(|v| v.classification.as_str().to_string()).unwrap_or_default(),
            opt(r.verdict.map(|v| v.max_delta_excursion)),
            r.verdict.map(|v| v.pole_slips.to_string()).unwrap_or_default(),
            opt(r.first_swing_period),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let mut summary = Summary::new("sweep", scenario);
    summary.files = vec!["sweep.csv".into()];
    summary.write(dir)?;
    Ok((summary, rows))
}
