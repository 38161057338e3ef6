use swingvi_core::analysis::{classify_stability, phase_portrait, quasi_static_point, Classification};
use swingvi_core::dynamics::{run_scenario, Event, EventKind, Simulator};
use swingvi_core::limiter::Strategy;
use swingvi_core::network::Topology;
use swingvi_core::scenario::{builtin_case, Scenario};

#[test]
fn zero_event_scenario_is_flat() {
    for strategy in Strategy::ALL {
        let mut s = Scenario { horizon: 2.0, ..Scenario::default() };
        s.limiter.strategy = strategy;
        let rec = run_scenario(&s).unwrap();
        assert_eq!(rec.len(), 4001);
        let d0 = rec.delta[0];
        assert!(rec.delta.iter().all(|d| (d - d0).abs() < 1e-9));
        assert!(rec.omega_dev.iter().all(|w| w.abs() < 1e-10));
        assert!(rec.relay_events.is_empty());
        assert_eq!(phase_portrait(&rec).len(), 1, "{strategy}");
    }
}

#[test]
fn recorded_power_matches_quasi_static_curve() {
    for id in ["caseA1", "caseA2"] {
        let s = builtin_case(id).unwrap();
        let rec = run_scenario(&s).unwrap();
        for k in (0..rec.len()).step_by(97) {
            let (p, sol, _) = quasi_static_point(rec.delta[k], s.limiter.strategy, &s.system, &s.limiter).unwrap();
            assert!((p - rec.p_e[k]).abs() < 1e-9, "{id} t={}", rec.t[k]);
            assert!((sol.current_mag() - rec.i_mag[k]).abs() < 1e-9);
        }
    }
}

#[test]
fn fault_current_is_limited() {
    for id in ["caseB2", "caseB3"] {
        let s = builtin_case(id).unwrap();
        let rec = run_scenario(&s).unwrap();
        let faulted: Vec<f64> = (0..rec.len()).filter(|&k| rec.faulted[k]).map(|k| rec.i_mag[k]).collect();
        assert!(!faulted.is_empty());
        // the adaptive PI needs a few milliseconds to pull the current down
        let settled = if s.limiter.strategy == Strategy::AdaptiveVi { &faulted[40..] } else { &faulted[..] };
        let max = settled.iter().cloned().fold(0.0, f64::max);
        assert!(max <= s.system.i_max + 1e-3, "{id}: {max}");
    }
    let b1 = run_scenario(&builtin_case("caseB1").unwrap()).unwrap();
    assert!(b1.i_mag.iter().cloned().fold(0.0, f64::max) > 2.0);
}

#[test]
fn unlimited_fault_trips_zone_one_without_psb() {
    let rec = run_scenario(&builtin_case("caseB1").unwrap()).unwrap();
    use swingvi_core::relay::RelayEventKind as K;
    assert!(rec.relay_events.iter().any(|e| e.kind == K::ZoneTrip { zone: 1 } && (e.t - 4.0).abs() < 0.01));
    assert!(!rec.relay_events.iter().any(|e| matches!(e.kind, K::PsbAsserted { .. })));
}

#[test]
fn variable_vi_pole_slip_is_detected_as_out_of_step() {
    let s = builtin_case("caseB2").unwrap();
    let rec = run_scenario(&s).unwrap();
    assert_eq!(classify_stability(&rec).unwrap().classification, Classification::Unstable);
    assert!(rec.psb.iter().any(|&b| b));
    assert!(rec.ost.iter().any(|&b| b));
}

#[test]
fn phase_jump_cases_return_to_equilibrium() {
    for id in ["caseA1", "caseA2", "caseA3"] {
        let rec = run_scenario(&builtin_case(id).unwrap()).unwrap();
        let v = classify_stability(&rec).unwrap();
        assert_eq!(v.classification, Classification::Stable, "{id}");
        assert!((rec.delta.last().unwrap() - rec.delta[0]).abs() < 1e-3, "{id}");
    }
}

#[test]
fn event_order_is_respected() {
    let s = Scenario {
        horizon: 1.0,
        events: vec![
            Event { time: 0.2, kind: EventKind::FaultApply { fraction: 0.3 } },
            Event { time: 0.5, kind: EventKind::FaultClear },
        ],
        ..Scenario::default()
    };
    let sim = Simulator::from_scenario(&s);
    let mut st = sim.initial_state(None).unwrap();
    while st.t < 0.3 {
        sim.step(&mut st, s.dt).unwrap();
    }
    assert_eq!(st.topology, Topology::Faulted { fraction: 0.3 });
    while st.t < 0.6 {
        sim.step(&mut st, s.dt).unwrap();
    }
    assert_eq!(st.topology, Topology::Intact);
}
